#include <doctest.h>

#include <cmath>
#include <random>

#include "crpower/instance_generator.hpp"
#include "crpower/kkt_solver.hpp"
#include "crpower/oracle.hpp"

using namespace crpower;

namespace {

ProblemInstance simple(std::vector<double> gamma, double alpha, double cci) {
    ProblemInstance inst;
    inst.gamma = std::move(gamma);
    inst.alpha = alpha;
    inst.cci_budget = cci;
    inst.leakage = LeakageMatrix(inst.gamma.size(), 0, 0.0);
    return inst;
}

}  // namespace

TEST_CASE("oracle returns zero when only power matters") {
    const OracleResult r = oracle_solve(simple({1.0, 5.0, 20.0}, 1.0, 10.0), Problem::Op1);
    CHECK(r.converged);
    for (double p : r.powers) CHECK(p == 0.0);
}

TEST_CASE("oracle finds the unconstrained water level") {
    const OracleResult r = oracle_solve(simple({1.0, 1.0}, 0.5, 100.0), Problem::Op1);
    CHECK(r.converged);
    CHECK(r.powers[0] == doctest::Approx(0.442695040888963).epsilon(1e-6));
    CHECK(r.max_violation == 0.0);
}

TEST_CASE("oracle respects a tight CCI budget") {
    const OracleResult r = oracle_solve(simple({2.0, 2.0}, 0.1, 1.0), Problem::Op1);
    CHECK(r.converged);
    CHECK(r.powers[0] + r.powers[1] <= 1.0 * (1.0 + 1e-9));
    CHECK(r.powers[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("oracle never does worse than zero power and never beats the closed form") {
    std::mt19937_64 rng(77);
    for (int k = 0; k < 60; ++k) {
        const Problem problem = k % 2 ? Problem::Op2 : Problem::Op1;
        const ProblemInstance inst = random_instance(rng, 2 + k % 7, k % 3, k % 3 == 0 ? 0.0 : 0.3, problem);
        const OracleResult r = oracle_solve(inst, problem);
        const SolverOutcome o = solve(inst, problem);
        const double f_cf = objective_value(inst, problem, o.powers);
        CAPTURE(k);
        CHECK(r.converged);
        CHECK(r.max_violation <= 1e-9);
        CHECK(r.objective <= 1e-15);
        CHECK(r.objective >= f_cf - 1e-9 * std::max(1.0, std::fabs(f_cf)));
        CHECK(relative_gap(f_cf, r.objective) <= 1e-7);
    }
}

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int k = 0; k < 40; ++k) {
        const Problem problem = k % 2 ? Problem::Op2 : Problem::Op1;
        const ProblemInstance inst = random_instance(rng, 5, 2, 0.4, problem);
        std::vector<double> point(5);
        for (double& p : point) p = u(rng);
        CHECK(gradient_check(inst, problem, point) <= 1e-5);
    }
    const ProblemInstance inst = simple({3.0}, 0.25, 1.0);
    const std::vector<double> zero{0.0};
    const double expected = 0.25 - 0.75 * 3.0 / std::log(2.0);
    CHECK(objective_gradient(inst, Problem::Op1, zero)[0] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("fixed-step mode agrees on small instances") {
    std::mt19937_64 rng(19);
    OracleSettings s;
    s.metric = OracleMetric::Lipschitz;
    s.max_iters = 200000;
    for (int k = 0; k < 10; ++k) {
        const ProblemInstance inst = random_instance(rng, 3, 1, 0.5, Problem::Op1);
        const OracleResult r = oracle_solve(inst, Problem::Op1, s);
        const double f_cf = objective_value(inst, Problem::Op1, solve_op1(inst).powers);
        CHECK(r.max_violation <= 1e-9);
        CHECK(relative_gap(f_cf, r.objective) <= 1e-5);
    }
}

TEST_CASE("iteration cap returns a feasible point") {
    std::mt19937_64 rng(4);
    OracleSettings s;
    s.max_iters = 1;
    const ProblemInstance inst = random_instance(rng, 8, 2, 0.1, Problem::Op1);
    const OracleResult r = oracle_solve(inst, Problem::Op1, s);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.max_violation <= 1e-9);
}

TEST_CASE("relative gap") {
    CHECK(relative_gap(-10.0, -9.0) == doctest::Approx(0.1));
    CHECK(relative_gap(0.1, 0.2) == doctest::Approx(0.1));
    CHECK(relative_gap(2.0, 2.0) == 0.0);
}
