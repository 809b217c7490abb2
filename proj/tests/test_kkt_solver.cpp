#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "crpower/instance_generator.hpp"
#include "crpower/kkt_solver.hpp"
#include "crpower/oracle.hpp"

using namespace crpower;

namespace {

ProblemInstance make(std::vector<double> gamma, double alpha, double cci, std::vector<double> aci = {},
                     std::vector<double> leak = {}) {
    ProblemInstance inst;
    const std::size_t n = gamma.size(), l = aci.size();
    inst.gamma = std::move(gamma);
    inst.alpha = alpha;
    inst.cci_budget = cci;
    inst.aci_budgets = std::move(aci);
    inst.aci_weights.assign(l, 0.0);
    if (leak.empty()) leak.assign(n * l, 0.0);
    inst.leakage = LeakageMatrix(n, l, std::move(leak));
    return inst;
}

bool any_positive(const std::vector<double>& xs) {
    for (double x : xs) {
        if (x > 0.0) return true;
    }
    return false;
}

CaseLabel expected_label(const SolverOutcome& o) {
    const bool c = o.lambda_cci > 0.0, a = any_positive(o.lambda_aci);
    if (c && a) return CaseLabel::BothActive;
    if (c) return CaseLabel::CciActive;
    if (a) return CaseLabel::AciActive;
    return CaseLabel::Unconstrained;
}

}  // namespace

TEST_CASE("unconstrained OP1 examples") {
    const auto p = unconstrained_op1(make({1.0, 1.0}, 0.5, 100.0));
    CHECK(p[0] == doctest::Approx(0.442695040888963).epsilon(1e-14));
    CHECK(p[1] == p[0]);
    CHECK(unconstrained_op1(make({0.1}, 0.5, 100.0))[0] == 0.0);
    CHECK(unconstrained_op1(make({10.0}, 0.9, 100.0))[0] == doctest::Approx(0.0602994489876626).epsilon(1e-13));
    CHECK(unconstrained_op1(make({0.0, 3.0}, 0.5, 100.0))[0] == 0.0);
    CHECK_THROWS_AS(unconstrained_op1(make({1.0}, 0.0, 1.0)), std::domain_error);
}

TEST_CASE("CCI-active OP1 example") {
    const MultiplierSolution s = cci_active_op1(make({2.0, 2.0}, 0.1, 1.0));
    CHECK(s.lambda_cci == doctest::Approx(1.19842553680007).epsilon(1e-12));
    CHECK(s.powers[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.powers[1] == s.powers[0]);

    const ProblemInstance loose = make({2.0, 5.0}, 0.5, 1e3);
    const MultiplierSolution free = cci_active_op1(loose);
    CHECK(free.lambda_cci == 0.0);
    CHECK(free.powers == unconstrained_op1(loose));
}

TEST_CASE("ACI-active OP1 example and its CCI equivalent") {
    const MultiplierSolution s = aci_active_op1(make({2.0, 2.0}, 0.1, 100.0, {0.5}, {0.5, 0.5}));
    REQUIRE(s.lambda_aci.size() == 1);
    CHECK(s.lambda_aci[0] == doctest::Approx(2.39685107360013).epsilon(1e-12));
    CHECK(s.powers[0] == doctest::Approx(0.5).epsilon(1e-12));

    // constant leakage w turns the ACI constraint into a CCI budget of B / w
    const ProblemInstance aci = make({0.5, 3.0, 9.0}, 0.3, 100.0, {0.2}, {0.25, 0.25, 0.25});
    const ProblemInstance cci = make({0.5, 3.0, 9.0}, 0.3, 0.8);
    const auto a = aci_active_op1(aci).powers, c = cci_active_op1(cci).powers;
    for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(c[i]).epsilon(1e-10));

    const MultiplierSolution loose = aci_active_op1(make({2.0, 2.0}, 0.1, 100.0, {1e6, 1e6}, {0.5, 0.1, 0.5, 0.1}));
    CHECK(loose.lambda_aci == std::vector<double>{0.0, 0.0});
}

TEST_CASE("both-active OP1 reductions") {
    const ProblemInstance inst = make({0.7, 2.0, 6.0}, 0.2, 1.5, {1e9}, {0.3, 0.1, 0.05});
    const MultiplierSolution both = both_active_op1(inst);
    const MultiplierSolution cci = cci_active_op1(inst);
    CHECK(both.lambda_aci[0] == 0.0);
    CHECK(both.lambda_cci == doctest::Approx(cci.lambda_cci).epsilon(1e-12));
    for (std::size_t i = 0; i < 3; ++i) CHECK(both.powers[i] == doctest::Approx(cci.powers[i]).epsilon(1e-12));

    const ProblemInstance sym = make({4.0, 4.0, 4.0}, 0.1, 1.0, {0.05, 0.02}, {0.1, 0.03, 0.1, 0.03, 0.1, 0.03});
    const MultiplierSolution s = both_active_op1(sym);
    CHECK(s.powers[0] == doctest::Approx(s.powers[1]).epsilon(1e-13));
    CHECK(s.powers[1] == doctest::Approx(s.powers[2]).epsilon(1e-13));
}

TEST_CASE("alpha = 1 gives zero power") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        const ProblemInstance inst = random_instance(rng, 6, 2, 1.0, Problem::Op1);
        const SolverOutcome o = solve_op1(inst);
        CHECK(o.case_label == CaseLabel::Unconstrained);
        for (double p : o.powers) CHECK(p == 0.0);
    }
}

TEST_CASE("unconstrained OP2 examples") {
    ProblemInstance inst = make({1.0}, 0.0, 100.0, {10.0, 10.0}, {0.8, 0.2});
    inst.aci_weights = {0.25, 0.25};
    CHECK(unconstrained_op2(inst)[0] == doctest::Approx(1.88539008177793).epsilon(1e-13));

    ProblemInstance one = make({1.0, 3.0}, 0.0, 100.0, {10.0}, {1.0, 1.0});
    one.aci_weights = {0.5};
    const auto p2 = unconstrained_op2(one);
    const auto p1 = unconstrained_op1(make({1.0, 3.0}, 0.5, 100.0));
    CHECK(p2[0] == doctest::Approx(p1[0]).epsilon(1e-14));
    CHECK(p2[1] == doctest::Approx(p1[1]).epsilon(1e-14));

    ProblemInstance heavier = make({1.0, 1.0}, 0.0, 100.0, {10.0}, {0.2, 0.4});
    heavier.aci_weights = {0.3};
    const auto ph = unconstrained_op2(heavier);
    CHECK(ph[1] < ph[0]);

    ProblemInstance unbounded = make({1.0, 1.0}, 0.0, 100.0, {10.0}, {0.2, 0.0});
    unbounded.aci_weights = {0.3};
    CHECK_THROWS_WITH_AS(unconstrained_op2(unbounded), doctest::Contains("subcarrier 1"), std::domain_error);
}

TEST_CASE("OP2 degenerate weights") {
    ProblemInstance all = make({1.0, 5.0}, 0.0, 3.0, {1.0, 1.0}, {0.1, 0.2, 0.3, 0.4});
    all.aci_weights = {0.6, 0.4};
    for (double p : solve_op2(all).powers) CHECK(p == 0.0);

    ProblemInstance op2 = make({0.4, 2.0, 7.0}, 0.0, 1.0, {5.0}, {1.0, 1.0, 1.0});
    op2.aci_weights = {0.3};
    const SolverOutcome a = solve_op2(op2);
    const SolverOutcome b = solve_op1(make({0.4, 2.0, 7.0}, 0.3, 1.0, {5.0}, {1.0, 1.0, 1.0}));
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.powers[i] == doctest::Approx(b.powers[i]).epsilon(1e-10));
}

TEST_CASE("alpha = 0 routes to the budget-limited cases") {
    const SolverOutcome o = solve_op1(make({1.0, 4.0}, 0.0, 2.0, {0.5}, {0.1, 0.3}));
    CHECK(o.lambda_cci + o.lambda_aci[0] > 0.0);
    CHECK(o.case_label != CaseLabel::Unconstrained);
}

TEST_CASE("random instances: label, residuals and feasibility") {
    std::mt19937_64 rng(2024);
    const double alphas[] = {0.0, 0.1, 0.5, 0.9};
    for (int k = 0; k < 400; ++k) {
        const Problem problem = k % 2 ? Problem::Op2 : Problem::Op1;
        const ProblemInstance inst = random_instance(rng, 1 + k % 12, k % 4, alphas[(k / 2) % 4], problem);
        CAPTURE(k);
        const SolverOutcome o = solve(inst, problem);
        CHECK(o.case_label == expected_label(o));
        CHECK_FALSE(o.redispatched);
        CHECK(o.residuals.stationarity <= 1e-8);
        CHECK(o.residuals.min_implied_multiplier >= -1e-8);
        CHECK(o.residuals.complementarity <= 1e-8);
        CHECK(o.residuals.max_violation <= 1e-8);
        CHECK(o.residuals.negative_power == 0.0);
        if (o.case_label == CaseLabel::CciActive) {
            CHECK(total_power(o.powers) == doctest::Approx(inst.cci_budget).epsilon(1e-8));
        }
    }
}

TEST_CASE("total power is non-increasing in alpha") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 30; ++k) {
        ProblemInstance inst = random_instance(rng, 8, 2, 0.1, Problem::Op1);
        double prev = INFINITY;
        for (int a = 1; a <= 9; ++a) {
            inst.alpha = 0.1 * a;
            const double p = total_power(solve_op1(inst).powers);
            CHECK(p <= prev * (1.0 + 1e-10));
            prev = p;
        }
    }
}

TEST_CASE("better channels never lower the rate term") {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 30; ++k) {
        ProblemInstance inst = random_instance(rng, 6, 2, 0.5, Problem::Op1);
        const double base = sum_rate_bits(inst.gamma, solve_op1(inst).powers);
        const double oracle_base = sum_rate_bits(inst.gamma, oracle_solve(inst, Problem::Op1).powers);
        for (double& g : inst.gamma) g *= 3.0;
        const double better = sum_rate_bits(inst.gamma, solve_op1(inst).powers);
        CHECK(better >= base - 1e-9);
        CHECK(oracle_base == doctest::Approx(base).epsilon(1e-5));
    }
}

TEST_CASE("instance validation") {
    CHECK_THROWS_WITH_AS(validate_instance(make({1.0}, 0.5, 0.0), Problem::Op1),
                         doctest::Contains("budget must be positive"), std::invalid_argument);
    CHECK_THROWS_AS(validate_instance(make({1.0}, 0.5, 1.0, {0.0}, {0.5}), Problem::Op1), std::invalid_argument);
    CHECK_THROWS_AS(validate_instance(make({1.0}, 1.5, 1.0), Problem::Op1), std::invalid_argument);
    CHECK_THROWS_AS(validate_instance(make({-1.0}, 0.5, 1.0), Problem::Op1), std::invalid_argument);
    CHECK_THROWS_AS(validate_instance(make({}, 0.5, 1.0), Problem::Op1), std::invalid_argument);
    ProblemInstance heavy = make({1.0}, 0.0, 1.0, {1.0, 1.0}, {0.5, 0.5});
    heavy.aci_weights = {0.7, 0.6};
    CHECK_THROWS_AS(validate_instance(heavy, Problem::Op2), std::invalid_argument);
    ProblemInstance wrong = make({1.0, 2.0}, 0.5, 1.0, {1.0}, {0.5, 0.5});
    wrong.leakage = LeakageMatrix(1, 1, 0.5);
    CHECK_THROWS_AS(validate_instance(wrong, Problem::Op1), std::invalid_argument);
}

TEST_CASE("KKT residuals flag a wrong multiplier") {
    const ProblemInstance inst = make({2.0, 2.0}, 0.1, 1.0);
    const MultiplierSolution s = cci_active_op1(inst);
    const KktResiduals good = kkt_residuals(inst, Problem::Op1, s.powers, s.lambda_cci, {});
    CHECK(good.stationarity < 1e-12);
    const KktResiduals bad = kkt_residuals(inst, Problem::Op1, s.powers, 2.0 * s.lambda_cci, {});
    CHECK(bad.stationarity > 1.0);
    const std::vector<double> over{0.6, 0.6};
    CHECK(kkt_residuals(inst, Problem::Op1, over, s.lambda_cci, {}).max_violation == doctest::Approx(0.2));
}

TEST_CASE("solver error carries residuals") {
    const SolverError e("stuck", 0.25, 1e-3);
    CHECK(std::string(e.what()) == "stuck");
    CHECK(e.max_violation() == 0.25);
    CHECK(e.complementarity() == 1e-3);
}

TEST_CASE("objective helpers") {
    const ProblemInstance inst = make({1.0, 3.0}, 0.25, 10.0, {1.0}, {0.5, 0.1});
    const std::vector<double> p{1.0, 2.0};
    CHECK(total_power(p) == 3.0);
    CHECK(aci_leakage(inst, p, 0) == doctest::Approx(0.7));
    CHECK(sum_rate_bits(inst.gamma, p) == doctest::Approx(1.0 + std::log2(7.0)));
    CHECK(objective_value(inst, Problem::Op1, p) == doctest::Approx(0.75 - 0.75 * (1.0 + std::log2(7.0))));
    ProblemInstance op2 = inst;
    op2.aci_weights = {0.4};
    CHECK(objective_value(op2, Problem::Op2, p) == doctest::Approx(0.28 - 0.6 * (1.0 + std::log2(7.0))));
}

TEST_CASE("outcome CSV record") {
    const ProblemInstance inst = make({2.0, 2.0}, 0.1, 1.0, {10.0}, {0.1, 0.2});
    const SolverOutcome o = solve_op1(inst);
    std::ostringstream out;
    write_outcome_csv(out, inst, Problem::Op1, o);
    const std::string s = out.str();
    CHECK(s.rfind("field,index,value\nproblem,,op1\ncase,,cci_active\nredispatched,,0\n", 0) == 0);
    CHECK(s.find("lambda_aci,1,0\n") != std::string::npos);
    CHECK(s.find("power_w,2,0.5") != std::string::npos);
}

TEST_CASE("one subcarrier under many constraints") {
    // the tightest budget ratio decides, all other multipliers vanish
    std::mt19937_64 rng(31);
    for (int k = 0; k < 300; ++k) {
        const ProblemInstance inst = random_instance(rng, 1, 1 + k % 6, k % 2 ? 0.1 : 0.05, Problem::Op1);
        double expected = unconstrained_op1(inst)[0];
        expected = std::min(expected, inst.cci_budget);
        for (std::size_t l = 0; l < inst.pus(); ++l) expected = std::min(expected, inst.aci_budgets[l] / inst.leakage(0, l));
        const SolverOutcome o = solve_op1(inst);
        CAPTURE(k);
        CHECK(o.powers[0] == doctest::Approx(expected).epsilon(1e-8));
        int positive = o.lambda_cci > 0.0;
        for (double v : o.lambda_aci) positive += v > 0.0;
        CHECK(positive <= 1);
    }
}

TEST_CASE("rate-only OP2 with several binding leakage budgets") {
    ProblemInstance inst = make({5.0039209167599985, 0.21049859271619795, 0.1262412164600914, 50.814736680634788}, 0.0,
                                0.49086489585149756, {0.054249723351900994, 0.010704631742107725, 0.11944827121260719},
                                {0.0014731781984247492, 0.044330207973937698, 0.20580813103815199, 0.36982425721729428,
                                 0.0020058155889086664, 0.025663539757576372, 0.024121196352082999,
                                 0.017818524083369223, 0.1488517552028765, 0.28841857863544651, 0.14783531852480755,
                                 0.035834917107542184});
    const SolverOutcome o = solve_op2(inst);
    const OracleResult r = oracle_solve(inst, Problem::Op2);
    CHECK(relative_gap(objective_value(inst, Problem::Op2, o.powers), r.objective) <= 1e-9);
    CHECK(o.residuals.complementarity <= 1e-8);
}
