#include "crpower/instance_generator.hpp"

#include <cmath>

namespace crpower {

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

}  // namespace

ProblemInstance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t l, double alpha, Problem problem) {
    ProblemInstance inst;
    inst.gamma.resize(n);
    for (double& g : inst.gamma) g = log_uniform(rng, 0.1, 100.0);

    inst.leakage = LeakageMatrix(n, l);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < l; ++k) inst.leakage(i, k) = log_uniform(rng, 1e-3, 0.5);
    }

    inst.cci_budget = static_cast<double>(n) * log_uniform(rng, 0.05, 5.0);
    inst.aci_budgets.resize(l);
    for (std::size_t k = 0; k < l; ++k) {
        double column = 0.0;
        for (std::size_t i = 0; i < n; ++i) column += inst.leakage(i, k);
        inst.aci_budgets[k] = column * log_uniform(rng, 0.05, 5.0);
    }

    if (problem == Problem::Op1) {
        inst.alpha = alpha;
        inst.aci_weights.assign(l, 0.0);
    } else {
        inst.alpha = 0.0;
        std::uniform_real_distribution<double> u(0.05, 1.0);
        std::vector<double> share(l);
        double total = 0.0;
        for (double& s : share) total += (s = u(rng));
        inst.aci_weights.resize(l);
        for (std::size_t k = 0; k < l; ++k) inst.aci_weights[k] = alpha * share[k] / total;
    }
    return inst;
}

}  // namespace crpower
