#pragma once

#include <cstddef>
#include <random>

#include "crpower/kkt_solver.hpp"

namespace crpower {

/// Random small instance for solver/oracle comparisons.
///
/// gamma log-uniform in [0.1, 100] 1/W, leakage log-uniform in [1e-3, 0.5],
/// CCI budget N * U with U log-uniform in [0.05, 5], ACI budget of PU l the
/// column sum of leakage times an independent U. For OP2 the weights are a
/// random split of `alpha` across the PUs.
ProblemInstance random_instance(std::mt19937_64& rng, std::size_t subcarriers, std::size_t pus, double alpha,
                                Problem problem);

}  // namespace crpower
