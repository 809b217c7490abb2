#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crpower/kkt_solver.hpp"

namespace crpower {

/// Step metric of the projected-gradient oracle.
///   Spectral  : Barzilai-Borwein step, non-monotone Armijo backtracking.
///   Lipschitz : fixed step step_size / L with L = (1 - a) max gamma^2 / ln 2,
///               halved whenever the objective goes up.
enum class OracleMetric { Spectral, Lipschitz };

struct OracleSettings {
    double step_size = 1.0;              ///< scale on the base step
    std::size_t max_iters = 20000;
    double feas_tol = 1e-9;              ///< relative, per constraint
    double obj_tol = 1e-13;              ///< relative objective change / decrement
    OracleMetric metric = OracleMetric::Spectral;
    std::size_t projection_iters = 20000;  ///< Dykstra cycles per projection
};

struct OracleResult {
    std::vector<double> powers;
    double objective = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    double max_violation = 0.0;  ///< relative, 0 when feasible
};

/// Minimizes the OP1/OP2 objective over {p >= 0, sum p <= B_c,
/// sum_i leak_il p_i <= B_l} by projected gradient with Dykstra projections.
/// Stops when the projected decrement or the objective change falls under
/// obj_tol (relative to max(1, |f|)). On max_iters the best feasible iterate
/// comes back with `converged = false`.
OracleResult oracle_solve(const ProblemInstance& instance, Problem problem, const OracleSettings& settings = {});

/// Analytic gradient of the objective at `point`.
std::vector<double> objective_gradient(const ProblemInstance& instance, Problem problem,
                                       std::span<const double> point);

/// Max |analytic - central difference| over coordinates, step 1e-6 (1 + |p_i|).
double gradient_check(const ProblemInstance& instance, Problem problem, std::span<const double> point);

/// |f_closed - f_oracle| / max(1, |f_closed|).
double relative_gap(double closed_form, double oracle);

}  // namespace crpower
