#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crpower/scenario.hpp"
#include "crpower/spectral_leakage.hpp"

namespace crpower {

/// One power-allocation problem for a fixed channel realization.
///
/// OP1 minimizes   alpha * sum p - (1 - alpha) * sum log2(1 + gamma p)
/// OP2 minimizes   sum_l w_l sum_i p_i leak_il - (1 - sum_l w_l) * sum log2(1 + gamma p)
/// subject to      sum p <= cci_budget,  sum_i p_i leak_il <= aci_budgets[l],  p >= 0.
struct ProblemInstance {
    std::vector<double> gamma;         ///< 1/W, per subcarrier
    double alpha = 0.5;                ///< OP1 weight in [0, 1]
    std::vector<double> aci_weights;   ///< OP2 weights, one per PU, sum <= 1
    double cci_budget = 1.0;           ///< W
    std::vector<double> aci_budgets;   ///< W, one per PU
    LeakageMatrix leakage;             ///< N x L

    std::size_t subcarriers() const noexcept { return gamma.size(); }
    std::size_t pus() const noexcept { return aci_budgets.size(); }
};

/// Throws std::invalid_argument describing the first broken invariant.
void validate_instance(const ProblemInstance& instance, Problem problem);

enum class CaseLabel { Unconstrained, CciActive, AciActive, BothActive };
std::string_view to_string(CaseLabel label);

struct KktResiduals {
    /// max |dL/dp_i| over subcarriers with p_i > 0
    double stationarity = 0.0;
    /// min implied multiplier of p_i >= 0 over subcarriers with p_i = 0
    double min_implied_multiplier = 0.0;
    /// max lambda * |slack| / budget over the CCI and ACI multipliers
    double complementarity = 0.0;
    /// max relative constraint violation, (g - budget) / budget, or 0
    double max_violation = 0.0;
    /// most negative power in watts, 0 if all powers are non-negative
    double negative_power = 0.0;
};

struct SolverOutcome {
    std::vector<double> powers;
    CaseLabel case_label = CaseLabel::Unconstrained;
    double lambda_cci = 0.0;
    std::vector<double> lambda_aci;
    /// max of stationarity, complementarity and violation residuals
    double kkt_residual = 0.0;
    KktResiduals residuals;
    /// Set when activating one constraint family broke the other and the
    /// solver had to fall back to the joint multiplier search.
    bool redispatched = false;
};

/// Multiplier search failure. Carries the residuals of the last iterate.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double max_violation, double complementarity);

    double max_violation() const noexcept { return max_violation_; }
    double complementarity() const noexcept { return complementarity_; }

private:
    double max_violation_;
    double complementarity_;
};

/// Powers with their CCI and ACI multipliers.
struct MultiplierSolution {
    std::vector<double> powers;
    double lambda_cci = 0.0;
    std::vector<double> lambda_aci;
};

// OP1 building blocks.
std::vector<double> unconstrained_op1(const ProblemInstance& instance);
MultiplierSolution cci_active_op1(const ProblemInstance& instance, double tol = 1e-8);
MultiplierSolution aci_active_op1(const ProblemInstance& instance, double tol = 1e-8);
MultiplierSolution both_active_op1(const ProblemInstance& instance, double tol = 1e-8);

/// Four-way dispatch on the unconstrained solution, then re-verification
/// of every constraint on the returned powers.
SolverOutcome solve_op1(const ProblemInstance& instance, double tol = 1e-8);

// OP2 building blocks.
std::vector<double> unconstrained_op2(const ProblemInstance& instance);
MultiplierSolution cci_active_op2(const ProblemInstance& instance, double tol = 1e-8);
MultiplierSolution aci_active_op2(const ProblemInstance& instance, double tol = 1e-8);
MultiplierSolution both_active_op2(const ProblemInstance& instance, double tol = 1e-8);
SolverOutcome solve_op2(const ProblemInstance& instance, double tol = 1e-8);

SolverOutcome solve(const ProblemInstance& instance, Problem problem, double tol = 1e-8);

double objective_value(const ProblemInstance& instance, Problem problem, std::span<const double> powers);
double total_power(std::span<const double> powers);
double aci_leakage(const ProblemInstance& instance, std::span<const double> powers, std::size_t pu);
double sum_rate_bits(std::span<const double> gamma, std::span<const double> powers);

KktResiduals kkt_residuals(const ProblemInstance& instance, Problem problem, std::span<const double> powers,
                           double lambda_cci, std::span<const double> lambda_aci);

/// Long-format record, header `field,index,value`. Fields: problem, case,
/// redispatched, objective, total_power_w, lambda_cci, kkt_residual,
/// stationarity, complementarity, max_violation, then lambda_aci and
/// aci_leakage_w per PU and power_w per subcarrier (index 1-based).
void write_outcome_csv(std::ostream& out, const ProblemInstance& instance, Problem problem,
                       const SolverOutcome& outcome);

}  // namespace crpower
