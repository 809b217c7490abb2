#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crpower/channel_model.hpp"
#include "crpower/kkt_solver.hpp"
#include "crpower/scenario.hpp"
#include "crpower/spectral_leakage.hpp"

namespace crpower {

/// Solver instance for one realization: budgets from the thresholds and the
/// knowledge coefficients of the configured CSI mode, the total power cap
/// folded into the CCI budget, weights rescaled if normalization is on.
ProblemInstance build_instance(const ScenarioConfig& config, const ChannelRealization& realization,
                               const LeakageMatrix& leakage);

struct TrialMetrics {
    bool ok = false;
    std::string error;                 ///< solver or domain failure, empty if ok
    CaseLabel case_label = CaseLabel::Unconstrained;
    bool redispatched = false;
    double rate_bits = 0.0;            ///< sum log2(1 + gamma p), bits/symbol
    double rate_bps = 0.0;             ///< rate_bits * subcarrier spacing
    double power_w = 0.0;
    double leaked_cci_w = 0.0;         ///< with the true co-channel gain
    std::vector<double> leaked_aci_w;  ///< with the true adjacent gains
    double energy_efficiency = 0.0;    ///< bits/J, NaN when power is 0
    double cci_budget_w = 0.0;
    double kkt_residual = 0.0;
};

/// Builds, solves and scores one realization. Never throws for solver
/// failures; those come back with ok = false.
TrialMetrics evaluate_trial(const ScenarioConfig& config, const ChannelRealization& realization,
                            const LeakageMatrix& leakage);

/// Draws the realization for `seed` and evaluates it.
TrialMetrics run_trial(const ScenarioConfig& config, std::uint64_t seed);

enum class SweepAxis { CciThreshold, AciThreshold, Alpha };
std::string_view to_string(SweepAxis axis);
SweepAxis parse_axis(std::string_view text);

/// Scenario with the axis parameter set to `value`. For OP2 the alpha axis
/// gives every PU weight value / L.
ScenarioConfig apply_axis(ScenarioConfig config, SweepAxis axis, double value);

struct MetricSummary {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t count = 0;
};

struct SweepPoint {
    double value = 0.0;
    std::size_t trials = 0;
    std::size_t failed = 0;
    MetricSummary rate_bits;
    MetricSummary rate_bps;
    MetricSummary power_w;
    MetricSummary leaked_cci_w;
    std::vector<MetricSummary> leaked_aci_w;
    MetricSummary energy_efficiency;  ///< over trials with positive power
    double cci_violation_rate = 0.0;  ///< leaked CCI above the threshold
};

struct SweepResult {
    SweepAxis axis = SweepAxis::CciThreshold;
    std::vector<SweepPoint> points;
    /// trials[t][k]: trial t at axis point k; filled only on request.
    std::vector<std::vector<TrialMetrics>> trials;
};

/// Every axis point reuses the same realizations (trial t draws with
/// trial_seed(root_seed, t)), so differences between points are paired.
/// Trials run on config.threads threads; results are reduced in trial order.
SweepResult run_sweep(const ScenarioConfig& config, SweepAxis axis, std::span<const double> values,
                      bool keep_trials = false);

/// Mean and standard error of x - y over trials where both are finite.
MetricSummary paired_difference(std::span<const double> x, std::span<const double> y);

struct ViolationRate {
    double satisfied = 0.0;       ///< fraction with leaked CCI <= threshold
    double violation = 0.0;
    double standard_error = 0.0;  ///< binomial, of the violation fraction
    std::size_t trials = 0;
    std::size_t failed = 0;
};

/// Empirical probability that the true leaked CCI stays under P_th^(m).
/// Requires the statistics CSI mode.
ViolationRate violation_rate(const ScenarioConfig& config, std::size_t trials);

/// Header: axis,value,trials,failed,rate_bits_mean,rate_bits_se,
/// rate_bps_mean,rate_bps_se,power_w_mean,power_w_se,leaked_cci_w_mean,
/// leaked_cci_w_se,energy_efficiency_mean,energy_efficiency_se,
/// energy_efficiency_count,cci_violation_rate, then
/// leaked_aci_w_<l>_mean,leaked_aci_w_<l>_se per PU.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

/// Header: trial,value,status,case,rate_bits,rate_bps,power_w,leaked_cci_w,
/// energy_efficiency,kkt_residual, then leaked_aci_w_<l> per PU.
void write_trials_csv(std::ostream& out, const SweepResult& result);

}  // namespace crpower
