#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crpower/channel_model.hpp"

namespace crpower {

class KeyValueFile;

enum class Problem { Op1, Op2 };
enum class CsiKind { PathLossOnly, PathLossAndStatistics, FullCsi };
enum class DistanceReference { Center, NearestEdge };

/// How the rate and power objectives are scaled before scalarization.
/// `Alpha0` divides the power term (OP1) or per-PU leakage terms (OP2) and
/// the rate term by their values at the alpha = 0 solution of the same
/// realization; the solution is still reported in physical units.
enum class Normalization { None, Alpha0 };

std::string_view to_string(Problem p);
std::string_view to_string(CsiKind k);
Problem parse_problem(std::string_view text);
CsiKind parse_csi_kind(std::string_view text);

/// A frequency-adjacent primary user.
struct PuBand {
    double center_offset_hz = 781.25e3;  ///< PU band centre relative to SU band centre
    double bandwidth_hz = 312.5e3;
    double distance_m = 1200.0;          ///< SU transmitter to PU receiver
    double threshold_w = 1e-11;          ///< ACI threshold P_th^(l)
    double mean_gain_db = 0.0;           ///< E{|H_sp^(l)|^2}
    double psi_threshold = 0.9;          ///< Psi_th^(l), statistics mode only
    double signal_variance_w = 1e-15;    ///< PU signal power seen by the SU receiver
    double weight = 0.0;                 ///< OP2 weight alpha^(l)
};

/// The distant PU sharing the SU's subchannel.
struct CochannelPu {
    double distance_m = 5000.0;
    double threshold_w = 1e-11;  ///< CCI threshold P_th^(m)
    double mean_gain_db = 0.0;
    double psi_threshold = 0.9;
};

struct ScenarioConfig {
    std::size_t n_subcarriers = 128;
    double subcarrier_spacing_hz = 1.25e6 / 128.0;
    /// OFDM symbol duration; defaults to 1 / subcarrier spacing (no cyclic prefix).
    std::optional<double> symbol_duration_s;

    PathLossModel path_loss;
    double su_link_distance_m = 1000.0;
    double su_mean_gain_db = 0.0;
    double noise_variance_w = 1e-15;
    bool pu_interference_path_gain = true;
    CsiKind csi = CsiKind::PathLossAndStatistics;

    CochannelPu cochannel;
    std::vector<PuBand> pus{PuBand{}};
    /// Regulatory / amplifier cap on total power; folded into the CCI budget.
    std::optional<double> total_power_cap_w;

    Problem problem = Problem::Op1;
    double alpha = 0.5;
    double solver_tol = 1e-8;
    Normalization normalization = Normalization::None;

    double leakage_tol = 1e-9;
    DistanceReference distance_reference = DistanceReference::Center;

    std::size_t trials = 1000;
    std::uint64_t root_seed = 1;
    unsigned threads = 0;  ///< 0: hardware concurrency

    double symbol_duration() const;
    std::size_t pu_count() const { return pus.size(); }

    CsiMode cochannel_csi() const;
    CsiMode adjacent_csi(std::size_t pu) const;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

/// Builds a scenario from key-value text. Every key is optional and falls
/// back to the default scenario; unknown keys are rejected.
ScenarioConfig scenario_from(const KeyValueFile& file);
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::string& path);

/// Key-value rendering of `config` that parses back to the same scenario.
std::string render_scenario(const ScenarioConfig& config);

}  // namespace crpower
