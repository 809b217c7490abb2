#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace crpower {

struct ScenarioConfig;
struct PuBand;

/// Log-distance path loss anchored at the free-space loss of the reference
/// distance: PL(d) = 20 log10(4 pi d0 / lambda) + 10 n log10(d / d0).
struct PathLossModel {
    double exponent = 4.0;
    double wavelength_m = 0.33;
    double reference_distance_m = 100.0;
};

/// Path loss in dB. Throws std::domain_error for d < reference distance.
double path_loss_db(const PathLossModel& model, double distance_m);

/// Power ratio conversions (factor 10).
double db_to_linear(double db);
double linear_to_db(double ratio);

/// SU transmitter knows only the distance-based path loss to the PU.
struct PathLossOnly {};

/// Path loss plus the exponential law of |H|^2. The constraint is then
/// met with probability at least `psi_threshold`; `nu` is 1 / E{|H|^2}.
struct PathLossAndStatistics {
    double psi_threshold = 0.9;
    double nu = 1.0;
};

/// Instantaneous SU-to-PU gain known (upper bound on SU performance).
struct FullCsi {};

using CsiMode = std::variant<PathLossOnly, PathLossAndStatistics, FullCsi>;

/// Channel knowledge coefficient X: multiplies an interference threshold
/// into a transmit-power budget.
///
///   PathLossOnly          X = 1 / 10^(-pl/10)
///   PathLossAndStatistics X = nu / (-ln(1 - psi) * 10^(-pl/10))
///   FullCsi               X = 1 / (|H|^2 * 10^(-pl/10))
///
/// FullCsi needs `instantaneous_gain_sq > 0`; a zero gain would make the
/// constraint vacuous and is reported as std::domain_error.
double knowledge_coefficient(const CsiMode& mode, double pl_db,
                             std::optional<double> instantaneous_gain_sq = std::nullopt);

/// One draw of every random channel in the scenario.
struct ChannelRealization {
    /// SU link gain per subcarrier (fading times SU-link path gain amplitude).
    std::vector<std::complex<double>> su_gains;
    /// Fading gain towards the distant co-channel PU receiver (unit mean power
    /// scaled by the configured average gain; path loss applied separately).
    std::complex<double> pu_cochannel_gain;
    /// Fading gain towards each adjacent PU receiver.
    std::vector<std::complex<double>> pu_adjacent_gains;
    /// gamma_i = |H_i|^2 / (sigma_n^2 + J_i), 1/W.
    std::vector<double> gamma;
};

/// gamma_i for a single subcarrier. Zero gain gives zero; infinite only
/// if the noise-plus-interference power is zero.
double channel_to_noise_ratio(double gain_sq, double noise_variance_w, double interference_w);

/// Per-trial seed derived from the root seed (splitmix64 of root xor
/// splitmix64(trial)). Trials are independent streams regardless of the
/// order in which they run.
std::uint64_t trial_seed(std::uint64_t root_seed, std::uint64_t trial);

/// Draws circularly-symmetric complex Gaussian gains, i.i.d. across
/// subcarriers, and computes gamma. Deterministic in `seed`.
ChannelRealization draw_realization(std::uint64_t seed, const ScenarioConfig& config);

/// Power spectral density of a PU transmission as seen at the SU receiver.
class PuPsdModel {
public:
    virtual ~PuPsdModel() = default;

    /// Power (W, before path gain) the PU puts into [lo_hz, hi_hz], where
    /// frequencies are offsets from the SU band centre.
    virtual double band_power_w(const PuBand& pu, double lo_hz, double hi_hz) const = 0;
};

/// Ideal flat band-limited PSD: the PU signal variance spread uniformly
/// over its bandwidth.
class FlatPuPsd final : public PuPsdModel {
public:
    double band_power_w(const PuBand& pu, double lo_hz, double hi_hz) const override;
};

/// J_i: PU interference collected by SU subcarrier `subcarrier`, summed over
/// all adjacent PUs and scaled by the PU-to-SU path gain when the scenario
/// enables it.
double pu_interference(const ScenarioConfig& config, std::size_t subcarrier,
                       const PuPsdModel& psd = FlatPuPsd{});

}  // namespace crpower
