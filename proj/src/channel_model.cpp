#include "crpower/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "crpower/scenario.hpp"
#include "crpower/spectral_leakage.hpp"

namespace crpower {

double path_loss_db(const PathLossModel& model, double distance_m) {
    const double d0 = model.reference_distance_m;
    if (!(distance_m >= d0)) {
        throw std::domain_error("path_loss_db: distance " + std::to_string(distance_m) +
                                " m is below the reference distance " + std::to_string(d0) + " m");
    }
    const double free_space = 20.0 * std::log10(4.0 * std::numbers::pi * d0 / model.wavelength_m);
    return free_space + 10.0 * model.exponent * std::log10(distance_m / d0);
}

double db_to_linear(double db) { return std::pow(10.0, 0.1 * db); }

double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

double knowledge_coefficient(const CsiMode& mode, double pl_db,
                             std::optional<double> instantaneous_gain_sq) {
    if (!std::isfinite(pl_db)) throw std::domain_error("knowledge_coefficient: path loss must be finite");
    const double path_gain = std::pow(10.0, -0.1 * pl_db);

    if (std::holds_alternative<PathLossOnly>(mode)) return 1.0 / path_gain;

    if (const auto* stats = std::get_if<PathLossAndStatistics>(&mode)) {
        if (!(stats->psi_threshold > 0.0 && stats->psi_threshold < 1.0)) {
            throw std::domain_error("knowledge_coefficient: psi threshold must lie in (0, 1)");
        }
        if (!(stats->nu > 0.0)) throw std::domain_error("knowledge_coefficient: nu must be positive");
        return stats->nu / (-std::log1p(-stats->psi_threshold) * path_gain);
    }

    if (!instantaneous_gain_sq || !(*instantaneous_gain_sq > 0.0)) {
        throw std::domain_error(
            "knowledge_coefficient: full CSI needs a positive instantaneous gain; "
            "a zero gain leaves the constraint vacuous");
    }
    return 1.0 / (*instantaneous_gain_sq * path_gain);
}

double channel_to_noise_ratio(double gain_sq, double noise_variance_w, double interference_w) {
    if (gain_sq == 0.0) return 0.0;
    return gain_sq / (noise_variance_w + interference_w);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class GainSampler {
public:
    explicit GainSampler(std::uint64_t seed) : rng_(seed) {}

    /// CN(0, mean_power): |h|^2 ~ Exponential with mean `mean_power`.
    std::complex<double> draw(double mean_power) {
        const double scale = std::sqrt(0.5 * mean_power);
        const double re = normal_(rng_);
        const double im = normal_(rng_);
        return {scale * re, scale * im};
    }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace

std::uint64_t trial_seed(std::uint64_t root_seed, std::uint64_t trial) {
    return splitmix64(root_seed ^ splitmix64(trial));
}

ChannelRealization draw_realization(std::uint64_t seed, const ScenarioConfig& config) {
    const std::size_t n = config.n_subcarriers;
    GainSampler sampler(seed);

    ChannelRealization r;
    const double su_power = db_to_linear(config.su_mean_gain_db) *
                            std::pow(10.0, -0.1 * path_loss_db(config.path_loss, config.su_link_distance_m));
    r.su_gains.reserve(n);
    for (std::size_t i = 0; i < n; ++i) r.su_gains.push_back(sampler.draw(su_power));

    r.pu_cochannel_gain = sampler.draw(db_to_linear(config.cochannel.mean_gain_db));
    r.pu_adjacent_gains.reserve(config.pus.size());
    for (const PuBand& pu : config.pus) r.pu_adjacent_gains.push_back(sampler.draw(db_to_linear(pu.mean_gain_db)));

    r.gamma.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.gamma[i] = channel_to_noise_ratio(std::norm(r.su_gains[i]), config.noise_variance_w,
                                            pu_interference(config, i));
    }
    return r;
}

double FlatPuPsd::band_power_w(const PuBand& pu, double lo_hz, double hi_hz) const {
    const double band_lo = pu.center_offset_hz - 0.5 * pu.bandwidth_hz;
    const double band_hi = pu.center_offset_hz + 0.5 * pu.bandwidth_hz;
    const double overlap = std::min(hi_hz, band_hi) - std::max(lo_hz, band_lo);
    if (overlap <= 0.0) return 0.0;
    return pu.signal_variance_w * overlap / pu.bandwidth_hz;
}

double pu_interference(const ScenarioConfig& config, std::size_t subcarrier, const PuPsdModel& psd) {
    const double center = subcarrier_center_hz(config, subcarrier);
    const double half = 0.5 * config.subcarrier_spacing_hz;
    double total = 0.0;
    for (const PuBand& pu : config.pus) {
        double power = psd.band_power_w(pu, center - half, center + half);
        if (power > 0.0 && config.pu_interference_path_gain) {
            power *= std::pow(10.0, -0.1 * path_loss_db(config.path_loss, pu.distance_m));
        }
        total += power;
    }
    return total;
}

}  // namespace crpower
