#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "crpower/quadrature.hpp"

namespace crpower {

struct ScenarioConfig;
struct PuBand;

/// Fraction of each SU subcarrier's power that falls inside each adjacent
/// PU band. Row = subcarrier, column = PU.
class LeakageMatrix {
public:
    LeakageMatrix() = default;
    LeakageMatrix(std::size_t subcarriers, std::size_t pus, double fill = 0.0);
    LeakageMatrix(std::size_t subcarriers, std::size_t pus, std::vector<double> row_major);

    std::size_t subcarriers() const noexcept { return subcarriers_; }
    std::size_t pus() const noexcept { return pus_; }

    double operator()(std::size_t i, std::size_t l) const { return values_[i * pus_ + l]; }
    double& operator()(std::size_t i, std::size_t l) { return values_[i * pus_ + l]; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * pus_, pus_}; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// OFDM symbol duration the factors were computed for (0 if built by hand).
    double symbol_duration_s = 0.0;
    /// PU bands the columns refer to (empty if built by hand).
    std::vector<PuBand> pu_bands;

private:
    std::size_t subcarriers_ = 0;
    std::size_t pus_ = 0;
    std::vector<double> values_;
};

/// sin^2(pi u) / (pi u)^2, evaluated with the argument reduced modulo 1 so
/// that zeros at integer u stay exact.
double sinc_squared(double u);

/// Integral of sinc^2 over [u_lo, u_hi] in normalized frequency (f * T_s).
/// The range is split at the lobe zeros and each lobe is integrated by
/// adaptive Simpson with its width-proportional share of `tol`.
QuadratureResult sinc_squared_integral(double u_lo, double u_hi, double tol);

/// T_s * integral over [f - B/2, f + B/2] of sinc^2(T_s x) dx, absolute
/// error at most `tol`. Throws std::domain_error for non-positive T_s,
/// bandwidth or tolerance.
double leakage_factor(double symbol_duration_s, double spectral_distance_hz, double bandwidth_hz,
                      double tol = 1e-9);

/// Centre of subcarrier i relative to the SU band centre:
/// (i + 1/2 - N/2) * spacing.
double subcarrier_center_hz(const ScenarioConfig& config, std::size_t subcarrier);

/// Distance used for the leakage integral of subcarrier i into PU l:
/// centre-to-centre, or subcarrier centre to the nearest band edge (zero
/// inside the band) when the scenario asks for it.
double spectral_distance_hz(const ScenarioConfig& config, std::size_t subcarrier, std::size_t pu);

LeakageMatrix build_leakage_matrix(const ScenarioConfig& config);

/// Header `subcarrier,pu_1,...,pu_L`; one row per subcarrier.
void write_leakage_csv(std::ostream& out, const LeakageMatrix& matrix);

}  // namespace crpower
