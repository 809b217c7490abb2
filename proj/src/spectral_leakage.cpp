#include "crpower/spectral_leakage.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "crpower/csv.hpp"
#include "crpower/scenario.hpp"

namespace crpower {

LeakageMatrix::LeakageMatrix(std::size_t subcarriers, std::size_t pus, double fill)
    : subcarriers_(subcarriers), pus_(pus), values_(subcarriers * pus, fill) {}

LeakageMatrix::LeakageMatrix(std::size_t subcarriers, std::size_t pus, std::vector<double> row_major)
    : subcarriers_(subcarriers), pus_(pus), values_(std::move(row_major)) {
    if (values_.size() != subcarriers * pus) {
        throw std::invalid_argument("LeakageMatrix: expected " + std::to_string(subcarriers * pus) +
                                    " values, got " + std::to_string(values_.size()));
    }
}

double sinc_squared(double u) {
    if (std::fabs(u) < 1e-8) {
        const double x = std::numbers::pi * u;
        return 1.0 - x * x / 3.0;
    }
    const double r = u - std::nearbyint(u);
    const double s = std::sin(std::numbers::pi * r);
    const double d = std::numbers::pi * u;
    return (s * s) / (d * d);
}

namespace {
constexpr int kMinLobeDepth = 4;
}  // namespace

QuadratureResult sinc_squared_integral(double u_lo, double u_hi, double tol) {
    if (u_hi < u_lo) {
        QuadratureResult r = sinc_squared_integral(u_hi, u_lo, tol);
        r.value = -r.value;
        return r;
    }
    QuadratureResult total;
    const double width = u_hi - u_lo;
    if (width == 0.0) return total;

    const auto integrand = [](double u) { return sinc_squared(u); };
    double a = u_lo;
    double sum = 0.0, compensation = 0.0;
    while (a < u_hi) {
        double b = std::floor(a) + 1.0;
        if (b > u_hi) b = u_hi;
        // Coarse panels on a lobe can agree by accident; 16 panels minimum.
        const QuadratureResult piece =
            adaptive_simpson(integrand, a, b, tol * (b - a) / width, 50, kMinLobeDepth);
        // Kahan summation keeps millions of small lobes from drifting.
        const double y = piece.value - compensation;
        const double t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
        total.error_estimate += piece.error_estimate;
        total.evaluations += piece.evaluations;
        total.min_panel_width = std::min(total.min_panel_width, piece.min_panel_width);
        a = b;
    }
    total.value = sum;
    return total;
}

double leakage_factor(double symbol_duration_s, double spectral_distance_hz, double bandwidth_hz, double tol) {
    if (!(symbol_duration_s > 0.0)) throw std::domain_error("leakage_factor: symbol duration must be positive");
    if (!(bandwidth_hz > 0.0)) throw std::domain_error("leakage_factor: bandwidth must be positive");
    if (!(tol > 0.0)) throw std::domain_error("leakage_factor: tolerance must be positive");
    // sinc^2 is even; folding the sign makes +d and -d bit-identical.
    const double d = std::fabs(spectral_distance_hz);
    const double lo = symbol_duration_s * (d - 0.5 * bandwidth_hz);
    const double hi = symbol_duration_s * (d + 0.5 * bandwidth_hz);
    const double value = sinc_squared_integral(lo, hi, tol).value;
    return std::clamp(value, 0.0, 1.0);
}

double subcarrier_center_hz(const ScenarioConfig& config, std::size_t subcarrier) {
    const double n = static_cast<double>(config.n_subcarriers);
    return (static_cast<double>(subcarrier) + 0.5 - 0.5 * n) * config.subcarrier_spacing_hz;
}

double spectral_distance_hz(const ScenarioConfig& config, std::size_t subcarrier, std::size_t pu) {
    const PuBand& band = config.pus.at(pu);
    const double centre_gap = std::fabs(band.center_offset_hz - subcarrier_center_hz(config, subcarrier));
    if (config.distance_reference == DistanceReference::Center) return centre_gap;
    return std::max(0.0, centre_gap - 0.5 * band.bandwidth_hz);
}

LeakageMatrix build_leakage_matrix(const ScenarioConfig& config) {
    const std::size_t n = config.n_subcarriers;
    const std::size_t l = config.pus.size();
    LeakageMatrix m(n, l);
    m.symbol_duration_s = config.symbol_duration();
    m.pu_bands = config.pus;
    for (std::size_t k = 0; k < l; ++k) {
        if (!(config.pus[k].bandwidth_hz > 0.0)) {
            throw std::domain_error("build_leakage_matrix: PU " + std::to_string(k + 1) +
                                    " has a non-positive bandwidth");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < l; ++k) {
            m(i, k) = leakage_factor(m.symbol_duration_s, spectral_distance_hz(config, i, k),
                                     config.pus[k].bandwidth_hz, config.leakage_tol);
        }
    }
    return m;
}

void write_leakage_csv(std::ostream& out, const LeakageMatrix& matrix) {
    std::vector<std::string> header{"subcarrier"};
    for (std::size_t k = 0; k < matrix.pus(); ++k) header.push_back("pu_" + std::to_string(k + 1));
    write_csv_row(out, header);
    for (std::size_t i = 0; i < matrix.subcarriers(); ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (std::size_t k = 0; k < matrix.pus(); ++k) row.push_back(format_number(matrix(i, k), 15));
        write_csv_row(out, row);
    }
}

}  // namespace crpower
