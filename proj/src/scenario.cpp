#include "crpower/scenario.hpp"

#include <cmath>
#include <sstream>

#include "crpower/config.hpp"
#include "crpower/csv.hpp"

namespace crpower {

std::string_view to_string(Problem p) { return p == Problem::Op1 ? "op1" : "op2"; }

std::string_view to_string(CsiKind k) {
    switch (k) {
        case CsiKind::PathLossOnly: return "path_loss";
        case CsiKind::PathLossAndStatistics: return "statistics";
        case CsiKind::FullCsi: return "full";
    }
    return "?";
}

Problem parse_problem(std::string_view text) {
    if (text == "op1") return Problem::Op1;
    if (text == "op2") return Problem::Op2;
    throw ConfigError("solver.problem", "expected op1 or op2, got '" + std::string(text) + "'");
}

CsiKind parse_csi_kind(std::string_view text) {
    if (text == "path_loss") return CsiKind::PathLossOnly;
    if (text == "statistics") return CsiKind::PathLossAndStatistics;
    if (text == "full") return CsiKind::FullCsi;
    throw ConfigError("channel.csi_mode",
                      "expected path_loss, statistics or full, got '" + std::string(text) + "'");
}

double ScenarioConfig::symbol_duration() const {
    return symbol_duration_s.value_or(1.0 / subcarrier_spacing_hz);
}

namespace {

CsiMode make_csi(CsiKind kind, double psi, double mean_gain_db) {
    switch (kind) {
        case CsiKind::PathLossOnly: return PathLossOnly{};
        case CsiKind::PathLossAndStatistics:
            return PathLossAndStatistics{psi, 1.0 / db_to_linear(mean_gain_db)};
        case CsiKind::FullCsi: return FullCsi{};
    }
    return PathLossOnly{};
}

void require(bool ok, const std::string& key, const std::string& message) {
    if (!ok) throw ConfigError(key, message);
}

void require_positive_budget(double v, const std::string& key) {
    require(std::isfinite(v) && v > 0.0, key, "budget must be positive");
}

std::string pu_key(std::size_t k, const char* field) {
    return "pu." + std::to_string(k + 1) + "." + field;
}

}  // namespace

CsiMode ScenarioConfig::cochannel_csi() const {
    return make_csi(csi, cochannel.psi_threshold, cochannel.mean_gain_db);
}

CsiMode ScenarioConfig::adjacent_csi(std::size_t pu) const {
    return make_csi(csi, pus.at(pu).psi_threshold, pus.at(pu).mean_gain_db);
}

void ScenarioConfig::validate() const {
    require(n_subcarriers >= 1, "ofdm.subcarriers", "must be at least 1");
    require(std::isfinite(subcarrier_spacing_hz) && subcarrier_spacing_hz > 0.0,
            "ofdm.subcarrier_spacing_hz", "must be positive");
    if (symbol_duration_s) {
        require(std::isfinite(*symbol_duration_s) && *symbol_duration_s > 0.0,
                "ofdm.symbol_duration_s", "must be positive");
    }
    require(path_loss.exponent > 0.0, "channel.path_loss_exponent", "must be positive");
    require(path_loss.wavelength_m > 0.0, "channel.wavelength_m", "must be positive");
    require(path_loss.reference_distance_m > 0.0, "channel.reference_distance_m",
            "must be positive");
    const double d0 = path_loss.reference_distance_m;
    require(su_link_distance_m >= d0, "channel.su_link_distance_m",
            "must be at least the reference distance");
    require(std::isfinite(noise_variance_w) && noise_variance_w > 0.0,
            "channel.noise_variance_w", "must be positive");
    require(std::isfinite(su_mean_gain_db), "channel.su_mean_gain_db", "must be finite");

    require(cochannel.distance_m >= d0, "cochannel.distance_m",
            "must be at least the reference distance");
    require_positive_budget(cochannel.threshold_w, "cochannel.threshold_w");
    require(std::isfinite(cochannel.mean_gain_db), "cochannel.mean_gain_db", "must be finite");
    if (csi == CsiKind::PathLossAndStatistics) {
        require(cochannel.psi_threshold > 0.0 && cochannel.psi_threshold < 1.0,
                "cochannel.psi_threshold", "must lie in (0, 1)");
    }

    double weight_sum = 0.0;
    for (std::size_t k = 0; k < pus.size(); ++k) {
        const PuBand& pu = pus[k];
        require(std::isfinite(pu.center_offset_hz), pu_key(k, "center_offset_hz"), "must be finite");
        require(std::isfinite(pu.bandwidth_hz) && pu.bandwidth_hz > 0.0,
                pu_key(k, "bandwidth_hz"), "must be positive");
        require(pu.distance_m >= d0, pu_key(k, "distance_m"),
                "must be at least the reference distance");
        require_positive_budget(pu.threshold_w, pu_key(k, "threshold_w"));
        require(std::isfinite(pu.mean_gain_db), pu_key(k, "mean_gain_db"), "must be finite");
        require(pu.signal_variance_w >= 0.0, pu_key(k, "signal_variance_w"),
                "must be non-negative");
        require(pu.weight >= 0.0, pu_key(k, "weight"), "must be non-negative");
        if (csi == CsiKind::PathLossAndStatistics) {
            require(pu.psi_threshold > 0.0 && pu.psi_threshold < 1.0,
                    pu_key(k, "psi_threshold"), "must lie in (0, 1)");
        }
        weight_sum += pu.weight;
    }
    if (problem == Problem::Op2) {
        require(!pus.empty(), "pu.count", "OP2 needs at least one adjacent PU");
        require(weight_sum <= 1.0 + 1e-12, "pu.1.weight", "OP2 weights must sum to at most 1");
    }
    if (total_power_cap_w) require_positive_budget(*total_power_cap_w, "limits.total_power_w");

    require(alpha >= 0.0 && alpha <= 1.0, "solver.alpha", "must lie in [0, 1]");
    require(solver_tol > 0.0, "solver.tol", "must be positive");
    require(leakage_tol > 0.0, "leakage.tol", "must be positive");
    require(trials >= 1, "montecarlo.trials", "must be at least 1");
}

ScenarioConfig scenario_from(const KeyValueFile& f) {
    ScenarioConfig c;

    const auto count = [&](const std::string& key, long long fallback) {
        const long long v = f.integer_or(key, fallback);
        if (v < 0) throw ConfigError(key, "must be non-negative");
        return static_cast<std::size_t>(v);
    };

    c.n_subcarriers = count("ofdm.subcarriers", static_cast<long long>(c.n_subcarriers));
    c.subcarrier_spacing_hz = f.number_or("ofdm.subcarrier_spacing_hz", c.subcarrier_spacing_hz);
    if (f.contains("ofdm.symbol_duration_s")) c.symbol_duration_s = f.number("ofdm.symbol_duration_s");

    c.path_loss.exponent = f.number_or("channel.path_loss_exponent", c.path_loss.exponent);
    c.path_loss.wavelength_m = f.number_or("channel.wavelength_m", c.path_loss.wavelength_m);
    c.path_loss.reference_distance_m =
        f.number_or("channel.reference_distance_m", c.path_loss.reference_distance_m);
    c.su_link_distance_m = f.number_or("channel.su_link_distance_m", c.su_link_distance_m);
    c.su_mean_gain_db = f.number_or("channel.su_mean_gain_db", c.su_mean_gain_db);
    c.noise_variance_w = f.number_or("channel.noise_variance_w", c.noise_variance_w);
    c.pu_interference_path_gain =
        f.boolean_or("channel.pu_interference_path_gain", c.pu_interference_path_gain);
    c.csi = parse_csi_kind(f.string_or("channel.csi_mode", std::string(to_string(c.csi))));

    c.cochannel.distance_m = f.number_or("cochannel.distance_m", c.cochannel.distance_m);
    c.cochannel.threshold_w = f.number_or("cochannel.threshold_w", c.cochannel.threshold_w);
    c.cochannel.mean_gain_db = f.number_or("cochannel.mean_gain_db", c.cochannel.mean_gain_db);
    c.cochannel.psi_threshold = f.number_or("cochannel.psi_threshold", c.cochannel.psi_threshold);

    const std::size_t pu_count = count("pu.count", 1);
    c.pus.assign(pu_count, PuBand{});
    for (std::size_t k = 0; k < pu_count; ++k) {
        PuBand& pu = c.pus[k];
        pu.center_offset_hz = f.number_or(pu_key(k, "center_offset_hz"), pu.center_offset_hz);
        pu.bandwidth_hz = f.number_or(pu_key(k, "bandwidth_hz"), pu.bandwidth_hz);
        pu.distance_m = f.number_or(pu_key(k, "distance_m"), pu.distance_m);
        pu.threshold_w = f.number_or(pu_key(k, "threshold_w"), pu.threshold_w);
        pu.mean_gain_db = f.number_or(pu_key(k, "mean_gain_db"), pu.mean_gain_db);
        pu.psi_threshold = f.number_or(pu_key(k, "psi_threshold"), pu.psi_threshold);
        pu.signal_variance_w = f.number_or(pu_key(k, "signal_variance_w"), pu.signal_variance_w);
        pu.weight = f.number_or(pu_key(k, "weight"), pu.weight);
    }

    if (f.contains("limits.total_power_w")) c.total_power_cap_w = f.number("limits.total_power_w");

    c.problem = parse_problem(f.string_or("solver.problem", std::string(to_string(c.problem))));
    c.alpha = f.number_or("solver.alpha", c.alpha);
    c.solver_tol = f.number_or("solver.tol", c.solver_tol);
    {
        const std::string norm = f.string_or("solver.normalization", "none");
        if (norm == "none") c.normalization = Normalization::None;
        else if (norm == "alpha0") c.normalization = Normalization::Alpha0;
        else throw ConfigError("solver.normalization", "expected none or alpha0, got '" + norm + "'");
    }

    c.leakage_tol = f.number_or("leakage.tol", c.leakage_tol);
    {
        const std::string ref = f.string_or("leakage.distance_reference", "center");
        if (ref == "center") c.distance_reference = DistanceReference::Center;
        else if (ref == "edge") c.distance_reference = DistanceReference::NearestEdge;
        else throw ConfigError("leakage.distance_reference", "expected center or edge, got '" + ref + "'");
    }

    c.trials = count("montecarlo.trials", static_cast<long long>(c.trials));
    {
        const long long seed = f.integer_or("montecarlo.root_seed", 1);
        if (seed < 0) throw ConfigError("montecarlo.root_seed", "must be non-negative");
        c.root_seed = static_cast<std::uint64_t>(seed);
    }
    c.threads = static_cast<unsigned>(count("montecarlo.threads", 0));

    if (const auto unused = f.unused_keys(); !unused.empty()) {
        throw ConfigError(unused.front(), "unknown key");
    }
    c.validate();
    return c;
}

ScenarioConfig parse_scenario(std::string_view text) {
    return scenario_from(KeyValueFile::parse(text));
}

ScenarioConfig load_scenario(const std::string& path) {
    return scenario_from(KeyValueFile::load(path));
}

std::string render_scenario(const ScenarioConfig& c) {
    std::ostringstream o;
    const auto put = [&](const std::string& key, double v) { o << key << " = " << format_number(v, 17) << '\n'; };
    o << "ofdm.subcarriers = " << c.n_subcarriers << '\n';
    put("ofdm.subcarrier_spacing_hz", c.subcarrier_spacing_hz);
    if (c.symbol_duration_s) put("ofdm.symbol_duration_s", *c.symbol_duration_s);
    put("channel.path_loss_exponent", c.path_loss.exponent);
    put("channel.wavelength_m", c.path_loss.wavelength_m);
    put("channel.reference_distance_m", c.path_loss.reference_distance_m);
    put("channel.su_link_distance_m", c.su_link_distance_m);
    put("channel.su_mean_gain_db", c.su_mean_gain_db);
    put("channel.noise_variance_w", c.noise_variance_w);
    o << "channel.pu_interference_path_gain = " << (c.pu_interference_path_gain ? "true" : "false") << '\n';
    o << "channel.csi_mode = " << to_string(c.csi) << '\n';
    put("cochannel.distance_m", c.cochannel.distance_m);
    put("cochannel.threshold_w", c.cochannel.threshold_w);
    put("cochannel.mean_gain_db", c.cochannel.mean_gain_db);
    put("cochannel.psi_threshold", c.cochannel.psi_threshold);
    o << "pu.count = " << c.pus.size() << '\n';
    for (std::size_t k = 0; k < c.pus.size(); ++k) {
        const PuBand& pu = c.pus[k];
        put(pu_key(k, "center_offset_hz"), pu.center_offset_hz);
        put(pu_key(k, "bandwidth_hz"), pu.bandwidth_hz);
        put(pu_key(k, "distance_m"), pu.distance_m);
        put(pu_key(k, "threshold_w"), pu.threshold_w);
        put(pu_key(k, "mean_gain_db"), pu.mean_gain_db);
        put(pu_key(k, "psi_threshold"), pu.psi_threshold);
        put(pu_key(k, "signal_variance_w"), pu.signal_variance_w);
        put(pu_key(k, "weight"), pu.weight);
    }
    if (c.total_power_cap_w) put("limits.total_power_w", *c.total_power_cap_w);
    o << "solver.problem = " << to_string(c.problem) << '\n';
    put("solver.alpha", c.alpha);
    put("solver.tol", c.solver_tol);
    o << "solver.normalization = " << (c.normalization == Normalization::None ? "none" : "alpha0") << '\n';
    put("leakage.tol", c.leakage_tol);
    o << "leakage.distance_reference = "
      << (c.distance_reference == DistanceReference::Center ? "center" : "edge") << '\n';
    o << "montecarlo.trials = " << c.trials << '\n';
    o << "montecarlo.root_seed = " << c.root_seed << '\n';
    o << "montecarlo.threads = " << c.threads << '\n';
    return o.str();
}

}  // namespace crpower
