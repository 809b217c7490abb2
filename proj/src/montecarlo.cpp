#include "crpower/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "crpower/csv.hpp"

namespace crpower {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double path_gain(const ScenarioConfig& config, double distance_m) {
    return std::pow(10.0, -0.1 * path_loss_db(config.path_loss, distance_m));
}

// Rescales the weights so both objective terms are measured against their
// values at the rate-maximizing (alpha = 0) solution.
void normalize(ProblemInstance& inst, Problem problem) {
    ProblemInstance rate_only = inst;
    rate_only.alpha = 0.0;
    std::fill(rate_only.aci_weights.begin(), rate_only.aci_weights.end(), 0.0);
    const SolverOutcome ref = solve(rate_only, problem);
    const double rate0 = sum_rate_bits(inst.gamma, ref.powers);
    if (!(rate0 > 0.0)) return;

    if (problem == Problem::Op1) {
        const double power0 = total_power(ref.powers);
        if (!(power0 > 0.0) || inst.alpha == 0.0 || inst.alpha == 1.0) return;
        const double a = inst.alpha / power0;
        const double b = (1.0 - inst.alpha) / rate0;
        inst.alpha = a / (a + b);
        return;
    }
    const double total = std::accumulate(inst.aci_weights.begin(), inst.aci_weights.end(), 0.0);
    std::vector<double> scaled(inst.pus());
    double z = (1.0 - total) / rate0;
    for (std::size_t l = 0; l < inst.pus(); ++l) {
        const double leak0 = aci_leakage(inst, ref.powers, l);
        if (inst.aci_weights[l] > 0.0 && !(leak0 > 0.0)) return;
        scaled[l] = inst.aci_weights[l] > 0.0 ? inst.aci_weights[l] / leak0 : 0.0;
        z += scaled[l];
    }
    if (!(z > 0.0)) return;
    for (std::size_t l = 0; l < inst.pus(); ++l) inst.aci_weights[l] = scaled[l] / z;
}

MetricSummary summarize(const std::vector<double>& xs) {
    MetricSummary s;
    double sum = 0.0;
    for (double x : xs) {
        if (std::isfinite(x)) {
            sum += x;
            ++s.count;
        }
    }
    if (s.count == 0) {
        s.mean = kNaN;
        s.standard_error = kNaN;
        return s;
    }
    s.mean = sum / static_cast<double>(s.count);
    if (s.count < 2) return s;
    double ss = 0.0;
    for (double x : xs) {
        if (std::isfinite(x)) ss += (x - s.mean) * (x - s.mean);
    }
    const double n = static_cast<double>(s.count);
    s.standard_error = std::sqrt(ss / (n - 1.0) / n);
    return s;
}

unsigned thread_count(const ScenarioConfig& config, std::size_t work) {
    unsigned t = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
    if (t == 0) t = 1;
    return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(work, 1)));
}

// Runs body(t) for t in [0, count) on `threads` workers.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, const Body& body) {
    if (threads <= 1) {
        for (std::size_t t = 0; t < count; ++t) body(t);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            try {
                for (std::size_t t = next++; t < count; t = next++) body(t);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

ProblemInstance build_instance(const ScenarioConfig& config, const ChannelRealization& realization,
                               const LeakageMatrix& leakage) {
    ProblemInstance inst;
    inst.gamma = realization.gamma;
    inst.leakage = leakage;

    const double pl_m = path_loss_db(config.path_loss, config.cochannel.distance_m);
    const double x_m = knowledge_coefficient(config.cochannel_csi(), pl_m, std::norm(realization.pu_cochannel_gain));
    inst.cci_budget = config.cochannel.threshold_w * x_m;
    if (config.total_power_cap_w) inst.cci_budget = std::min(inst.cci_budget, *config.total_power_cap_w);

    inst.aci_budgets.resize(config.pus.size());
    inst.aci_weights.resize(config.pus.size());
    for (std::size_t l = 0; l < config.pus.size(); ++l) {
        const PuBand& pu = config.pus[l];
        const double pl = path_loss_db(config.path_loss, pu.distance_m);
        const double x = knowledge_coefficient(config.adjacent_csi(l), pl, std::norm(realization.pu_adjacent_gains[l]));
        inst.aci_budgets[l] = pu.threshold_w * x;
        inst.aci_weights[l] = pu.weight;
    }
    inst.alpha = config.alpha;
    if (config.normalization == Normalization::Alpha0) normalize(inst, config.problem);
    return inst;
}

TrialMetrics evaluate_trial(const ScenarioConfig& config, const ChannelRealization& realization,
                            const LeakageMatrix& leakage) {
    TrialMetrics m;
    m.leaked_aci_w.assign(config.pus.size(), kNaN);
    m.rate_bits = m.rate_bps = m.power_w = m.leaked_cci_w = m.energy_efficiency = kNaN;
    try {
        const ProblemInstance inst = build_instance(config, realization, leakage);
        const SolverOutcome out = solve(inst, config.problem, config.solver_tol);
        m.cci_budget_w = inst.cci_budget;
        m.case_label = out.case_label;
        m.redispatched = out.redispatched;
        m.kkt_residual = out.kkt_residual;
        m.rate_bits = sum_rate_bits(inst.gamma, out.powers);
        m.rate_bps = m.rate_bits * config.subcarrier_spacing_hz;
        m.power_w = total_power(out.powers);
        m.leaked_cci_w = std::norm(realization.pu_cochannel_gain) * path_gain(config, config.cochannel.distance_m) *
                         m.power_w;
        for (std::size_t l = 0; l < config.pus.size(); ++l) {
            m.leaked_aci_w[l] = std::norm(realization.pu_adjacent_gains[l]) *
                                path_gain(config, config.pus[l].distance_m) * aci_leakage(inst, out.powers, l);
        }
        m.energy_efficiency = m.power_w > 0.0 ? m.rate_bps / m.power_w : kNaN;
        m.ok = true;
    } catch (const std::exception& e) {
        m.error = e.what();
    }
    return m;
}

TrialMetrics run_trial(const ScenarioConfig& config, std::uint64_t seed) {
    return evaluate_trial(config, draw_realization(seed, config), build_leakage_matrix(config));
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::CciThreshold: return "cci";
        case SweepAxis::AciThreshold: return "aci";
        case SweepAxis::Alpha: return "alpha";
    }
    return "unknown";
}

SweepAxis parse_axis(std::string_view text) {
    if (text == "cci") return SweepAxis::CciThreshold;
    if (text == "aci") return SweepAxis::AciThreshold;
    if (text == "alpha") return SweepAxis::Alpha;
    throw std::invalid_argument("unknown sweep axis '" + std::string(text) + "' (expected cci, aci or alpha)");
}

ScenarioConfig apply_axis(ScenarioConfig config, SweepAxis axis, double value) {
    switch (axis) {
        case SweepAxis::CciThreshold:
            config.cochannel.threshold_w = value;
            break;
        case SweepAxis::AciThreshold:
            for (PuBand& pu : config.pus) pu.threshold_w = value;
            break;
        case SweepAxis::Alpha:
            if (config.problem == Problem::Op1) {
                config.alpha = value;
            } else {
                for (PuBand& pu : config.pus) pu.weight = value / static_cast<double>(config.pus.size());
            }
            break;
    }
    return config;
}

SweepResult run_sweep(const ScenarioConfig& config, SweepAxis axis, std::span<const double> values,
                      bool keep_trials) {
    config.validate();
    if (values.empty()) throw std::invalid_argument("run_sweep: no axis values");

    std::vector<ScenarioConfig> configs;
    for (double v : values) {
        configs.push_back(apply_axis(config, axis, v));
        configs.back().validate();
    }
    // None of the axes moves the subcarrier grid or the PU bands.
    const LeakageMatrix leakage = build_leakage_matrix(config);
    const std::size_t trials = config.trials;
    const std::size_t points = values.size();

    std::vector<std::vector<TrialMetrics>> table(trials, std::vector<TrialMetrics>(points));
    parallel_for(trials, thread_count(config, trials), [&](std::size_t t) {
        const ChannelRealization r = draw_realization(trial_seed(config.root_seed, t), config);
        for (std::size_t k = 0; k < points; ++k) table[t][k] = evaluate_trial(configs[k], r, leakage);
    });

    SweepResult result;
    result.axis = axis;
    const std::size_t l = config.pus.size();
    for (std::size_t k = 0; k < points; ++k) {
        SweepPoint pt;
        pt.value = values[k];
        pt.trials = trials;
        std::vector<double> rate, bps, power, cci, ee;
        std::vector<std::vector<double>> aci(l);
        std::size_t violations = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            const TrialMetrics& m = table[t][k];
            if (!m.ok) {
                ++pt.failed;
                continue;
            }
            rate.push_back(m.rate_bits);
            bps.push_back(m.rate_bps);
            power.push_back(m.power_w);
            cci.push_back(m.leaked_cci_w);
            ee.push_back(m.energy_efficiency);
            for (std::size_t j = 0; j < l; ++j) aci[j].push_back(m.leaked_aci_w[j]);
            if (m.leaked_cci_w > configs[k].cochannel.threshold_w * (1.0 + 1e-9)) ++violations;
        }
        pt.rate_bits = summarize(rate);
        pt.rate_bps = summarize(bps);
        pt.power_w = summarize(power);
        pt.leaked_cci_w = summarize(cci);
        pt.energy_efficiency = summarize(ee);
        for (std::size_t j = 0; j < l; ++j) pt.leaked_aci_w.push_back(summarize(aci[j]));
        const std::size_t ok = trials - pt.failed;
        pt.cci_violation_rate = ok > 0 ? static_cast<double>(violations) / static_cast<double>(ok) : kNaN;
        result.points.push_back(std::move(pt));
    }
    if (keep_trials) result.trials = std::move(table);
    return result;
}

MetricSummary paired_difference(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("paired_difference: length mismatch");
    std::vector<double> d;
    d.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isfinite(x[i]) && std::isfinite(y[i])) d.push_back(x[i] - y[i]);
    }
    return summarize(d);
}

ViolationRate violation_rate(const ScenarioConfig& config, std::size_t trials) {
    if (config.csi != CsiKind::PathLossAndStatistics) {
        throw std::invalid_argument("violation_rate: needs the statistics CSI mode");
    }
    ScenarioConfig c = config;
    c.trials = trials;
    const double one = c.cochannel.threshold_w;
    const SweepResult r = run_sweep(c, SweepAxis::CciThreshold, std::span<const double>(&one, 1));
    const SweepPoint& pt = r.points.front();
    ViolationRate v;
    v.trials = trials;
    v.failed = pt.failed;
    v.violation = pt.cci_violation_rate;
    v.satisfied = 1.0 - v.violation;
    const double n = static_cast<double>(trials - pt.failed);
    v.standard_error = n > 0.0 ? std::sqrt(v.violation * (1.0 - v.violation) / n) : kNaN;
    return v;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    const std::size_t l = result.points.empty() ? 0 : result.points.front().leaked_aci_w.size();
    std::vector<std::string> header{"axis",
                                    "value",
                                    "trials",
                                    "failed",
                                    "rate_bits_mean",
                                    "rate_bits_se",
                                    "rate_bps_mean",
                                    "rate_bps_se",
                                    "power_w_mean",
                                    "power_w_se",
                                    "leaked_cci_w_mean",
                                    "leaked_cci_w_se",
                                    "energy_efficiency_mean",
                                    "energy_efficiency_se",
                                    "energy_efficiency_count",
                                    "cci_violation_rate"};
    for (std::size_t j = 0; j < l; ++j) {
        header.push_back("leaked_aci_w_" + std::to_string(j + 1) + "_mean");
        header.push_back("leaked_aci_w_" + std::to_string(j + 1) + "_se");
    }
    write_csv_row(out, header);
    for (const SweepPoint& p : result.points) {
        std::vector<std::string> row{std::string(to_string(result.axis)),
                                     format_number(p.value),
                                     std::to_string(p.trials),
                                     std::to_string(p.failed),
                                     format_number(p.rate_bits.mean),
                                     format_number(p.rate_bits.standard_error),
                                     format_number(p.rate_bps.mean),
                                     format_number(p.rate_bps.standard_error),
                                     format_number(p.power_w.mean),
                                     format_number(p.power_w.standard_error),
                                     format_number(p.leaked_cci_w.mean),
                                     format_number(p.leaked_cci_w.standard_error),
                                     format_number(p.energy_efficiency.mean),
                                     format_number(p.energy_efficiency.standard_error),
                                     std::to_string(p.energy_efficiency.count),
                                     format_number(p.cci_violation_rate)};
        for (const MetricSummary& a : p.leaked_aci_w) {
            row.push_back(format_number(a.mean));
            row.push_back(format_number(a.standard_error));
        }
        write_csv_row(out, row);
    }
}

void write_trials_csv(std::ostream& out, const SweepResult& result) {
    const std::size_t l = result.points.empty() ? 0 : result.points.front().leaked_aci_w.size();
    std::vector<std::string> header{"trial",   "value",        "status",       "case",
                                    "rate_bits", "rate_bps",   "power_w",      "leaked_cci_w",
                                    "energy_efficiency", "kkt_residual"};
    for (std::size_t j = 0; j < l; ++j) header.push_back("leaked_aci_w_" + std::to_string(j + 1));
    write_csv_row(out, header);
    for (std::size_t t = 0; t < result.trials.size(); ++t) {
        for (std::size_t k = 0; k < result.trials[t].size(); ++k) {
            const TrialMetrics& m = result.trials[t][k];
            std::vector<std::string> row{std::to_string(t),
                                         format_number(result.points[k].value),
                                         m.ok ? "ok" : "failed",
                                         m.ok ? std::string(to_string(m.case_label)) : "",
                                         format_number(m.rate_bits),
                                         format_number(m.rate_bps),
                                         format_number(m.power_w),
                                         format_number(m.leaked_cci_w),
                                         format_number(m.energy_efficiency),
                                         format_number(m.kkt_residual)};
            for (double a : m.leaked_aci_w) row.push_back(format_number(a));
            write_csv_row(out, row);
        }
    }
}

}  // namespace crpower
