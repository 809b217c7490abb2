#include "crpower/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "crpower/channel_model.hpp"
#include "crpower/config.hpp"
#include "crpower/csv.hpp"
#include "crpower/instance_generator.hpp"
#include "crpower/kkt_solver.hpp"
#include "crpower/montecarlo.hpp"
#include "crpower/oracle.hpp"
#include "crpower/scenario.hpp"
#include "crpower/spectral_leakage.hpp"

namespace crpower {

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<double> tol;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> problem;
    std::string axis = "cci";
    std::string values;
    std::string trials_out;
    std::size_t count = 100;
    std::size_t n = 8;
    std::size_t l = 2;
};

// Thrown for anything that should end with exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw UsageError("cannot open '" + path + "' for writing");
        stream_ = file_.get();
    }
    std::ostream& stream() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

ScenarioConfig scenario_with_overrides(const KeyValueFile& file, const Options& o) {
    ScenarioConfig c = scenario_from(file);
    if (o.tol) c.solver_tol = *o.tol;
    if (o.trials) c.trials = *o.trials;
    if (o.seed) c.root_seed = *o.seed;
    if (o.problem) c.problem = parse_problem(*o.problem);
    c.validate();
    return c;
}

KeyValueFile load_config(const Options& o) {
    if (o.config.empty()) return KeyValueFile::parse("");
    return KeyValueFile::load(o.config);
}

bool is_instance_file(const KeyValueFile& file) {
    const auto keys = file.keys();
    return std::any_of(keys.begin(), keys.end(), [](const std::string& k) { return k.rfind("instance.", 0) == 0; });
}

std::vector<double> list_or_empty(const KeyValueFile& f, const std::string& key) {
    return f.contains(key) ? f.number_list(key) : std::vector<double>{};
}

void require_positive(const std::vector<double>& xs, const std::string& key) {
    for (double x : xs) {
        if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(key, "budget must be positive");
    }
}

// instance.gamma, instance.alpha, instance.weights, instance.cci_budget_w,
// instance.aci_budgets_w, instance.leakage (row-major N x L), solver.problem,
// solver.tol.
ProblemInstance instance_from(const KeyValueFile& f, Problem& problem, double& tol) {
    ProblemInstance inst;
    if (!f.contains("instance.gamma")) throw ConfigError("instance.gamma", "missing");
    inst.gamma = f.number_list("instance.gamma");
    inst.alpha = f.number_or("instance.alpha", 0.5);
    inst.cci_budget = f.number("instance.cci_budget_w");
    require_positive({inst.cci_budget}, "instance.cci_budget_w");
    inst.aci_budgets = list_or_empty(f, "instance.aci_budgets_w");
    require_positive(inst.aci_budgets, "instance.aci_budgets_w");
    inst.aci_weights = list_or_empty(f, "instance.weights");
    const std::size_t n = inst.gamma.size();
    const std::size_t l = inst.aci_budgets.size();
    std::vector<double> leak = list_or_empty(f, "instance.leakage");
    if (leak.size() != n * l) {
        throw ConfigError("instance.leakage", "expected " + std::to_string(n * l) + " values (N x L, row-major), got " +
                                                  std::to_string(leak.size()));
    }
    inst.leakage = LeakageMatrix(n, l, std::move(leak));
    problem = parse_problem(f.string_or("solver.problem", std::string(to_string(problem))));
    tol = f.number_or("solver.tol", tol);
    if (problem == Problem::Op2 && inst.aci_weights.empty()) inst.aci_weights.assign(l, 0.0);
    if (const auto unused = f.unused_keys(); !unused.empty()) throw ConfigError(unused.front(), "unknown key");
    return inst;
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
    const KeyValueFile file = load_config(o);
    ProblemInstance inst;
    Problem problem = Problem::Op1;
    double tol = 1e-8;
    if (is_instance_file(file)) {
        inst = instance_from(file, problem, tol);
        if (o.problem) problem = parse_problem(*o.problem);
        if (o.tol) tol = *o.tol;
    } else {
        const ScenarioConfig c = scenario_with_overrides(file, o);
        problem = c.problem;
        tol = c.solver_tol;
        const ChannelRealization r = draw_realization(trial_seed(c.root_seed, 0), c);
        inst = build_instance(c, r, build_leakage_matrix(c));
    }
    try {
        validate_instance(inst, problem);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    try {
        const SolverOutcome outcome = solve(inst, problem, tol);
        Output sink(o.out, out);
        write_outcome_csv(sink.stream(), inst, problem, outcome);
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << " (max violation " << format_number(e.max_violation(), 3)
            << ", complementarity " << format_number(e.complementarity(), 3) << ")\n";
        return kExitSolverFailure;
    }
    return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    const ScenarioConfig c = scenario_with_overrides(load_config(o), o);
    SweepAxis axis;
    try {
        axis = parse_axis(o.axis);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (o.values.empty()) throw UsageError("--values is required for sweep");
    const std::vector<double> values = parse_number_list(o.values, "--values");
    if (values.empty()) throw UsageError("--values: empty list");
    if (!std::is_sorted(values.begin(), values.end())) throw UsageError("--values must be sorted ascending");

    const SweepResult result = run_sweep(c, axis, values, !o.trials_out.empty());
    Output sink(o.out, out);
    write_sweep_csv(sink.stream(), result);
    if (!o.trials_out.empty()) {
        Output trials(o.trials_out, out);
        write_trials_csv(trials.stream(), result);
    }
    std::size_t failed = 0;
    for (const SweepPoint& p : result.points) failed += p.failed;
    if (failed > 0) {
        err << failed << " trial(s) failed in the solver\n";
        return kExitSolverFailure;
    }
    return kExitOk;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.n == 0 || o.n > 64) throw UsageError("--n must lie in [1, 64]");
    std::vector<Problem> problems{Problem::Op1, Problem::Op2};
    if (o.problem) problems = {parse_problem(*o.problem)};
    const double tol = o.tol.value_or(1e-8);
    constexpr double kAlphas[] = {0.0, 0.1, 0.5, 0.9};
    constexpr double kGapLimit = 1e-5;

    std::mt19937_64 rng(o.seed.value_or(1));
    double max_gap = 0.0, max_violation = 0.0, max_kkt = 0.0;
    std::size_t runs = 0, nonconverged = 0, failures = 0;
    for (std::size_t k = 0; k < o.count; ++k) {
        for (Problem problem : problems) {
            const ProblemInstance inst = random_instance(rng, o.n, o.l, kAlphas[k % 4], problem);
            ++runs;
            SolverOutcome closed;
            try {
                closed = solve(inst, problem, tol);
            } catch (const SolverError& e) {
                ++failures;
                err << "instance " << k << " (" << to_string(problem) << "): " << e.what() << "\n";
                continue;
            }
            const OracleResult oracle = oracle_solve(inst, problem);
            if (!oracle.converged) ++nonconverged;
            max_gap = std::max(max_gap, relative_gap(objective_value(inst, problem, closed.powers), oracle.objective));
            max_violation = std::max({max_violation, closed.residuals.max_violation, oracle.max_violation});
            max_kkt = std::max(max_kkt, closed.kkt_residual);
        }
    }
    const bool gap_ok = max_gap <= kGapLimit;
    const bool oracle_ok = static_cast<double>(nonconverged) <= 0.01 * static_cast<double>(runs);
    const char* status = failures > 0 ? "solver_failure" : (gap_ok && oracle_ok ? "pass" : "fail");

    Output sink(o.out, out);
    std::ostream& s = sink.stream();
    write_csv_row(s, {"metric", "value"});
    write_csv_row(s, {"instances", std::to_string(runs)});
    write_csv_row(s, {"max_relative_gap", format_number(max_gap)});
    write_csv_row(s, {"max_violation", format_number(max_violation)});
    write_csv_row(s, {"max_kkt_residual", format_number(max_kkt)});
    write_csv_row(s, {"oracle_nonconverged", std::to_string(nonconverged)});
    write_csv_row(s, {"solver_failures", std::to_string(failures)});
    write_csv_row(s, {"status", status});

    if (failures > 0) return kExitSolverFailure;
    if (!gap_ok) err << "objective gap " << format_number(max_gap, 3) << " exceeds " << kGapLimit << "\n";
    if (!oracle_ok) err << "oracle failed to converge on " << nonconverged << " of " << runs << " instances\n";
    return gap_ok && oracle_ok ? kExitOk : kExitValidationGap;
}

int cmd_leakage(const Options& o, std::ostream& out, std::ostream&) {
    const ScenarioConfig c = scenario_with_overrides(load_config(o), o);
    const LeakageMatrix m = build_leakage_matrix(c);
    Output sink(o.out, out);
    write_leakage_csv(sink.stream(), m);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multiobjective OFDM power allocation for cognitive radio", "crpower"};
    app.require_subcommand(1);
    Options o;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--out", o.out, "Output CSV path (default stdout)");
        sub->add_option("--tol", o.tol, "Relative solver tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--problem", o.problem, "op1 or op2")->check(CLI::IsMember({"op1", "op2"}));
    };

    CLI::App* solve_cmd = app.add_subcommand("solve", "Solve one instance or one drawn scenario realization");
    solve_cmd->add_option("--config", o.config, "Instance or scenario file")->required();
    solve_cmd->add_option("--seed", o.seed, "Root seed for scenario files");
    common(solve_cmd);

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep over one scenario parameter");
    sweep_cmd->add_option("--config", o.config, "Scenario file (defaults apply when omitted)");
    sweep_cmd->add_option("--axis", o.axis, "cci, aci or alpha")->check(CLI::IsMember({"cci", "aci", "alpha"}));
    sweep_cmd->add_option("--values", o.values, "Comma separated axis values")->required();
    sweep_cmd->add_option("--trials", o.trials, "Trials per axis value")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--seed", o.seed, "Root seed");
    sweep_cmd->add_option("--trials-out", o.trials_out, "Per-trial long-format CSV");
    common(sweep_cmd);

    CLI::App* validate_cmd = app.add_subcommand("validate", "Compare closed forms with the oracle");
    validate_cmd->add_option("--count", o.count, "Random instances per problem");
    validate_cmd->add_option("--n", o.n, "Subcarriers (<= 64)");
    validate_cmd->add_option("--l", o.l, "Adjacent PUs");
    validate_cmd->add_option("--seed", o.seed, "Generator seed");
    common(validate_cmd);

    CLI::App* leakage_cmd = app.add_subcommand("leakage", "Write the leakage matrix of a scenario");
    leakage_cmd->add_option("--config", o.config, "Scenario file (defaults apply when omitted)");
    leakage_cmd->add_option("--out", o.out, "Output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*solve_cmd) return cmd_solve(o, out, err);
        if (*sweep_cmd) return cmd_sweep(o, out, err);
        if (*validate_cmd) return cmd_validate(o, out, err);
        return cmd_leakage(o, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << "\n";
        return kExitSolverFailure;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace crpower
