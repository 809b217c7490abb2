#include "crpower/kkt_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

#include "crpower/csv.hpp"

namespace crpower {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxSweeps = 200;
constexpr int kMaxNewton = 20;
constexpr double kRidge = 1e-10;

double weight_sum(const ProblemInstance& inst) {
    return std::accumulate(inst.aci_weights.begin(), inst.aci_weights.end(), 0.0);
}

// p_i = [level / (base_i + lambda_0 + sum_l lambda_{l+1} leak_il) - 1/gamma_i]^+
//
// Multiplier index 0 is the CCI constraint, index l + 1 the ACI constraint
// of PU l. Both problems share this family; they differ in level and base.
class WaterFilling {
public:
    WaterFilling(const ProblemInstance& inst, Problem problem) : inst_(inst), base_(inst.subcarriers(), 0.0) {
        if (problem == Problem::Op1) {
            level_ = (1.0 - inst.alpha) / std::numbers::ln2;
            std::fill(base_.begin(), base_.end(), inst.alpha);
        } else {
            level_ = (1.0 - weight_sum(inst)) / std::numbers::ln2;
            for (std::size_t i = 0; i < base_.size(); ++i) {
                for (std::size_t l = 0; l < inst.pus(); ++l) base_[i] += inst.aci_weights[l] * inst.leakage(i, l);
            }
        }
    }

    std::size_t n() const { return inst_.subcarriers(); }
    std::size_t constraints() const { return inst_.pus() + 1; }
    double level() const { return level_; }
    double gamma(std::size_t i) const { return inst_.gamma[i]; }
    double base(std::size_t i) const { return base_[i]; }

    double coefficient(std::size_t i, std::size_t k) const { return k == 0 ? 1.0 : inst_.leakage(i, k - 1); }
    double budget(std::size_t k) const { return k == 0 ? inst_.cci_budget : inst_.aci_budgets[k - 1]; }

    double denominator(std::size_t i, std::span<const double> lambda) const {
        double d = base_[i];
        for (std::size_t k = 0; k < lambda.size(); ++k) {
            if (lambda[k] != 0.0) d += lambda[k] * coefficient(i, k);
        }
        return d;
    }

    double power(std::size_t i, double denom) const {
        const double g = inst_.gamma[i];
        if (!(g > 0.0) || level_ <= 0.0) return 0.0;
        if (denom <= 0.0) return kInf;
        return std::max(0.0, level_ / denom - 1.0 / g);
    }

    void powers(std::span<const double> lambda, std::vector<double>& out) const {
        out.resize(n());
        for (std::size_t i = 0; i < n(); ++i) out[i] = power(i, denominator(i, lambda));
    }

    double constraint(std::size_t k, const std::vector<double>& p) const {
        double g = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double a = coefficient(i, k);
            if (a != 0.0 && p[i] != 0.0) g += a * p[i];
        }
        return g;
    }

    // A multiplier this large drives every subcarrier touching constraint k
    // to zero power.
    double ceiling(std::size_t k) const {
        double hi = 0.0;
        for (std::size_t i = 0; i < n(); ++i) {
            const double a = coefficient(i, k);
            if (a > 0.0 && inst_.gamma[i] > 0.0) hi = std::max(hi, level_ * inst_.gamma[i] / a);
        }
        return hi;
    }

private:
    const ProblemInstance& inst_;
    double level_ = 0.0;
    std::vector<double> base_;
};

class MultiplierSearch {
public:
    MultiplierSearch(const WaterFilling& wf, std::vector<std::size_t> active, double tol)
        : wf_(wf), active_(std::move(active)), tol_(tol), lambda_(wf.constraints(), 0.0) {}

    MultiplierSolution run() {
        for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
            for (std::size_t k : active_) coordinate(k);
            if (converged()) return finish();
            newton();
            if (converged()) return finish();
        }
        wf_.powers(lambda_, p_);
        double worst = 0.0, comp = 0.0;
        for (std::size_t k : active_) {
            const double r = (wf_.constraint(k, p_) - wf_.budget(k)) / wf_.budget(k);
            worst = std::max(worst, r);
            comp = std::max(comp, lambda_[k] * std::fabs(r));
        }
        throw SolverError("multiplier search did not converge in " + std::to_string(kMaxSweeps) + " sweeps",
                          worst, comp);
    }

private:
    // Bisection on lambda_k with the others frozen, down to adjacent doubles.
    // Returns the feasible end of the final bracket.
    void coordinate(std::size_t k) {
        const double budget = wf_.budget(k);
        lambda_[k] = 0.0;
        wf_.powers(lambda_, p_);
        if (wf_.constraint(k, p_) <= budget) return;

        double lo = 0.0, hi = wf_.ceiling(k);
        if (!(hi > 0.0)) return;
        for (int it = 0; it < 4000; ++it) {
            double mid;
            if (lo == 0.0) {
                mid = hi * 1e-3;
                if (mid < 1e-300) mid = 0.5 * hi;
            } else if (hi > 4.0 * lo) {
                mid = std::sqrt(lo) * std::sqrt(hi);
            } else {
                mid = lo + 0.5 * (hi - lo);
            }
            if (!(mid > lo && mid < hi)) break;
            lambda_[k] = mid;
            wf_.powers(lambda_, p_);
            if (wf_.constraint(k, p_) > budget) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lambda_[k] = hi;
    }

    // Largest relative deviation: violation for inactive multipliers,
    // |slack| for positive ones.
    double merit(std::span<const double> lambda) {
        wf_.powers(lambda, p_);
        double m = 0.0;
        for (std::size_t k : active_) {
            const double r = (wf_.constraint(k, p_) - wf_.budget(k)) / wf_.budget(k);
            m = std::max(m, lambda[k] > 0.0 ? std::fabs(r) : std::max(0.0, r));
        }
        return m;
    }

    // Dual function: Lagrangian at the water-filling powers. Concave in
    // lambda; coordinate bisection never lowers it. Returns the value and
    // the magnitude of its largest term, for rounding comparisons.
    std::pair<double, double> dual(std::span<const double> lambda) {
        wf_.powers(lambda, p_);
        double sum = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < wf_.n(); ++i) {
            if (!(p_[i] > 0.0)) continue;
            const double a = wf_.denominator(i, lambda) * p_[i];
            const double b = wf_.level() * std::log1p(wf_.gamma(i) * p_[i]);
            sum += a - b;
            scale = std::max({scale, std::fabs(a), std::fabs(b)});
        }
        for (std::size_t k : active_) {
            const double t = lambda[k] * wf_.budget(k);
            sum -= t;
            scale = std::max(scale, t);
        }
        return {sum, scale};
    }

    bool converged() {
        wf_.powers(lambda_, p_);
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(wf_.n());
        for (double v : p_) {
            if (!std::isfinite(v)) return false;
        }
        for (std::size_t k : active_) {
            const double r = (wf_.constraint(k, p_) - wf_.budget(k)) / wf_.budget(k);
            if (r > tol_) return false;
            if (lambda_[k] > 0.0 && std::fabs(r) > floor && lambda_[k] * std::fabs(r) > tol_) return false;
        }
        return true;
    }

    // Projected Newton ascent on the dual. Free set: positive multipliers and
    // violated constraints; the rest stay pinned at zero. The small ridge
    // lets the step travel along flat directions of the dual, which appear
    // when fewer subcarriers carry power than there are binding constraints.
    void newton() {
        for (int it = 0; it < kMaxNewton; ++it) {
            const auto [d0, scale] = dual(lambda_);
            const double current = merit(lambda_);
            if (!std::isfinite(current) || current == 0.0 || !std::isfinite(d0)) return;
            const double noise = 16.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(wf_.n()) * scale;

            std::vector<std::size_t> set;
            for (std::size_t k : active_) {
                if (lambda_[k] > 0.0 || wf_.constraint(k, p_) > wf_.budget(k)) set.push_back(k);
            }
            if (set.empty()) return;
            const auto s = static_cast<Eigen::Index>(set.size());

            Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(s, s);
            Eigen::VectorXd residual(s);
            for (Eigen::Index a = 0; a < s; ++a) {
                residual(a) = wf_.constraint(set[a], p_) - wf_.budget(set[a]);
            }
            for (std::size_t i = 0; i < wf_.n(); ++i) {
                if (!(p_[i] > 0.0)) continue;
                const double d = wf_.denominator(i, lambda_);
                const double w = wf_.level() / (d * d);
                for (Eigen::Index a = 0; a < s; ++a) {
                    const double ca = wf_.coefficient(i, set[a]);
                    if (ca == 0.0) continue;
                    for (Eigen::Index b = 0; b < s; ++b) jac(a, b) += ca * wf_.coefficient(i, set[b]) * w;
                }
            }
            const double ridge = kRidge * jac.diagonal().maxCoeff();
            if (!(ridge > 0.0)) return;
            jac.diagonal().array() += ridge;
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(jac);
            if (ldlt.info() != Eigen::Success) return;
            const Eigen::VectorXd step = ldlt.solve(residual);
            if (!step.allFinite()) return;

            std::vector<double> trial = lambda_;
            bool accepted = false;
            for (double t = 1.0; t > 1e-20; t *= 0.5) {
                for (Eigen::Index a = 0; a < s; ++a) trial[set[a]] = std::max(0.0, lambda_[set[a]] + t * step(a));
                // Ascent on the dual keeps Newton and the coordinate pass
                // from undoing each other; merit settles rounding-level ties.
                const double d = dual(trial).first;
                if (d > d0 + noise || (d >= d0 - noise && merit(trial) < current)) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) return;
            lambda_ = trial;
        }
    }

    MultiplierSolution finish() {
        wf_.powers(lambda_, p_);
        MultiplierSolution out;
        out.powers = p_;
        out.lambda_cci = lambda_[0];
        out.lambda_aci.assign(lambda_.begin() + 1, lambda_.end());
        return out;
    }

    const WaterFilling& wf_;
    std::vector<std::size_t> active_;
    double tol_;
    std::vector<double> lambda_;
    std::vector<double> p_;
};

std::vector<std::size_t> cci_set() { return {0}; }

std::vector<std::size_t> aci_set(std::size_t pus) {
    std::vector<std::size_t> set(pus);
    std::iota(set.begin(), set.end(), std::size_t{1});
    return set;
}

std::vector<std::size_t> all_set(std::size_t pus) {
    std::vector<std::size_t> set(pus + 1);
    std::iota(set.begin(), set.end(), std::size_t{0});
    return set;
}

MultiplierSolution search(const ProblemInstance& inst, Problem problem, std::vector<std::size_t> set, double tol) {
    validate_instance(inst, problem);
    const WaterFilling wf(inst, problem);
    return MultiplierSearch(wf, std::move(set), tol).run();
}

std::vector<double> unconstrained(const ProblemInstance& inst, Problem problem) {
    validate_instance(inst, problem);
    const WaterFilling wf(inst, problem);
    std::vector<double> p(inst.subcarriers(), 0.0);
    if (wf.level() <= 0.0) return p;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (inst.gamma[i] > 0.0 && !(wf.base(i) > 0.0)) {
            throw std::domain_error("unconstrained solution is unbounded on subcarrier " + std::to_string(i) +
                                    " (zero price on power)");
        }
        p[i] = wf.power(i, wf.base(i));
    }
    return p;
}

bool violates(const WaterFilling& wf, const std::vector<double>& p, std::size_t k) {
    return wf.constraint(k, p) >= wf.budget(k);
}

bool exceeds(const WaterFilling& wf, const std::vector<double>& p, std::size_t k, double tol) {
    return wf.constraint(k, p) > wf.budget(k) * (1.0 + tol);
}

CaseLabel label_for(const MultiplierSolution& s) {
    const bool cci = s.lambda_cci > 0.0;
    const bool aci = std::any_of(s.lambda_aci.begin(), s.lambda_aci.end(), [](double v) { return v > 0.0; });
    if (cci && aci) return CaseLabel::BothActive;
    if (cci) return CaseLabel::CciActive;
    if (aci) return CaseLabel::AciActive;
    return CaseLabel::Unconstrained;
}

SolverOutcome dispatch(const ProblemInstance& inst, Problem problem, double tol) {
    validate_instance(inst, problem);
    const WaterFilling wf(inst, problem);
    const std::size_t l = inst.pus();

    MultiplierSolution sol;
    sol.lambda_aci.assign(l, 0.0);
    bool redispatched = false;

    bool bounded = wf.level() > 0.0;
    for (std::size_t i = 0; bounded && i < inst.subcarriers(); ++i) {
        if (inst.gamma[i] > 0.0 && !(wf.base(i) > 0.0)) bounded = false;
    }

    if (wf.level() <= 0.0) {
        sol.powers.assign(inst.subcarriers(), 0.0);
    } else if (!bounded) {
        sol = MultiplierSearch(wf, all_set(l), tol).run();
    } else {
        std::vector<double> p(inst.subcarriers());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = wf.power(i, wf.base(i));
        const bool cci = violates(wf, p, 0);
        bool aci = false;
        for (std::size_t k = 1; k <= l; ++k) aci = aci || violates(wf, p, k);

        if (cci && aci) {
            sol = MultiplierSearch(wf, all_set(l), tol).run();
        } else if (cci) {
            sol = MultiplierSearch(wf, cci_set(), tol).run();
            sol.lambda_aci.assign(l, 0.0);
            bool broken = false;
            for (std::size_t k = 1; k <= l; ++k) broken = broken || exceeds(wf, sol.powers, k, tol);
            if (broken) {
                sol = MultiplierSearch(wf, all_set(l), tol).run();
                redispatched = true;
            }
        } else if (aci) {
            sol = MultiplierSearch(wf, aci_set(l), tol).run();
            if (exceeds(wf, sol.powers, 0, tol)) {
                sol = MultiplierSearch(wf, all_set(l), tol).run();
                redispatched = true;
            }
        } else {
            sol.powers = std::move(p);
        }
    }

    SolverOutcome out;
    out.powers = std::move(sol.powers);
    out.lambda_cci = sol.lambda_cci;
    out.lambda_aci = std::move(sol.lambda_aci);
    out.lambda_aci.resize(l, 0.0);
    out.redispatched = redispatched;
    MultiplierSolution labelled{{}, out.lambda_cci, out.lambda_aci};
    out.case_label = label_for(labelled);
    out.residuals = kkt_residuals(inst, problem, out.powers, out.lambda_cci, out.lambda_aci);
    const KktResiduals& r = out.residuals;
    out.kkt_residual = std::max({r.stationarity, r.complementarity, r.max_violation});

    for (double v : out.powers) {
        if (!std::isfinite(v)) throw SolverError("solution has unbounded power", kInf, r.complementarity);
    }
    if (r.max_violation > tol) {
        throw SolverError("returned powers violate a constraint by a relative " + format_number(r.max_violation, 3),
                          r.max_violation, r.complementarity);
    }
    return out;
}

}  // namespace

SolverError::SolverError(const std::string& what, double max_violation, double complementarity)
    : std::runtime_error(what), max_violation_(max_violation), complementarity_(complementarity) {}

std::string_view to_string(CaseLabel label) {
    switch (label) {
        case CaseLabel::Unconstrained: return "unconstrained";
        case CaseLabel::CciActive: return "cci_active";
        case CaseLabel::AciActive: return "aci_active";
        case CaseLabel::BothActive: return "both_active";
    }
    return "unknown";
}

void validate_instance(const ProblemInstance& inst, Problem problem) {
    const std::size_t n = inst.subcarriers();
    const std::size_t l = inst.pus();
    if (n == 0) throw std::invalid_argument("instance has no subcarriers");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(inst.gamma[i] >= 0.0) || !std::isfinite(inst.gamma[i])) {
            throw std::invalid_argument("gamma[" + std::to_string(i) + "] must be finite and non-negative");
        }
    }
    if (!(inst.cci_budget > 0.0)) throw std::invalid_argument("CCI budget must be positive");
    for (std::size_t k = 0; k < l; ++k) {
        if (!(inst.aci_budgets[k] > 0.0)) {
            throw std::invalid_argument("ACI budget of PU " + std::to_string(k + 1) + " must be positive");
        }
    }
    if (inst.leakage.subcarriers() != n || inst.leakage.pus() != l) {
        throw std::invalid_argument("leakage matrix is " + std::to_string(inst.leakage.subcarriers()) + "x" +
                                    std::to_string(inst.leakage.pus()) + ", expected " + std::to_string(n) + "x" +
                                    std::to_string(l));
    }
    for (double v : inst.leakage.values()) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("leakage factors must lie in [0, 1]");
    }
    if (problem == Problem::Op1) {
        if (!(inst.alpha >= 0.0 && inst.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    } else {
        if (inst.aci_weights.size() != l) {
            throw std::invalid_argument("expected " + std::to_string(l) + " ACI weights, got " +
                                        std::to_string(inst.aci_weights.size()));
        }
        for (double w : inst.aci_weights) {
            if (!(w >= 0.0)) throw std::invalid_argument("ACI weights must be non-negative");
        }
        if (weight_sum(inst) > 1.0 + 1e-12) throw std::invalid_argument("ACI weights must sum to at most 1");
    }
}

std::vector<double> unconstrained_op1(const ProblemInstance& inst) {
    if (inst.alpha == 0.0) throw std::domain_error("unconstrained_op1: alpha = 0 has no finite solution");
    return unconstrained(inst, Problem::Op1);
}

MultiplierSolution cci_active_op1(const ProblemInstance& inst, double tol) {
    return search(inst, Problem::Op1, cci_set(), tol);
}

MultiplierSolution aci_active_op1(const ProblemInstance& inst, double tol) {
    return search(inst, Problem::Op1, aci_set(inst.pus()), tol);
}

MultiplierSolution both_active_op1(const ProblemInstance& inst, double tol) {
    return search(inst, Problem::Op1, all_set(inst.pus()), tol);
}

SolverOutcome solve_op1(const ProblemInstance& inst, double tol) { return dispatch(inst, Problem::Op1, tol); }

std::vector<double> unconstrained_op2(const ProblemInstance& inst) { return unconstrained(inst, Problem::Op2); }

MultiplierSolution cci_active_op2(const ProblemInstance& inst, double tol) {
    return search(inst, Problem::Op2, cci_set(), tol);
}

MultiplierSolution aci_active_op2(const ProblemInstance& inst, double tol) {
    return search(inst, Problem::Op2, aci_set(inst.pus()), tol);
}

MultiplierSolution both_active_op2(const ProblemInstance& inst, double tol) {
    return search(inst, Problem::Op2, all_set(inst.pus()), tol);
}

SolverOutcome solve_op2(const ProblemInstance& inst, double tol) { return dispatch(inst, Problem::Op2, tol); }

SolverOutcome solve(const ProblemInstance& inst, Problem problem, double tol) {
    return dispatch(inst, problem, tol);
}

double total_power(std::span<const double> powers) {
    return std::accumulate(powers.begin(), powers.end(), 0.0);
}

double aci_leakage(const ProblemInstance& inst, std::span<const double> powers, std::size_t pu) {
    double g = 0.0;
    for (std::size_t i = 0; i < powers.size(); ++i) g += inst.leakage(i, pu) * powers[i];
    return g;
}

double sum_rate_bits(std::span<const double> gamma, std::span<const double> powers) {
    double r = 0.0;
    for (std::size_t i = 0; i < powers.size(); ++i) r += std::log2(1.0 + gamma[i] * powers[i]);
    return r;
}

double objective_value(const ProblemInstance& inst, Problem problem, std::span<const double> powers) {
    const double rate = sum_rate_bits(inst.gamma, powers);
    if (problem == Problem::Op1) return inst.alpha * total_power(powers) - (1.0 - inst.alpha) * rate;
    double leak = 0.0;
    for (std::size_t l = 0; l < inst.pus(); ++l) leak += inst.aci_weights[l] * aci_leakage(inst, powers, l);
    return leak - (1.0 - weight_sum(inst)) * rate;
}

KktResiduals kkt_residuals(const ProblemInstance& inst, Problem problem, std::span<const double> powers,
                           double lambda_cci, std::span<const double> lambda_aci) {
    const WaterFilling wf(inst, problem);
    std::vector<double> lambda{lambda_cci};
    lambda.insert(lambda.end(), lambda_aci.begin(), lambda_aci.end());
    lambda.resize(inst.pus() + 1, 0.0);

    KktResiduals r;
    r.min_implied_multiplier = kInf;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        const double p = powers[i];
        r.negative_power = std::min(r.negative_power, p);
        const double price = wf.denominator(i, lambda);
        const double g = inst.gamma[i];
        const double marginal = g > 0.0 ? wf.level() / (p + 1.0 / g) : 0.0;
        if (p > 0.0) {
            r.stationarity = std::max(r.stationarity, std::fabs(price - marginal));
        } else {
            r.min_implied_multiplier = std::min(r.min_implied_multiplier, price - marginal);
        }
    }
    if (r.min_implied_multiplier == kInf) r.min_implied_multiplier = 0.0;

    std::vector<double> p(powers.begin(), powers.end());
    for (std::size_t k = 0; k < wf.constraints(); ++k) {
        const double rel = (wf.constraint(k, p) - wf.budget(k)) / wf.budget(k);
        r.max_violation = std::max(r.max_violation, rel);
        r.complementarity = std::max(r.complementarity, lambda[k] * std::fabs(rel));
    }
    return r;
}

void write_outcome_csv(std::ostream& out, const ProblemInstance& inst, Problem problem,
                       const SolverOutcome& outcome) {
    const auto row = [&](const std::string& field, const std::string& index, const std::string& value) {
        write_csv_row(out, {field, index, value});
    };
    const auto num = [](double v) { return format_number(v, 15); };
    write_csv_row(out, {"field", "index", "value"});
    row("problem", "", std::string(to_string(problem)));
    row("case", "", std::string(to_string(outcome.case_label)));
    row("redispatched", "", outcome.redispatched ? "1" : "0");
    row("objective", "", num(objective_value(inst, problem, outcome.powers)));
    row("total_power_w", "", num(total_power(outcome.powers)));
    row("lambda_cci", "", num(outcome.lambda_cci));
    row("kkt_residual", "", num(outcome.kkt_residual));
    row("stationarity", "", num(outcome.residuals.stationarity));
    row("complementarity", "", num(outcome.residuals.complementarity));
    row("max_violation", "", num(outcome.residuals.max_violation));
    for (std::size_t l = 0; l < inst.pus(); ++l) {
        row("lambda_aci", std::to_string(l + 1), num(outcome.lambda_aci[l]));
        row("aci_leakage_w", std::to_string(l + 1), num(aci_leakage(inst, outcome.powers, l)));
    }
    for (std::size_t i = 0; i < outcome.powers.size(); ++i) {
        row("power_w", std::to_string(i + 1), num(outcome.powers[i]));
    }
}

}  // namespace crpower
