#include "crpower/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace crpower {

namespace {

// f(p) = sum_i c_i p_i - r sum_i log2(1 + g_i p_i). Kept apart from the
// solver's evaluation on purpose.
struct Objective {
    std::vector<double> c;
    std::vector<double> g;
    double r = 0.0;

    Objective(const ProblemInstance& inst, Problem problem) : c(inst.subcarriers(), 0.0), g(inst.gamma) {
        if (problem == Problem::Op1) {
            std::fill(c.begin(), c.end(), inst.alpha);
            r = 1.0 - inst.alpha;
        } else {
            double total = 0.0;
            for (std::size_t l = 0; l < inst.pus(); ++l) {
                total += inst.aci_weights[l];
                for (std::size_t i = 0; i < c.size(); ++i) c[i] += inst.aci_weights[l] * inst.leakage(i, l);
            }
            r = 1.0 - total;
        }
    }

    double value(std::span<const double> p) const {
        double f = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) f += c[i] * p[i] - r * std::log1p(g[i] * p[i]) / std::numbers::ln2;
        return f;
    }

    double grad(std::size_t i, double p) const { return c[i] - r * g[i] / (std::numbers::ln2 * (1.0 + g[i] * p)); }

    double curvature(std::size_t i, double p) const {
        const double d = 1.0 + g[i] * p;
        return r * g[i] * g[i] / (std::numbers::ln2 * d * d);
    }
};

struct HalfSpace {
    std::vector<double> a;  // non-negative
    double b;
};

// Euclidean projection onto {x >= 0, a.x <= b}: x = max(0, y - theta a) with
// theta found on the sorted breakpoints y_i / a_i.
void project_clipped_halfspace(const HalfSpace& h, const std::vector<double>& y, std::vector<double>& x,
                               std::vector<std::size_t>& order) {
    const std::size_t n = y.size();
    double load = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::max(0.0, y[i]);
        load += h.a[i] * x[i];
    }
    if (load <= h.b) return;

    order.clear();
    for (std::size_t i = 0; i < n; ++i) {
        if (h.a[i] > 0.0 && y[i] > 0.0) order.push_back(i);
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t u, std::size_t v) { return y[u] * h.a[v] > y[v] * h.a[u]; });
    double s1 = 0.0, s2 = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t i = order[k];
        s1 += h.a[i] * y[i];
        s2 += h.a[i] * h.a[i];
        theta = (s1 - h.b) / s2;
        const double next = k + 1 < order.size() ? y[order[k + 1]] / h.a[order[k + 1]] : 0.0;
        if (theta >= next) break;
    }
    theta = std::max(theta, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (h.a[i] > 0.0) x[i] = std::max(0.0, y[i] - theta * h.a[i]);
    }
}

class Projector {
public:
    Projector(const ProblemInstance& inst, std::size_t max_cycles) : max_cycles_(max_cycles) {
        const std::size_t n = inst.subcarriers();
        spaces_.push_back({std::vector<double>(n, 1.0), inst.cci_budget});
        for (std::size_t l = 0; l < inst.pus(); ++l) {
            HalfSpace h{std::vector<double>(n), inst.aci_budgets[l]};
            for (std::size_t i = 0; i < n; ++i) h.a[i] = inst.leakage(i, l);
            spaces_.push_back(std::move(h));
        }
    }

    // Dykstra's alternating projections over the sets {x >= 0, a_k.x <= b_k}.
    std::vector<double> project(const std::vector<double>& y) const {
        const std::size_t n = y.size();
        const std::size_t sets = spaces_.size();
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = std::max(0.0, y[i]);
        if (feasible(x)) return x;

        std::vector<std::vector<double>> inc(sets, std::vector<double>(n, 0.0));
        std::vector<double> z(n), next(n), prev(n);
        std::vector<std::size_t> order;
        x = y;
        for (std::size_t cycle = 0; cycle < max_cycles_; ++cycle) {
            prev = x;
            double drift = 0.0;
            for (std::size_t s = 0; s < sets; ++s) {
                for (std::size_t i = 0; i < n; ++i) z[i] = x[i] + inc[s][i];
                project_clipped_halfspace(spaces_[s], z, next, order);
                for (std::size_t i = 0; i < n; ++i) {
                    const double updated = z[i] - next[i];
                    drift = std::max(drift, std::fabs(updated - inc[s][i]));
                    inc[s][i] = updated;
                    x[i] = next[i];
                }
            }
            // x can sit still while the increments are still moving.
            double change = drift, scale = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                change = std::max(change, std::fabs(x[i] - prev[i]));
                scale = std::max(scale, std::fabs(x[i]));
            }
            if (sets == 1 || change <= 1e-14 * scale) break;
        }
        shrink_into(x);
        return x;
    }

    // Relative violation, 0 if feasible.
    double violation(std::span<const double> x) const {
        double worst = 0.0;
        for (const HalfSpace& h : spaces_) worst = std::max(worst, (dot(h.a, x) - h.b) / h.b);
        return worst;
    }

private:
    static double dot(const std::vector<double>& a, std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += a[i] * x[i];
        return s;
    }

    bool feasible(const std::vector<double>& x) const {
        return std::all_of(spaces_.begin(), spaces_.end(), [&](const HalfSpace& h) { return dot(h.a, x) <= h.b; });
    }

    // Dykstra stops a hair outside; scaling towards 0 restores feasibility.
    void shrink_into(std::vector<double>& x) const {
        double s = 1.0;
        for (const HalfSpace& h : spaces_) {
            const double g = dot(h.a, x);
            if (g > h.b) s = std::min(s, h.b / g);
        }
        if (s < 1.0) {
            for (double& v : x) v *= s;
        }
    }

    std::vector<HalfSpace> spaces_;
    std::size_t max_cycles_;
};

OracleResult finish(const Objective& obj, const Projector& proj, std::vector<double> p, bool converged,
                    std::size_t iterations) {
    OracleResult out;
    out.objective = obj.value(p);
    out.max_violation = proj.violation(p);
    out.powers = std::move(p);
    out.converged = converged;
    out.iterations = iterations;
    return out;
}

// Spectral projected gradient: Barzilai-Borwein step with a non-monotone
// Armijo search along the projected direction.
OracleResult spectral_descent(const Objective& obj, const Projector& proj, const OracleSettings& s, std::size_t n) {
    constexpr std::size_t kMemory = 10;
    std::vector<double> p(n, 0.0), g(n), y(n), d(n), trial(n), g_new(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = obj.grad(i, p[i]);
    double f = obj.value(p);
    std::vector<double> history{f};

    const auto optimality = [&]() {
        for (std::size_t i = 0; i < n; ++i) y[i] = p[i] - g[i];
        const std::vector<double> x = proj.project(y);
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i] - p[i]));
        return m;
    };

    double step = 1.0 / std::max(optimality(), 1e-12);
    step = std::min(step, 1e12);
    for (std::size_t it = 1; it <= s.max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) y[i] = p[i] - s.step_size * step * g[i];
        const std::vector<double> x = proj.project(y);
        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = x[i] - p[i];
            slope += g[i] * d[i];
        }
        const double scale = std::max(1.0, std::fabs(f));
        if (-slope <= s.obj_tol * scale && optimality() <= s.obj_tol * (1.0 + *std::max_element(p.begin(), p.end()))) {
            return finish(obj, proj, p, true, it);
        }

        const double reference = *std::max_element(history.begin(), history.end());
        double t = 1.0, f_new = f;
        bool moved = false;
        for (int k = 0; k < 60; ++k, t *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = std::max(0.0, p[i] + t * d[i]);
            f_new = obj.value(trial);
            if (f_new <= reference + 1e-4 * t * slope) {
                moved = true;
                break;
            }
        }
        if (!moved) return finish(obj, proj, p, optimality() <= std::sqrt(s.obj_tol), it);

        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            g_new[i] = obj.grad(i, trial[i]);
            const double si = trial[i] - p[i];
            ss += si * si;
            sy += si * (g_new[i] - g[i]);
        }
        step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : 1e12;
        const double change = f - f_new;
        p = trial;
        g = g_new;
        f = f_new;
        history.push_back(f);
        if (history.size() > kMemory) history.erase(history.begin());
        if (std::fabs(change) <= s.obj_tol * scale * 1e-3 && optimality() <= std::sqrt(s.obj_tol)) {
            return finish(obj, proj, p, true, it);
        }
    }
    return finish(obj, proj, p, false, s.max_iters);
}

OracleResult lipschitz_descent(const Objective& obj, const Projector& proj, const OracleSettings& s, std::size_t n) {
    double lip = 0.0;
    for (std::size_t i = 0; i < n; ++i) lip = std::max(lip, obj.curvature(i, 0.0));
    if (!(lip > 0.0)) lip = 1.0;
    double step = s.step_size / lip;

    std::vector<double> p(n, 0.0), y(n);
    double f = obj.value(p);
    for (std::size_t it = 1; it <= s.max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) y[i] = p[i] - step * obj.grad(i, p[i]);
        std::vector<double> x = proj.project(y);
        const double f_new = obj.value(x);
        const double scale = std::max(1.0, std::fabs(f));
        if (f_new > f) {
            step *= 0.5;
            if (step * lip < 1e-12) return finish(obj, proj, p, false, it);
            continue;
        }
        const double change = f - f_new;
        p = std::move(x);
        f = f_new;
        if (change <= s.obj_tol * scale) return finish(obj, proj, p, true, it);
    }
    return finish(obj, proj, p, false, s.max_iters);
}

}  // namespace

OracleResult oracle_solve(const ProblemInstance& inst, Problem problem, const OracleSettings& settings) {
    validate_instance(inst, problem);
    if (!(settings.step_size > 0.0 && settings.feas_tol > 0.0 && settings.obj_tol > 0.0)) {
        throw std::invalid_argument("oracle settings: step size and tolerances must be positive");
    }
    const Objective obj(inst, problem);
    const Projector proj(inst, settings.projection_iters);
    OracleResult r = settings.metric == OracleMetric::Spectral
                         ? spectral_descent(obj, proj, settings, inst.subcarriers())
                         : lipschitz_descent(obj, proj, settings, inst.subcarriers());
    if (r.max_violation > settings.feas_tol) r.converged = false;
    return r;
}

std::vector<double> objective_gradient(const ProblemInstance& inst, Problem problem, std::span<const double> point) {
    const Objective obj(inst, problem);
    std::vector<double> g(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) g[i] = obj.grad(i, point[i]);
    return g;
}

double gradient_check(const ProblemInstance& inst, Problem problem, std::span<const double> point) {
    const Objective obj(inst, problem);
    std::vector<double> x(point.begin(), point.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = 1e-6 * (1.0 + std::fabs(point[i]));
        x[i] = point[i] + h;
        const double up = obj.value(x);
        x[i] = point[i] - h;
        const double down = obj.value(x);
        x[i] = point[i];
        worst = std::max(worst, std::fabs((up - down) / (2.0 * h) - obj.grad(i, point[i])));
    }
    return worst;
}

double relative_gap(double closed_form, double oracle) {
    return std::fabs(closed_form - oracle) / std::max(1.0, std::fabs(closed_form));
}

}  // namespace crpower
