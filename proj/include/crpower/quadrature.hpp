#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace crpower {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    double min_panel_width = std::numeric_limits<double>::infinity();
};

namespace detail {

template <class F>
class AdaptiveSimpson {
public:
    AdaptiveSimpson(const F& f, int max_depth, int min_depth)
        : f_(f), max_depth_(max_depth), min_depth_(min_depth) {}

    QuadratureResult run(double a, double b, double tol) {
        const double fa = eval(a), fb = eval(b), fm = eval(0.5 * (a + b));
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        result_.value = refine(a, b, fa, fm, fb, whole, tol, 0);
        return result_;
    }

private:
    double eval(double x) {
        ++result_.evaluations;
        return f_(x);
    }

    // Lyness criterion |S2 - S1| <= 15 tol with Richardson correction. The
    // tolerance floor keeps the recursion from chasing round-off.
    double refine(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = eval(lm), frm = eval(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double diff = left + right - whole;
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::fabs(left + right);
        if (depth >= max_depth_ || (depth >= min_depth_ && std::fabs(diff) <= 15.0 * std::max(tol, floor))) {
            result_.error_estimate += std::fabs(diff) / 15.0;
            result_.min_panel_width = std::min(result_.min_panel_width, 0.5 * (b - a));
            return left + right + diff / 15.0;
        }
        return refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
               refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    }

    const F& f_;
    int max_depth_;
    int min_depth_;
    QuadratureResult result_;
};

}  // namespace detail

/// Adaptive Simpson quadrature of `f` over [a, b] with absolute error target
/// `tol` (split between halves on each refinement). The error test is
/// skipped for the first `min_depth` bisection levels.
template <class F>
QuadratureResult adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 50,
                                 int min_depth = 0) {
    if (a == b) return {};
    if (b < a) {
        QuadratureResult r = adaptive_simpson(f, b, a, tol, max_depth, min_depth);
        r.value = -r.value;
        return r;
    }
    return detail::AdaptiveSimpson<F>(f, max_depth, min_depth).run(a, b, tol);
}

/// Composite Simpson rule on `panels` uniform panels (rounded up to even).
template <class F>
double composite_simpson(const F& f, double a, double b, std::size_t panels) {
    if (panels < 2) panels = 2;
    if (panels % 2) ++panels;
    const double h = (b - a) / static_cast<double>(panels);
    double odd = 0.0, even = 0.0;
    for (std::size_t k = 1; k < panels; ++k) {
        const double v = f(a + h * static_cast<double>(k));
        (k % 2 ? odd : even) += v;
    }
    return h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

}  // namespace crpower
