#pragma once
// Adaptive Simpson quadrature with explicit split points for integrands that
// jump at known breakpoints.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace obliq {

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double fa, double m,
                      double fm, double b, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_step(const std::function<double(double)>& f, double a, double fa, double b,
                            double fb, double m, double fm, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(f, a, fa, lm, flm, m, fm);
    double right = simpson(f, m, fm, rm, frm, b, fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                        const std::vector<double>& splits = {}) {
    if (!(b > a)) return 0.0;
    std::vector<double> nodes{a, b};
    for (double s : splits)
        if (s > a && s < b) nodes.push_back(s);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        double lo = nodes[k], hi = nodes[k + 1];
        // Evaluate strictly inside the panel so right-continuous jumps at
        // panel ends do not leak across.
        double eps = (hi - lo) * 1e-12;
        double fa = f(lo + eps), fb = f(hi - eps);
        double m = 0.5 * (lo + hi), fm = f(m);
        double whole = detail::simpson(f, lo, fa, m, fm, hi, fb);
        double seg_tol = tol * (hi - lo) / (b - a);
        total += detail::adaptive_step(f, lo, fa, hi, fb, m, fm, whole, seg_tol, 40);
    }
    return total;
}

}  // namespace obliq
