#include "obliq/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "obliq/quadrature.hpp"

namespace obliq {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

AnalyticGh::AnalyticGh(AnalyticParams p, int grid_points) : params_(p) {
    require(p.c > 0.0 && p.c < 1.0, "analytic params need 0 < c < 1");
    gc_ = p.a - p.b * std::exp(p.c);
    require(gc_ > 0.0, "analytic params need a - b e^c > 0");
    require(p.a - p.b <= 1.0 && p.a - p.b >= -1.0, "g(0) must lie in [-1, 1] for h");
    require(grid_points >= 100, "grid too coarse");

    // Cumulative Simpson for H on a uniform grid with c snapped to a node.
    step_ = 1.0 / grid_points;
    hgrid_.resize(grid_points + 1);
    hgrid_[0] = 0.0;
    double acc = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        double lo = k * step_, hi = (k + 1) * step_;
        auto piece = [&](double a, double b) {
            double m = 0.5 * (a + b);
            return (b - a) / 6.0 * (h(a) + 4.0 * h(m) + h(b));
        };
        if (lo < params_.c && params_.c < hi) {
            acc += piece(lo, params_.c) + piece(params_.c, hi);
        } else {
            acc += piece(lo, hi);
        }
        hgrid_[k + 1] = acc;
    }
}

double AnalyticGh::g(double y) const {
    return params_.a - params_.b * std::exp(std::min(y, params_.c));
}

double AnalyticGh::g_prime(double y) const {
    return y <= params_.c ? -params_.b * std::exp(y) : 0.0;
}

double AnalyticGh::h(double y) const {
    double gy = g(y);
    double s = 1.0 - gy * gy;
    if (s < -1e-12) throw std::domain_error("|g(y)| > 1: h undefined");
    return std::sqrt(std::max(0.0, s));
}

double AnalyticGh::G(double y) const {
    const double a = params_.a, b = params_.b, c = params_.c;
    if (y <= c) return a * y - b * (std::exp(y) - 1.0);
    double Gc = a * c - b * (std::exp(c) - 1.0);
    return Gc + (y - c) * gc_;
}

double AnalyticGh::H(double y) const {
    require(y >= 0.0 && y <= 1.0, "H argument outside [0,1]");
    double x = y / step_;
    int k = std::min(static_cast<int>(x), static_cast<int>(hgrid_.size()) - 2);
    double frac = x - k;
    return hgrid_[k] + frac * (hgrid_[k + 1] - hgrid_[k]);
}

double AnalyticGh::g_inverse(double z) const {
    const double a = params_.a, b = params_.b, c = params_.c;
    if (z >= g(0.0)) return 0.0;
    if (z < gc_) return 1.0;  // only the artificial g(1) = 0 qualifies
    double x = std::log((a - z) / b);
    return std::clamp(x, 0.0, c);
}

ConditionCheck check_condition(const AnalyticParams& p) {
    AnalyticGh gh(p, 2000);
    double h1 = gh.h(1.0);
    auto val = [&](double y) { return h1 * (gh.g(y) - gh.g_prime(y)); };
    double best = -1.0, besty = 0.0;
    const int steps = 10000;  // grid 1e-4
    for (int k = 0; k <= steps; ++k) {
        double y = static_cast<double>(k) / steps;
        double v = val(y);
        if (v > best) {
            best = v;
            besty = y;
        }
    }
    // Local refinement around the grid maximum.
    double lo = std::max(0.0, besty - 1.0 / steps), hi = std::min(1.0, besty + 1.0 / steps);
    for (int it = 0; it < 60; ++it) {
        double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (val(m1) < val(m2))
            lo = m1;
        else
            hi = m2;
    }
    best = std::max(best, val(0.5 * (lo + hi)));
    ConditionCheck r;
    r.max_value = best;
    r.applicable = best < 1.0;
    return r;
}

MonotoneFn monotone_from_grid(const GridStep& s) {
    auto sp = std::make_shared<GridStep>(s);
    MonotoneFn fn;
    fn.eval = [sp](double y) { return sp->value_at(y); };
    fn.inverse = [sp](double y) { return sp->inverse_at(y); };
    for (int k = 1; k < s.n; ++k) fn.breakpoints.push_back(static_cast<double>(k) / s.n);
    return fn;
}

MonotoneFn monotone_constant(double v) {
    MonotoneFn fn;
    fn.eval = [v](double) { return v; };
    fn.inverse = [v](double y) { return v > y ? 0.0 : 1.0; };
    return fn;
}

ScalarFn scalar_from_step(const StepFunction& f) {
    auto sp = std::make_shared<StepFunction>(f);
    ScalarFn fn;
    fn.eval = [sp](double y) { return (*sp)(y); };
    fn.breakpoints = f.breakpoints();
    return fn;
}

ScalarFn scalar_from_analytic(const AnalyticGh& gh, bool take_g) {
    ScalarFn fn;
    if (take_g)
        fn.eval = [&gh](double y) { return gh.g(y); };
    else
        fn.eval = [&gh](double y) { return gh.h(y); };
    fn.breakpoints = {gh.params().c};
    return fn;
}

namespace {

void require_monotone(const MonotoneFn& f, const char* what) {
    const int samples = 512;
    double prev = f.eval(0.0);
    for (int k = 1; k <= samples; ++k) {
        double y = static_cast<double>(k) / samples;
        double v = f.eval(y);
        if (v < prev - 1e-12) throw std::domain_error(std::string(what) + " is not non-decreasing");
        prev = v;
    }
}

}  // namespace

double universal_bound_numeric(const ScalarFn& g, const ScalarFn& h, const MonotoneFn& theta,
                               const MonotoneFn& beta, double tol) {
    require_monotone(theta, "theta");
    require_monotone(beta, "beta");

    std::vector<double> splits;
    auto add = [&](const std::vector<double>& v) { splits.insert(splits.end(), v.begin(), v.end()); };
    add(g.breakpoints);
    add(h.breakpoints);
    add(theta.breakpoints);
    add(beta.breakpoints);
    // beta^{-1} (resp. theta^{-1}) jumps where y crosses values of beta.
    for (double b : beta.breakpoints) add({beta.eval(b)});
    for (double t : theta.breakpoints) add({theta.eval(t)});
    add({beta.eval(0.0), theta.eval(0.0)});

    auto pos = [](double x) { return x > 0.0 ? x : 0.0; };
    auto i1 = [&](double y) { return pos(theta.eval(y) - beta.inverse(y)); };
    auto i2 = [&](double y) {
        double p = pos(theta.eval(y) - beta.inverse(y));
        return (1.0 - p) * h.eval(y) * g.eval(theta.eval(y));
    };
    auto i3 = [&](double y) {
        double p = pos(beta.eval(y) - theta.inverse(y));
        return (1.0 - p) * h.eval(y) * g.eval(beta.eval(y));
    };
    return integrate(i1, 0.0, 1.0, tol, splits) + integrate(i2, 0.0, 1.0, tol, splits) +
           integrate(i3, 0.0, 1.0, tol, splits);
}

double analytic_lower_bound(const AnalyticGh& gh, double tau, double gamma) {
    require(tau >= 0.0 && tau <= 1.0 && gamma >= 0.0 && gamma <= 1.0,
            "tau, gamma must lie in [0,1]");
    const double c = gh.params().c;
    const double t = std::min(gamma, c);
    // integral_0^tau f(tau,gamma,y,t*) dy via antiderivatives:
    //   f = h(y) g(t) + (g(y) - g(tau)) H(t) + g(tau) H(gamma)
    double integral = gh.g(t) * gh.H(tau) + (gh.G(tau) - tau * gh.g(tau)) * gh.H(t) +
                      tau * gh.g(tau) * gh.H(gamma);
    return (1.0 - tau) * (1.0 - gamma) + (1.0 - tau) * gh.g(tau) * gh.H(gamma) + integral;
}

double analytic_lower_bound_quadrature(const AnalyticGh& gh, double tau, double gamma, int t_grid,
                                       double tol) {
    const double c = gh.params().c;
    auto f = [&](double y, double t) {
        return gh.h(y) * gh.g(t) + (gh.g(y) - gh.g(tau)) * gh.H(t) + gh.g(tau) * gh.H(gamma);
    };
    auto inner_min = [&](double y) {
        double best = f(y, std::min(gamma, c));
        for (int k = 0; k <= t_grid; ++k) {
            double t = gamma * k / t_grid;
            best = std::min(best, f(y, t));
        }
        return best;
    };
    double integral = integrate(inner_min, 0.0, tau, tol, {c});
    return (1.0 - tau) * (1.0 - gamma) + (1.0 - tau) * gh.g(tau) * gh.H(gamma) + integral;
}

GridMinResult min_lower_bound(const AnalyticGh& gh, double grid_step, double quad_tol) {
    int steps = static_cast<int>(std::lround(1.0 / grid_step));
    double best = std::numeric_limits<double>::infinity();
    double bt = 0.0, bg = 0.0;
    for (int i = 0; i <= steps; ++i) {
        double tau = static_cast<double>(i) / steps;
        for (int j = 0; j <= steps; ++j) {
            double gamma = static_cast<double>(j) / steps;
            double v = analytic_lower_bound(gh, tau, gamma);
            if (v < best) {
                best = v;
                bt = tau;
                bg = gamma;
            }
        }
    }
    // Golden-section refinement, coordinate-wise around the grid argmin.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double t = bt, gmm = bg;
    for (int pass = 0; pass < 2; ++pass) {
        double lo = std::max(0.0, t - grid_step), hi = std::min(1.0, t + grid_step);
        for (int it = 0; it < 50; ++it) {
            double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
            if (analytic_lower_bound(gh, m1, gmm) < analytic_lower_bound(gh, m2, gmm))
                hi = m2;
            else
                lo = m1;
        }
        t = 0.5 * (lo + hi);
        lo = std::max(0.0, gmm - grid_step);
        hi = std::min(1.0, gmm + grid_step);
        for (int it = 0; it < 50; ++it) {
            double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
            if (analytic_lower_bound(gh, t, m1) < analytic_lower_bound(gh, t, m2))
                hi = m2;
            else
                lo = m1;
        }
        gmm = 0.5 * (lo + hi);
    }
    double refined = analytic_lower_bound(gh, t, gmm);
    GridMinResult r;
    r.raw_min = std::min(best, refined);
    r.reported = r.raw_min - quad_tol;
    if (refined <= best) {
        r.tau = t;
        r.gamma = gmm;
    } else {
        r.tau = bt;
        r.gamma = bg;
    }
    return r;
}

AnalyticReport analytic_audit(const AnalyticParams& p) {
    AnalyticGh gh(p);
    const double c = p.c;
    AnalyticReport rep;
    auto push = [&](const std::string& name, double value, double reference, bool pass) {
        rep.checks.push_back({name, value, reference, pass});
        rep.all_pass = rep.all_pass && pass;
    };

    ConditionCheck cond = check_condition(p);
    push("condition h(1)(g-g') max", cond.max_value, 0.999992,
         cond.applicable && std::abs(cond.max_value - 0.999992) < 1e-5);

    double G1 = gh.G(1.0);
    push("G(1)", G1, 0.6329, std::abs(G1 - 0.6329) < 5e-4);
    double H1 = gh.H(1.0);
    push("H(1)", H1, 0.76016, std::abs(H1 - 0.76016) < 5e-4);

    // tau* solves h(tau*) = (1-c)/g(c); h is increasing on [0, c].
    double rhs = (1.0 - c) / gh.g(c);
    double lo = 0.0, hi = c;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (gh.h(mid) < rhs)
            lo = mid;
        else
            hi = mid;
    }
    double tau_star = 0.5 * (lo + hi);
    push("tau*", tau_star, 0.2321, std::abs(tau_star - 0.2321) < 1e-3);

    auto ell = [&](double tau, double gamma) {
        return (1.0 - tau) * (1.0 - gamma) + G1 * gh.H(gamma) + gh.H(tau) * gh.g(gamma);
    };
    double ell_ts_c = ell(tau_star, c);
    push("ell(tau*, c)", ell_ts_c, 0.634, ell_ts_c > 0.634);
    double ell_c_0 = (1.0 - c) + gh.g(0.0) * gh.H(c);
    push("ell(c, 0)", ell_c_0, 0.73, ell_c_0 > 0.73);

    auto phi = [&](double tau) {
        return gh.g(tau) * H1 + gh.g(c) * gh.H(tau) + (gh.G(tau) - tau * gh.g(tau)) * gh.H(c);
    };
    double phi0 = phi(0.0);
    push("phi(0) = g(0) H(1)", phi0, 0.63245, phi0 > 0.63245);

    bool phi_incr = true;
    double prev = phi(0.0);
    for (int k = 1; k <= 1000; ++k) {
        double v = phi(static_cast<double>(k) / 1000);
        if (v < prev - 1e-12) phi_incr = false;
        prev = v;
    }
    push("phi non-decreasing", phi_incr ? 1.0 : 0.0, 1.0, phi_incr);

    bool ratio_decr = true;
    prev = gh.g_prime(0.0) / gh.h(0.0);
    for (int k = 1; k <= 1000; ++k) {
        double y = c * k / 1000;
        double v = gh.g_prime(y) / gh.h(y);
        if (v > prev + 1e-12) ratio_decr = false;
        prev = v;
    }
    push("g'/h non-increasing on [0,c]", ratio_decr ? 1.0 : 0.0, 1.0, ratio_decr);

    return rep;
}

}  // namespace obliq
