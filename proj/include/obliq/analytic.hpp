#pragma once
// Closed-form exponential-circle parameters g, h, their antiderivatives, the
// numerically integrated universal bound, and the analytical lower-bound
// machinery with its named constants.

#include <functional>
#include <string>
#include <vector>

#include "obliq/stepfn.hpp"

namespace obliq {

struct AnalyticParams {
    double a = 1.171;
    double b = 0.339;
    double c = 0.652;
};

// g(y) = a - b exp(min(y, c)), h = sqrt(1 - g^2), with cached antiderivative
// H on a dense grid (G has a closed form). Construction validates 0 < c < 1,
// a - b e^c > 0 and |g| <= 1 everywhere so h is defined.
class AnalyticGh {
public:
    explicit AnalyticGh(AnalyticParams p = {}, int grid_points = 20000);

    double g(double y) const;
    double g_prime(double y) const;  // -b e^y for y <= c, 0 beyond the kink
    double h(double y) const;
    double G(double y) const;  // integral of g from 0, closed form
    double H(double y) const;  // integral of h from 0, cached grid

    // inf{x in [0,1] : g(x) <= z} with the g(1) = 0 boundary convention.
    double g_inverse(double z) const;

    const AnalyticParams& params() const { return params_; }

private:
    AnalyticParams params_;
    double gc_;  // g value on [c, 1)
    std::vector<double> hgrid_;
    double step_;
};

struct ConditionCheck {
    double max_value = 0.0;  // max over y of h(1) (g(y) - g'(y))
    bool applicable = false; // true when the maximum stays below 1
};

// Grid maximum (step 1e-4, locally refined) of h(1) (g(y) - g'(y)).
ConditionCheck check_condition(const AnalyticParams& p);

// ---- universal bound, integrated numerically -----------------------------

struct ScalarFn {
    std::function<double(double)> eval;
    std::vector<double> breakpoints;
};

struct MonotoneFn {
    std::function<double(double)> eval;
    std::function<double(double)> inverse;
    std::vector<double> breakpoints;
};

MonotoneFn monotone_from_grid(const GridStep& s);
// theta == v everywhere; inverse per the right-continuous definition.
MonotoneFn monotone_constant(double v);

ScalarFn scalar_from_step(const StepFunction& f);
ScalarFn scalar_from_analytic(const AnalyticGh& gh, bool take_g);

// Three-integral lower bound on E[alpha_u + alpha_v] / w for monotone
// marginal ranks theta, beta; adaptive Simpson at the given tolerance with
// subdivision at every declared breakpoint. Non-monotone theta/beta
// (detected by sampling) is a domain error.
double universal_bound_numeric(const ScalarFn& g, const ScalarFn& h, const MonotoneFn& theta,
                               const MonotoneFn& beta, double tol = 1e-7);

// ---- analytical lower bound ----------------------------------------------

// (1-tau)(1-gamma) + (1-tau) g(tau) H(gamma) + integral_0^tau min_{t<=gamma}
// f(tau,gamma,y,t) dy with the inner minimum at t = min(gamma, c).
double analytic_lower_bound(const AnalyticGh& gh, double tau, double gamma);

// Same value computed by direct quadrature with a grid scan over t; test
// oracle for the closed-form evaluation path.
double analytic_lower_bound_quadrature(const AnalyticGh& gh, double tau, double gamma,
                                       int t_grid = 400, double tol = 1e-9);

struct GridMinResult {
    double reported;  // conservative: grid/refined minimum minus tolerance
    double raw_min;
    double tau, gamma;
};

// Coarse grid scan followed by local golden-section refinement.
GridMinResult min_lower_bound(const AnalyticGh& gh, double grid_step = 1e-3,
                              double quad_tol = 1e-7);

// ---- named-constant audit ---------------------------------------------------

struct NamedCheck {
    std::string name;
    double value = 0.0;
    double reference = 0.0;  // 0 when the check is an inequality only
    bool pass = false;
};

struct AnalyticReport {
    std::vector<NamedCheck> checks;
    bool all_pass = true;
};

// Audits every named constant of the analytical argument: the budget
// condition constant, G(1), H(1), tau*, the ell and phi bounds, and the two
// monotonicity facts.
AnalyticReport analytic_audit(const AnalyticParams& p);

}  // namespace obliq
