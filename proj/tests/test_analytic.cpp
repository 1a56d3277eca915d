#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "obliq/analytic.hpp"
#include "obliq/quadrature.hpp"
#include "obliq/rng.hpp"

using namespace obliq;

TEST_CASE("closed form values") {
    AnalyticGh gh;
    CHECK(gh.g(0.0) == doctest::Approx(0.832).epsilon(5e-4));
    CHECK(gh.g(1.0) == doctest::Approx(0.5203).epsilon(5e-4));
    for (int t = 0; t < 200; ++t) {
        double y = rng_u01(2, t);
        CHECK(gh.g(y) * gh.g(y) + gh.h(y) * gh.h(y) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(AnalyticGh({2.2, 0.1, 0.5}), std::invalid_argument);  // g(0) > 1
    CHECK_THROWS_AS(AnalyticGh({1.0, 0.9, 0.5}), std::invalid_argument);  // g(c) < 0
}

TEST_CASE("condition constant and its failure modes") {
    ConditionCheck def = check_condition({});
    CHECK(def.applicable);
    CHECK(def.max_value == doctest::Approx(0.999992).epsilon(1e-5));

    // b = 0 makes g constant, so the maximum is h(1) * a.
    AnalyticParams flat{0.8, 0.0, 0.5};
    ConditionCheck fc = check_condition(flat);
    AnalyticGh fgh(flat);
    CHECK(fc.max_value == doctest::Approx(fgh.h(1.0) * 0.8).epsilon(1e-9));

    // Raising a past the default pushes a * h(1) over 1 before h(1) decays:
    // at a = 1.20 the maximum exceeds 1 and the bound no longer applies.
    AnalyticParams big{1.20, 0.339, 0.652};
    ConditionCheck bc = check_condition(big);
    CHECK(bc.max_value > 1.0);
    CHECK_FALSE(bc.applicable);
    AnalyticGh bgh(big);
    CHECK(bc.max_value == doctest::Approx(bgh.h(1.0) * 1.20).epsilon(1e-9));
}

TEST_CASE("antiderivatives match a dense trapezoid oracle") {
    AnalyticGh gh;
    const int N = 1000000;
    double acc_g = 0.0, acc_h = 0.0;
    double prev_g = gh.g(0.0), prev_h = gh.h(0.0);
    for (int k = 1; k <= N; ++k) {
        double y = static_cast<double>(k) / N;
        double cg = gh.g(y), ch = gh.h(y);
        acc_g += 0.5 * (prev_g + cg) / N;
        acc_h += 0.5 * (prev_h + ch) / N;
        prev_g = cg;
        prev_h = ch;
        if (k % 100000 == 0) {
            CHECK(std::abs(gh.G(y) - acc_g) <= 1e-6);
            CHECK(std::abs(gh.H(y) - acc_h) <= 1e-6);
        }
    }
    CHECK(gh.G(1.0) == doctest::Approx(0.6329).epsilon(5e-4));
    CHECK(gh.H(1.0) == doctest::Approx(0.76016).epsilon(5e-4));
}

TEST_CASE("derivative matches central differences away from the kink") {
    AnalyticGh gh;
    const double c = gh.params().c, eps = 1e-6;
    for (int t = 0; t < 500; ++t) {
        double y = rng_u01(5, t);
        if (std::abs(y - c) < 1e-3) continue;
        double fd = (gh.g(std::min(1.0, y + eps)) - gh.g(std::max(0.0, y - eps))) / (2 * eps);
        CHECK(std::abs(gh.g_prime(y) - fd) <= 1e-4);
    }
}

TEST_CASE("universal bound endpoints") {
    AnalyticGh gh;
    ScalarFn g = scalar_from_analytic(gh, true), h = scalar_from_analytic(gh, false);
    // theta == beta == 1: first integral is 1, g(1)=0 kills the others.
    ScalarFn g0 = g;
    auto geval = g.eval;
    g0.eval = [geval](double y) { return y >= 1.0 ? 0.0 : geval(y); };
    double one = universal_bound_numeric(g0, h, monotone_constant(1.0), monotone_constant(1.0));
    CHECK(one == doctest::Approx(1.0).epsilon(1e-7));

    // theta == beta == 0: h(y) g(0) integrated twice.
    double zero = universal_bound_numeric(g0, h, monotone_constant(0.0), monotone_constant(0.0));
    double direct = integrate([&](double y) { return gh.h(y) * gh.g(0.0); }, 0.0, 1.0, 1e-9,
                              {gh.params().c});
    CHECK(zero == doctest::Approx(2.0 * direct).epsilon(1e-6));
    CHECK(zero == doctest::Approx(2.0 * gh.g(0.0) * gh.H(1.0)).epsilon(1e-5));
}

TEST_CASE("universal bound rejects non-monotone marginals") {
    AnalyticGh gh;
    ScalarFn g = scalar_from_analytic(gh, true), h = scalar_from_analytic(gh, false);
    MonotoneFn bad;
    bad.eval = [](double y) { return 1.0 - y; };
    bad.inverse = [](double) { return 0.0; };
    CHECK_THROWS_AS(universal_bound_numeric(g, h, bad, monotone_constant(1.0)),
                    std::domain_error);
}

TEST_CASE("analytical lower bound: closed form vs quadrature and endpoints") {
    AnalyticGh gh;
    CHECK(analytic_lower_bound(gh, 1.0, 0.0) ==
          doctest::Approx(gh.g(0.0) * gh.H(1.0)).epsilon(1e-9));
    double gamma = 0.37;
    CHECK(analytic_lower_bound(gh, 0.0, gamma) ==
          doctest::Approx((1.0 - gamma) + gh.g(0.0) * gh.H(gamma)).epsilon(1e-9));
    for (int t = 0; t < 25; ++t) {
        double tau = rng_u01(7, t), gm = rng_u01(8, t);
        double a = analytic_lower_bound(gh, tau, gm);
        double b = analytic_lower_bound_quadrature(gh, tau, gm);
        CHECK(a == doctest::Approx(b).epsilon(5e-5));
    }
}

TEST_CASE("inner minimum sits at min(gamma, c)") {
    AnalyticGh gh;
    const double c = gh.params().c;
    const int grid = 400;
    for (int t = 0; t < 1000; ++t) {
        double tau = rng_u01(17, t);
        double gamma = rng_u01(18, t);
        double y = tau * rng_u01(19, t);
        auto f = [&](double tt) {
            return gh.h(y) * gh.g(tt) + (gh.g(y) - gh.g(tau)) * gh.H(tt) +
                   gh.g(tau) * gh.H(gamma);
        };
        int best_k = 0;
        double best = f(0.0);
        for (int k = 1; k <= grid; ++k) {
            double v = f(gamma * k / grid);
            if (v < best) {
                best = v;
                best_k = k;
            }
        }
        double argmin = gamma * best_k / grid;
        CHECK(std::abs(argmin - std::min(gamma, c)) <= gamma / grid + 1e-12);
    }
}

TEST_CASE("grid minimum stays above the analytical target") {
    AnalyticGh gh;
    GridMinResult r = min_lower_bound(gh, 1e-2);
    CHECK(r.reported >= 0.6324);
}

TEST_CASE("budget constraint sampled on the unit-circle pair") {
    AnalyticGh gh;
    for (int i = 0; i <= 200; ++i)
        for (int j = i; j <= 200; ++j) {
            double x = i / 200.0, y = j / 200.0;
            CHECK(gh.h(x) * gh.g(y) + gh.h(y) * gh.g(x) <= 1.0 + 1e-9);
        }
}

TEST_CASE("audited constants all pass") {
    AnalyticReport rep = analytic_audit({});
    for (const auto& ck : rep.checks) {
        INFO(ck.name, " computed ", ck.value, " reference ", ck.reference);
        CHECK(ck.pass);
    }
    CHECK(rep.all_pass);
}
