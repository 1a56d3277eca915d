#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "obliq/analytic.hpp"
#include "obliq/bound.hpp"
#include "obliq/presets.hpp"
#include "obliq/rng.hpp"
#include "obliq/stepfn.hpp"

using namespace obliq;

namespace {

GhPair random_gh(std::uint64_t seed, std::uint64_t idx, int n) {
    double phi = rng_u01(seed, idx * 37 + 1) * std::atan(1.0);
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = (0.05 + 0.9 * rng_u01(seed, idx * 37 + 2 + i)) * std::cos(phi);
    std::sort(g.rbegin(), g.rend());
    return general_form({phi, g});
}

GridStep random_grid(std::uint64_t seed, std::uint64_t idx, int n) {
    std::vector<int> lv(n);
    for (int i = 0; i < n; ++i)
        lv[i] = static_cast<int>(rng_u01(seed, idx * 61 + 5 + i) * (n + 1));
    std::sort(lv.begin(), lv.end());
    return GridStep::make(n, lv);
}

// Textbook per-index evaluation of the bound; independent of the production
// arithmetic layout.
double bound_reference(const GhPair& gh, const GridStep& theta, const GridStep& beta) {
    int n = gh.n();
    std::vector<double> G = gh.G();
    G.push_back(0.0);
    const std::vector<double>& H = gh.H();
    std::vector<int> binv = beta.inverse_levels();
    std::vector<int> tinv = theta.inverse_levels();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double d = std::max(theta.levels[i] - binv[i], 0) / static_cast<double>(n);
        s += d + (1.0 - d) * H[i] * G[theta.levels[i]];
    }
    for (int i = 0; i < n; ++i) {
        double e = std::max(beta.levels[i] - tinv[i], 0) / static_cast<double>(n);
        s += (1.0 - e) * H[i] * G[beta.levels[i]];
    }
    return s / n;
}

}  // namespace

TEST_CASE("n = 1 bound values") {
    GhPair gh = GhPair::make({0.5}, {1.0});
    auto gs = [](std::vector<int> v) { return GridStep::make(1, std::move(v)); };
    CHECK(discretization_bound(gh, gs({1}), gs({1})) == 1.0);
    CHECK(discretization_bound(gh, gs({1}), gs({0})) == 0.5);
    CHECK(discretization_bound(gh, gs({0}), gs({0})) == 1.0);
    CHECK_THROWS_AS(discretization_bound(gh, gs({1}), GridStep::make(2, {0, 1})),
                    std::invalid_argument);
}

TEST_CASE("verify n = 1: value, witness and counts") {
    GhPair gh = GhPair::make({0.5}, {1.0});
    BoundReport rep = verify_ratio(gh, 1);
    CHECK(rep.ratio == 0.5);
    CHECK(rep.argmin_theta.levels == std::vector<int>{1});
    CHECK(rep.argmin_beta.levels == std::vector<int>{0});
    CHECK(rep.pairs_evaluated + rep.pairs_pruned == 4);
    CHECK(rep.ratio == discretization_bound(gh, rep.argmin_theta, rep.argmin_beta));
}

TEST_CASE("production bound matches the per-index reference form") {
    for (int t = 0; t < 300; ++t) {
        int n = 1 + static_cast<int>(rng_u01(11, t) * 6);
        GhPair gh = random_gh(12, t, n);
        GridStep theta = random_grid(13, t, n), beta = random_grid(14, t, n);
        double a = discretization_bound(gh, theta, beta);
        double b = bound_reference(gh, theta, beta);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("property: symmetry in theta and beta") {
    for (int t = 0; t < 1200; ++t) {
        int n = 1 + static_cast<int>(rng_u01(21, t) * 5);
        GhPair gh = random_gh(22, t, n);
        GridStep theta = random_grid(23, t, n), beta = random_grid(24, t, n);
        double a = discretization_bound(gh, theta, beta);
        double b = discretization_bound(gh, beta, theta);
        CHECK(std::abs(a - b) <= 1e-12);
    }
}

TEST_CASE("property: replacing theta by max(theta, beta^{-1}) never increases the bound") {
    for (int t = 0; t < 1200; ++t) {
        int n = 1 + static_cast<int>(rng_u01(31, t) * 5);
        GhPair gh = random_gh(32, t, n);
        GridStep theta = random_grid(33, t, n), beta = random_grid(34, t, n);
        std::vector<int> binv = beta.inverse_levels();
        std::vector<int> hat(n);
        for (int i = 0; i < n; ++i) hat[i] = std::max(theta.levels[i], binv[i]);
        GridStep theta_hat = GridStep::make(n, hat);
        CHECK(discretization_bound(gh, theta_hat, beta) <=
              discretization_bound(gh, theta, beta) + 1e-12);
    }
}

TEST_CASE("pruned, unpruned and exhaustive scans agree") {
    for (int t = 0; t < 25; ++t) {
        int n = 1 + static_cast<int>(rng_u01(41, t) * 4);  // up to 4
        GhPair gh = random_gh(42, t, n);
        BoundReport pruned = verify_ratio(gh, 1, true);
        BoundReport unpruned = verify_ratio(gh, 1, false);
        double brute = min_bound_exhaustive(gh);
        CHECK(pruned.ratio == unpruned.ratio);
        CHECK(pruned.ratio == brute);
        CHECK(unpruned.pairs_pruned == 0);
        CHECK(pruned.pairs_evaluated <= unpruned.pairs_evaluated);
        CHECK(pruned.ratio ==
              discretization_bound(gh, pruned.argmin_theta, pruned.argmin_beta));
        CHECK(pruned.ratio >= 0.0);
        CHECK(pruned.ratio <= 1.0);  // theta == beta == 1 always evaluates to 1
    }
}

TEST_CASE("bundled reference pairs certify at their recorded ratios") {
    for (int n : {4, 5, 6, 7, 8, 9}) {
        BoundReport rep = verify_ratio(reference_pair(n), 2);
        INFO("n = ", n);
        CHECK(rep.ratio == doctest::Approx(reference_ratio(n)).epsilon(2e-3));
    }
}

TEST_CASE("verify is deterministic and independent of worker count") {
    GhPair gh = reference_pair(4);
    BoundReport a = verify_ratio(gh, 1);
    BoundReport b = verify_ratio(gh, 3);
    CHECK(a.ratio == b.ratio);
    CHECK(a.argmin_theta.levels == b.argmin_theta.levels);
    CHECK(a.argmin_beta.levels == b.argmin_beta.levels);
    CHECK(a.pairs_evaluated == b.pairs_evaluated);
    CHECK(a.ratio == doctest::Approx(0.6321).epsilon(2e-3));
}

TEST_CASE("cross-check against the numerically integrated universal bound") {
    for (int t = 0; t < 40; ++t) {
        int n = 1 + static_cast<int>(rng_u01(51, t) * 6);
        GhPair gh = random_gh(52, t, n);
        GridStep theta = random_grid(53, t, n), beta = random_grid(54, t, n);
        double discrete = discretization_bound(gh, theta, beta);
        double integral = universal_bound_numeric(scalar_from_step(gh.g), scalar_from_step(gh.h),
                                                  monotone_from_grid(theta),
                                                  monotone_from_grid(beta));
        CHECK(std::abs(discrete - integral) <= 1e-6);
    }
}

TEST_CASE("collect_pairs_below returns exactly the sub-threshold pairs") {
    GhPair gh = random_gh(62, 7, 3);
    BoundReport rep = verify_ratio(gh, 1);
    double threshold = rep.ratio + 0.02;
    auto pairs = collect_pairs_below(gh, threshold, 100000);
    CHECK(!pairs.empty());
    for (const auto& [t, b] : pairs)
        CHECK(discretization_bound(gh, t, b) <= threshold);
    // every collected pair is admissible and the witness pair is present
    bool found = false;
    for (const auto& [t, b] : pairs)
        if (discretization_bound(gh, t, b) == rep.ratio) found = true;
    CHECK(found);
}
