// Acceptance suite: every criterion runs at its stated tolerance and prints
// one pass/fail line. Optional long runs (h6) are gated behind
// OBLIQ_ACCEPT_LONG=1. Run a subset by listing criterion numbers as args.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "obliq/analytic.hpp"
#include "obliq/bound.hpp"
#include "obliq/hardness.hpp"
#include "obliq/opt.hpp"
#include "obliq/presets.hpp"
#include "obliq/ranking.hpp"
#include "obliq/rng.hpp"
#include "obliq/stepfn.hpp"

using namespace obliq;

namespace {

int failures = 0;

struct Criterion {
    int id;
    std::string label;
    bool pass = true;
    std::vector<std::string> notes;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void expect(bool ok, const std::string& what) {
        notes.push_back(std::string(ok ? "  [ok]   " : "  [FAIL] ") + what);
        pass = pass && ok;
    }
    void note(const std::string& what) { notes.push_back("  [note] " + what); }
    void finish() {
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream head;
        head << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << id << ": " << label << " ("
             << secs << " s)";
        std::cout << head.str() << "\n";
        for (const auto& n : notes) std::cout << n << "\n";
        if (!pass) ++failures;
    }
};

int workers() {
    if (const char* env = std::getenv("OBLIQ_WORKERS")) {
        int w = std::atoi(env);
        if (w >= 1) return w;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 2;
}

bool long_runs_enabled() {
    const char* env = std::getenv("OBLIQ_ACCEPT_LONG");
    return env && std::string(env) == "1";
}

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

void criterion1() {
    Criterion c{1, "verification table: optimized coordinates for n = 4..7"};
    const double expected[] = {0.6321, 0.6389, 0.6447, 0.6487};
    for (int n = 4; n <= 6; ++n) {
        auto t0 = std::chrono::steady_clock::now();
        BoundReport rep = verify_ratio(reference_pair(n), 1);  // single-threaded budget: 5 s
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream os;
        os << "n=" << n << ": F = " << rep.ratio << " vs " << expected[n - 4] << " ("
           << secs << " s, 1 worker)";
        c.expect(std::abs(rep.ratio - expected[n - 4]) <= 2e-3 && secs <= 5.0, os.str());
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        BoundReport rep = verify_ratio(reference_pair(7), workers());
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream os;
        os << "n=7: F = " << rep.ratio << " vs 0.6487 (" << secs << " s, " << workers()
           << " workers)";
        c.expect(std::abs(rep.ratio - 0.6487) <= 2e-3 && secs <= 300.0, os.str());
    }
    c.finish();
}

void criterion2() {
    Criterion c{2, "13-segment certification and the n = 9 general-form sweep"};
    {
        auto t0 = std::chrono::steady_clock::now();
        BoundReport rep = verify_ratio(reference_pair(13), workers());
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream os;
        os << "n=13 published pair: F = " << rep.ratio << " vs 0.6590 (" << secs << " s)";
        c.expect(std::abs(rep.ratio - 0.6590) <= 5e-4, os.str());
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<double> G = reference_pair(9).G();
        double phi_max = std::acos(G[0]);
        double best = 0.0, best_phi = 0.0;
        for (double phi : {phi_max - 0.02, phi_max - 0.01, phi_max - 0.005, phi_max}) {
            GhPair gh = general_form({phi, G}, kPresetBudgetEps);
            double ratio = verify_ratio(gh, workers()).ratio;
            if (ratio > best) {
                best = ratio;
                best_phi = phi;
            }
        }
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream os;
        os << "n=9 sweep: best F = " << best << " at phi = " << best_phi << " (" << secs
           << " s, budget 1800 s)";
        c.expect(best >= 0.650 && secs <= 1800.0, os.str());
    }
    c.finish();
}

void criterion3() {
    Criterion c{3, "hardness: exact fractions and decimal bounds"};
    auto run_exact = [&](HardFamily fam, Rational want, double budget) {
        auto t0 = std::chrono::steady_clock::now();
        HardnessResult res = optimal_adaptive_value(fam, true, workers());
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream os;
        os << fam.name() << ": ratio " << res.ratio.get_str() << " vs " << want.get_str() << " ("
           << secs << " s)";
        c.expect(res.ratio == want && secs <= budget, os.str());
    };
    run_exact(HardFamily::warmup(), Rational(7, 8), 10.0);
    run_exact(HardFamily::bipartite(3), Rational(89, 108), 10.0);
    run_exact(HardFamily::general(2), Rational(19, 24), 10.0);
    run_exact(HardFamily::general(3), Rational(91, 120), 10.0);

    auto t0 = std::chrono::steady_clock::now();
    HardnessResult h4 = optimal_adaptive_value(HardFamily::bipartite(4), true, workers());
    HardnessResult h5 = optimal_adaptive_value(HardFamily::bipartite(5), true, workers());
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
        std::ostringstream os;
        os << "h4: " << h4.ratio.get_d() << " vs 0.8047, h5: " << h5.ratio.get_d()
           << " vs 0.7981 (" << secs << " s, budget 600 s)";
        c.expect(std::abs(h4.ratio.get_d() - 0.8047) <= 5e-5 &&
                     std::abs(h5.ratio.get_d() - 0.7981) <= 5e-5 && secs <= 600.0,
                 os.str());
    }
    if (long_runs_enabled()) {
        HardnessResult h6 = optimal_adaptive_value(HardFamily::bipartite(6), true, workers());
        std::ostringstream os;
        os << "h6: " << h6.ratio.get_d() << " vs 0.7961";
        c.expect(std::abs(h6.ratio.get_d() - 0.7961) <= 5e-5, os.str());
    } else {
        c.note("h6 long run skipped (set OBLIQ_ACCEPT_LONG=1 to include)");
    }
    c.finish();
}

void criterion4() {
    Criterion c{4, "ranking matches the adaptive optimum exactly"};
    for (auto fam : {HardFamily::warmup(), HardFamily::bipartite(3), HardFamily::general(2),
                     HardFamily::general(3)}) {
        HardnessResult opt = optimal_adaptive_value(fam, true, workers());
        HardnessResult rank = ranking_exact_value(fam);
        std::ostringstream os;
        os << fam.name() << ": ranking " << rank.ratio.get_str() << " vs optimal "
           << opt.ratio.get_str();
        c.expect(rank.ratio == opt.ratio, os.str());
    }
    c.finish();
}

void criterion5() {
    Criterion c{5, "analytic suite at the stated tolerances"};
    auto t0 = std::chrono::steady_clock::now();
    ConditionCheck cond = check_condition({});
    c.expect(cond.applicable && std::abs(cond.max_value - 0.999992) <= 1e-5,
             "h(1)(g-g') max = " + std::to_string(cond.max_value) + " vs 0.999992, below 1");
    AnalyticGh gh;
    c.expect(std::abs(gh.G(1.0) - 0.6329) <= 5e-4, "G(1) = " + std::to_string(gh.G(1.0)));
    c.expect(std::abs(gh.H(1.0) - 0.76016) <= 5e-4, "H(1) = " + std::to_string(gh.H(1.0)));
    AnalyticReport rep = analytic_audit({});
    double tau_star = 0.0;
    for (const auto& ck : rep.checks)
        if (ck.name == "tau*") tau_star = ck.value;
    c.expect(std::abs(tau_star - 0.2321) <= 1e-3, "tau* = " + std::to_string(tau_star));
    c.expect(rep.all_pass, "all audited constants pass");
    GridMinResult mn = min_lower_bound(gh, 1e-3);
    c.expect(mn.reported >= 0.6324,
             "min over 1e-3 grid of the lower bound = " + std::to_string(mn.reported));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs <= 60.0, "suite finished in " + std::to_string(secs) + " s (budget 60 s)");
    c.finish();
}

void criterion6() {
    Criterion c{6, "oracle equivalences"};
    {
        bool all = true;
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            int n = 1 + static_cast<int>(rng_u01(71, t) * 6);
            GhPair gh = random_gh(72, t, n);
            GridStep theta = random_grid(73, t, n), beta = random_grid(74, t, n);
            double a = discretization_bound(gh, theta, beta);
            double b = universal_bound_numeric(scalar_from_step(gh.g), scalar_from_step(gh.h),
                                               monotone_from_grid(theta),
                                               monotone_from_grid(beta));
            worst = std::max(worst, std::abs(a - b));
            all = all && std::abs(a - b) <= 1e-6;
        }
        std::ostringstream os;
        os << "discretization vs integrated bound on 100 random inputs, worst gap " << worst;
        c.expect(all, os.str());
    }
    {
        bool all = true;
        for (int t = 0; t < 30; ++t) {
            int n = 1 + static_cast<int>(rng_u01(81, t) * 4);
            GhPair gh = random_gh(82, t, n);
            BoundReport pruned = verify_ratio(gh, 1, true);
            BoundReport unpruned = verify_ratio(gh, 1, false);
            all = all && pruned.ratio == unpruned.ratio &&
                  pruned.ratio == min_bound_exhaustive(gh);
        }
        c.expect(all, "pruned vs unpruned verify (and the exhaustive scan) agree exactly, n <= 4");
    }
    {
        bool all = true;
        for (auto fam : {HardFamily::warmup(), HardFamily::bipartite(3)}) {
            HardnessResult canon = optimal_adaptive_value(fam, true);
            HardnessResult raw = optimal_adaptive_value(fam, false);
            all = all && canon.expected_matched == raw.expected_matched;
        }
        c.expect(all, "canonicalized vs raw hardness DP agree exactly (warmup, h3)");
    }
    c.finish();
}

void criterion7() {
    Criterion c{7, "structural lemmas: zero violations on 50 random instances"};
    auto t0 = std::chrono::steady_clock::now();
    std::uint64_t total_tuples = 0, total_viol = 0;
    for (int t = 0; t < 50; ++t) {
        int L = 2 + static_cast<int>(rng_u01(91, t) * 3);  // 2..4
        int R = 2 + static_cast<int>(rng_u01(92, t) * 3);
        std::vector<std::vector<double>> w(L, std::vector<double>(R));
        std::vector<std::vector<std::uint8_t>> e(L, std::vector<std::uint8_t>(R));
        for (int u = 0; u < L; ++u)
            for (int v = 0; v < R; ++v) {
                w[u][v] = 0.25 + rng_u01(93, t * 199 + u * 17 + v);
                e[u][v] = rng_u01(94, t * 199 + u * 17 + v) < 0.6 ? 1 : 0;
            }
        Instance inst = Instance::make(std::move(w), std::move(e));
        int n = 2 + static_cast<int>(rng_u01(95, t) * 4);
        GhPair gh = random_gh(96, t, n);
        LemmaViolations viol =
            check_structural_lemmas(inst, functions_from(gh), 4, grid_jitter(4, n));
        total_tuples += viol.tuples_checked;
        total_viol += viol.add_neighbor + viol.rank_monotonicity + viol.basic_gain +
                      viol.extra_gain + viol.marginal_rank_monotonicity;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream os;
    os << total_viol << " violations over " << total_tuples << " rank tuples (" << secs
       << " s, budget 300 s)";
    c.expect(total_viol == 0 && secs <= 300.0, os.str());
    c.finish();
}

void criterion8() {
    Criterion c{8, "invariant property suite, >= 1000 cases each"};
    auto t0 = std::chrono::steady_clock::now();
    {
        bool ok = true;
        for (int t = 0; t < 1500; ++t) {
            int n = 1 + static_cast<int>(rng_u01(101, t) * 6);
            GhPair gh = random_gh(102, t, n);
            ok = ok && check_budget(gh).ok;
        }
        c.expect(ok, "budget constraint on 1500 general-form samples");
    }
    {
        bool ok = true;
        int used = 0;
        for (int t = 0; t < 6000 && used < 1200; ++t) {
            int n = 1 + static_cast<int>(rng_u01(111, t) * 8);
            std::vector<double> vals(n);
            for (int i = 0; i < n; ++i) vals[i] = rng_u01(112, t * 31 + i);
            std::sort(vals.begin(), vals.end());
            StepFunction f = StepFunction::non_decreasing(vals);
            double y = rng_u01(113, t) * 1.2, inv = f.inverse_at(y);
            if (inv >= 1.0) continue;
            ++used;
            double x = rng_u01(114, t);
            ok = ok && (x > inv ? f(x) > y : f(x) <= y);
        }
        c.expect(ok && used >= 1000, "inverse-function separation property");
    }
    {
        bool ok = true;
        for (int t = 0; t < 1200; ++t) {
            GhPair gh = random_gh(121, t, 1 + static_cast<int>(rng_u01(122, t) * 6));
            double y = rng_u01(123, t);
            ok = ok && gh.g(gh.g.inverse_at(y)) <= y;
        }
        c.expect(ok, "f(f^{-1}(y)) <= y for non-increasing f with f(1) = 0");
    }
    {
        bool ok = true;
        for (int t = 0; t < 1200; ++t) {
            int L = 1 + static_cast<int>(rng_u01(131, t) * 4);
            int R = 1 + static_cast<int>(rng_u01(132, t) * 4);
            std::vector<std::vector<double>> w(L, std::vector<double>(R));
            std::vector<std::vector<std::uint8_t>> e(L, std::vector<std::uint8_t>(R));
            for (int u = 0; u < L; ++u)
                for (int v = 0; v < R; ++v) {
                    w[u][v] = rng_u01(133, t * 211 + u * 13 + v);
                    e[u][v] = rng_u01(134, t * 211 + u * 13 + v) < 0.5 ? 1 : 0;
                }
            Instance inst = Instance::make(std::move(w), std::move(e));
            GhPair gh = random_gh(135, t, 3);
            GhFunctions fns = functions_from(gh);
            RankAssignment ranks{std::vector<double>(L), std::vector<double>(R)};
            for (int u = 0; u < L; ++u) ranks.left[u] = rng_u01(136, t * 61 + u);
            for (int v = 0; v < R; ++v) ranks.right[v] = rng_u01(137, t * 61 + v);
            MatchResult res = run(inst, fns, ranks);
            double dual = 0.0;
            for (double a : res.alpha_left) dual += a;
            for (double a : res.alpha_right) dual += a;
            ok = ok && std::abs(dual - res.total_weight) <= 1e-12 * std::max(1.0, dual);
        }
        c.expect(ok, "primal-dual accounting on 1200 random runs");
    }
    {
        GhPair gh = random_gh(141, 0, 4);
        GhFunctions fns = functions_from(gh);
        Instance path = Instance::make({{1.0, 1.0}}, {{1, 1}});
        RankAssignment others{{0.0}, {0.0, 0.41}};
        EdgeDualEstimate a = estimate_edge_dual(path, fns, 0, 0, others, 20000, 5, 1);
        EdgeDualEstimate b = estimate_edge_dual(path, fns, 0, 0, others, 20000, 5, 3);
        c.expect(a.mean == b.mean && a.stderr_ == b.stderr_,
                 "Monte-Carlo estimates identical across worker counts");
        BoundReport r1 = verify_ratio(reference_pair(5), 1);
        BoundReport r2 = verify_ratio(reference_pair(5), 3);
        c.expect(r1.ratio == r2.ratio && r1.argmin_theta.levels == r2.argmin_theta.levels,
                 "verifier deterministic across worker counts");
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs <= 300.0, "suite finished in " + std::to_string(secs) + " s (budget 300 s)");
    c.finish();
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> which;
    for (int i = 1; i < argc; ++i) which.insert(std::atoi(argv[i]));
    auto want = [&](int id) { return which.empty() || which.count(id) > 0; };

    if (want(1)) criterion1();
    if (want(2)) criterion2();
    if (want(3)) criterion3();
    if (want(4)) criterion4();
    if (want(5)) criterion5();
    if (want(6)) criterion6();
    if (want(7)) criterion7();
    if (want(8)) criterion8();

    std::cout << (failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << "\n";
    return failures == 0 ? 0 : 1;
}
