// Command-line workbench: verification, optimization, simulation, hardness
// DP, the analytic suite, model export, and a built-in example selftest.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "obliq/analytic.hpp"
#include "obliq/bound.hpp"
#include "obliq/hardness.hpp"
#include "obliq/opt.hpp"
#include "obliq/presets.hpp"
#include "obliq/ranking.hpp"
#include "obliq/report.hpp"
#include "obliq/rng.hpp"
#include "obliq/stepfn.hpp"

using nlohmann::ordered_json;

namespace {

int default_workers() {
    if (const char* env = std::getenv("OBLIQ_WORKERS")) {
        int w = std::atoi(env);
        if (w >= 1) return w;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

double wall_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

int cmd_verify(const std::string& gh_path, int workers, bool no_prune, double budget_eps,
               const std::string& out) {
    auto t0 = std::chrono::steady_clock::now();
    obliq::GhPair gh = obliq::gh_load_json(gh_path, budget_eps);
    obliq::BoundReport rep = obliq::verify_ratio(gh, workers, !no_prune);

    obliq::RunManifest man;
    man.subcommand = "verify";
    man.workers = workers;
    man.config = {{"gh", gh_path}, {"prune", !no_prune}, {"budget_eps", budget_eps}};
    man.add_input("gh", gh_path);

    ordered_json results;
    results["n"] = gh.n();
    results["ratio"] = rep.ratio;
    results["argmin_theta"] = rep.argmin_theta.levels;
    results["argmin_beta"] = rep.argmin_beta.levels;
    results["pairs_evaluated"] = rep.pairs_evaluated;
    results["pairs_pruned"] = rep.pairs_pruned;
    obliq::write_report(out, obliq::make_report(man, results, wall_ms(t0)));

    std::cout << "certified ratio F = " << rep.ratio << " (n = " << gh.n() << ", "
              << rep.pairs_evaluated << " pairs evaluated, " << rep.pairs_pruned
              << " pruned, " << rep.wall_seconds << " s)\n";
    return 0;
}

int cmd_optimize(int n, int rounds, int workers, const std::string& export_path,
                 const std::string& out) {
    obliq::InnerSolver inner = [](const obliq::QcqpModel& m, const obliq::GhPair& s) {
        return obliq::heuristic_inner_solve(m, s);
    };
    obliq::ConstraintGenResult res =
        obliq::constraint_generation(n, inner, rounds, std::nullopt, workers);
    if (!export_path.empty()) obliq::export_qcqp(res.model, export_path);
    if (!out.empty()) {
        std::ofstream f(out, std::ios::binary);
        f << obliq::gh_to_json(res.gh);
    }

    std::cout << "n = " << n << ": certified ratio " << res.certified_ratio << " after "
              << res.rounds << " round(s), " << res.active_count << " active pairs"
              << (res.converged ? "" : " [warning: round budget exhausted]") << "\n";
    return 0;
}

int cmd_export(int n, int rounds, int workers, const std::string& out) {
    obliq::QcqpModel model;
    if (rounds > 0) {
        obliq::InnerSolver inner = [](const obliq::QcqpModel& m, const obliq::GhPair& s) {
            return obliq::heuristic_inner_solve(m, s);
        };
        model = obliq::constraint_generation(n, inner, rounds, std::nullopt, workers).model;
    } else {
        model = obliq::QcqpModel::initial(n);
    }
    obliq::export_qcqp(model, out);
    std::cout << "wrote " << out << " (" << model.active_pairs.size() << " ratio constraints)\n";
    return 0;
}

int cmd_simulate(const std::string& inst_path, const std::string& gh_path, std::uint64_t samples,
                 std::uint64_t seed, int workers, double budget_eps, const std::string& out) {
    auto t0 = std::chrono::steady_clock::now();
    obliq::Instance inst = obliq::Instance::from_json(obliq::read_file(inst_path));
    obliq::GhPair gh = obliq::gh_load_json(gh_path, budget_eps);
    obliq::GhFunctions fns = obliq::functions_from(gh);

    const int L = inst.left_count, R = inst.right_count;
    std::vector<double> sum(static_cast<std::size_t>(L) * R, 0.0),
        sumsq(static_cast<std::size_t>(L) * R, 0.0);
    double alg_total = 0.0;
    std::uint64_t dual_violations = 0;
    const double tol = 1e-12;
    // A budget overshoot of eps makes the surplus negative by up to eps * w,
    // and the equal split passes half of that below each guaranteed gain.
    const double gain_tol = 0.5 * budget_eps + 1e-12;

    // Fixed-size sample blocks folded in block order: identical output for
    // any worker count.
    struct Block {
        std::vector<double> sum, sumsq;
        double alg = 0.0;
        std::uint64_t violations = 0;
    };
    const std::uint64_t block_len = 1024;
    const std::uint64_t nblocks = (samples + block_len - 1) / block_len;
    std::vector<Block> blocks(nblocks);

    auto run_block = [&](std::uint64_t bi) {
        Block& blk = blocks[bi];
        blk.sum.assign(static_cast<std::size_t>(L) * R, 0.0);
        blk.sumsq.assign(static_cast<std::size_t>(L) * R, 0.0);
        obliq::RankAssignment ranks{std::vector<double>(L), std::vector<double>(R)};
        std::uint64_t lo = bi * block_len, hi = std::min(samples, lo + block_len);
        for (std::uint64_t s = lo; s < hi; ++s) {
            std::uint64_t base = s * static_cast<std::uint64_t>(L + R);
            for (int u = 0; u < L; ++u) ranks.left[u] = obliq::rng_u01(seed, base + u);
            for (int v = 0; v < R; ++v) ranks.right[v] = obliq::rng_u01(seed, base + L + v);
            obliq::MatchResult res = obliq::run(inst, fns, ranks);
            blk.alg += res.total_weight;

            double dual_sum = 0.0;
            for (double a : res.alpha_left) dual_sum += a;
            for (double a : res.alpha_right) dual_sum += a;
            if (std::abs(dual_sum - res.total_weight) > tol * std::max(1.0, res.total_weight))
                ++blk.violations;
            for (auto [u, v] : res.matches) {
                double w = inst.weights[u][v];
                double gu = fns.h(ranks.left[u]) * fns.g(ranks.right[v]) * w;
                double gv = fns.h(ranks.right[v]) * fns.g(ranks.left[u]) * w;
                if (res.alpha_left[u] < gu - gain_tol * w ||
                    res.alpha_right[v] < gv - gain_tol * w)
                    ++blk.violations;
            }
            for (int u = 0; u < L; ++u)
                for (int v = 0; v < R; ++v) {
                    if (!inst.exists[u][v] || inst.weights[u][v] <= 0.0) continue;
                    double x = (res.alpha_left[u] + res.alpha_right[v]) / inst.weights[u][v];
                    blk.sum[u * R + v] += x;
                    blk.sumsq[u * R + v] += x * x;
                }
        }
    };

    if (workers <= 1 || nblocks == 1) {
        for (std::uint64_t bi = 0; bi < nblocks; ++bi) run_block(bi);
    } else {
        std::vector<std::thread> threads;
        std::size_t nw = std::min<std::uint64_t>(workers, nblocks);
        for (std::size_t t = 0; t < nw; ++t)
            threads.emplace_back([&, t] {
                for (std::uint64_t bi = t; bi < nblocks; bi += nw) run_block(bi);
            });
        for (auto& th : threads) th.join();
    }
    for (const Block& blk : blocks) {
        alg_total += blk.alg;
        dual_violations += blk.violations;
        for (std::size_t k = 0; k < sum.size(); ++k) {
            sum[k] += blk.sum[k];
            sumsq[k] += blk.sumsq[k];
        }
    }

    double opt = obliq::optimal_offline(inst);
    ordered_json edges = ordered_json::array();
    for (int u = 0; u < L; ++u)
        for (int v = 0; v < R; ++v) {
            if (!inst.exists[u][v] || inst.weights[u][v] <= 0.0) continue;
            double mean = sum[u * R + v] / static_cast<double>(samples);
            double var = samples > 1 ? (sumsq[u * R + v] - samples * mean * mean) /
                                           static_cast<double>(samples - 1)
                                     : 0.0;
            ordered_json e;
            e["u"] = u;
            e["v"] = v;
            e["mean_dual_share"] = mean;
            e["stderr"] = std::sqrt(std::max(0.0, var) / static_cast<double>(samples));
            edges.push_back(e);
        }

    obliq::RunManifest man;
    man.subcommand = "simulate";
    man.seed = seed;
    man.workers = workers;
    man.config = {{"instance", inst_path}, {"gh", gh_path}, {"samples", samples},
                  {"budget_eps", budget_eps}};
    man.add_input("instance", inst_path);
    man.add_input("gh", gh_path);

    ordered_json results;
    results["edges"] = edges;
    results["mean_alg_weight"] = alg_total / static_cast<double>(samples);
    results["offline_opt"] = opt;
    results["empirical_ratio"] = opt > 0 ? alg_total / static_cast<double>(samples) / opt : 1.0;
    results["invariants"] = {{"dual_accounting_violations", dual_violations}};
    obliq::write_report(out, obliq::make_report(man, results, wall_ms(t0)));

    std::cout << "E[ALG] = " << results["mean_alg_weight"].get<double>() << ", OPT = " << opt
              << ", ratio = " << results["empirical_ratio"].get<double>()
              << ", dual violations = " << dual_violations << "\n";
    return dual_violations == 0 ? 0 : 1;
}

int cmd_hardness(const std::string& family, bool no_canon, bool with_ranking, int workers,
                 const std::string& out) {
    auto t0 = std::chrono::steady_clock::now();
    obliq::HardFamily fam = obliq::HardFamily::from_name(family);
    obliq::HardnessResult res = obliq::optimal_adaptive_value(fam, !no_canon, workers);

    std::cout << res.expected_matched.get_str() << " (ratio " << res.ratio.get_str() << ")\n";
    std::cout << "  decimal " << res.ratio.get_d() << ", states " << res.states_visited
              << ", consistent embeddings at root " << res.root_embeddings << ", "
              << res.wall_seconds << " s\n";

    ordered_json results;
    results["family"] = fam.name();
    results["expected_matched"] = res.expected_matched.get_str();
    results["ratio"] = res.ratio.get_str();
    results["ratio_decimal"] = res.ratio.get_d();
    results["states_visited"] = res.states_visited;
    results["root_embeddings"] = res.root_embeddings;

    if (with_ranking) {
        obliq::HardnessResult rk = obliq::ranking_exact_value(fam);
        std::cout << "  ranking: " << rk.expected_matched.get_str() << " (ratio "
                  << rk.ratio.get_str() << " = " << rk.ratio.get_d() << ")\n";
        results["ranking_expected_matched"] = rk.expected_matched.get_str();
        results["ranking_ratio"] = rk.ratio.get_str();
        results["ranking_matches_optimal"] = (rk.ratio == res.ratio);
    }

    obliq::RunManifest man;
    man.subcommand = "hardness";
    man.workers = workers;
    man.config = {{"family", family}, {"canonicalize", !no_canon}, {"ranking", with_ranking}};
    obliq::write_report(out, obliq::make_report(man, results, wall_ms(t0)));
    return 0;
}

int cmd_analytic(double a, double b, double c, double grid, const std::string& out) {
    auto t0 = std::chrono::steady_clock::now();
    obliq::AnalyticParams params{a, b, c};
    obliq::AnalyticReport rep = obliq::analytic_audit(params);
    obliq::AnalyticGh gh(params);
    obliq::GridMinResult mn = obliq::min_lower_bound(gh, grid);

    ordered_json checks = ordered_json::array();
    for (const auto& ck : rep.checks) {
        ordered_json j;
        j["name"] = ck.name;
        j["computed"] = ck.value;
        j["reference"] = ck.reference;
        j["pass"] = ck.pass;
        checks.push_back(j);
        std::cout << (ck.pass ? "[ok]   " : "[FAIL] ") << ck.name << ": " << ck.value
                  << " (reference " << ck.reference << ")\n";
    }
    bool min_ok = mn.reported >= 0.6324;
    std::cout << (min_ok ? "[ok]   " : "[FAIL] ") << "min over (tau,gamma) of lower bound: "
              << mn.reported << " at tau=" << mn.tau << " gamma=" << mn.gamma << "\n";

    obliq::RunManifest man;
    man.subcommand = "analytic";
    man.config = {{"a", a}, {"b", b}, {"c", c}, {"grid", grid}};
    ordered_json results;
    results["checks"] = checks;
    results["grid_min"] = {{"reported", mn.reported},
                           {"raw", mn.raw_min},
                           {"tau", mn.tau},
                           {"gamma", mn.gamma}};
    obliq::write_report(out, obliq::make_report(man, results, wall_ms(t0)));
    return rep.all_pass && min_ok ? 0 : 1;
}

int cmd_selftest() {
    int failures = 0;
    auto check = [&](bool ok, const std::string& what) {
        std::cout << (ok ? "[ok]   " : "[FAIL] ") << what << "\n";
        if (!ok) ++failures;
    };
    auto near = [](double x, double y, double tol) { return std::abs(x - y) <= tol; };

    // step functions
    obliq::StepFunction f = obliq::StepFunction::non_increasing({0.8, 0.3}, 0.0);
    check(f(0.0) == 0.8 && f(0.5) == 0.3 && f(1.0) == 0.0, "step eval at 0, 0.5, 1");
    check(f.inverse_at(0.5) == 0.5 && f.inverse_at(0.9) == 0.0 && f.inverse_at(0.1) == 1.0,
          "non-increasing inverse");
    obliq::StepFunction h = obliq::StepFunction::non_decreasing({0.2, 0.7});
    check(h.inverse_at(0.5) == 0.5 && h.inverse_at(0.8) == 1.0, "non-decreasing inverse");
    check(obliq::sn_count(1) == 2 && obliq::sn_count(2) == 6 && obliq::sn_count(3) == 20,
          "S_n counts 2, 6, 20");

    obliq::GhPair circle = obliq::general_form({0.0, {0.6}});
    check(near(circle.H()[0], 0.8, 1e-12), "general form phi=0: H = 0.8");
    obliq::GhPair tangent = obliq::general_form({std::atan(1.0), {0.3}});
    check(near(tangent.H()[0], std::sqrt(2.0) - 0.3, 1e-12), "general form tangent branch");

    obliq::BudgetCheck bc = obliq::check_budget({0.8, 0.6}, {0.6, 0.8});
    check(bc.ok && bc.max_violation == 0.0 && bc.i == 1 && bc.j == 2, "budget witness (1,2)");
    check(!obliq::check_budget({0.9}, {0.9}).ok, "budget violation 0.62 detected");

    // bound, n = 1
    obliq::GhPair g1 = obliq::GhPair::make({0.5}, {1.0});
    auto gs = [](int n, std::vector<int> v) { return obliq::GridStep::make(n, std::move(v)); };
    check(obliq::discretization_bound(g1, gs(1, {1}), gs(1, {1})) == 1.0 &&
              obliq::discretization_bound(g1, gs(1, {1}), gs(1, {0})) == 0.5 &&
              obliq::discretization_bound(g1, gs(1, {0}), gs(1, {0})) == 1.0,
          "discretization bound n=1 examples");
    obliq::BoundReport rep1 = obliq::verify_ratio(g1, 1);
    check(rep1.ratio == 0.5 && rep1.argmin_theta.levels == std::vector<int>{1} &&
              rep1.argmin_beta.levels == std::vector<int>{0},
          "verify n=1: ratio 1/2, witness theta=(1), beta=(0)");

    obliq::BoundReport rep4 = obliq::verify_ratio(obliq::reference_pair(4), default_workers());
    check(near(rep4.ratio, 0.6321, 2e-3), "verify reference n=4 ratio 0.6321");
    obliq::BoundReport rep5 = obliq::verify_ratio(obliq::reference_pair(5), default_workers());
    check(near(rep5.ratio, 0.6389, 2e-3), "verify reference n=5 ratio 0.6389");

    // hardness
    obliq::HardnessResult wu = obliq::optimal_adaptive_value(obliq::HardFamily::warmup());
    check(wu.expected_matched == obliq::Rational(7, 4) && wu.ratio == obliq::Rational(7, 8),
          "warmup DP: 7/4 (ratio 7/8)");
    obliq::HardnessResult rk = obliq::ranking_exact_value(obliq::HardFamily::warmup());
    check(rk.ratio == obliq::Rational(7, 8), "warmup ranking: 7/8");
    obliq::HardnessResult hh2 = obliq::optimal_adaptive_value(obliq::HardFamily::general(2));
    check(hh2.ratio == obliq::Rational(19, 24), "general n=2 DP: 19/24");
    obliq::HardnessResult h3 = obliq::optimal_adaptive_value(obliq::HardFamily::bipartite(3));
    check(h3.ratio == obliq::Rational(89, 108), "bipartite n=3 DP: 89/108");
    check(obliq::ranking_exact_value(obliq::HardFamily::bipartite(3)).ratio == h3.ratio,
          "ranking matches the n=3 optimum");

    // analytic
    obliq::AnalyticGh an;
    check(near(an.g(0.0), 0.832, 5e-4) && near(an.g(1.0), 0.5203, 5e-4), "analytic g(0), g(1)");
    check(near(an.H(1.0), 0.76016, 5e-4), "analytic H(1)");
    obliq::ConditionCheck cond = obliq::check_condition({});
    check(cond.applicable && near(cond.max_value, 0.999992, 1e-5), "condition 0.999992 < 1");

    // ranking
    obliq::Instance inst = obliq::Instance::make({{3, 2}, {2, 3}}, {{1, 1}, {1, 1}});
    obliq::GhFunctions lin;
    lin.g = [](double y) { return 1.0 - y; };
    lin.h = [](double) { return 1.0; };
    lin.g_inverse = [](double z) { return z >= 1.0 ? 0.0 : (z <= 0.0 ? 1.0 : 1.0 - z); };
    obliq::RankAssignment ranks{{0.1, 0.3}, {0.2, 0.4}};
    auto order = obliq::perturbed_order(inst, lin, ranks);
    check(order.size() == 4 && order[0] == std::make_pair(0, 0) &&
              order[1] == std::make_pair(1, 1) && order[2] == std::make_pair(1, 0) &&
              order[3] == std::make_pair(0, 1),
          "perturbed order 2x2 example");
    obliq::MatchResult mr = obliq::run(inst, lin, ranks);
    check(near(mr.total_weight, 6.0, 1e-12) && mr.matches.size() == 2, "run matches both pairs");
    check(near(obliq::optimal_offline(inst), 6.0, 1e-12), "offline optimum 6");

    // opt
    std::string model_text = obliq::qcqp_to_text(obliq::QcqpModel::initial(1));
    check(model_text == obliq::qcqp_to_text(obliq::QcqpModel::initial(1)),
          "model export deterministic");
    obliq::InnerSolver inner = [](const obliq::QcqpModel& m, const obliq::GhPair& s) {
        return obliq::heuristic_inner_solve(m, s);
    };
    obliq::ConstraintGenResult cg = obliq::constraint_generation(1, inner, 5);
    check(near(cg.certified_ratio, 0.5, 1e-6) && near(cg.gh.G()[0], std::sqrt(0.5), 1e-4),
          "constraint generation n=1 converges to G1=H1=sqrt(1/2)");

    std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"workbench for oblivious bipartite matching with quadratic ranking"};
    app.require_subcommand(1);
    int workers = default_workers();

    auto* verify = app.add_subcommand("verify", "certify the competitive ratio of a step pair");
    std::string v_gh, v_out;
    bool v_noprune = false;
    double v_eps = obliq::kPresetBudgetEps;
    verify->add_option("--gh", v_gh, "gh JSON file")->required();
    verify->add_option("--workers", workers, "worker threads");
    verify->add_flag("--no-prune", v_noprune, "disable the w.l.o.g. beta restriction");
    verify->add_option("--budget-eps", v_eps, "budget tolerance for loading gh");
    verify->add_option("--out", v_out, "report JSON path");

    auto* optimize = app.add_subcommand("optimize", "constraint-generation optimization of (G,H)");
    int o_n = 4, o_rounds = 25;
    std::string o_export, o_out;
    optimize->add_option("--n", o_n, "segment count")->required();
    optimize->add_option("--rounds", o_rounds, "constraint generation rounds");
    optimize->add_option("--workers", workers, "worker threads");
    optimize->add_option("--export", o_export, "write the final QCQP model here");
    optimize->add_option("--out", o_out, "write the optimized gh JSON here");

    auto* exportq = app.add_subcommand("export-qcqp", "write the QCQP model as plain text");
    int e_n = 4, e_rounds = 0;
    std::string e_out;
    exportq->add_option("--n", e_n, "segment count")->required();
    exportq->add_option("--rounds", e_rounds, "enrich the active set first");
    exportq->add_option("--workers", workers, "worker threads");
    exportq->add_option("--out", e_out, "model path")->required();

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo runs on an instance");
    std::string s_inst, s_gh, s_out;
    std::uint64_t s_samples = 10000, s_seed = 1;
    double s_eps = obliq::kPresetBudgetEps;
    simulate->add_option("--instance", s_inst, "instance JSON")->required();
    simulate->add_option("--gh", s_gh, "gh JSON")->required();
    simulate->add_option("--samples", s_samples, "sample count");
    simulate->add_option("--seed", s_seed, "rng seed");
    simulate->add_option("--workers", workers, "worker threads");
    simulate->add_option("--budget-eps", s_eps, "budget tolerance for loading gh");
    simulate->add_option("--out", s_out, "report JSON path");

    auto* hardness = app.add_subcommand("hardness", "exact DP upper bounds on hard families");
    std::string h_family = "warmup", h_out;
    bool h_nocanon = false, h_ranking = false;
    hardness->add_option("--family", h_family, "warmup|h3|h4|h5|h6|hhat2|hhat3")->required();
    hardness->add_flag("--no-canon", h_nocanon, "disable state canonicalization");
    hardness->add_flag("--ranking", h_ranking, "also evaluate Ranking exactly");
    hardness->add_option("--workers", workers, "worker threads");
    hardness->add_option("--out", h_out, "report JSON path");

    auto* analytic = app.add_subcommand("analytic", "closed-form parameter checks");
    double a_a = 1.171, a_b = 0.339, a_c = 0.652, a_grid = 1e-3;
    std::string a_out;
    analytic->add_option("--a", a_a, "parameter a");
    analytic->add_option("--b", a_b, "parameter b");
    analytic->add_option("--c", a_c, "parameter c");
    analytic->add_option("--grid", a_grid, "tau/gamma grid step");
    analytic->add_option("--out", a_out, "report JSON path");

    app.add_subcommand("selftest", "run the built-in example suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (verify->parsed()) return cmd_verify(v_gh, workers, v_noprune, v_eps, v_out);
        if (optimize->parsed()) return cmd_optimize(o_n, o_rounds, workers, o_export, o_out);
        if (exportq->parsed()) return cmd_export(e_n, e_rounds, workers, e_out);
        if (simulate->parsed())
            return cmd_simulate(s_inst, s_gh, s_samples, s_seed, workers, s_eps, s_out);
        if (hardness->parsed()) return cmd_hardness(h_family, h_nocanon, h_ranking, workers, h_out);
        if (analytic->parsed()) return cmd_analytic(a_a, a_b, a_c, a_grid, a_out);
        return cmd_selftest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
