#include "obliq/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "obliq/rng.hpp"

namespace obliq {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

bool removed(double y) { return y < 0.0; }

}  // namespace

Instance Instance::make(std::vector<std::vector<double>> weights,
                        std::vector<std::vector<std::uint8_t>> exists) {
    require(!weights.empty() && !weights[0].empty(), "instance needs at least one pair");
    Instance inst;
    inst.left_count = static_cast<int>(weights.size());
    inst.right_count = static_cast<int>(weights[0].size());
    require(exists.size() == weights.size(), "weights/exists dimensions differ");
    for (int u = 0; u < inst.left_count; ++u) {
        require(static_cast<int>(weights[u].size()) == inst.right_count &&
                    static_cast<int>(exists[u].size()) == inst.right_count,
                "ragged instance matrices");
        for (double w : weights[u])
            require(std::isfinite(w) && w >= 0.0, "weights must be finite and >= 0");
    }
    inst.weights = std::move(weights);
    inst.exists = std::move(exists);
    return inst;
}

Instance Instance::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    auto w = j.at("weights").get<std::vector<std::vector<double>>>();
    auto e = j.at("exists").get<std::vector<std::vector<std::uint8_t>>>();
    Instance inst = Instance::make(std::move(w), std::move(e));
    if (j.contains("left")) require(j["left"].get<int>() == inst.left_count, "left count mismatch");
    if (j.contains("right"))
        require(j["right"].get<int>() == inst.right_count, "right count mismatch");
    return inst;
}

std::string Instance::to_json() const {
    nlohmann::ordered_json j;
    j["left"] = left_count;
    j["right"] = right_count;
    j["weights"] = weights;
    j["exists"] = exists;
    return j.dump(2) + "\n";
}

GhFunctions functions_from(const GhPair& gh) {
    auto g = gh.g, h = gh.h;  // copies keep the functions self-contained
    GhFunctions fns;
    fns.g = [g](double y) { return g(y); };
    fns.h = [h](double y) { return h(y); };
    fns.g_inverse = [g](double z) { return g.inverse_at(z); };
    return fns;
}

GhFunctions functions_from(const AnalyticGh& gh) {
    GhFunctions fns;
    fns.g = [&gh](double y) { return y >= 1.0 ? 0.0 : gh.g(y); };
    fns.h = [&gh](double y) { return gh.h(y); };
    fns.g_inverse = [&gh](double z) { return gh.g_inverse(z); };
    return fns;
}

std::vector<std::pair<int, int>> perturbed_order(const Instance& inst, const GhFunctions& fns,
                                                 const RankAssignment& ranks) {
    struct Entry {
        double key;
        int u, v;
    };
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(inst.left_count) * inst.right_count);
    std::vector<double> gl(inst.left_count), gr(inst.right_count);
    for (int u = 0; u < inst.left_count; ++u)
        if (!removed(ranks.left[u])) gl[u] = fns.g(ranks.left[u]);
    for (int v = 0; v < inst.right_count; ++v)
        if (!removed(ranks.right[v])) gr[v] = fns.g(ranks.right[v]);
    for (int u = 0; u < inst.left_count; ++u) {
        if (removed(ranks.left[u])) continue;
        for (int v = 0; v < inst.right_count; ++v) {
            if (removed(ranks.right[v])) continue;
            entries.push_back({gl[u] * gr[v] * inst.weights[u][v], u, v});
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.key != b.key) return a.key > b.key;
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });
    std::vector<std::pair<int, int>> order;
    order.reserve(entries.size());
    for (const auto& e : entries) order.emplace_back(e.u, e.v);
    return order;
}

MatchResult run_with_oracle(const Instance& inst, const GhFunctions& fns,
                            const RankAssignment& ranks,
                            const std::function<bool(int, int)>& oracle, double surplus_share) {
    require(static_cast<int>(ranks.left.size()) == inst.left_count &&
                static_cast<int>(ranks.right.size()) == inst.right_count,
            "rank vector sizes do not match the instance");
    for (double y : ranks.left) require(removed(y) || y < 1.0, "ranks must lie in [0,1)");
    for (double y : ranks.right) require(removed(y) || y < 1.0, "ranks must lie in [0,1)");

    MatchResult res;
    res.match_of_left.assign(inst.left_count, -1);
    res.match_of_right.assign(inst.right_count, -1);
    res.alpha_left.assign(inst.left_count, 0.0);
    res.alpha_right.assign(inst.right_count, 0.0);

    for (auto [u, v] : perturbed_order(inst, fns, ranks)) {
        if (res.match_of_left[u] >= 0 || res.match_of_right[v] >= 0) continue;
        bool ex = oracle(u, v);
        res.trace.push_back({u, v, ex});
        if (!ex) continue;
        res.match_of_left[u] = v;
        res.match_of_right[v] = u;
        res.matches.emplace_back(u, v);
        double w = inst.weights[u][v];
        double gain_u = fns.h(ranks.left[u]) * fns.g(ranks.right[v]) * w;
        double gain_v = fns.h(ranks.right[v]) * fns.g(ranks.left[u]) * w;
        double surplus = w - gain_u - gain_v;
        res.alpha_left[u] = gain_u + surplus_share * surplus;
        res.alpha_right[v] = w - res.alpha_left[u];
        res.total_weight += w;
    }
    return res;
}

MatchResult run(const Instance& inst, const GhFunctions& fns, const RankAssignment& ranks,
                double surplus_share) {
    return run_with_oracle(
        inst, fns, ranks, [&inst](int u, int v) { return inst.exists[u][v] != 0; },
        surplus_share);
}

double optimal_offline(const Instance& inst) {
    // Hungarian algorithm on the (existing-edge) weight matrix, padded to
    // rows <= cols; non-existing pairs carry zero weight, so an assignment
    // through them is the same as leaving the vertex unmatched.
    int L = inst.left_count, R = inst.right_count;
    bool transposed = L > R;
    int n = transposed ? R : L, m = transposed ? L : R;
    auto weight = [&](int i, int j) {
        int u = transposed ? j : i, v = transposed ? i : j;
        return inst.exists[u][v] ? inst.weights[u][v] : 0.0;
    };
    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> pot_u(n + 1, 0.0), pot_v(m + 1, 0.0);
    std::vector<int> way(m + 1, 0), match(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, INF);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            int i0 = match[j0], j1 = -1;
            double delta = INF;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = -weight(i0 - 1, j - 1) - pot_u[i0] - pot_v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    pot_u[match[j]] += delta;
                    pot_v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= m; ++j)
        if (match[j] != 0) total += weight(match[j] - 1, j - 1);
    return total;
}

EdgeDualEstimate estimate_edge_dual(const Instance& inst, const GhFunctions& fns, int u, int v,
                                    const RankAssignment& other_ranks, std::uint64_t samples,
                                    std::uint64_t seed, int workers) {
    require(u >= 0 && u < inst.left_count && v >= 0 && v < inst.right_count, "edge out of range");
    require(inst.exists[u][v] != 0, "estimate_edge_dual requires an existing edge");
    require(samples >= 1, "need at least one sample");
    double w = inst.weights[u][v];
    if (w <= 0.0) throw std::domain_error("estimate_edge_dual: zero-weight edge");

    // Fixed-size blocks folded in block order keep the result identical for
    // any worker count.
    const std::uint64_t block = 4096;
    const std::uint64_t nblocks = (samples + block - 1) / block;
    std::vector<double> sum(nblocks, 0.0), sumsq(nblocks, 0.0);

    auto run_block = [&](std::uint64_t bi) {
        RankAssignment ranks = other_ranks;
        double s = 0.0, s2 = 0.0;
        std::uint64_t lo = bi * block, hi = std::min(samples, lo + block);
        for (std::uint64_t k = lo; k < hi; ++k) {
            ranks.left[u] = rng_u01(seed, 2 * k);
            ranks.right[v] = rng_u01(seed, 2 * k + 1);
            MatchResult res = run(inst, fns, ranks);
            double x = (res.alpha_left[u] + res.alpha_right[v]) / w;
            s += x;
            s2 += x * x;
        }
        sum[bi] = s;
        sumsq[bi] = s2;
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

    double s = 0.0, s2 = 0.0;
    for (std::uint64_t bi = 0; bi < nblocks; ++bi) {
        s += sum[bi];
        s2 += sumsq[bi];
    }
    EdgeDualEstimate est;
    est.samples = samples;
    est.mean = s / static_cast<double>(samples);
    if (samples > 1) {
        double var = (s2 - static_cast<double>(samples) * est.mean * est.mean) /
                     static_cast<double>(samples - 1);
        est.stderr_ = std::sqrt(std::max(0.0, var) / static_cast<double>(samples));
    }
    return est;
}

std::vector<std::pair<int, int>> sequential_greedy(const Instance& inst,
                                                   const RankAssignment& ranks) {
    struct V {
        double y;
        int side, idx;
    };
    std::vector<V> verts;
    for (int u = 0; u < inst.left_count; ++u)
        if (!removed(ranks.left[u])) verts.push_back({ranks.left[u], 0, u});
    for (int v = 0; v < inst.right_count; ++v)
        if (!removed(ranks.right[v])) verts.push_back({ranks.right[v], 1, v});
    std::sort(verts.begin(), verts.end(), [](const V& a, const V& b) {
        if (a.y != b.y) return a.y < b.y;
        if (a.side != b.side) return a.side < b.side;
        return a.idx < b.idx;
    });
    std::vector<char> mL(inst.left_count, 0), mR(inst.right_count, 0);
    std::vector<std::pair<int, int>> matches;
    for (const V& x : verts) {
        if (x.side == 0) {
            if (mL[x.idx]) continue;
            int best = -1;
            double besty = 2.0;
            for (int v = 0; v < inst.right_count; ++v) {
                if (mR[v] || removed(ranks.right[v]) || !inst.exists[x.idx][v]) continue;
                if (ranks.right[v] < besty) {
                    besty = ranks.right[v];
                    best = v;
                }
            }
            if (best >= 0) {
                mL[x.idx] = mR[best] = 1;
                matches.emplace_back(x.idx, best);
            }
        } else {
            if (mR[x.idx]) continue;
            int best = -1;
            double besty = 2.0;
            for (int u = 0; u < inst.left_count; ++u) {
                if (mL[u] || removed(ranks.left[u]) || !inst.exists[u][x.idx]) continue;
                if (ranks.left[u] < besty) {
                    besty = ranks.left[u];
                    best = u;
                }
            }
            if (best >= 0) {
                mL[best] = mR[x.idx] = 1;
                matches.emplace_back(best, x.idx);
            }
        }
    }
    std::sort(matches.begin(), matches.end());
    return matches;
}

namespace {

// v's preference value for its matched edge in a result; -inf when unmatched.
double pref_right(const Instance& inst, const GhFunctions& fns, const RankAssignment& ranks,
                  const MatchResult& res, int v) {
    int u = res.match_of_right[v];
    if (u < 0) return -std::numeric_limits<double>::infinity();
    return fns.g(ranks.left[u]) * inst.weights[u][v];
}

double pref_left(const Instance& inst, const GhFunctions& fns, const RankAssignment& ranks,
                 const MatchResult& res, int u) {
    int v = res.match_of_left[u];
    if (v < 0) return -std::numeric_limits<double>::infinity();
    return fns.g(ranks.right[v]) * inst.weights[u][v];
}

}  // namespace

LemmaViolations check_structural_lemmas(const Instance& inst, const GhFunctions& fns, int m,
                                        double delta) {
    require(inst.left_count <= 5 && inst.right_count <= 5, "lemma check wants a small instance");
    require(m >= 1, "grid needs m >= 1");
    const double tol = 1e-9;
    std::vector<double> grid(m);
    for (int k = 0; k < m; ++k) grid[k] = static_cast<double>(k) / m + delta;
    require(grid.back() < 1.0, "jitter pushes grid ranks past 1");

    LemmaViolations viol;
    const int L = inst.left_count, R = inst.right_count;
    std::vector<int> others;  // flat ids: left u -> u, right v -> L + v

    for (int ue = 0; ue < L; ++ue) {
        for (int ve = 0; ve < R; ++ve) {
            if (!inst.exists[ue][ve] || inst.weights[ue][ve] <= 0.0) continue;
            for (int oid = 0; oid < L + R; ++oid)
                if (oid != ue && oid != L + ve) others.push_back(oid);

            std::vector<int> idx(others.size(), 0);
            bool more = true;
            while (more) {
                RankAssignment base{std::vector<double>(L, 0.0), std::vector<double>(R, 0.0)};
                for (std::size_t k = 0; k < others.size(); ++k) {
                    int id = others[k];
                    if (id < L)
                        base.left[id] = grid[idx[k]];
                    else
                        base.right[id - L] = grid[idx[k]];
                }
                ++viol.tuples_checked;

                const double w_uv = inst.weights[ue][ve];
                // theta(y_v) from M(bot, y_v); beta(y_u) from M(y_u, bot).
                std::vector<double> theta(m), beta(m);
                std::vector<MatchResult> run_no_u(m), run_no_v(m);
                for (int k = 0; k < m; ++k) {
                    RankAssignment r = base;
                    r.left[ue] = kRemoved;
                    r.right[ve] = grid[k];
                    run_no_u[k] = run(inst, fns, r);
                    int p = run_no_u[k].match_of_right[ve];
                    double ratio = p >= 0 ? fns.g(r.left[p]) * inst.weights[p][ve] / w_uv : 0.0;
                    theta[k] = fns.g_inverse(ratio);

                    RankAssignment r2 = base;
                    r2.right[ve] = kRemoved;
                    r2.left[ue] = grid[k];
                    run_no_v[k] = run(inst, fns, r2);
                    int q = run_no_v[k].match_of_left[ue];
                    double ratio2 = q >= 0 ? fns.g(r2.right[q]) * inst.weights[ue][q] / w_uv : 0.0;
                    beta[k] = fns.g_inverse(ratio2);
                }
                for (int k = 1; k < m; ++k) {
                    if (theta[k] < theta[k - 1] - tol) ++viol.marginal_rank_monotonicity;
                    if (beta[k] < beta[k - 1] - tol) ++viol.marginal_rank_monotonicity;
                }

                std::vector<std::vector<MatchResult>> full(m, std::vector<MatchResult>(m));
                for (int ku = 0; ku < m; ++ku)
                    for (int kv = 0; kv < m; ++kv) {
                        RankAssignment r = base;
                        r.left[ue] = grid[ku];
                        r.right[ve] = grid[kv];
                        full[ku][kv] = run(inst, fns, r);
                    }

                for (int ku = 0; ku < m; ++ku) {
                    RankAssignment r = base;
                    r.left[ue] = grid[ku];
                    for (int kv = 0; kv < m; ++kv) {
                        r.right[ve] = grid[kv];
                        const MatchResult& res = full[ku][kv];

                        // basic-gain for both endpoints
                        double need_u = fns.h(grid[ku]) * fns.g(beta[ku]) * w_uv;
                        double need_v = fns.h(grid[kv]) * fns.g(theta[kv]) * w_uv;
                        if (res.alpha_left[ue] < need_u - tol) ++viol.basic_gain;
                        if (res.alpha_right[ve] < need_v - tol) ++viol.basic_gain;

                        // extra-gain: below both marginal ranks they marry
                        if (grid[ku] < theta[kv] && grid[kv] < beta[ku]) {
                            bool married = res.match_of_left[ue] == ve;
                            double sum = res.alpha_left[ue] + res.alpha_right[ve];
                            if (!married || std::abs(sum - w_uv) > tol) ++viol.extra_gain;
                        }

                        // add-neighbor: u prefers M(y_u, y_v) over M(y_u, bot)
                        double with_v = pref_left(inst, fns, r, res, ue);
                        RankAssignment rb = base;
                        rb.left[ue] = grid[ku];
                        double without_v = pref_left(inst, fns, rb, run_no_v[ku], ue);
                        if (with_v < without_v - tol) ++viol.add_neighbor;
                        double with_u = pref_right(inst, fns, r, res, ve);
                        double without_u = pref_right(inst, fns, base, run_no_u[kv], ve);
                        if (with_u < without_u - tol) ++viol.add_neighbor;
                    }

                    // rank monotonicity for v along kv at fixed ku, and the
                    // removed-u row
                    for (int kv = 1; kv < m; ++kv) {
                        RankAssignment rlo = base, rhi = base;
                        rlo.left[ue] = grid[ku];
                        rhi.left[ue] = grid[ku];
                        rlo.right[ve] = grid[kv - 1];
                        rhi.right[ve] = grid[kv];
                        double lo = pref_right(inst, fns, rlo, full[ku][kv - 1], ve);
                        double hi = pref_right(inst, fns, rhi, full[ku][kv], ve);
                        if (lo < hi - tol) ++viol.rank_monotonicity;
                    }
                }
                for (int kv = 0; kv < m; ++kv)
                    for (int ku = 1; ku < m; ++ku) {
                        RankAssignment rlo = base, rhi = base;
                        rlo.right[ve] = grid[kv];
                        rhi.right[ve] = grid[kv];
                        rlo.left[ue] = grid[ku - 1];
                        rhi.left[ue] = grid[ku];
                        double lo = pref_left(inst, fns, rlo, full[ku - 1][kv], ue);
                        double hi = pref_left(inst, fns, rhi, full[ku][kv], ue);
                        if (lo < hi - tol) ++viol.rank_monotonicity;
                    }
                for (int kv = 1; kv < m; ++kv) {
                    RankAssignment rlo = base, rhi = base;
                    rlo.left[ue] = kRemoved;
                    rhi.left[ue] = kRemoved;
                    rlo.right[ve] = grid[kv - 1];
                    rhi.right[ve] = grid[kv];
                    double lo = pref_right(inst, fns, rlo, run_no_u[kv - 1], ve);
                    double hi = pref_right(inst, fns, rhi, run_no_u[kv], ve);
                    if (lo < hi - tol) ++viol.rank_monotonicity;
                }

                // next tuple
                more = false;
                for (std::size_t k = 0; k < idx.size(); ++k) {
                    if (++idx[k] < m) {
                        more = true;
                        break;
                    }
                    idx[k] = 0;
                }
            }
            others.clear();
        }
    }
    return viol;
}

}  // namespace obliq
