#pragma once
// Quadratic Ranking execution: rank sampling, perturbed-weight query order,
// query-commit matching with dual gain sharing, the offline optimum, and the
// brute-force structural-lemma checker.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "obliq/analytic.hpp"
#include "obliq/stepfn.hpp"

namespace obliq {

// Weighted bipartite instance with hidden edge existence. The existence
// matrix is consulted only through the query oracle during a run.
struct Instance {
    int left_count = 0, right_count = 0;
    std::vector<std::vector<double>> weights;   // left x right
    std::vector<std::vector<std::uint8_t>> exists;

    static Instance make(std::vector<std::vector<double>> weights,
                         std::vector<std::vector<std::uint8_t>> exists);
    static Instance from_json(const std::string& text);
    std::string to_json() const;
};

// Per-vertex ranks in [0,1); kRemoved marks a vertex as absent.
inline constexpr double kRemoved = -1.0;

struct RankAssignment {
    std::vector<double> left, right;

    static RankAssignment uniform_zero(const Instance& inst) {
        return {std::vector<double>(inst.left_count, 0.0),
                std::vector<double>(inst.right_count, 0.0)};
    }
    RankAssignment without_left(int u) const {
        RankAssignment r = *this;
        r.left[u] = kRemoved;
        return r;
    }
    RankAssignment without_right(int v) const {
        RankAssignment r = *this;
        r.right[v] = kRemoved;
        return r;
    }
};

// Parameter functions used by a run; covers step pairs, the closed-form
// analytic pair, and ad-hoc continuous g for tests. g_inverse follows the
// right-continuous inf definition with the g(1) = 0 boundary.
struct GhFunctions {
    std::function<double(double)> g, h;
    std::function<double(double)> g_inverse;
};

GhFunctions functions_from(const GhPair& gh);
GhFunctions functions_from(const AnalyticGh& gh);

struct QueryRecord {
    int u = 0, v = 0;
    bool exists = false;
};

struct MatchResult {
    std::vector<std::pair<int, int>> matches;
    std::vector<int> match_of_left, match_of_right;  // partner index or -1
    std::vector<double> alpha_left, alpha_right;     // zero when unmatched
    std::vector<QueryRecord> trace;
    double total_weight = 0.0;
};

// All candidate pairs with both endpoints present, sorted by descending
// perturbed weight g(y_u) g(y_v) w_uv, ties broken lexicographically.
std::vector<std::pair<int, int>> perturbed_order(const Instance& inst, const GhFunctions& fns,
                                                 const RankAssignment& ranks);

// Query-commit execution. The surplus above the two guaranteed gains is
// split by surplus_share to u and the rest to v.
MatchResult run(const Instance& inst, const GhFunctions& fns, const RankAssignment& ranks,
                double surplus_share = 0.5);

// Same, with an injected existence oracle (used to enforce and test that
// unqueried existence bits can never influence a run).
MatchResult run_with_oracle(const Instance& inst, const GhFunctions& fns,
                            const RankAssignment& ranks,
                            const std::function<bool(int, int)>& oracle,
                            double surplus_share = 0.5);

// Exact maximum-weight matching over the existing edges (assignment scale).
double optimal_offline(const Instance& inst);

struct EdgeDualEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
};

// Monte-Carlo estimate of E[(alpha_u + alpha_v)] / w_uv over uniform ranks
// of u and v with the other ranks fixed; deterministic given the seed for
// any worker count.
EdgeDualEstimate estimate_edge_dual(const Instance& inst, const GhFunctions& fns, int u, int v,
                                    const RankAssignment& other_ranks, std::uint64_t samples,
                                    std::uint64_t seed, int workers = 1);

// Unweighted equivalence: process vertices by increasing rank, match each to
// its unmatched neighbor of smallest rank. Left vertex ids 0..L-1, right ids
// L..L+R-1 in the returned pairs' (u, v) instance indexing.
std::vector<std::pair<int, int>> sequential_greedy(const Instance& inst,
                                                   const RankAssignment& ranks);

struct LemmaViolations {
    std::uint64_t add_neighbor = 0;
    std::uint64_t rank_monotonicity = 0;
    std::uint64_t basic_gain = 0;
    std::uint64_t extra_gain = 0;
    std::uint64_t marginal_rank_monotonicity = 0;
    std::uint64_t tuples_checked = 0;
    bool none() const {
        return add_neighbor + rank_monotonicity + basic_gain + extra_gain +
                   marginal_rank_monotonicity ==
               0;
    }
};

// Exhaustive grid check of the structural lemmas on a small instance. Ranks
// live on {k/m + delta}; delta keeps grid ranks off step breakpoints.
LemmaViolations check_structural_lemmas(const Instance& inst, const GhFunctions& fns, int m,
                                        double delta);

inline double grid_jitter(int m, int n_segments) { return 1.0 / (2.0 * m * n_segments); }

}  // namespace obliq
