#pragma once
// Discretized competitive-ratio lower bound for step-function parameters and
// the exhaustive verifier that minimizes it over pairs of marginal-rank
// functions from S_n x S_n.

#include <cstdint>
#include <utility>
#include <vector>

#include "obliq/stepfn.hpp"

namespace obliq {

// Value of the discretized bound
//   (1/n) sum_i (Theta_i - Binv_i)^+
// + (1/n) sum_i (1 - (Theta_i - Binv_i)^+) H_i G_{n Theta_i + 1}
// + (1/n) sum_i (1 - (B_i - Tinv_i)^+)     H_i G_{n B_i + 1}
// with G_{n+1} = 0 and inverses in the right-continuous sense.
double discretization_bound(const GhPair& gh, const GridStep& theta, const GridStep& beta);

struct BoundReport {
    double ratio = 0.0;
    GridStep argmin_theta, argmin_beta;
    std::uint64_t pairs_evaluated = 0;
    std::uint64_t pairs_pruned = 0;
    double wall_seconds = 0.0;
    int workers = 1;
    bool pruned = true;
};

// Exact minimum of discretization_bound over theta, beta in S_n x S_n.
//
// The search runs one exact dynamic program over beta per theta, so the
// reported ratio is the true minimum (bit-for-bit the same value whether or
// not pruning is enabled and regardless of worker count). With prune=true
// the beta space is restricted w.l.o.g. to Theta_i >= Binv_i for all i;
// excluded pairs are counted in pairs_pruned. Among minimizing pairs the
// witness is the lexicographically smallest (theta, then beta), preferring
// pairs that also satisfy sum Theta >= sum B.
BoundReport verify_ratio(const GhPair& gh, int workers = 1, bool prune = true);

// Reference quadratic scan over every (theta, beta) pair; used as an
// independent oracle at small n.
double min_bound_exhaustive(const GhPair& gh);

// All pairs whose bound value is <= threshold, in lexicographic order,
// truncated at max_pairs. Serves the constraint-generation loop.
std::vector<std::pair<GridStep, GridStep>> collect_pairs_below(const GhPair& gh, double threshold,
                                                               std::size_t max_pairs);

}  // namespace obliq
