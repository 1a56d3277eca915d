#pragma once
// Step-pair optimization: the quadratically constrained model over
// (F, G, H), a deterministic plain-text exporter for external solvers, a
// projected coordinate-ascent inner solver, and the constraint-generation
// loop whose output is always certified by the verifier.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "obliq/bound.hpp"
#include "obliq/stepfn.hpp"

namespace obliq {

struct QcqpModel {
    int n = 0;
    // Ratio constraints: one per active (theta, beta) pair.
    std::vector<std::pair<GridStep, GridStep>> active_pairs;

    // Relaxation seeded with theta == 1 against every beta in S_n.
    static QcqpModel initial(int n);

    // Appends pairs not already active; returns how many were new.
    std::size_t add_pairs(const std::vector<std::pair<GridStep, GridStep>>& pairs);
};

// Minimum of the discretized bound over the model's active pairs.
double active_objective(const QcqpModel& model, const GhPair& gh);

std::string qcqp_to_text(const QcqpModel& model);
void export_qcqp(const QcqpModel& model, const std::string& path);

struct InnerSolveOptions {
    double initial_step = 0.02;
    double min_step = 1e-6;
    int max_cycles = 100000;
};

// Projected coordinate ascent on (G, H): perturb one coordinate at a time,
// clamp back to monotonicity + budget + normalization feasibility, accept
// only moves that increase the active-constraint minimum.
GhPair heuristic_inner_solve(const QcqpModel& model, const GhPair& start,
                             const InnerSolveOptions& opts = {});

// Feasible point with G1^2 + H1^2 = 1, G1 >= H1; start for the solver.
GhPair default_start(int n);
// Projection of an arbitrary positive (G, H) onto the structural constraints.
GhPair make_feasible(std::vector<double> G, std::vector<double> H);

using InnerSolver = std::function<GhPair(const QcqpModel&, const GhPair&)>;

struct ConstraintGenResult {
    GhPair gh;
    double certified_ratio = 0.0;  // always verify_ratio of gh, never a claim
    int rounds = 0;
    bool converged = false;  // false => max_rounds exhausted (warning)
    std::size_t active_count = 0;
    std::vector<double> round_claimed, round_certified;
    QcqpModel model;  // final relaxation, for export
};

ConstraintGenResult constraint_generation(int n, const InnerSolver& inner, int max_rounds,
                                          std::optional<GhPair> start = std::nullopt,
                                          int workers = 1);

}  // namespace obliq
