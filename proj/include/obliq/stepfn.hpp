#pragma once
// Step functions on [0,1], their right-continuous inverses, the grid space
// S_n of non-decreasing marginal-rank step functions, and (g, h) parameter
// pairs including the circle-plus-tangent construction.

#include <cstdint>
#include <string>
#include <vector>

namespace obliq {

inline constexpr double kBudgetEps = 1e-9;

enum class Monotonicity { NonIncreasing, NonDecreasing };

// An n-segment step function: value values[i] on [i/n, (i+1)/n) for
// i = 0..n-1, plus an explicit value at y = 1.
struct StepFunction {
    int n = 0;
    std::vector<double> values;
    Monotonicity mono = Monotonicity::NonIncreasing;
    double extension_at_1 = 0.0;

    static StepFunction non_increasing(std::vector<double> vals, double ext_at_1 = 0.0);
    static StepFunction non_decreasing(std::vector<double> vals);

    // f(y); y outside [0,1] is a domain error.
    double operator()(double y) const;

    // Right-continuous generalized inverse.
    // Non-increasing f: inf{x in [0,1] : f(x) <= y}.
    // Non-decreasing f: inf{x in [0,1] : f(x) >  y}.
    // inf of the empty set is 1.
    double inverse_at(double y) const;

    std::vector<double> breakpoints() const;  // interior jumps k/n, k=1..n-1
};

// Callable wrapper so the inverse can be passed around as a map of its own.
struct StepInverse {
    const StepFunction* f;
    double operator()(double y) const { return f->inverse_at(y); }
};
StepInverse inverse(const StepFunction& f);

// A marginal-rank step function from S_n: integer levels[i] in 0..n,
// non-decreasing, value levels[i]/n on segment i, value 1 at y = 1.
struct GridStep {
    int n = 0;
    std::vector<int> levels;

    static GridStep make(int n, std::vector<int> levels);

    double value_at(double y) const;
    double inverse_at(double y) const;

    // inv[i] for i = 1..n (0-based i-1): the inverse at (i-1)/n in level
    // units, i.e. min{j : levels[j-1] >= i} - 1, or n when no such j.
    std::vector<int> inverse_levels() const;

    StepFunction to_step() const;

    bool operator==(const GridStep& o) const { return n == o.n && levels == o.levels; }
};

// Algorithm parameters: non-increasing g with g(1) = 0 and positive segment
// values, non-decreasing positive h, both n segments, budget-feasible.
struct GhPair {
    StepFunction g, h;
    double budget_eps = kBudgetEps;

    static GhPair make(std::vector<double> G, std::vector<double> H, double eps = kBudgetEps);
    int n() const { return g.n; }
    const std::vector<double>& G() const { return g.values; }
    const std::vector<double>& H() const { return h.values; }
};

struct BudgetCheck {
    bool ok = false;
    double max_violation = 0.0;  // max over i<=j of H_i G_j + H_j G_i - 1
    int i = 0, j = 0;            // 1-based witness
};

BudgetCheck check_budget(const std::vector<double>& G, const std::vector<double>& H,
                         double eps = kBudgetEps);
BudgetCheck check_budget(const GhPair& gh);

// Circle-plus-tangent family: g maps into [0, cos(phi)] and
//   h = 1/cos(phi) - g tan(phi)   where g < sin(phi),
//   h = sqrt(1 - g^2)             where sin(phi) <= g <= cos(phi).
struct GeneralFormParams {
    double phi = 0.0;              // in [0, pi/4]
    std::vector<double> g_values;  // non-increasing, within [0, cos(phi)]
};

GhPair general_form(const GeneralFormParams& params, double eps = kBudgetEps);

// ---- S_n enumeration ----------------------------------------------------
// S_n = all non-decreasing integer sequences of length n over {0..n};
// |S_n| = C(2n, n). Lexicographic order throughout.

std::uint64_t binomial(int n, int k);
std::uint64_t sn_count(int n);

// Lexicographic successor; returns false after the last element (n,..,n).
bool sn_next(std::vector<int>& levels, int n);

std::vector<int> sn_unrank(int n, std::uint64_t rank);
std::uint64_t sn_rank(int n, const std::vector<int>& levels);

// Contiguous lexicographic chunk [begin_rank, end_rank) of S_n, for
// splitting the space across parallel consumers.
class SnRange {
public:
    SnRange(int n, std::uint64_t begin_rank, std::uint64_t end_rank);
    // Writes the next element into `levels`; false when the range is done.
    bool next(std::vector<int>& levels);
    std::uint64_t size() const { return end_ - begin_; }

private:
    int n_;
    std::uint64_t begin_, end_, emitted_ = 0;
    std::vector<int> cur_;
};

// ---- serialization ------------------------------------------------------

std::string gh_to_json(const GhPair& gh);
GhPair gh_from_json(const std::string& text, double eps = kBudgetEps);
GhPair gh_load_json(const std::string& path, double eps = kBudgetEps);
std::string gh_to_csv(const GhPair& gh);  // columns i, G_i, H_i

}  // namespace obliq
