#pragma once
// Exact backward dynamic programming over query states for the hard
// instance families, valued under the uniform posterior over embeddings,
// plus exact evaluation of Ranking on the same instances. All values are
// exact rationals.

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace obliq {

using Rational = mpq_class;

struct HardFamily {
    enum class Kind { WarmupB4, BipartiteH, GeneralHhat };
    Kind kind = Kind::WarmupB4;
    int n = 2;  // vertices per side (bipartite) or half the vertex count

    static HardFamily warmup() { return {Kind::WarmupB4, 2}; }
    static HardFamily bipartite(int n);
    static HardFamily general(int n);
    static HardFamily from_name(const std::string& name);  // warmup|h3..h6|hhat2|hhat3

    bool is_bipartite() const { return kind != Kind::GeneralHhat; }
    int total_vertices() const { return 2 * n; }
    std::string name() const;

    // Identity-level adjacency. Bipartite: left identity a and right
    // identity b (both 1..n) are adjacent iff a >= b. General: labels
    // u_i, u_j are adjacent iff the odd one of them, i, has i >= j - 1.
    bool edge_bipartite(int a, int b) const { return a >= b; }
    bool edge_general(int i, int j) const {
        if (i == j) return false;
        return (i % 2 == 1 && i >= j - 1) || (j % 2 == 1 && j >= i - 1);
    }
};

enum class PairStatus : std::uint8_t { Unqueried = 0, Null = 1, Exists = 2 };

// Observable configuration: outcome of every queried pair plus which
// observable vertices are matched. Bipartite slots are 0..n-1 per side;
// general slots are 0..2n-1.
struct QueryState {
    int n = 0;
    bool bipartite = true;
    std::vector<std::uint8_t> status;   // bip: a*n+b; general: upper triangle
    std::vector<std::uint8_t> matched;  // bip: left 0..n-1 then right n..2n-1

    static QueryState initial(const HardFamily& fam);
    PairStatus get(int x, int y) const;
    QueryState after(int x, int y, bool exists) const;
    int matched_edges() const;
    int pair_index(int x, int y) const;
};

struct PosteriorEntry {
    int x = 0, y = 0;  // bip: left slot, right slot; general: slot pair x<y
    Rational probability;
};

// Existence probability of every unqueried pair between unmatched vertices
// under the uniform posterior over consistent embeddings. A state with no
// consistent embedding is a domain error.
std::vector<PosteriorEntry> posterior(const HardFamily& fam, const QueryState& state);

// Number of embeddings consistent with the state (bipartite: out of n! n!,
// general: out of (2n)!).
std::uint64_t consistent_count(const HardFamily& fam, const QueryState& state);

struct HardnessResult {
    Rational expected_matched;
    Rational ratio;  // expected_matched / n
    std::uint64_t states_visited = 0;
    std::uint64_t root_embeddings = 0;
    double wall_seconds = 0.0;
};

// Value of the optimal adaptive query strategy (with the option to stop),
// computed by memoized backward induction over canonicalized states.
HardnessResult optimal_adaptive_value(const HardFamily& fam, bool canonicalize = true,
                                      int workers = 1);

// Expected matching size of Ranking: sequential greedy over all (2n)! rank
// orders, exactly. Guarded to <= 10 vertices.
HardnessResult ranking_exact_value(const HardFamily& fam);

}  // namespace obliq
