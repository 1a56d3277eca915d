#include "obliq/hardness.hpp"

#include <algorithm>
#include <chrono>
#include <atomic>
#include <bit>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace obliq {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

struct StateKey {
    std::uint64_t a = 0, b = 0;
    bool operator==(const StateKey& o) const { return a == o.a && b == o.b; }
    bool operator<(const StateKey& o) const { return a != o.a ? a < o.a : b < o.b; }
};

struct StateKeyHash {
    std::size_t operator()(const StateKey& k) const {
        std::uint64_t x = k.a * 0x9E3779B97F4A7C15ULL ^ (k.b + 0x7F4A7C15ULL);
        x ^= x >> 33;
        x *= 0xFF51AFD7ED558CCDULL;
        x ^= x >> 33;
        return static_cast<std::size_t>(x);
    }
};

std::vector<std::vector<int>> all_permutations(int n) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do out.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return out;
}

// Pack the status matrix under a column relabeling; rows sorted so the key
// is invariant under row relabeling too.
StateKey bip_key(const QueryState& st, const std::vector<int>& colperm) {
    int n = st.n;
    std::array<std::uint32_t, 8> rows{};
    for (int a = 0; a < n; ++a) {
        std::uint32_t code = 0;
        for (int b = 0; b < n; ++b)
            code |= static_cast<std::uint32_t>(st.status[a * n + colperm[b]]) << (2 * b);
        rows[a] = code;
    }
    std::sort(rows.begin(), rows.begin() + n);
    StateKey k;
    for (int a = 0; a < n && a < 4; ++a) k.a |= static_cast<std::uint64_t>(rows[a]) << (16 * a);
    for (int a = 4; a < n; ++a) k.b |= static_cast<std::uint64_t>(rows[a]) << (16 * (a - 4));
    return k;
}

StateKey gen_key(const QueryState& st, const std::vector<int>& perm) {
    int v = 2 * st.n;
    StateKey k;
    int bit = 0;
    for (int x = 0; x < v; ++x)
        for (int y = x + 1; y < v; ++y) {
            int px = perm[x], py = perm[y];
            if (px > py) std::swap(px, py);
            k.a |= static_cast<std::uint64_t>(st.status[st.pair_index(px, py)]) << bit;
            bit += 2;
        }
    return k;
}

struct Marginals {
    std::uint64_t count = 0;
    // cnt_yes[x*stride + y] for candidate pairs
    std::vector<std::uint64_t> cnt_yes;
};

// Consistent-embedding count and per-pair edge counts, bipartite case.
// Embeddings factor into a left permutation and, per left permutation, a
// system of distinct representatives for per-column identity intervals;
// the inner count is a bitmask permanent with forward/backward layers for
// the per-column marginals.
Marginals bip_marginals(const HardFamily& fam, const QueryState& st,
                        const std::vector<std::vector<int>>& perms) {
    const int n = st.n;
    Marginals m;
    m.cnt_yes.assign(static_cast<std::size_t>(n) * n, 0);
    const int full = (1 << n) - 1;

    std::vector<std::uint32_t> allowed(n);
    // fwd[b][mask], bwd[b][mask] as flat (n+1) x 2^n tables
    std::vector<std::uint64_t> fwd(static_cast<std::size_t>(n + 1) << n);
    std::vector<std::uint64_t> bwd(static_cast<std::size_t>(n + 1) << n);
    std::vector<std::uint64_t> pref(n + 1);

    for (const auto& perm : perms) {
        // perm[a] = left identity (0-based; identity value perm[a]+1)
        bool feasible = true;
        for (int b = 0; b < n && feasible; ++b) {
            int lo = 1, hi = n;
            for (int a = 0; a < n; ++a) {
                PairStatus s = static_cast<PairStatus>(st.status[a * n + b]);
                if (s == PairStatus::Unqueried) continue;
                int ida = perm[a] + 1;
                if (s == PairStatus::Exists)
                    hi = std::min(hi, ida);  // edge iff a-identity >= b-identity
                else
                    lo = std::max(lo, ida + 1);
            }
            if (lo > hi) {
                feasible = false;
                break;
            }
            std::uint32_t mask = 0;
            for (int y = lo; y <= hi; ++y) mask |= 1u << (y - 1);
            allowed[b] = mask;
        }
        if (!feasible) continue;

        std::fill(fwd.begin(), fwd.end(), 0);
        std::fill(bwd.begin(), bwd.end(), 0);
        fwd[0] = 1;  // fwd[0][mask=0]
        for (int b = 0; b < n; ++b) {
            const std::uint64_t* cur = &fwd[static_cast<std::size_t>(b) << n];
            std::uint64_t* nxt = &fwd[static_cast<std::size_t>(b + 1) << n];
            for (int mask = 0; mask <= full; ++mask) {
                std::uint64_t ways = cur[mask];
                if (!ways) continue;
                std::uint32_t avail = allowed[b] & ~static_cast<std::uint32_t>(mask);
                while (avail) {
                    std::uint32_t bit = avail & (~avail + 1);
                    nxt[mask | bit] += ways;
                    avail ^= bit;
                }
            }
        }
        std::uint64_t total = fwd[(static_cast<std::size_t>(n) << n) + full];
        if (!total) continue;
        bwd[(static_cast<std::size_t>(n) << n) + full] = 1;
        for (int b = n - 1; b >= 0; --b) {
            const std::uint64_t* nxt = &bwd[static_cast<std::size_t>(b + 1) << n];
            std::uint64_t* cur = &bwd[static_cast<std::size_t>(b) << n];
            for (int mask = 0; mask <= full; ++mask) {
                std::uint64_t acc = 0;
                std::uint32_t avail = allowed[b] & ~static_cast<std::uint32_t>(mask);
                while (avail) {
                    std::uint32_t bit = avail & (~avail + 1);
                    acc += nxt[mask | bit];
                    avail ^= bit;
                }
                cur[mask] = acc;
            }
        }
        m.count += total;

        for (int b = 0; b < n; ++b) {
            if (st.matched[n + b]) continue;
            // prefix over identity values of P(column b takes value y)
            std::fill(pref.begin(), pref.end(), 0);
            const std::uint64_t* cur = &fwd[static_cast<std::size_t>(b) << n];
            const std::uint64_t* nxt = &bwd[static_cast<std::size_t>(b + 1) << n];
            for (int mask = 0; mask <= full; ++mask) {
                std::uint64_t ways = cur[mask];
                if (!ways) continue;
                std::uint32_t avail = allowed[b] & ~static_cast<std::uint32_t>(mask);
                while (avail) {
                    std::uint32_t bit = avail & (~avail + 1);
                    int y = std::countr_zero(bit) + 1;
                    pref[y] += ways * nxt[mask | bit];
                    avail ^= bit;
                }
            }
            for (int y = 1; y <= n; ++y) pref[y] += pref[y - 1];
            for (int a = 0; a < n; ++a) {
                if (st.matched[a]) continue;
                if (st.status[a * n + b] != static_cast<std::uint8_t>(PairStatus::Unqueried))
                    continue;
                m.cnt_yes[a * n + b] += pref[perm[a] + 1];
            }
        }
    }
    return m;
}

Marginals gen_marginals(const HardFamily& fam, const QueryState& st,
                        const std::vector<std::vector<int>>& perms) {
    const int v = 2 * st.n;
    Marginals m;
    m.cnt_yes.assign(static_cast<std::size_t>(v) * v, 0);
    for (const auto& perm : perms) {
        bool ok = true;
        for (int x = 0; x < v && ok; ++x)
            for (int y = x + 1; y < v; ++y) {
                PairStatus s = static_cast<PairStatus>(st.status[st.pair_index(x, y)]);
                if (s == PairStatus::Unqueried) continue;
                bool e = fam.edge_general(perm[x] + 1, perm[y] + 1);
                if (e != (s == PairStatus::Exists)) {
                    ok = false;
                    break;
                }
            }
        if (!ok) continue;
        ++m.count;
        for (int x = 0; x < v; ++x) {
            if (st.matched[x]) continue;
            for (int y = x + 1; y < v; ++y) {
                if (st.matched[y]) continue;
                if (st.status[st.pair_index(x, y)] !=
                    static_cast<std::uint8_t>(PairStatus::Unqueried))
                    continue;
                if (fam.edge_general(perm[x] + 1, perm[y] + 1)) ++m.cnt_yes[x * v + y];
            }
        }
    }
    return m;
}

struct Engine {
    HardFamily fam;
    bool canon;
    std::vector<std::vector<int>> perms;       // embeddings / canonical scan
    std::vector<std::vector<int>> slot_perms;  // canonicalization scan
    static constexpr int kShards = 16;
    std::array<std::unordered_map<StateKey, Rational, StateKeyHash>, kShards> memo;
    std::array<std::mutex, kShards> locks;
    std::atomic<std::uint64_t> states{0};

    explicit Engine(const HardFamily& f, bool canonicalize) : fam(f), canon(canonicalize) {
        perms = all_permutations(fam.is_bipartite() ? fam.n : 2 * fam.n);
        slot_perms = perms;
    }

    StateKey key_of(const QueryState& st) const {
        if (!canon) {
            static const std::vector<int> id_small = [] {
                std::vector<int> v(16);
                std::iota(v.begin(), v.end(), 0);
                return v;
            }();
            return fam.is_bipartite() ? bip_key(st, id_small) : gen_key(st, id_small);
        }
        bool first = true;
        StateKey best;
        for (const auto& p : slot_perms) {
            StateKey k = fam.is_bipartite() ? bip_key(st, p) : gen_key(st, p);
            if (first || k < best) {
                best = k;
                first = false;
            }
        }
        return best;
    }

    std::optional<Rational> lookup(const StateKey& k) {
        auto& shard = memo[StateKeyHash{}(k) % kShards];
        std::lock_guard<std::mutex> g(locks[StateKeyHash{}(k) % kShards]);
        auto it = shard.find(k);
        if (it == shard.end()) return std::nullopt;
        return it->second;
    }

    void store(const StateKey& k, const Rational& v) {
        std::size_t s = StateKeyHash{}(k) % kShards;
        std::lock_guard<std::mutex> g(locks[s]);
        memo[s].emplace(k, v);
    }

    Marginals marginals(const QueryState& st) const {
        return fam.is_bipartite() ? bip_marginals(fam, st, perms) : gen_marginals(fam, st, perms);
    }

    Rational value(const QueryState& st) {
        StateKey k = key_of(st);
        if (auto v = lookup(k)) return *v;
        Marginals m = marginals(st);
        if (m.count == 0) throw std::domain_error("query state has no consistent embedding");
        // Stop is always available: the strategy may decline further queries.
        Rational best(st.matched_edges());
        const bool bip = fam.is_bipartite();
        const int stride = bip ? fam.n : 2 * fam.n;
        for (int x = 0; x < stride; ++x) {
            if (st.matched[x]) continue;
            for (int y = bip ? 0 : x + 1; y < stride; ++y) {
                if (st.matched[bip ? fam.n + y : y]) continue;
                int idx = x * stride + y;
                if (st.status[st.pair_index(x, y)] !=
                    static_cast<std::uint8_t>(PairStatus::Unqueried))
                    continue;
                std::uint64_t cy = m.cnt_yes[idx];
                std::uint64_t cn = m.count - cy;
                Rational val(0);
                if (cy) val += Rational(static_cast<unsigned long>(cy)) * value(st.after(x, y, true));
                if (cn) val += Rational(static_cast<unsigned long>(cn)) * value(st.after(x, y, false));
                val /= Rational(static_cast<unsigned long>(m.count));
                if (val > best) best = val;
            }
        }
        store(k, best);
        states.fetch_add(1, std::memory_order_relaxed);
        return best;
    }
};

std::uint64_t factorial(int n) {
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

}  // namespace

HardFamily HardFamily::bipartite(int n) {
    require(n >= 2, "hard family needs n >= 2");
    return {Kind::BipartiteH, n};
}

HardFamily HardFamily::general(int n) {
    require(n >= 2, "hard family needs n >= 2");
    return {Kind::GeneralHhat, n};
}

HardFamily HardFamily::from_name(const std::string& name) {
    if (name == "warmup") return warmup();
    if (name.size() == 2 && name[0] == 'h' && name[1] >= '2' && name[1] <= '9')
        return bipartite(name[1] - '0');
    if (name.rfind("hhat", 0) == 0 && name.size() == 5)
        return general(name[4] - '0');
    throw std::invalid_argument("unknown hard family: " + name);
}

std::string HardFamily::name() const {
    switch (kind) {
        case Kind::WarmupB4: return "warmup";
        case Kind::BipartiteH: return "h" + std::to_string(n);
        case Kind::GeneralHhat: return "hhat" + std::to_string(n);
    }
    return "?";
}

QueryState QueryState::initial(const HardFamily& fam) {
    QueryState st;
    st.n = fam.n;
    st.bipartite = fam.is_bipartite();
    if (st.bipartite) {
        st.status.assign(static_cast<std::size_t>(fam.n) * fam.n, 0);
        st.matched.assign(2 * fam.n, 0);
    } else {
        int v = 2 * fam.n;
        st.status.assign(static_cast<std::size_t>(v) * (v - 1) / 2, 0);
        st.matched.assign(v, 0);
    }
    return st;
}

int QueryState::pair_index(int x, int y) const {
    if (bipartite) return x * n + y;
    int v = 2 * n;
    if (x > y) std::swap(x, y);
    return x * v - x * (x + 1) / 2 + (y - x - 1);
}

PairStatus QueryState::get(int x, int y) const {
    return static_cast<PairStatus>(status[pair_index(x, y)]);
}

QueryState QueryState::after(int x, int y, bool exists) const {
    bool my = bipartite ? matched[n + y] != 0 : matched[y] != 0;
    if (matched[x] || my) throw std::invalid_argument("cannot query a matched vertex");
    QueryState st = *this;
    std::uint8_t& cell = st.status[pair_index(x, y)];
    if (cell != static_cast<std::uint8_t>(PairStatus::Unqueried))
        throw std::invalid_argument("pair already queried");
    cell = static_cast<std::uint8_t>(exists ? PairStatus::Exists : PairStatus::Null);
    if (exists) {
        if (bipartite) {
            st.matched[x] = 1;
            st.matched[n + y] = 1;
        } else {
            st.matched[x] = 1;
            st.matched[y] = 1;
        }
    }
    return st;
}

int QueryState::matched_edges() const {
    int c = 0;
    for (std::uint8_t s : status)
        if (s == static_cast<std::uint8_t>(PairStatus::Exists)) ++c;
    return c;
}

std::vector<PosteriorEntry> posterior(const HardFamily& fam, const QueryState& state) {
    Engine eng(fam, /*canonicalize=*/false);
    Marginals m = eng.marginals(state);
    if (m.count == 0) throw std::domain_error("query state has no consistent embedding");
    std::vector<PosteriorEntry> out;
    if (fam.is_bipartite()) {
        for (int a = 0; a < fam.n; ++a) {
            if (state.matched[a]) continue;
            for (int b = 0; b < fam.n; ++b) {
                if (state.matched[fam.n + b]) continue;
                if (state.get(a, b) != PairStatus::Unqueried) continue;
                out.push_back({a, b,
                               Rational(static_cast<unsigned long>(m.cnt_yes[a * fam.n + b]),
                                        static_cast<unsigned long>(m.count))});
                out.back().probability.canonicalize();
            }
        }
    } else {
        int v = 2 * fam.n;
        for (int x = 0; x < v; ++x) {
            if (state.matched[x]) continue;
            for (int y = x + 1; y < v; ++y) {
                if (state.matched[y]) continue;
                if (state.get(x, y) != PairStatus::Unqueried) continue;
                out.push_back({x, y,
                               Rational(static_cast<unsigned long>(m.cnt_yes[x * v + y]),
                                        static_cast<unsigned long>(m.count))});
                out.back().probability.canonicalize();
            }
        }
    }
    return out;
}

std::uint64_t consistent_count(const HardFamily& fam, const QueryState& state) {
    Engine eng(fam, /*canonicalize=*/false);
    return eng.marginals(state).count;
}

HardnessResult optimal_adaptive_value(const HardFamily& fam, bool canonicalize, int workers) {
    if (fam.is_bipartite())
        require(fam.n <= 6, "bipartite hardness DP supported up to n = 6");
    else
        require(fam.n <= 3, "general hardness DP supported up to n = 3");
    auto t0 = std::chrono::steady_clock::now();
    Engine eng(fam, canonicalize);
    QueryState root = QueryState::initial(fam);
    Marginals rm = eng.marginals(root);

    if (workers > 1) {
        // Warm the memo by evaluating the first-query children in parallel;
        // values are exact, so duplicated work is only wasted time.
        std::vector<QueryState> children;
        const bool bip = fam.is_bipartite();
        const int stride = bip ? fam.n : 2 * fam.n;
        for (int x = 0; x < stride; ++x)
            for (int y = bip ? 0 : x + 1; y < stride; ++y) {
                std::uint64_t cy = rm.cnt_yes[x * stride + y];
                if (cy) children.push_back(root.after(x, y, true));
                if (rm.count - cy) children.push_back(root.after(x, y, false));
            }
        std::vector<std::thread> threads;
        std::size_t nw = std::min<std::size_t>(workers, children.size());
        for (std::size_t t = 0; t < nw; ++t)
            threads.emplace_back([&, t] {
                for (std::size_t i = t; i < children.size(); i += nw) eng.value(children[i]);
            });
        for (auto& th : threads) th.join();
    }

    HardnessResult res;
    res.expected_matched = eng.value(root);
    res.ratio = res.expected_matched / Rational(static_cast<unsigned long>(fam.n));
    res.ratio.canonicalize();
    res.expected_matched.canonicalize();
    res.states_visited = eng.states.load();
    res.root_embeddings = rm.count;
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

HardnessResult ranking_exact_value(const HardFamily& fam) {
    const int v = 2 * fam.n;
    require(v <= 10, "ranking enumeration guarded to <= 10 vertices");
    auto t0 = std::chrono::steady_clock::now();

    // Identity-level adjacency over flat vertex ids.
    std::vector<std::vector<int>> adj(v);
    auto connect = [&](int x, int y) {
        adj[x].push_back(y);
        adj[y].push_back(x);
    };
    if (fam.is_bipartite()) {
        for (int a = 1; a <= fam.n; ++a)
            for (int b = 1; b <= fam.n; ++b)
                if (fam.edge_bipartite(a, b)) connect(a - 1, fam.n + b - 1);
    } else {
        for (int i = 1; i <= v; ++i)
            for (int j = i + 1; j <= v; ++j)
                if (fam.edge_general(i, j)) connect(i - 1, j - 1);
    }

    std::vector<int> order(v);
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> pos(v);
    std::vector<char> matched(v);
    std::uint64_t total = 0, nperm = 0;
    do {
        for (int i = 0; i < v; ++i) pos[order[i]] = i;
        std::fill(matched.begin(), matched.end(), 0);
        int count = 0;
        for (int i = 0; i < v; ++i) {
            int x = order[i];
            if (matched[x]) continue;
            int best = -1, bestpos = v;
            for (int y : adj[x])
                if (!matched[y] && pos[y] < bestpos) {
                    bestpos = pos[y];
                    best = y;
                }
            if (best >= 0) {
                matched[x] = matched[best] = 1;
                ++count;
            }
        }
        total += static_cast<std::uint64_t>(count);
        ++nperm;
    } while (std::next_permutation(order.begin(), order.end()));

    HardnessResult res;
    res.expected_matched = Rational(static_cast<unsigned long>(total),
                                    static_cast<unsigned long>(factorial(v)));
    res.expected_matched.canonicalize();
    res.ratio = res.expected_matched / Rational(static_cast<unsigned long>(fam.n));
    res.ratio.canonicalize();
    res.states_visited = nperm;
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace obliq
