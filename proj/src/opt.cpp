#include "obliq/opt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace obliq {

namespace {

// Integer skeleton of one ratio constraint: the bound at a fixed (theta,
// beta) is  (1/n^2) [ sum_i d_i + sum_i (n-d_i) H_i G_{T_i+1}
//                     + sum_i (n-e_i) H_i G_{B_i+1} ].
struct CompiledPair {
    std::vector<int> T, B, d, e;
    int const_term = 0;
};

CompiledPair compile_pair(const GridStep& theta, const GridStep& beta) {
    CompiledPair cp;
    int n = theta.n;
    cp.T = theta.levels;
    cp.B = beta.levels;
    std::vector<int> binv = beta.inverse_levels();
    std::vector<int> tinv = theta.inverse_levels();
    cp.d.resize(n);
    cp.e.resize(n);
    for (int i = 0; i < n; ++i) {
        cp.d[i] = std::max(cp.T[i] - binv[i], 0);
        cp.e[i] = std::max(cp.B[i] - tinv[i], 0);
        cp.const_term += cp.d[i];
    }
    return cp;
}

double pair_bound(const CompiledPair& cp, const std::vector<double>& G,
                  const std::vector<double>& H) {
    int n = static_cast<int>(H.size());
    auto gat = [&](int lvl) { return lvl >= n ? 0.0 : G[lvl]; };
    double s = static_cast<double>(cp.const_term);
    for (int i = 0; i < n; ++i) {
        s += static_cast<double>(n - cp.d[i]) * H[i] * gat(cp.T[i]);
        s += static_cast<double>(n - cp.e[i]) * H[i] * gat(cp.B[i]);
    }
    return s / static_cast<double>(n) / static_cast<double>(n);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

QcqpModel QcqpModel::initial(int n) {
    if (n < 1) throw std::invalid_argument("model needs n >= 1");
    QcqpModel m;
    m.n = n;
    GridStep ones = GridStep::make(n, std::vector<int>(n, n));
    std::vector<int> B(n, 0);
    do {
        m.active_pairs.emplace_back(ones, GridStep::make(n, B));
    } while (sn_next(B, n));
    return m;
}

std::size_t QcqpModel::add_pairs(const std::vector<std::pair<GridStep, GridStep>>& pairs) {
    std::set<std::pair<std::vector<int>, std::vector<int>>> seen;
    for (const auto& [t, b] : active_pairs) seen.insert({t.levels, b.levels});
    std::size_t added = 0;
    for (const auto& [t, b] : pairs) {
        if (seen.insert({t.levels, b.levels}).second) {
            active_pairs.emplace_back(t, b);
            ++added;
        }
    }
    return added;
}

double active_objective(const QcqpModel& model, const GhPair& gh) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [t, b] : model.active_pairs)
        best = std::min(best, discretization_bound(gh, t, b));
    return best;
}

std::string qcqp_to_text(const QcqpModel& model) {
    const int n = model.n;
    std::ostringstream os;
    os << "qcqp 1\n";
    os << "# variables: F plus step values G1..G" << n << ", H1..H" << n << "\n";
    os << "problem max F\n";
    os << "var F 0 1\n";
    for (int i = 1; i <= n; ++i) os << "var G" << i << " 0 1\n";
    for (int i = 1; i <= n; ++i) os << "var H" << i << " 0 10\n";

    // Ratio constraints: n^2 * bound(theta, beta) >= n^2 F.
    int idx = 0;
    for (const auto& [theta, beta] : model.active_pairs) {
        CompiledPair cp = compile_pair(theta, beta);
        std::map<std::pair<int, int>, double> quad;  // (h index, g index) -> coef
        for (int i = 0; i < n; ++i) {
            if (cp.T[i] < n && cp.d[i] < n)
                quad[{i + 1, cp.T[i] + 1}] += static_cast<double>(n - cp.d[i]);
            if (cp.B[i] < n && cp.e[i] < n)
                quad[{i + 1, cp.B[i] + 1}] += static_cast<double>(n - cp.e[i]);
        }
        os << "con ratio_" << idx++ << " :";
        os << " lin " << fmt(-static_cast<double>(n) * n) << " F";
        for (const auto& [hg, coef] : quad)
            os << " quad " << fmt(coef) << " H" << hg.first << " G" << hg.second;
        os << " >= " << fmt(-static_cast<double>(cp.const_term)) << "\n";
    }

    for (int i = 1; i <= n; ++i)
        for (int j = i; j <= n; ++j) {
            os << "con budget_" << i << "_" << j << " :";
            if (i == j)
                os << " quad 2 H" << i << " G" << i;
            else
                os << " quad 1 H" << i << " G" << j << " quad 1 H" << j << " G" << i;
            os << " <= 1\n";
        }

    for (int i = 1; i < n; ++i)
        os << "con mono_g_" << i << " : lin 1 G" << i << " lin -1 G" << (i + 1) << " >= 0\n";
    os << "con mono_g_" << n << " : lin 1 G" << n << " >= 0\n";
    for (int i = 1; i < n; ++i)
        os << "con mono_h_" << i << " : lin 1 H" << (i + 1) << " lin -1 H" << i << " >= 0\n";

    os << "con norm_circle : quad 1 G1 G1 quad 1 H1 H1 == 1\n";
    os << "con norm_order : lin 1 G1 lin -1 H1 >= 0\n";
    return os.str();
}

void export_qcqp(const QcqpModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << qcqp_to_text(model);
    if (!out) throw std::runtime_error("write failed: " + path);
}

// ---- feasibility and the inner solver -------------------------------------

namespace {

// Scale (G, H) -> (G/s, H s) so that (G1, H1) lands on the unit circle with
// G1 >= H1; the bound and the budget are invariant under this scaling.
void normalize_first(std::vector<double>& G, std::vector<double>& H) {
    double g1 = G[0], h1 = H[0];
    double disc = 1.0 - 4.0 * g1 * g1 * h1 * h1;
    if (disc < 0.0) disc = 0.0;  // budget guarantees 2 g1 h1 <= 1
    double x = 2.0 * g1 * g1 / (1.0 + std::sqrt(disc));  // smaller root => G1 >= H1
    double s = std::sqrt(x);
    for (double& v : G) v /= s;
    for (double& v : H) v *= s;
}

struct Coords {
    std::vector<double> G, H;

    GhPair to_pair() const { return GhPair::make(G, H, kBudgetEps); }
};

bool budget_ok(const std::vector<double>& G, const std::vector<double>& H) {
    return check_budget(G, H, 1e-12).ok;
}

}  // namespace

GhPair make_feasible(std::vector<double> G, std::vector<double> H) {
    if (G.size() != H.size() || G.empty())
        throw std::invalid_argument("make_feasible: bad dimensions");
    const double floor = 1e-9;
    for (double& v : G) v = std::max(v, floor);
    for (double& v : H) v = std::max(v, floor);
    for (std::size_t i = 1; i < G.size(); ++i) G[i] = std::min(G[i], G[i - 1]);
    for (std::size_t i = 1; i < H.size(); ++i) H[i] = std::max(H[i], H[i - 1]);
    BudgetCheck bc = check_budget(G, H, 0.0);
    if (bc.max_violation > 0.0) {
        double t = 1.0 / (1.0 + bc.max_violation + 1e-12);
        for (double& v : H) v *= t;
    }
    normalize_first(G, H);
    return GhPair::make(std::move(G), std::move(H), kBudgetEps);
}

GhPair default_start(int n) {
    std::vector<double> G(n), H(n);
    for (int i = 0; i < n; ++i) {
        double psi = std::atan(1.0) * (1.0 + static_cast<double>(i) / n);  // pi/4 .. pi/2
        G[i] = std::cos(psi);
        H[i] = std::sin(psi);
    }
    return make_feasible(std::move(G), std::move(H));
}

GhPair heuristic_inner_solve(const QcqpModel& model, const GhPair& start,
                             const InnerSolveOptions& opts) {
    const int n = model.n;
    if (start.n() != n) throw std::invalid_argument("start has wrong segment count");

    std::vector<CompiledPair> compiled;
    compiled.reserve(model.active_pairs.size());
    for (const auto& [t, b] : model.active_pairs) compiled.push_back(compile_pair(t, b));
    auto objective = [&](const std::vector<double>& G, const std::vector<double>& H) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& cp : compiled) best = std::min(best, pair_bound(cp, G, H));
        return best;
    };

    Coords cur{start.G(), start.H()};
    {
        GhPair fixed = make_feasible(cur.G, cur.H);
        cur.G = fixed.G();
        cur.H = fixed.H();
    }
    double cur_obj = objective(cur.G, cur.H);
    double psi = std::atan2(cur.H[0], cur.G[0]);
    const double pi4 = std::atan(1.0);
    const double floor = 1e-9;

    auto try_angle = [&](double delta) -> bool {
        double target = std::clamp(psi + delta, 1e-6, pi4);
        // Shrink toward the current feasible angle until every structural
        // constraint holds.
        for (int shrink = 0; shrink < 30; ++shrink) {
            double g1 = std::cos(target), h1 = std::sin(target);
            bool ok = (n == 1 || (g1 >= cur.G[1] && h1 <= cur.H[1]));
            if (ok) {
                std::vector<double> G = cur.G, H = cur.H;
                G[0] = g1;
                H[0] = h1;
                ok = budget_ok(G, H);
                if (ok) {
                    double obj = objective(G, H);
                    if (obj > cur_obj) {
                        cur.G = std::move(G);
                        cur.H = std::move(H);
                        cur_obj = obj;
                        psi = target;
                        return true;
                    }
                    return false;
                }
            }
            target = 0.5 * (target + psi);
        }
        return false;
    };

    auto try_g = [&](int k, double delta) -> bool {  // k in 1..n-1 (0-based)
        double lo = std::max(k + 1 < n ? cur.G[k + 1] : 0.0, floor);
        double hi = cur.G[k - 1];
        // Budget closed form: G_k <= (1 - H_k G_j) / H_j for every j != k,
        // and G_k <= 1 / (2 H_k).
        hi = std::min(hi, 1.0 / (2.0 * cur.H[k]));
        for (int j = 0; j < n; ++j) {
            if (j == k) continue;
            hi = std::min(hi, (1.0 - cur.H[k] * cur.G[j]) / cur.H[j]);
        }
        if (hi < lo) return false;
        double v = std::clamp(cur.G[k] + delta, lo, hi);
        if (v == cur.G[k]) return false;
        std::vector<double> G = cur.G;
        G[k] = v;
        double obj = objective(G, cur.H);
        if (obj > cur_obj) {
            cur.G = std::move(G);
            cur_obj = obj;
            return true;
        }
        return false;
    };

    auto try_h = [&](int k, double delta) -> bool {  // k in 1..n-1 (0-based)
        double lo = std::max(cur.H[k - 1], floor);
        double hi = k + 1 < n ? cur.H[k + 1] : std::numeric_limits<double>::infinity();
        hi = std::min(hi, 1.0 / (2.0 * cur.G[k]));
        for (int j = 0; j < n; ++j) {
            if (j == k) continue;
            hi = std::min(hi, (1.0 - cur.H[j] * cur.G[k]) / cur.G[j]);
        }
        if (hi < lo) return false;
        double v = std::clamp(cur.H[k] + delta, lo, hi);
        if (v == cur.H[k]) return false;
        std::vector<double> H = cur.H;
        H[k] = v;
        double obj = objective(cur.G, H);
        if (obj > cur_obj) {
            cur.H = std::move(H);
            cur_obj = obj;
            return true;
        }
        return false;
    };

    // Move G_k and re-lift H_k to its feasibility ceiling in the same step.
    // Single-coordinate moves stall on the budget frontier, where G_k and
    // H_k have to travel together; the bound is non-decreasing in every H
    // coefficient, so lifting H_k to the ceiling never hurts.
    auto try_slide = [&](int k, double delta) -> bool {  // k in 1..n-1
        double lo = std::max(k + 1 < n ? cur.G[k + 1] : 0.0, floor);
        double hi = cur.G[k - 1];
        double gv = std::clamp(cur.G[k] + delta, lo, hi);
        std::vector<double> G = cur.G, H = cur.H;
        G[k] = gv;
        double hcap = k + 1 < n ? cur.H[k + 1] : 1.0 / (2.0 * gv);
        hcap = std::min(hcap, 1.0 / (2.0 * gv));
        for (int j = 0; j < n; ++j) {
            if (j == k) continue;
            hcap = std::min(hcap, (1.0 - cur.H[j] * gv) / G[j]);
        }
        double hv = hcap;
        if (hv < std::max(cur.H[k - 1], floor)) return false;
        H[k] = hv;
        if (!budget_ok(G, H)) return false;
        double obj = objective(G, H);
        if (obj > cur_obj) {
            cur.G = std::move(G);
            cur.H = std::move(H);
            cur_obj = obj;
            return true;
        }
        return false;
    };

    double step = opts.initial_step;
    int cycles = 0;
    while (step >= opts.min_step && cycles < opts.max_cycles) {
        ++cycles;
        bool improved = false;
        for (double sgn : {+1.0, -1.0}) improved |= try_angle(sgn * step);
        for (int k = 1; k < n; ++k)
            for (double sgn : {+1.0, -1.0}) improved |= try_slide(k, sgn * step);
        for (int k = 1; k < n; ++k)
            for (double sgn : {+1.0, -1.0}) improved |= try_g(k, sgn * step);
        for (int k = 1; k < n; ++k)
            for (double sgn : {+1.0, -1.0}) improved |= try_h(k, sgn * step);
        if (!improved) step *= 0.5;
    }
    return GhPair::make(cur.G, cur.H, kBudgetEps);
}

ConstraintGenResult constraint_generation(int n, const InnerSolver& inner, int max_rounds,
                                          std::optional<GhPair> start, int workers) {
    if (n < 1) throw std::invalid_argument("constraint generation needs n >= 1");
    QcqpModel model = QcqpModel::initial(n);
    GhPair cand = start ? *start : default_start(n);
    {
        GhPair fixed = make_feasible(cand.G(), cand.H());
        cand = fixed;
    }

    ConstraintGenResult res;
    res.gh = cand;
    res.certified_ratio = verify_ratio(cand, workers).ratio;
    res.round_certified.push_back(res.certified_ratio);
    res.round_claimed.push_back(active_objective(model, cand));

    for (int round = 0; round < max_rounds; ++round) {
        cand = inner(model, cand);
        double claimed = active_objective(model, cand);
        double certified = verify_ratio(cand, workers).ratio;
        res.rounds = round + 1;
        res.round_claimed.push_back(claimed);
        res.round_certified.push_back(certified);
        if (certified > res.certified_ratio) {
            res.certified_ratio = certified;
            res.gh = cand;
        }
        if (certified >= claimed - 1e-9) {
            res.converged = true;
            break;
        }
        // Add every pair violated by at least half of the maximum violation.
        double threshold = claimed - 0.5 * (claimed - certified);
        model.add_pairs(collect_pairs_below(cand, threshold, 500000));
    }
    res.active_count = model.active_pairs.size();
    res.model = std::move(model);
    return res;
}

}  // namespace obliq
