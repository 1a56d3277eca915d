#include "obliq/stepfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace obliq {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

bool is_monotone(const std::vector<double>& v, Monotonicity m) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (m == Monotonicity::NonIncreasing && v[i] > v[i - 1]) return false;
        if (m == Monotonicity::NonDecreasing && v[i] < v[i - 1]) return false;
    }
    return true;
}

}  // namespace

StepFunction StepFunction::non_increasing(std::vector<double> vals, double ext_at_1) {
    require(!vals.empty(), "step function needs at least one segment");
    require(is_monotone(vals, Monotonicity::NonIncreasing), "values not non-increasing");
    for (double v : vals) require(v >= 0.0 && std::isfinite(v), "segment values must be finite and >= 0");
    StepFunction f;
    f.n = static_cast<int>(vals.size());
    f.values = std::move(vals);
    f.mono = Monotonicity::NonIncreasing;
    f.extension_at_1 = ext_at_1;
    return f;
}

StepFunction StepFunction::non_decreasing(std::vector<double> vals) {
    require(!vals.empty(), "step function needs at least one segment");
    require(is_monotone(vals, Monotonicity::NonDecreasing), "values not non-decreasing");
    for (double v : vals) require(v >= 0.0 && std::isfinite(v), "segment values must be finite and >= 0");
    StepFunction f;
    f.n = static_cast<int>(vals.size());
    f.values = std::move(vals);
    f.mono = Monotonicity::NonDecreasing;
    f.extension_at_1 = f.values.back();
    return f;
}

double StepFunction::operator()(double y) const {
    require(y >= 0.0 && y <= 1.0, "step function argument outside [0,1]");
    if (y >= 1.0) return extension_at_1;
    int i = static_cast<int>(y * n);
    if (i >= n) i = n - 1;
    return values[i];
}

double StepFunction::inverse_at(double y) const {
    require(y >= 0.0 && std::isfinite(y), "inverse argument must be finite and >= 0");
    if (mono == Monotonicity::NonIncreasing) {
        // inf{x : f(x) <= y}: first segment whose value drops to y, else x=1.
        for (int i = 0; i < n; ++i)
            if (values[i] <= y) return static_cast<double>(i) / n;
        return 1.0;  // covers both f(1) <= y and the empty set
    }
    // Non-decreasing: inf{x : f(x) > y}.
    for (int i = 0; i < n; ++i)
        if (values[i] > y) return static_cast<double>(i) / n;
    return 1.0;
}

std::vector<double> StepFunction::breakpoints() const {
    std::vector<double> b;
    for (int k = 1; k < n; ++k) b.push_back(static_cast<double>(k) / n);
    return b;
}

StepInverse inverse(const StepFunction& f) { return StepInverse{&f}; }

GridStep GridStep::make(int n, std::vector<int> levels) {
    require(n >= 1, "grid step needs n >= 1");
    require(static_cast<int>(levels.size()) == n, "grid step needs n levels");
    int prev = 0;
    for (int v : levels) {
        require(v >= prev && v <= n, "grid levels must be non-decreasing within 0..n");
        prev = v;
    }
    GridStep s;
    s.n = n;
    s.levels = std::move(levels);
    return s;
}

double GridStep::value_at(double y) const {
    require(y >= 0.0 && y <= 1.0, "grid step argument outside [0,1]");
    if (y >= 1.0) return 1.0;
    int i = static_cast<int>(y * n);
    if (i >= n) i = n - 1;
    return static_cast<double>(levels[i]) / n;
}

std::vector<int> GridStep::inverse_levels() const {
    std::vector<int> inv(n, n);
    int j = 0;  // first index (0-based) with levels[j] >= i
    for (int i = 1; i <= n; ++i) {
        while (j < n && levels[j] < i) ++j;
        inv[i - 1] = j < n ? j : n;
    }
    return inv;
}

double GridStep::inverse_at(double y) const {
    require(y >= 0.0 && y <= 1.0, "inverse argument outside [0,1]");
    // inf{x : beta(x) > y} with beta(1) = 1.
    for (int j = 0; j < n; ++j)
        if (static_cast<double>(levels[j]) / n > y) return static_cast<double>(j) / n;
    return 1.0;
}

StepFunction GridStep::to_step() const {
    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i) vals[i] = static_cast<double>(levels[i]) / n;
    StepFunction f;
    f.n = n;
    f.values = std::move(vals);
    f.mono = Monotonicity::NonDecreasing;
    f.extension_at_1 = 1.0;
    return f;
}

BudgetCheck check_budget(const std::vector<double>& G, const std::vector<double>& H, double eps) {
    require(G.size() == H.size() && !G.empty(), "budget check needs equal-length G, H");
    BudgetCheck r;
    r.max_violation = -std::numeric_limits<double>::infinity();
    int n = static_cast<int>(G.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double v = H[i] * G[j] + H[j] * G[i] - 1.0;
            if (v > r.max_violation) {
                r.max_violation = v;
                r.i = i + 1;
                r.j = j + 1;
            }
        }
    }
    r.ok = r.max_violation <= eps;
    return r;
}

BudgetCheck check_budget(const GhPair& gh) {
    return check_budget(gh.G(), gh.H(), gh.budget_eps);
}

GhPair GhPair::make(std::vector<double> G, std::vector<double> H, double eps) {
    require(G.size() == H.size() && !G.empty(), "G and H must have the same positive length");
    for (double v : G) require(v > 0.0, "g segment values must be positive");
    for (double v : H) require(v > 0.0, "h segment values must be positive");
    BudgetCheck bc = check_budget(G, H, eps);
    if (!bc.ok) {
        std::ostringstream os;
        os << "budget constraint violated by " << bc.max_violation << " at (" << bc.i << "," << bc.j
           << ")";
        throw std::invalid_argument(os.str());
    }
    GhPair gh;
    gh.g = StepFunction::non_increasing(std::move(G), 0.0);
    gh.h = StepFunction::non_decreasing(std::move(H));
    gh.budget_eps = eps;
    return gh;
}

GhPair general_form(const GeneralFormParams& params, double eps) {
    const double phi = params.phi;
    require(phi >= 0.0 && phi <= std::atan(1.0) + 1e-12, "phi must lie in [0, pi/4]");
    require(!params.g_values.empty(), "general form needs at least one g value");
    const double c = std::cos(phi), s = std::sin(phi);
    std::vector<double> G = params.g_values, H(G.size());
    for (std::size_t i = 0; i < G.size(); ++i) {
        require(G[i] >= 0.0, "g values must be >= 0");
        if (G[i] > c + 1e-12) throw std::invalid_argument("g value exceeds cos(phi)");
        if (G[i] < s) {
            H[i] = 1.0 / c - G[i] * std::tan(phi);
        } else {
            H[i] = std::sqrt(std::max(0.0, 1.0 - G[i] * G[i]));
        }
    }
    return GhPair::make(std::move(G), std::move(H), eps);
}

// ---- S_n enumeration ----------------------------------------------------

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
    return r;
}

std::uint64_t sn_count(int n) {
    if (n < 1) throw std::invalid_argument("S_n needs n >= 1");
    return binomial(2 * n, n);
}

bool sn_next(std::vector<int>& levels, int n) {
    int m = static_cast<int>(levels.size());
    for (int p = m - 1; p >= 0; --p) {
        if (levels[p] < n) {
            int v = levels[p] + 1;
            for (int q = p; q < m; ++q) levels[q] = v;
            return true;
        }
    }
    return false;
}

namespace {

// Non-decreasing sequences of length m over {v..n}: C(n - v + m, m).
std::uint64_t tail_count(int n, int v, int m) {
    return binomial(n - v + m, m);
}

}  // namespace

std::vector<int> sn_unrank(int n, std::uint64_t rank) {
    if (rank >= sn_count(n)) throw std::out_of_range("S_n rank out of range");
    std::vector<int> levels(n);
    int lo = 0;
    for (int pos = 0; pos < n; ++pos) {
        int rem = n - pos - 1;
        for (int v = lo; v <= n; ++v) {
            std::uint64_t block = tail_count(n, v, rem);
            if (rank < block) {
                levels[pos] = v;
                lo = v;
                break;
            }
            rank -= block;
        }
    }
    return levels;
}

std::uint64_t sn_rank(int n, const std::vector<int>& levels) {
    std::uint64_t rank = 0;
    int lo = 0;
    for (int pos = 0; pos < static_cast<int>(levels.size()); ++pos) {
        int rem = static_cast<int>(levels.size()) - pos - 1;
        for (int v = lo; v < levels[pos]; ++v) rank += tail_count(n, v, rem);
        lo = levels[pos];
    }
    return rank;
}

SnRange::SnRange(int n, std::uint64_t begin_rank, std::uint64_t end_rank)
    : n_(n), begin_(begin_rank), end_(end_rank) {
    if (begin_ > end_ || end_ > sn_count(n)) throw std::out_of_range("bad S_n range");
}

bool SnRange::next(std::vector<int>& levels) {
    if (begin_ + emitted_ >= end_) return false;
    if (emitted_ == 0) {
        cur_ = sn_unrank(n_, begin_);
    } else {
        sn_next(cur_, n_);
    }
    ++emitted_;
    levels = cur_;
    return true;
}

// ---- serialization ------------------------------------------------------

std::string gh_to_json(const GhPair& gh) {
    nlohmann::ordered_json j;
    j["n"] = gh.n();
    j["G"] = gh.G();
    j["H"] = gh.H();
    return j.dump(2) + "\n";
}

GhPair gh_from_json(const std::string& text, double eps) {
    nlohmann::json j = nlohmann::json::parse(text);
    int n = j.at("n").get<int>();
    auto G = j.at("G").get<std::vector<double>>();
    auto H = j.at("H").get<std::vector<double>>();
    if (static_cast<int>(G.size()) != n || static_cast<int>(H.size()) != n)
        throw std::invalid_argument("gh json: lengths do not match n");
    return GhPair::make(std::move(G), std::move(H), eps);
}

GhPair gh_load_json(const std::string& path, double eps) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return gh_from_json(ss.str(), eps);
}

std::string gh_to_csv(const GhPair& gh) {
    std::ostringstream os;
    os << "i,G_i,H_i\n";
    os.precision(17);
    for (int i = 0; i < gh.n(); ++i)
        os << (i + 1) << "," << gh.G()[i] << "," << gh.H()[i] << "\n";
    return os.str();
}

}  // namespace obliq
