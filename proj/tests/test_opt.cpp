#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "obliq/bound.hpp"
#include "obliq/opt.hpp"
#include "obliq/presets.hpp"

using namespace obliq;

namespace {

int count_lines_with(const std::string& text, const std::string& prefix) {
    int count = 0;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
        if (line.rfind(prefix, 0) == 0) ++count;
    return count;
}

InnerSolver default_inner() {
    return [](const QcqpModel& m, const GhPair& s) { return heuristic_inner_solve(m, s); };
}

}  // namespace

TEST_CASE("export: smallest model layout") {
    QcqpModel m;
    m.n = 1;
    m.active_pairs.emplace_back(GridStep::make(1, {1}), GridStep::make(1, {0}));
    std::string text = qcqp_to_text(m);
    CHECK(count_lines_with(text, "var ") == 3);  // F, G1, H1
    CHECK(count_lines_with(text, "con ratio_") == 1);
    CHECK(count_lines_with(text, "con budget_") == 1);
    CHECK(count_lines_with(text, "con mono_g_") == 1);
    CHECK(count_lines_with(text, "con norm_") == 2);
}

TEST_CASE("export: n = 2 with two active pairs") {
    QcqpModel m;
    m.n = 2;
    m.active_pairs.emplace_back(GridStep::make(2, {2, 2}), GridStep::make(2, {0, 0}));
    m.active_pairs.emplace_back(GridStep::make(2, {1, 2}), GridStep::make(2, {0, 1}));
    std::string text = qcqp_to_text(m);
    CHECK(count_lines_with(text, "var ") == 5);
    CHECK(count_lines_with(text, "con ratio_") == 2);
    CHECK(count_lines_with(text, "con budget_") == 3);
}

TEST_CASE("export is byte-identical for identical models") {
    QcqpModel m = QcqpModel::initial(3);
    CHECK(qcqp_to_text(m) == qcqp_to_text(m));
    QcqpModel again = QcqpModel::initial(3);
    CHECK(qcqp_to_text(m) == qcqp_to_text(again));
}

TEST_CASE("initial model: theta == 1 against every beta") {
    QcqpModel m = QcqpModel::initial(2);
    CHECK(m.active_pairs.size() == sn_count(2));
    for (const auto& [t, b] : m.active_pairs) CHECK(t.levels == std::vector<int>{2, 2});
    std::size_t added = m.add_pairs({{GridStep::make(2, {2, 2}), GridStep::make(2, {0, 0})}});
    CHECK(added == 0);  // already present
    added = m.add_pairs({{GridStep::make(2, {0, 1}), GridStep::make(2, {0, 0})}});
    CHECK(added == 1);
}

TEST_CASE("feasibility projection") {
    GhPair fixed = make_feasible({0.9, 0.95}, {0.9, 0.2});  // wrong order, over budget
    BudgetCheck bc = check_budget(fixed);
    CHECK(bc.ok);
    CHECK(fixed.G()[0] >= fixed.G()[1]);
    CHECK(fixed.H()[0] <= fixed.H()[1]);
    double g1 = fixed.G()[0], h1 = fixed.H()[0];
    CHECK(g1 * g1 + h1 * h1 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(g1 >= h1 - 1e-12);
}

TEST_CASE("inner solver finds the n = 1 optimum from a skewed start") {
    QcqpModel m = QcqpModel::initial(1);
    GhPair start = make_feasible({0.3}, {0.954});
    double start_obj = active_objective(m, start);
    GhPair best = heuristic_inner_solve(m, start);
    CHECK(active_objective(m, best) >= start_obj - 1e-12);
    CHECK(best.G()[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-4));
    CHECK(best.H()[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-4));
}

TEST_CASE("constraint generation n = 1 converges to 1/2") {
    ConstraintGenResult res = constraint_generation(1, default_inner(), 10);
    CHECK(res.converged);
    CHECK(res.certified_ratio == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(res.gh.G()[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-4));
}

TEST_CASE("zero rounds pass the start straight through") {
    GhPair start = default_start(3);
    ConstraintGenResult res = constraint_generation(3, default_inner(), 0, start);
    CHECK(res.rounds == 0);
    CHECK(res.certified_ratio == verify_ratio(res.gh, 1).ratio);
    CHECK(res.gh.G() == start.G());
}

TEST_CASE("certified-output rule and active-set growth at n = 2") {
    ConstraintGenResult res = constraint_generation(2, default_inner(), 12);
    CHECK(res.certified_ratio == verify_ratio(res.gh, 1).ratio);
    CHECK(res.active_count >= sn_count(2));
    CHECK(check_budget(res.gh).ok);
    for (std::size_t r = 0; r + 1 < res.round_certified.size(); ++r)
        CHECK(res.round_certified[r] <= res.certified_ratio + 1e-12);
}

TEST_CASE("n = 5 recovery from a perturbed seed") {
    GhPair ref = reference_pair(5);
    std::vector<double> G = ref.G(), H = ref.H();
    const double jit[] = {0.004, -0.009, 0.007, -0.002, 0.008};
    for (int i = 0; i < 5; ++i) {
        G[i] += jit[i];
        H[i] -= jit[4 - i];
    }
    GhPair start = make_feasible(G, H);
    InnerSolver inner = [](const QcqpModel& m, const GhPair& s) {
        InnerSolveOptions o;
        o.initial_step = 0.04;
        return heuristic_inner_solve(m, s, o);
    };
    ConstraintGenResult res = constraint_generation(5, inner, 40, start, 2);
    CHECK(res.converged);
    CHECK(res.certified_ratio >= 0.6389 - 1e-3);
    CHECK(res.certified_ratio == verify_ratio(res.gh, 1).ratio);
}

TEST_CASE("uniform start stays feasible and the objective never regresses") {
    double c = 0.55;  // 2 c sqrt(1-c^2) < 1
    GhPair start = make_feasible(std::vector<double>(3, c),
                                 std::vector<double>(3, std::sqrt(1.0 - c * c)));
    QcqpModel m = QcqpModel::initial(3);
    double before = active_objective(m, start);
    GhPair after = heuristic_inner_solve(m, start);
    CHECK(active_objective(m, after) >= before - 1e-12);
    CHECK(check_budget(after).ok);
}

TEST_CASE("near-stationarity at the published n = 4 point") {
    GhPair ref = reference_pair(4);
    double cert_ref = verify_ratio(make_feasible(ref.G(), ref.H()), 2).ratio;
    QcqpModel model = QcqpModel::initial(4);
    // enrich actives near the current candidate before polishing
    model.add_pairs(collect_pairs_below(make_feasible(ref.G(), ref.H()), cert_ref + 0.01, 50000));
    GhPair polished = heuristic_inner_solve(model, make_feasible(ref.G(), ref.H()));
    double cert_polished = verify_ratio(polished, 2).ratio;
    CHECK(cert_polished <= cert_ref + 1e-4);
    CHECK(cert_polished >= cert_ref - 5e-3);
}
