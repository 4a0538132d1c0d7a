#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "odflow/error.hpp"
#include "odflow/passage.hpp"
#include "oracles.hpp"

using namespace odflow;

namespace {

ComponentSpec make_component(std::vector<CellId> cells) {
    ComponentSpec c;
    std::sort(cells.begin(), cells.end());
    c.cells = std::move(cells);
    return c;
}

FlowSlice make_slice(int t, std::vector<FlowRecord> records) {
    FlowSlice s;
    s.t = t;
    for (auto& r : records) r.t = t;
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.origin, a.dest) < std::tie(b.origin, b.dest);
    });
    s.records = std::move(records);
    return s;
}

FlowRecord rec(const CellId& o, const CellId& d, double count,
               std::optional<double> med = std::nullopt) {
    FlowRecord r;
    r.origin = o;
    r.dest = d;
    r.count = count;
    r.dist_median = med;
    return r;
}

// hand-assembled operator: entries[(row, prob, cost)] per column
StepOperator make_op(int t, int n,
                     std::vector<std::vector<StepOperator::Entry>> cols) {
    StepOperator op;
    op.t = t;
    op.n = n;
    for (auto& c : cols)
        std::sort(c.begin(), c.end(),
                  [](const auto& a, const auto& b) { return a.row < b.row; });
    op.cols = std::move(cols);
    return op;
}

}  // namespace

TEST_CASE("deterministic chain arrives at step 2 with summed cost") {
    // a -> b (cost 2) then b -> c (cost 3); pi = (0, 1), x = (-, 5)
    auto m1 = make_op(0, 3, {{{1, 1.0, 2.0}}, {{1, 1.0, 0.0}}, {{2, 1.0, 0.0}}});
    auto m2 = make_op(1, 3, {{{0, 1.0, 0.0}}, {{2, 1.0, 3.0}}, {{2, 1.0, 0.0}}});
    auto trace = propagate({m1, m2}, 0, 2, 2);
    CHECK(trace.pi[0] == 0.0);
    CHECK(trace.pi[1] == doctest::Approx(1.0));
    CHECK(trace.x[1] == doctest::Approx(5.0));
    CHECK(std::isnan(trace.x[0]));
    CHECK(trace.mass_balance(1) == doctest::Approx(1.0));
    CHECK(trace.mass_balance(2) == doctest::Approx(1.0));

    auto od = windowed_distance(trace, 1, 2);
    CHECK(od.P == doctest::Approx(1.0));
    CHECK(*od.x_bar == doctest::Approx(5.0));
}

TEST_CASE("propagate argument validation") {
    auto m = make_op(0, 2, {{{1, 1.0, 1.0}}, {{0, 1.0, 1.0}}});
    CHECK_THROWS_AS(propagate({}, 0, 1, 1), DomainError);
    CHECK_THROWS_AS(propagate({m}, 0, 5, 1), DomainError);
    CHECK_THROWS_AS(propagate({m}, 0, 1, 2), DomainError);
    CHECK_THROWS_AS(propagate({m}, 0, 1, 0), DomainError);
}

TEST_CASE("masked recursion matches exhaustive path enumeration") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 2 + static_cast<int>(rng() % 4);
        int t_max = 1 + static_cast<int>(rng() % 4);
        auto ops = oracles::random_chain(rng, n, t_max, 0.6);
        std::vector<oracles::DenseStep> dense;
        for (const auto& op : ops) dense.push_back(oracles::to_dense(op));

        int origin = static_cast<int>(rng() % n);
        int dest = static_cast<int>(rng() % n);
        auto trace = propagate(ops, origin, dest, t_max);
        auto fp = oracles::enumerate_first_passage(dense, origin, dest, t_max);

        for (int t = 0; t < t_max; ++t) {
            CHECK(trace.pi[t] == doctest::Approx(fp.pi[t]).epsilon(1e-9));
            if (fp.pi[t] > 1e-12)
                CHECK(trace.x[t] == doctest::Approx(fp.x[t]).epsilon(1e-9));
            CHECK(trace.mass_balance(t + 1) == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("return-to-origin traces also match enumeration") {
    std::mt19937_64 rng(67);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + static_cast<int>(rng() % 3);
        int t_max = 2 + static_cast<int>(rng() % 3);
        auto ops = oracles::random_chain(rng, n, t_max, 0.7);
        std::vector<oracles::DenseStep> dense;
        for (const auto& op : ops) dense.push_back(oracles::to_dense(op));
        int origin = static_cast<int>(rng() % n);
        auto trace = propagate(ops, origin, origin, t_max);
        auto fp = oracles::enumerate_first_passage(dense, origin, origin, t_max);
        for (int t = 0; t < t_max; ++t) {
            CHECK(trace.pi[t] == doctest::Approx(fp.pi[t]).epsilon(1e-9));
            CHECK(trace.rho[t] == 0.0);
            if (fp.pi[t] > 1e-12)
                CHECK(trace.x[t] == doctest::Approx(fp.x[t]).epsilon(1e-9));
        }
    }
}

TEST_CASE("windowed distance pools steps by arrival probability") {
    auto m1 = make_op(0, 2, {{{0, 0.5, 0.0}, {1, 0.5, 2.0}}, {{1, 1.0, 0.0}}});
    auto m2 = make_op(1, 2, {{{1, 1.0, 4.0}}, {{1, 1.0, 0.0}}});
    // origin 0 -> dest 1: step 1 arrives 0.5 @ 2km; remaining 0.5 sits at the
    // origin and is absorbed (rho), so step 2 arrival is zero
    auto trace = propagate({m1, m2}, 0, 1, 2);
    CHECK(trace.pi[0] == doctest::Approx(0.5));
    CHECK(trace.rho[0] == doctest::Approx(0.5));
    CHECK(trace.pi[1] == 0.0);
    auto od = windowed_distance(trace, 1, 2);
    CHECK(od.P == doctest::Approx(0.5));
    CHECK(*od.x_bar == doctest::Approx(2.0));

    CHECK_THROWS_AS(windowed_distance(trace, 0, 2), DomainError);
    CHECK_THROWS_AS(windowed_distance(trace, 2, 1), DomainError);
    CHECK_THROWS_AS(windowed_distance(trace, 1, 3), DomainError);
}

TEST_CASE("zero-probability window leaves x_bar absent") {
    auto m1 = make_op(0, 2, {{{0, 1.0, 0.5}}, {{1, 1.0, 0.5}}});
    auto trace = propagate({m1}, 0, 1, 1);
    auto od = windowed_distance(trace, 1, 1);
    CHECK(od.P == 0.0);
    CHECK_FALSE(od.x_bar.has_value());
}

TEST_CASE("gup detection scans the window for direct records") {
    std::vector<FlowSlice> slices{
        make_slice(0, {rec("a", "b", 5), rec("b", "a", 1)}),
        make_slice(1, {rec("b", "c", 2), rec("c", "b", 1)}),
    };
    CHECK(is_gup(slices, 0, 1, "a", "c"));
    CHECK_FALSE(is_gup(slices, 0, 1, "a", "b"));
    CHECK(is_gup(slices, 1, 1, "a", "b"));  // direct record only at t=0
    CHECK_THROWS_AS(is_gup(slices, 0, 2, "a", "b"), DomainError);
    CHECK_THROWS_AS(is_gup(slices, 1, 0, "a", "b"), DomainError);
}

TEST_CASE("path decomposition covers the arrival probability exactly") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 15; ++trial) {
        int n = 2 + static_cast<int>(rng() % 3);
        int t_max = 1 + static_cast<int>(rng() % 3);
        auto ops = oracles::random_chain(rng, n, t_max, 0.7);
        int origin = static_cast<int>(rng() % n);
        int dest = static_cast<int>(rng() % n);
        auto dec = decompose_paths(ops, origin, dest, t_max, 1 << 20);
        CHECK(dec.exhaustive);
        double total = 0.0;
        for (std::size_t k = 0; k < dec.paths.size(); ++k) {
            total += dec.paths[k].prob;
            if (k) CHECK(dec.paths[k].prob <= dec.paths[k - 1].prob);
            CHECK(dec.paths[k].nodes.front() == origin);
            CHECK(dec.paths[k].nodes.back() == dest);
        }
        auto trace = propagate(ops, origin, dest, t_max);
        double P = 0.0;
        for (double pi : trace.pi) P += pi;
        CHECK(total == doctest::Approx(P).epsilon(1e-9));
    }
}

TEST_CASE("path decomposition truncation and beam fallback") {
    std::mt19937_64 rng(73);
    auto ops = oracles::random_chain(rng, 4, 3, 1.0);
    CHECK(decompose_paths(ops, 0, 1, 3, 0).paths.empty());

    auto top2 = decompose_paths(ops, 0, 1, 3, 2);
    CHECK(top2.paths.size() == 2);

    DecomposeOptions tight;
    tight.max_expansions = 2;
    tight.beam_width = 4096;
    auto beam = decompose_paths(ops, 0, 1, 3, 1 << 20, tight);
    CHECK_FALSE(beam.exhaustive);
    // with a wide beam the fallback still finds every admissible path
    auto full = decompose_paths(ops, 0, 1, 3, 1 << 20);
    REQUIRE(beam.paths.size() == full.paths.size());
    for (std::size_t k = 0; k < full.paths.size(); ++k)
        CHECK(beam.paths[k].prob == doctest::Approx(full.paths[k].prob).epsilon(1e-12));
}

TEST_CASE("paths json includes window and cell names") {
    auto comp = make_component({"a", "b"});
    auto m1 = make_op(0, 2, {{{1, 1.0, 2.5}}, {{0, 1.0, 2.5}}});
    auto dec = decompose_paths({m1}, 0, 1, 1, 10);
    std::ostringstream out;
    write_paths_json(out, dec, comp, 1, 1);
    auto text = out.str();
    CHECK(text.find("\"window\":[1,1]") != std::string::npos);
    CHECK(text.find("\"nodes\":[\"a\",\"b\"]") != std::string::npos);
    CHECK(text.find("\"prob\":1") != std::string::npos);
    CHECK(text.find("\"dist_km\":2.5") != std::string::npos);
    CHECK(text.find("\"exhaustive\":true") != std::string::npos);
}

TEST_CASE("home rto reads the first-step self transition") {
    auto comp = make_component({"a", "b"});
    auto slice = make_slice(0, {rec("a", "a", 3, 1.5), rec("a", "b", 1, 4.0),
                                rec("b", "a", 2, 4.0)});
    auto ops = build_step_operators({slice}, comp);
    auto od = rto(ops, 0, 1, RtoVariant::home);
    CHECK(od.P == doctest::Approx(0.75));
    CHECK(*od.x_bar == doctest::Approx(1.5));

    auto none = rto(ops, 1, 1, RtoVariant::home);  // b has no self-loop
    CHECK(none.P == 0.0);
    CHECK_FALSE(none.x_bar.has_value());
}

TEST_CASE("roaming rto on a two-cell swap returns at step 2 with cost 4") {
    auto m1 = make_op(0, 2, {{{1, 1.0, 2.0}}, {{0, 1.0, 2.0}}});
    auto m2 = make_op(1, 2, {{{1, 1.0, 2.0}}, {{0, 1.0, 2.0}}});
    auto od = rto({m1, m2}, 0, 2, RtoVariant::roaming);
    CHECK(od.P == doctest::Approx(1.0));
    CHECK(*od.x_bar == doctest::Approx(4.0));
    CHECK(od.t1 == 2);
    CHECK_THROWS_AS(rto({m1, m2}, 0, 1, RtoVariant::roaming), DomainError);
}

TEST_CASE("city home average weights by self-loop counts") {
    // weights (0.25, 0.75) over self distances (4, 8) -> 7.0
    auto comp = make_component({"a", "b"});
    auto slice = make_slice(0, {rec("a", "a", 10, 4.0), rec("b", "b", 30, 8.0),
                                rec("a", "b", 99, 1.0)});
    auto ops = build_step_operators({slice}, comp);
    auto city = city_rto(ops, slice, comp, 1, RtoVariant::home);
    CHECK(city.value_km == doctest::Approx(7.0));
    CHECK(city.excluded_mass == 0.0);
}

TEST_CASE("city roaming average renormalizes undefined origins away") {
    // a swaps with b and returns; c leaves to a sink-ish loop and never returns
    auto comp = make_component({"a", "b", "c"});
    auto mk = [&](int t) {
        return make_op(t, 3,
                       {{{1, 1.0, 3.0}},         // a -> b
                        {{0, 1.0, 3.0}},         // b -> a
                        {{1, 1.0, 5.0}}});       // c -> b (then b -> a, never c)
    };
    auto ops = std::vector<StepOperator>{mk(0), mk(1), mk(2)};
    auto slice = make_slice(0, {rec("a", "b", 10, 3.0), rec("b", "a", 10, 3.0),
                                rec("c", "b", 10, 5.0)});
    auto city = city_rto(ops, slice, comp, 3, RtoVariant::roaming);
    // only a and b return (x_bar = 6 each); c's weight (1/3) is excluded
    CHECK(city.value_km == doctest::Approx(6.0));
    CHECK(city.excluded_mass == doctest::Approx(1.0 / 3.0));

    FlowSlice no_leavers = make_slice(0, {rec("a", "a", 5, 1.0)});
    CHECK_THROWS_AS(city_rto(ops, no_leavers, comp, 3, RtoVariant::roaming),
                    DomainError);
}

TEST_CASE("time sweep emits per-day effective distances") {
    auto comp = make_component({"a", "b"});
    CellTable cells;
    cells.add("a", {0.0, 0.0});
    cells.add("b", {0.0, 0.1});
    std::vector<FlowSlice> slices;
    for (int t = 0; t < 4; ++t)
        slices.push_back(make_slice(t, {rec("a", "a", 1, 2.0), rec("a", "b", 3, 2.0),
                                        rec("b", "a", 4, 2.0)}));
    auto ops = build_step_operators(slices, comp);
    BaselineModel baseline(slices, comp, cells);
    REQUIRE(baseline.fit().rmse == doctest::Approx(0.0).epsilon(1e-9));

    SweepSpec spec;
    spec.steps_per_day = 2;
    spec.window_start = 0;
    spec.window_len = 2;
    spec.q = 0.0;
    spec.p_cut = 1e-6;
    auto rows = time_sweep(ops, {{0, 1}}, baseline, {0, 1}, spec);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.d_eff == doctest::Approx(1.0));  // x_bar 2 over baseline 2 + sigma 0
        CHECK(r.P == doctest::Approx(0.75));
    }
    CHECK(rows[0].day == 0);
    CHECK(rows[1].day == 1);

    std::ostringstream csv;
    write_sweep_csv(csv, rows, comp);
    CHECK(csv.str() == "day,origin,dest,d_eff,P\n0,a,b,1,0.75\n1,a,b,1,0.75\n");

    SweepSpec bad = spec;
    bad.window_len = 3;
    CHECK_THROWS_AS(time_sweep(ops, {{0, 1}}, baseline, {0}, bad), DomainError);
    CHECK_THROWS_AS(time_sweep(ops, {{0, 1}}, baseline, {2}, spec), DomainError);
}

TEST_CASE("probability cutoff drops faint pairs") {
    auto comp = make_component({"a", "b"});
    CellTable cells;
    cells.add("a", {0.0, 0.0});
    cells.add("b", {0.0, 0.1});
    std::vector<FlowSlice> slices{
        make_slice(0, {rec("a", "a", 999999, 1.0), rec("a", "b", 1, 2.0),
                       rec("b", "a", 4, 2.0)})};
    auto ops = build_step_operators(slices, comp);
    BaselineModel baseline(slices, comp, cells);
    SweepSpec spec;
    spec.steps_per_day = 1;
    spec.window_len = 1;
    spec.q = 0.0;
    spec.p_cut = 0.5;  // arrival prob ~1e-6 is far below this
    CHECK(time_sweep(ops, {{0, 1}}, baseline, {0}, spec).empty());
}

TEST_CASE("windowed csv formats optionals as empty fields") {
    auto comp = make_component({"a", "b"});
    std::vector<WindowedOD> rows(2);
    rows[0] = {0, 1, 1, 4, 12.5, 0.25, 3.5, true};
    rows[1].origin = 1;
    rows[1].dest = 0;
    rows[1].t1 = 1;
    rows[1].t2 = 4;  // no arrivals: x_bar and d_eff absent
    std::ostringstream out;
    write_windowed_csv(out, rows, comp);
    CHECK(out.str() ==
          "origin,dest,t1,t2,x_bar_km,P,d_eff,gup\n"
          "a,b,1,4,12.5,0.25,3.5,1\n"
          "b,a,1,4,,0,,0\n");
}
