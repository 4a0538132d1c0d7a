#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "odflow/error.hpp"
#include "odflow/markov.hpp"
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

FlowRecord rec(const CellId& o, const CellId& d, double count) {
    FlowRecord r;
    r.origin = o;
    r.dest = d;
    r.count = count;
    return r;
}

}  // namespace

TEST_CASE("counts normalize per column") {
    auto comp = make_component({"a", "b"});
    auto slice = make_slice(0, {rec("a", "a", 1), rec("a", "b", 3), rec("b", "b", 5)});
    auto op = build_step_operator(slice, comp);
    CHECK(op.prob(0, 0) == doctest::Approx(0.25));
    CHECK(op.prob(1, 0) == doctest::Approx(0.75));
    CHECK(op.prob(0, 1) == 0.0);
    CHECK(op.prob(1, 1) == doctest::Approx(1.0));
    CHECK(op.stochasticity_drift() < 1e-15);
}

TEST_CASE("gap policies for a zero-outflow column") {
    auto comp = make_component({"a", "b", "c"});
    auto slice = make_slice(0, {rec("a", "b", 2), rec("b", "a", 2)});  // no rows from c

    auto self = build_step_operator(slice, comp, GapPolicy::self_loop);
    CHECK(self.prob(2, 2) == doctest::Approx(1.0));
    CHECK(self.nnz() == 3);

    auto unif = build_step_operator(slice, comp, GapPolicy::uniform);
    for (int i = 0; i < 3; ++i) CHECK(unif.prob(i, 2) == doctest::Approx(1.0 / 3.0));

    CHECK_THROWS_AS(build_step_operator(slice, comp, GapPolicy::fail), DomainError);
}

TEST_CASE("cost selection: median, mean fallback, NaN when absent") {
    auto comp = make_component({"a", "b"});
    FlowRecord median = rec("a", "b", 2);
    median.dist_median = 4.5;
    median.dist_mean = 9.9;
    FlowRecord mean_only = rec("b", "a", 2);
    mean_only.dist_mean = 2.5;
    FlowRecord bare = rec("a", "a", 1);
    auto slice = make_slice(0, {median, mean_only, bare});

    auto op = build_step_operator(slice, comp);
    CHECK(op.entry(1, 0)->cost == doctest::Approx(4.5));
    CHECK(op.entry(0, 1)->cost == doctest::Approx(2.5));
    CHECK(std::isnan(op.entry(0, 0)->cost));
}

TEST_CASE("duration cost kind reads the dur_* columns") {
    auto comp = make_component({"a", "b"});
    FlowRecord r = rec("a", "b", 2);
    r.dist_median = 4.5;
    r.dur_median = 30.0;
    auto slice = make_slice(0, {r, rec("b", "a", 1)});
    auto op = build_step_operator(slice, comp, GapPolicy::self_loop, CostKind::duration);
    CHECK(op.entry(1, 0)->cost == doctest::Approx(30.0));
}

TEST_CASE("two-cell swap squares to the identity") {
    auto comp = make_component({"a", "b"});
    auto slice = make_slice(0, {rec("a", "b", 7), rec("b", "a", 3)});
    auto m = build_step_operator(slice, comp);
    auto slice1 = make_slice(1, {rec("a", "b", 1), rec("b", "a", 1)});
    auto m1 = build_step_operator(slice1, comp);

    auto a = elapse({m, m1});
    CHECK(a.steps() == 2);
    CHECK(a.at(0, 0) == doctest::Approx(1.0));
    CHECK(a.at(1, 1) == doctest::Approx(1.0));
    CHECK(a.at(0, 1) == doctest::Approx(0.0));
    CHECK(a.at(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("empty chain elapses to the identity") {
    auto a = elapse({}, 4);
    CHECK(a.steps() == 0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(a.at(i, j) == (i == j ? 1.0 : 0.0));
    CHECK_THROWS_AS(elapse({}), DomainError);
}

TEST_CASE("elapsed operator matches path enumeration on random chains") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + static_cast<int>(rng() % 4);
        int t_max = 1 + static_cast<int>(rng() % 4);
        auto ops = oracles::random_chain(rng, n, t_max, 0.6);
        std::vector<oracles::DenseStep> dense;
        for (const auto& op : ops) dense.push_back(oracles::to_dense(op));

        auto a = elapse(ops);
        auto expect = oracles::enumerate_elapsed(dense, t_max);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK(a.at(i, j) == doctest::Approx(expect[i][j]).epsilon(1e-10));
    }
}

TEST_CASE("elapsed columns stay stochastic over long products") {
    std::mt19937_64 rng(23);
    auto ops = oracles::random_chain(rng, 12, 200, 0.3);
    auto a = elapse(ops);
    for (int j = 0; j < 12; ++j) {
        double sum = 0.0;
        for (int i = 0; i < 12; ++i) {
            sum += a.at(i, j);
            CHECK(a.at(i, j) >= 0.0);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("simplex projection") {
    std::vector<double> v{0.2, 0.9};  // already summing past 1
    project_to_simplex(v);
    CHECK(v[0] == doctest::Approx(0.15));
    CHECK(v[1] == doctest::Approx(0.85));

    std::vector<double> w{-1.0, 0.5, 3.0};
    project_to_simplex(w);
    CHECK(w[0] == 0.0);
    CHECK(w[1] == 0.0);
    CHECK(w[2] == doctest::Approx(1.0));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> u(1 + rng() % 8);
        for (auto& x : u) x = unif(rng);
        auto orig = u;
        project_to_simplex(u);
        double sum = 0.0;
        for (double x : u) {
            CHECK(x >= 0.0);
            sum += x;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        // optimality spot-check: projecting a point already on the simplex
        // is the identity
        auto again = u;
        project_to_simplex(again);
        for (std::size_t k = 0; k < u.size(); ++k)
            CHECK(again[k] == doctest::Approx(u[k]).epsilon(1e-12));
        (void)orig;
    }
}

TEST_CASE("stochastic root recovers a planted square root") {
    Matrix h(2, 2);
    h(0, 0) = 0.9;
    h(1, 0) = 0.1;
    h(0, 1) = 0.2;
    h(1, 1) = 0.8;
    Matrix m = h * h;

    auto res = approximate_stochastic_root(m, 2);
    CHECK(res.experimental);
    CHECK(res.residual <= 1e-6);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(res.root(i, j) == doctest::Approx(h(i, j)).epsilon(1e-3));
    // recovered root squares back to M
    CHECK(m.frobenius_distance(res.root * res.root) <= 1e-6);
}

TEST_CASE("stochastic root keeps columns on the simplex for any p") {
    std::mt19937_64 rng(31);
    for (int p : {2, 3, 5}) {
        auto op = oracles::random_operator(rng, 4, 0, 0.8);
        Matrix m = op.dense();
        RootOptions opts;
        opts.max_iter = 2000;
        auto res = approximate_stochastic_root(m, p, opts);
        for (int j = 0; j < 4; ++j) {
            double sum = 0.0;
            for (int i = 0; i < 4; ++i) {
                CHECK(res.root(i, j) >= -1e-12);
                sum += res.root(i, j);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
        // residual never exceeds the initializer's
        Matrix h0(4, 4);
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i)
                h0(i, j) = (i == j ? 1.0 - 1.0 / p : 0.0) + m(i, j) / p;
        CHECK(res.residual <= m.frobenius_distance(matrix_power(h0, p)) + 1e-12);
    }
}

TEST_CASE("kl metric also descends") {
    std::mt19937_64 rng(37);
    auto op = oracles::random_operator(rng, 3, 0, 1.0);
    Matrix m = op.dense();
    RootOptions opts;
    opts.metric = RootMetric::kl;
    opts.max_iter = 1500;
    auto res = approximate_stochastic_root(m, 2, opts);
    CHECK(res.iterations > 0);
    CHECK(std::isfinite(res.residual));
    for (int j = 0; j < 3; ++j) {
        double sum = 0.0;
        for (int i = 0; i < 3; ++i) sum += res.root(i, j);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("operator csv export lists nonzeros with cell names") {
    auto comp = make_component({"a", "b"});
    auto slice = make_slice(0, {rec("a", "b", 3), rec("b", "a", 1), rec("b", "b", 1)});
    auto op = build_step_operator(slice, comp);
    std::ostringstream out;
    write_operator_csv(out, op, comp);
    auto text = out.str();
    CHECK(text.find("b,a,1") != std::string::npos);   // column a fully moves to b
    CHECK(text.find("a,b,0.5") != std::string::npos);
    CHECK(text.find("b,b,0.5") != std::string::npos);
}
