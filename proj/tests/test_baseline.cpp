#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "odflow/baseline.hpp"
#include "odflow/error.hpp"
#include "odflow/geo.hpp"

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
               std::optional<double> med = std::nullopt,
               std::optional<double> std_km = std::nullopt) {
    FlowRecord r;
    r.origin = o;
    r.dest = d;
    r.count = count;
    r.dist_median = med;
    r.dist_std = std_km;
    return r;
}

}  // namespace

TEST_CASE("two-point fit is exact") {
    auto fit = weighted_linear_fit({0.0, 5.0}, {1.0, 5.0}, {1.0, 1.0});
    CHECK(fit.slope == doctest::Approx(0.8));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.rmse == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit.n_points == 2);
    CHECK(fit.weight_total == doctest::Approx(2.0));
}

TEST_CASE("weight doubling equals point duplication") {
    auto doubled = weighted_linear_fit({0, 2, 4}, {1, 2, 5}, {2, 1, 1});
    auto duplicated = weighted_linear_fit({0, 0, 2, 4}, {1, 1, 2, 5}, {1, 1, 1, 1});
    CHECK(doubled.slope == doctest::Approx(duplicated.slope).epsilon(1e-12));
    CHECK(doubled.intercept == doctest::Approx(duplicated.intercept).epsilon(1e-12));
    CHECK(doubled.rmse == doctest::Approx(duplicated.rmse).epsilon(1e-12));
}

TEST_CASE("degenerate designs throw") {
    CHECK_THROWS_AS(weighted_linear_fit({3, 3, 3}, {1, 2, 3}, {1, 1, 1}), DomainError);
    CHECK_THROWS_AS(weighted_linear_fit({1, 2}, {1, 2}, {0, 0}), DomainError);
    CHECK_THROWS_AS(weighted_linear_fit({1, 2}, {1.0}, {1, 1}), DomainError);
}

TEST_CASE("normal equations hold on random data") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> ux(0.0, 50.0), uy(-5.0, 60.0), uw(0.1, 9.0);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 3 + static_cast<int>(rng() % 20);
        std::vector<double> x(n), y(n), w(n);
        for (int k = 0; k < n; ++k) {
            x[k] = ux(rng);
            y[k] = uy(rng);
            w[k] = uw(rng);
        }
        auto fit = weighted_linear_fit(x, y, w);
        // weighted residuals are orthogonal to 1 and to x
        double r1 = 0.0, rx = 0.0, sw = 0.0;
        for (int k = 0; k < n; ++k) {
            double r = y[k] - (fit.slope * x[k] + fit.intercept);
            r1 += w[k] * r;
            rx += w[k] * r * x[k];
            sw += w[k];
        }
        CHECK(r1 == doctest::Approx(0.0).scale(sw * 60.0).epsilon(1e-10));
        CHECK(rx == doctest::Approx(0.0).scale(sw * 3000.0).epsilon(1e-10));
    }
}

TEST_CASE("baseline model: observed vs imputed pairs") {
    auto comp = make_component({"a", "b"});
    CellTable cells;
    cells.add("a", {0.0, 0.0});
    cells.add("b", {0.0, 0.1});
    double geo_ab = geo::haversine_km({0.0, 0.0}, {0.0, 0.1});

    std::vector<FlowSlice> slices{
        make_slice(0, {rec("a", "a", 10, 1.0), rec("a", "b", 5, 12.0, 2.5)}),
    };
    BaselineModel model(slices, comp, cells);

    // two distinct x values -> exact fit through both points
    CHECK(model.fit().n_points == 2);
    CHECK(model.fit().intercept == doctest::Approx(1.0));
    CHECK(model.fit().slope == doctest::Approx((12.0 - 1.0) / geo_ab));
    CHECK(model.fit().rmse == doctest::Approx(0.0).epsilon(1e-9));

    auto observed = model.value_for("a", "b");
    CHECK_FALSE(observed.imputed);
    CHECK(observed.baseline == doctest::Approx(12.0));
    CHECK(observed.sigma == doctest::Approx(2.5));

    auto self = model.value_for("a", "a");
    CHECK_FALSE(self.imputed);
    CHECK(self.baseline == doctest::Approx(1.0));
    CHECK(self.sigma == doctest::Approx(model.fit().rmse));  // no std reported

    // pair (b, a) never observed: imputed from the fit at the same geo distance
    auto imputed = model.value_for("b", "a");
    CHECK(imputed.imputed);
    CHECK(imputed.baseline == doctest::Approx(12.0).epsilon(1e-9));
    CHECK(imputed.sigma == doctest::Approx(model.fit().rmse));

    CHECK_THROWS_AS(model.value_for("a", "zzz"), DomainError);
}

TEST_CASE("duplicate pair reports aggregate count-weighted across slices") {
    auto comp = make_component({"a", "b"});
    CellTable cells;
    cells.add("a", {0.0, 0.0});
    cells.add("b", {0.0, 0.1});
    std::vector<FlowSlice> slices{
        make_slice(0, {rec("a", "a", 2, 1.0), rec("a", "b", 10, 2.0)}),
        make_slice(1, {rec("a", "b", 30, 6.0)}),
    };
    BaselineModel model(slices, comp, cells);
    // (a,b): (10*2 + 30*6)/40 = 5, weight 40
    auto v = model.value_for("a", "b");
    CHECK(v.baseline == doctest::Approx(5.0));
    bool found = false;
    for (const auto& pt : model.points())
        if (pt.origin == "a" && pt.dest == "b") {
            CHECK(pt.weight == doctest::Approx(40.0));
            found = true;
        }
    CHECK(found);
}

TEST_CASE("mean substitutes for a missing median") {
    auto comp = make_component({"a", "b"});
    CellTable cells;
    cells.add("a", {0.0, 0.0});
    cells.add("b", {0.0, 0.1});
    FlowRecord r = rec("a", "b", 4);
    r.dist_mean = 7.5;
    std::vector<FlowSlice> slices{make_slice(0, {rec("a", "a", 1, 0.5), r})};
    BaselineModel model(slices, comp, cells);
    CHECK(model.value_for("a", "b").baseline == doctest::Approx(7.5));
}

TEST_CASE("imputed baseline is floored at zero") {
    // steep negative fit: far pair short median, self-loop long median
    auto comp = make_component({"a", "b", "c"});
    CellTable cells;
    cells.add("a", {0.0, 0.0});
    cells.add("b", {0.0, 1.0});
    cells.add("c", {0.0, 4.0});
    std::vector<FlowSlice> slices{
        make_slice(0, {rec("a", "a", 5, 30.0), rec("b", "a", 5, 0.1)}),
    };
    BaselineModel model(slices, comp, cells);
    CHECK(model.fit().slope < 0.0);
    // (a,c) is unobserved and sits where the line is negative
    auto v = model.value_for("b", "c");
    CHECK(v.imputed);
    CHECK(v.baseline >= 0.0);
    auto far = model.value_for("a", "c");
    CHECK(far.baseline == 0.0);
}

TEST_CASE("row permutation does not change the fit") {
    auto comp = make_component({"a", "b", "c"});
    CellTable cells;
    cells.add("a", {0.0, 0.0});
    cells.add("b", {0.0, 0.5});
    cells.add("c", {0.3, 0.2});
    std::vector<FlowSlice> fwd{
        make_slice(0, {rec("a", "a", 3, 1.0), rec("a", "b", 4, 8.0, 1.0),
                       rec("b", "c", 5, 9.0), rec("c", "a", 6, 7.0)}),
    };
    auto rev_records = fwd[0].records;
    std::reverse(rev_records.begin(), rev_records.end());
    std::vector<FlowSlice> rev{make_slice(0, std::move(rev_records))};

    BaselineModel m1(fwd, comp, cells), m2(rev, comp, cells);
    std::ostringstream j1, j2, s1, s2;
    m1.write_fit_json(j1);
    m2.write_fit_json(j2);
    m1.write_scatter_csv(s1);
    m2.write_scatter_csv(s2);
    CHECK(j1.str() == j2.str());
    CHECK(s1.str() == s2.str());
}

TEST_CASE("impute_costs touches only NaN costs") {
    auto comp = make_component({"a", "b"});
    CellTable cells;
    cells.add("a", {0.0, 0.0});
    cells.add("b", {0.0, 0.1});
    std::vector<FlowSlice> slices{
        make_slice(0, {rec("a", "a", 2, 1.0), rec("a", "b", 8, 11.0),
                       rec("b", "a", 4)}),  // b->a has no distance stats
    };
    BaselineModel model(slices, comp, cells);
    auto ops = build_step_operators(slices, comp);
    REQUIRE(std::isnan(ops[0].entry(0, 1)->cost));
    double kept = ops[0].entry(1, 0)->cost;
    model.impute_costs(ops);
    CHECK(ops[0].entry(1, 0)->cost == kept);
    CHECK_FALSE(std::isnan(ops[0].entry(0, 1)->cost));
    CHECK(ops[0].entry(0, 1)->cost ==
          doctest::Approx(model.value_for("b", "a").baseline));
}

TEST_CASE("effective distance") {
    CHECK(effective_distance(4.0, 1.5, 0.5) == doctest::Approx(2.0));
    CHECK(effective_distance(0.0, 1.0, 0.0) == 0.0);
    CHECK_THROWS_AS(effective_distance(3.0, 0.0, 0.0), DomainError);
}

TEST_CASE("fit json shape") {
    auto comp = make_component({"a", "b"});
    CellTable cells;
    cells.add("a", {0.0, 0.0});
    cells.add("b", {0.0, 0.1});
    std::vector<FlowSlice> slices{
        make_slice(0, {rec("a", "a", 1, 2.0), rec("a", "b", 1, 3.0)})};
    BaselineModel model(slices, comp, cells);
    std::ostringstream out;
    model.write_fit_json(out);
    auto text = out.str();
    CHECK(text.find("\"slope\":") != std::string::npos);
    CHECK(text.find("\"n_points\":2") != std::string::npos);
    CHECK(text.find("\"weight_total\":2") != std::string::npos);
}
