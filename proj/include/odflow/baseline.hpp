#ifndef odflow_baseline_hpp
#define odflow_baseline_hpp

#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "odflow/cells.hpp"
#include "odflow/flows.hpp"
#include "odflow/graph.hpp"
#include "odflow/markov.hpp"

namespace odflow {

// Count-weighted linear fit of observed median trip distance against
// great-circle centroid distance.
struct BaselineFit {
    double slope = 0.0;      // km per km
    double intercept = 0.0;  // km
    double rmse = 0.0;       // count-weighted
    std::size_t n_points = 0;
    double weight_total = 0.0;
};

struct BaselineValue {
    double baseline = 0.0;  // km
    double sigma = 0.0;     // km
    bool imputed = false;
};

// Raw scatter point behind the fit, for export/plotting.
struct BaselinePoint {
    CellId origin, dest;
    double geo_km = 0.0;
    double median_km = 0.0;
    double weight = 0.0;
    std::optional<double> std_km;
};

// One fit context over an analysis range: aggregated per-pair statistics,
// centroids, and the closed-form weighted least-squares fit.
class BaselineModel {
public:
    // Aggregates pair statistics (count-weighted) over all slices; self-loop
    // pairs enter at geographic distance 0, anchoring the intercept.
    BaselineModel(const std::vector<FlowSlice>& slices, const ComponentSpec& component,
                  const CellTable& cells);

    const BaselineFit& fit() const { return fit_; }
    const std::vector<BaselinePoint>& points() const { return points_; }

    // Observed median/std when the pair appears in range, else imputed from
    // the fit. Baseline floored at 0.
    BaselineValue value_for(const CellId& origin, const CellId& dest) const;
    BaselineValue value_for(int origin_idx, int dest_idx) const;

    // Fills NaN costs on the operators with imputed baselines.
    void impute_costs(std::vector<StepOperator>& ops) const;

    // `{slope, intercept, rmse, n_points, weight_total}`
    void write_fit_json(std::ostream& out) const;
    // `geo_km,median_km,weight`
    void write_scatter_csv(std::ostream& out) const;

private:
    const ComponentSpec* component_;
    std::vector<BaselinePoint> points_;
    std::map<std::pair<int, int>, std::size_t> by_pair_;  // (origin,dest) -> point
    std::vector<double> geo_;  // pairwise centroid distance cache, row-major n*n
    BaselineFit fit_;
};

// Closed-form weighted least squares on (x, y, w) triples.
BaselineFit weighted_linear_fit(const std::vector<double>& x,
                                const std::vector<double>& y,
                                const std::vector<double>& w);

// x_bar / (baseline + sigma); throws on a zero denominator.
double effective_distance(double x_bar, double baseline, double sigma);

}  // namespace odflow

#endif
