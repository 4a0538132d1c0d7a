#include "odflow/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "odflow/error.hpp"
#include "odflow/util.hpp"

namespace odflow {

BaselineFit weighted_linear_fit(const std::vector<double>& x,
                                const std::vector<double>& y,
                                const std::vector<double>& w) {
    if (x.size() != y.size() || x.size() != w.size())
        throw DomainError("weighted_linear_fit: length mismatch");
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (w[k] <= 0.0) continue;
        sw += w[k];
        swx += w[k] * x[k];
        swy += w[k] * y[k];
        swxx += w[k] * x[k] * x[k];
        swxy += w[k] * x[k] * y[k];
    }
    if (sw <= 0.0)
        throw DomainError("weighted_linear_fit: no positive weight");
    double det = sw * swxx - swx * swx;
    if (!(det > 1e-12 * std::max(sw * swxx, 1e-300)))
        throw DomainError("weighted_linear_fit: degenerate design (all x equal)");
    BaselineFit fit;
    fit.slope = (sw * swxy - swx * swy) / det;
    fit.intercept = (swxx * swy - swx * swxy) / det;
    double ss = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (w[k] <= 0.0) continue;
        double r = y[k] - (fit.slope * x[k] + fit.intercept);
        ss += w[k] * r * r;
        ++n;
    }
    fit.rmse = std::sqrt(std::max(ss, 0.0) / sw);
    fit.n_points = n;
    fit.weight_total = sw;
    return fit;
}

BaselineModel::BaselineModel(const std::vector<FlowSlice>& slices,
                             const ComponentSpec& component, const CellTable& cells)
    : component_(&component) {
    int n = static_cast<int>(component.size());
    geo_.assign(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<geo::LatLon> centroids(n);
    for (int k = 0; k < n; ++k) centroids[k] = cells.at(component.cells[k]);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            double d = geo::haversine_km(centroids[a], centroids[b]);
            geo_[static_cast<std::size_t>(a) * n + b] = d;
            geo_[static_cast<std::size_t>(b) * n + a] = d;
        }

    // count-weighted per-pair aggregation, fixed (origin, dest) order
    struct Acc {
        double w_med = 0, sum_med = 0;
        double w_std = 0, sum_std = 0;
        double count = 0;
    };
    std::map<std::pair<int, int>, Acc> acc;
    for (const auto& slice : slices) {
        for (const auto& r : slice.records) {
            int j = component.index_of(r.origin), i = component.index_of(r.dest);
            if (j < 0 || i < 0) continue;
            Acc& a = acc[{j, i}];
            a.count += r.count;
            std::optional<double> med = r.dist_median ? r.dist_median : r.dist_mean;
            if (med) {
                a.w_med += r.count;
                a.sum_med += r.count * *med;
            }
            if (r.dist_std) {
                a.w_std += r.count;
                a.sum_std += r.count * *r.dist_std;
            }
        }
    }

    std::vector<double> xs, ys, ws;
    for (const auto& [pair, a] : acc) {
        if (a.w_med <= 0.0) continue;  // pair never reported a distance
        BaselinePoint pt;
        pt.origin = component.cells[pair.first];
        pt.dest = component.cells[pair.second];
        pt.geo_km = pair.first == pair.second
                        ? 0.0
                        : geo_[static_cast<std::size_t>(pair.first) * n + pair.second];
        pt.median_km = a.sum_med / a.w_med;
        pt.weight = a.count;
        if (a.w_std > 0.0) pt.std_km = a.sum_std / a.w_std;
        by_pair_[pair] = points_.size();
        points_.push_back(pt);
        xs.push_back(pt.geo_km);
        ys.push_back(pt.median_km);
        ws.push_back(pt.weight);
    }
    fit_ = weighted_linear_fit(xs, ys, ws);
}

BaselineValue BaselineModel::value_for(int origin_idx, int dest_idx) const {
    int n = static_cast<int>(component_->size());
    auto it = by_pair_.find({origin_idx, dest_idx});
    if (it != by_pair_.end()) {
        const BaselinePoint& pt = points_[it->second];
        BaselineValue v;
        v.baseline = std::max(pt.median_km, 0.0);
        v.sigma = pt.std_km ? *pt.std_km : fit_.rmse;
        v.imputed = false;
        return v;
    }
    double geo = origin_idx == dest_idx
                     ? 0.0
                     : geo_[static_cast<std::size_t>(origin_idx) * n + dest_idx];
    BaselineValue v;
    v.baseline = std::max(fit_.slope * geo + fit_.intercept, 0.0);
    v.sigma = fit_.rmse;
    v.imputed = true;
    return v;
}

BaselineValue BaselineModel::value_for(const CellId& origin, const CellId& dest) const {
    int j = component_->index_of(origin), i = component_->index_of(dest);
    if (j < 0 || i < 0)
        throw DomainError("BaselineModel: pair outside component");
    return value_for(j, i);
}

void BaselineModel::impute_costs(std::vector<StepOperator>& ops) const {
    for (auto& op : ops)
        for (int j = 0; j < op.n; ++j)
            for (auto& e : op.cols[j])
                if (std::isnan(e.cost)) e.cost = value_for(j, e.row).baseline;
}

void BaselineModel::write_fit_json(std::ostream& out) const {
    out << "{\"slope\":" << util::format_double(fit_.slope)
        << ",\"intercept\":" << util::format_double(fit_.intercept)
        << ",\"rmse\":" << util::format_double(fit_.rmse)
        << ",\"n_points\":" << fit_.n_points
        << ",\"weight_total\":" << util::format_double(fit_.weight_total) << "}\n";
}

void BaselineModel::write_scatter_csv(std::ostream& out) const {
    out << "geo_km,median_km,weight\n";
    for (const auto& pt : points_)
        out << util::format_double(pt.geo_km) << ','
            << util::format_double(pt.median_km) << ','
            << util::format_double(pt.weight) << '\n';
}

double effective_distance(double x_bar, double baseline, double sigma) {
    double denom = baseline + sigma;
    if (denom <= 0.0)
        throw DomainError("effective_distance: zero baseline + sigma");
    return x_bar / denom;
}

}  // namespace odflow
