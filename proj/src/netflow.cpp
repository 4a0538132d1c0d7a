#include "odflow/netflow.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "odflow/error.hpp"
#include "odflow/util.hpp"

namespace odflow {

InitialDistribution initial_distribution(const FlowSlice& first_slice,
                                         const ComponentSpec& component) {
    int n = static_cast<int>(component.size());
    InitialDistribution init;
    init.n_by_origin.assign(n, 0.0);
    for (const auto& r : first_slice.records) {
        int col = component.index_of(r.origin);
        if (col < 0 || component.index_of(r.dest) < 0)
            throw DomainError("initial_distribution: slice not restricted to component");
        init.n_by_origin[col] += r.count;
    }
    init.n_total = 0.0;
    for (double v : init.n_by_origin) init.n_total += v;
    if (init.n_total <= 0.0)
        throw DomainError("initial_distribution: first slice carries no flow");
    init.p.resize(n);
    for (int j = 0; j < n; ++j) init.p[j] = init.n_by_origin[j] / init.n_total;
    return init;
}

NetFlowResult net_flows(const ElapsedOperator& A, const InitialDistribution& init) {
    int n = A.n();
    if (static_cast<int>(init.n_by_origin.size()) != n)
        throw DomainError("net_flows: operator and initial distribution differ in size");
    NetFlowResult out;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double s = A.at(i, j) * init.n_by_origin[j] -
                       A.at(j, i) * init.n_by_origin[i];
            if (s != 0.0) out.entries.push_back({j, i, s});
        }
    }
    return out;
}

double percentile_threshold(std::vector<double> values, double q) {
    if (q < 0.0 || q > 100.0)
        throw DomainError("percentile: q out of [0,100]");
    if (values.empty())
        throw DomainError("percentile: empty value set");
    std::sort(values.begin(), values.end());
    double h = (values.size() - 1) * q / 100.0;
    std::size_t lo = static_cast<std::size_t>(h);
    double frac = h - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

NetFlowResult top_percentile(const NetFlowResult& result, double q) {
    if (q < 0.0 || q > 100.0)
        throw DomainError("top_percentile: q out of range");
    if (result.entries.empty())
        throw DomainError("top_percentile: empty result");
    std::vector<double> mags;
    mags.reserve(result.entries.size());
    for (const auto& e : result.entries) mags.push_back(std::fabs(e.s));
    double threshold = percentile_threshold(std::move(mags), q);
    NetFlowResult out;
    out.t_start = result.t_start;
    out.t_end = result.t_end;
    for (const auto& e : result.entries)
        if (std::fabs(e.s) >= threshold) out.entries.push_back(e);
    return out;
}

void write_netflow_csv(std::ostream& out, const NetFlowResult& result,
                       const ComponentSpec& component) {
    out << "origin,dest,netflow,window_start,window_end\n";
    for (const auto& e : result.entries) {
        // orient along the positive-flow direction
        int from = e.s >= 0.0 ? e.origin : e.dest;
        int to = e.s >= 0.0 ? e.dest : e.origin;
        out << component.cells[from] << ',' << component.cells[to] << ','
            << util::format_double(std::fabs(e.s)) << ',' << result.t_start
            << ',' << result.t_end << '\n';
    }
}

void write_netflow_geojson(std::ostream& out, const NetFlowResult& result,
                           const ComponentSpec& component, const CellTable& cells) {
    out << "{\"type\":\"FeatureCollection\",\"features\":[";
    bool first = true;
    for (const auto& e : result.entries) {
        int from = e.s >= 0.0 ? e.origin : e.dest;
        int to = e.s >= 0.0 ? e.dest : e.origin;
        auto a = cells.at(component.cells[from]);
        auto b = cells.at(component.cells[to]);
        if (!first) out << ',';
        first = false;
        out << "{\"type\":\"Feature\",\"geometry\":{\"type\":\"LineString\","
               "\"coordinates\":[["
            << util::format_double(a.lon) << ',' << util::format_double(a.lat)
            << "],[" << util::format_double(b.lon) << ','
            << util::format_double(b.lat) << "]]},\"properties\":{\"origin\":\""
            << component.cells[from] << "\",\"dest\":\"" << component.cells[to]
            << "\",\"netflow\":" << util::format_double(std::fabs(e.s)) << "}}";
    }
    out << "]}\n";
}

}  // namespace odflow
