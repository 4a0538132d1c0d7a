#ifndef odflow_netflow_hpp
#define odflow_netflow_hpp

#include <iosfwd>
#include <vector>

#include "odflow/cells.hpp"
#include "odflow/flows.hpp"
#include "odflow/graph.hpp"
#include "odflow/markov.hpp"

namespace odflow {

// Population weights at the beginning of a window, from the first slice's
// column sums.
struct InitialDistribution {
    double n_total = 0.0;
    std::vector<double> n_by_origin;  // indexed like the component cells
    std::vector<double> p;            // n_by_origin / n_total
};

struct NetFlowEntry {
    int origin = 0;  // component index j
    int dest = 0;    // component index i; stored with dest < origin
    double s = 0.0;  // s(i,j): positive means net flow origin -> dest
};

// Net trip counts over ordered pairs (i < j); antisymmetry gives the rest.
struct NetFlowResult {
    int t_start = 0;  // window [t_start, t_end] in step indices
    int t_end = 0;
    std::vector<NetFlowEntry> entries;
};

InitialDistribution initial_distribution(const FlowSlice& first_slice,
                                         const ComponentSpec& component);

// s(i,j) = a_ij * n_j - a_ji * n_i over ordered pairs i < j; entries with
// |s| == 0 are omitted.
NetFlowResult net_flows(const ElapsedOperator& A, const InitialDistribution& init);

// Keeps entries with |s| >= the q-th percentile of |s| (linear interpolation
// on the sorted values; ties at the threshold all kept).
NetFlowResult top_percentile(const NetFlowResult& result, double q);

double percentile_threshold(std::vector<double> values, double q);

// `origin,dest,netflow,window_start,window_end`, oriented along positive flow.
void write_netflow_csv(std::ostream& out, const NetFlowResult& result,
                       const ComponentSpec& component);

// GeoJSON FeatureCollection of LineStrings origin centroid -> dest centroid
// with a `netflow` property, oriented along positive flow.
void write_netflow_geojson(std::ostream& out, const NetFlowResult& result,
                           const ComponentSpec& component, const CellTable& cells);

}  // namespace odflow

#endif
