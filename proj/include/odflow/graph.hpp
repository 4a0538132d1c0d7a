#ifndef odflow_graph_hpp
#define odflow_graph_hpp

#include <map>
#include <set>
#include <string>
#include <vector>

#include "odflow/flows.hpp"

namespace odflow {

// Directed graph over cell ids. Nodes are indexed in lexicographic id order
// so downstream matrix layouts are reproducible.
struct UnionGraph {
    std::vector<CellId> nodes;               // sorted
    std::map<CellId, int> index;
    std::vector<std::vector<int>> out_edges;  // adjacency, sorted, no duplicates
    std::set<std::pair<int, int>> edges;      // (from, to)

    bool has_edge(int from, int to) const { return edges.count({from, to}) != 0; }
};

// One strongly connected component with a stable cell ordering
// (lexicographic) defining matrix index <-> cell mapping.
struct ComponentSpec {
    std::vector<CellId> cells;  // sorted
    int t_first = 0;
    int t_last = 0;
    // Singletons without a self-loop cannot carry a stochastic column chain.
    bool analyzable = true;

    std::size_t size() const { return cells.size(); }
    int index_of(const CellId& id) const;  // -1 when absent
};

// Edge (origin -> dest) present iff some slice in [t_first, t_last] has a
// record with that origin and dest. Throws on an empty range.
UnionGraph union_graph(const std::vector<FlowSlice>& slices, int t_first, int t_last);

// Standard SCC partition, sorted by component size descending (ties by first
// cell id). Singleton components without a self-loop are flagged.
std::vector<ComponentSpec> strongly_connected_components(const UnionGraph& graph,
                                                         int t_first, int t_last);

// Drops records whose origin or dest lies outside the component; keeps the
// t indexing of the input.
std::vector<FlowSlice> restrict_slices(const std::vector<FlowSlice>& slices,
                                       const ComponentSpec& component);

}  // namespace odflow

#endif
