#include "odflow/graph.hpp"

#include <algorithm>

#include "odflow/error.hpp"

namespace odflow {

int ComponentSpec::index_of(const CellId& id) const {
    auto it = std::lower_bound(cells.begin(), cells.end(), id);
    if (it == cells.end() || *it != id) return -1;
    return static_cast<int>(it - cells.begin());
}

UnionGraph union_graph(const std::vector<FlowSlice>& slices, int t_first, int t_last) {
    if (t_first > t_last)
        throw DomainError("union_graph: empty time range");
    if (t_first < 0 || static_cast<std::size_t>(t_last) >= slices.size())
        throw DomainError("union_graph: time range outside loaded slices");

    UnionGraph g;
    std::set<CellId> ids;
    for (int t = t_first; t <= t_last; ++t)
        for (const auto& r : slices[t].records) {
            ids.insert(r.origin);
            ids.insert(r.dest);
        }
    g.nodes.assign(ids.begin(), ids.end());
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        g.index[g.nodes[i]] = static_cast<int>(i);
    g.out_edges.resize(g.nodes.size());
    for (int t = t_first; t <= t_last; ++t)
        for (const auto& r : slices[t].records) {
            int from = g.index[r.origin], to = g.index[r.dest];
            if (g.edges.insert({from, to}).second)
                g.out_edges[from].push_back(to);
        }
    for (auto& adj : g.out_edges) std::sort(adj.begin(), adj.end());
    return g;
}

namespace {

// Iterative Tarjan; recursion depth would be unbounded on long chains.
std::vector<std::vector<int>> tarjan_sccs(const UnionGraph& g) {
    int n = static_cast<int>(g.nodes.size());
    std::vector<int> dfs_num(n, -1), low(n, 0), on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> sccs;
    int counter = 0;

    struct Frame {
        int v;
        std::size_t edge_idx;
    };
    for (int root = 0; root < n; ++root) {
        if (dfs_num[root] != -1) continue;
        std::vector<Frame> call;
        call.push_back({root, 0});
        dfs_num[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.edge_idx < g.out_edges[f.v].size()) {
                int w = g.out_edges[f.v][f.edge_idx++];
                if (dfs_num[w] == -1) {
                    dfs_num[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], dfs_num[w]);
                }
            } else {
                if (low[f.v] == dfs_num[f.v]) {
                    std::vector<int> scc;
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        scc.push_back(w);
                    } while (w != f.v);
                    sccs.push_back(std::move(scc));
                }
                int v = f.v;
                call.pop_back();
                if (!call.empty())
                    low[call.back().v] = std::min(low[call.back().v], low[v]);
            }
        }
    }
    return sccs;
}

}  // namespace

std::vector<ComponentSpec> strongly_connected_components(const UnionGraph& graph,
                                                         int t_first, int t_last) {
    if (graph.nodes.empty())
        throw DomainError("strongly_connected_components: empty graph");
    auto sccs = tarjan_sccs(graph);
    std::vector<ComponentSpec> out;
    out.reserve(sccs.size());
    for (auto& scc : sccs) {
        ComponentSpec spec;
        spec.t_first = t_first;
        spec.t_last = t_last;
        for (int idx : scc) spec.cells.push_back(graph.nodes[idx]);
        std::sort(spec.cells.begin(), spec.cells.end());
        if (scc.size() == 1 && !graph.has_edge(scc[0], scc[0]))
            spec.analyzable = false;
        out.push_back(std::move(spec));
    }
    std::sort(out.begin(), out.end(), [](const ComponentSpec& a, const ComponentSpec& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.cells.front() < b.cells.front();
    });
    return out;
}

std::vector<FlowSlice> restrict_slices(const std::vector<FlowSlice>& slices,
                                       const ComponentSpec& component) {
    std::vector<FlowSlice> out;
    out.reserve(slices.size());
    for (const auto& slice : slices) {
        FlowSlice s;
        s.t = slice.t;
        s.wall_time = slice.wall_time;
        s.interval_minutes = slice.interval_minutes;
        for (const auto& r : slice.records)
            if (component.index_of(r.origin) >= 0 && component.index_of(r.dest) >= 0)
                s.records.push_back(r);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace odflow
