#ifndef odflow_cache_hpp
#define odflow_cache_hpp

#include <string>
#include <vector>

#include "odflow/cells.hpp"
#include "odflow/flows.hpp"
#include "odflow/graph.hpp"

namespace odflow {

// Component dataset ready for analysis: the restricted slices, the cell
// ordering, and enough metadata to interpret step indices as days.
struct ComponentCache {
    ComponentSpec component;
    std::vector<FlowSlice> slices;  // restricted, contiguous t from 0
    CellTable cells;                // centroids for the component's cells
    int steps_per_day = 0;          // 0 when unknown
};

// Compact binary format, magic `ODF1`, little-endian, version byte.
void write_cache(const std::string& path, const ComponentCache& cache);
ComponentCache read_cache(const std::string& path);

}  // namespace odflow

#endif
