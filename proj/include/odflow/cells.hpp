#ifndef odflow_cells_hpp
#define odflow_cells_hpp

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "odflow/geo.hpp"

namespace odflow {

// Opaque, case-sensitive cell identifier (geohash string, hex-grid label, ...).
using CellId = std::string;

// Registry of cell centroids. Immutable after construction; safe for
// concurrent reads.
class CellTable {
public:
    void add(const CellId& id, geo::LatLon centroid);

    bool contains(const CellId& id) const { return entries_.count(id) != 0; }
    std::optional<geo::LatLon> find(const CellId& id) const;

    // Throws DomainError if the id is unknown.
    geo::LatLon at(const CellId& id) const;

    std::size_t size() const { return entries_.size(); }
    const std::map<CellId, geo::LatLon>& entries() const { return entries_; }

    // Cells manifest: CSV `cell_id,lat,lon`, '.' decimal separator.
    static CellTable read_csv(std::istream& in);
    void write_csv(std::ostream& out) const;

private:
    std::map<CellId, geo::LatLon> entries_;
};

}  // namespace odflow

#endif
