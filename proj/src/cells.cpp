#include "odflow/cells.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "odflow/error.hpp"
#include "odflow/util.hpp"

namespace odflow {

void CellTable::add(const CellId& id, geo::LatLon centroid) {
    if (id.empty())
        throw DomainError("CellTable: empty cell id");
    if (centroid.lat < -90.0 || centroid.lat > 90.0 ||
        centroid.lon < -180.0 || centroid.lon > 180.0)
        throw DomainError("CellTable: coordinates out of range for cell '" + id + "'");
    auto [it, inserted] = entries_.emplace(id, centroid);
    if (!inserted)
        throw DomainError("CellTable: duplicate cell id '" + id + "'");
}

std::optional<geo::LatLon> CellTable::find(const CellId& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

geo::LatLon CellTable::at(const CellId& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end())
        throw DomainError("CellTable: unknown cell id '" + id + "'");
    return it->second;
}

CellTable CellTable::read_csv(std::istream& in) {
    CellTable table;
    std::string line;
    if (!std::getline(in, line))
        throw SchemaError("cells manifest: empty file");
    auto header = util::split_csv(line);
    if (header.size() < 3 || header[0] != "cell_id" || header[1] != "lat" ||
        header[2] != "lon")
        throw SchemaError("cells manifest: expected header cell_id,lat,lon");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = util::split_csv(line);
        if (fields.size() < 3)
            throw SchemaError("cells manifest: too few fields at line " +
                              std::to_string(line_no));
        geo::LatLon c;
        if (!util::parse_double(fields[1], c.lat) ||
            !util::parse_double(fields[2], c.lon))
            throw SchemaError("cells manifest: bad coordinate at line " +
                              std::to_string(line_no));
        table.add(fields[0], c);
    }
    return table;
}

void CellTable::write_csv(std::ostream& out) const {
    out << "cell_id,lat,lon\n";
    for (const auto& [id, c] : entries_)
        out << id << ',' << util::format_double(c.lat) << ','
            << util::format_double(c.lon) << '\n';
}

}  // namespace odflow
