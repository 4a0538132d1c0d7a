#ifndef odflow_flows_hpp
#define odflow_flows_hpp

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "odflow/cells.hpp"
#include "odflow/config.hpp"

namespace odflow {

// One aggregated OD observation: trip count plus optional distance (km)
// and duration (minutes) summary statistics.
struct FlowRecord {
    int t = 0;  // 0-based step index within the loaded range
    CellId origin;
    CellId dest;
    double count = 0.0;
    std::optional<double> dist_mean, dist_median, dist_std;
    std::optional<double> dur_mean, dur_median, dur_std;
};

// All records of one time-step, sorted by (origin, dest), at most one
// record per ordered pair.
struct FlowSlice {
    int t = 0;
    std::vector<FlowRecord> records;
    // Calendar metadata, cosmetic: ISO timestamp of the step start (when
    // the source used timestamps) and the interval length.
    std::string wall_time;
    int interval_minutes = 0;

    bool empty() const { return records.empty(); }
    const FlowRecord* find(const CellId& origin, const CellId& dest) const;
};

// Column-name mapping plus row filtering knobs for parse_flows.
struct ParseOptions {
    // Logical field -> column name. Required: time, origin, dest, count.
    std::string col_time = "time";
    std::string col_origin = "origin";
    std::string col_dest = "dest";
    std::string col_count = "count";
    std::string col_dist_mean = "dist_mean";
    std::string col_dist_median = "dist_median";
    std::string col_dist_std = "dist_std";
    std::string col_dur_mean = "dur_mean";
    std::string col_dur_median = "dur_median";
    std::string col_dur_std = "dur_std";

    // Interval length for converting ISO-8601 time values to step indices.
    int interval_minutes = 180;
    // Rows with count below this are skipped and tallied, not errors.
    double min_count = 0.0;
    // Bad rows are collected up to this budget; exceeding it fails the ingest.
    std::size_t error_budget = 100;

    static ParseOptions from_config(const Config& cfg);
};

struct RowError {
    std::size_t line_no = 0;
    std::string message;
};

struct ParseReport {
    std::size_t rows_read = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_below_min_count = 0;
    std::size_t rows_merged = 0;  // duplicate (t,o,d) rows folded away
    std::vector<RowError> row_errors;
};

// Parses a time-indexed OD flow table. Records are grouped into one slice
// per step, 0-based and contiguous (steps with no rows yield empty slices);
// duplicate (t,origin,dest) rows merge by summing counts and count-weighting
// every present statistic.
std::vector<FlowSlice> parse_flows(std::istream& in, const ParseOptions& opts,
                                   ParseReport* report = nullptr);

// Canonical CSV schema: time,origin,dest,count,dist_mean,dist_median,
// dist_std,dur_mean,dur_median,dur_std with integer step indices.
void write_flows_csv(std::ostream& out, const std::vector<FlowSlice>& slices);

}  // namespace odflow

#endif
