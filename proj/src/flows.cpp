#include "odflow/flows.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

#include "odflow/error.hpp"
#include "odflow/util.hpp"

namespace odflow {

namespace {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    long long era = (y >= 0 ? y : y - 399) / 400;
    unsigned yoe = static_cast<unsigned>(y - era * 400);
    unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

// Accepts "YYYY-MM-DD[T ]HH:MM[:SS]"; returns epoch seconds.
bool parse_iso8601(std::string_view s, long long& epoch) {
    int y, mo, d, h, mi, se = 0;
    char sep;
    int n = std::sscanf(std::string(s).c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y,
                        &mo, &d, &sep, &h, &mi, &se);
    if (n < 6 || (sep != 'T' && sep != ' ')) return false;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60)
        return false;
    epoch = days_from_civil(y, mo, d) * 86400LL + h * 3600LL + mi * 60LL + se;
    return true;
}

struct RawRow {
    long long time_key = 0;  // step index or epoch seconds
    bool is_epoch = false;
    FlowRecord rec;
};

std::optional<double> read_stat(const std::vector<std::string>& fields, int idx,
                                bool& bad) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= fields.size())
        return std::nullopt;
    auto s = util::trim(fields[idx]);
    if (s.empty()) return std::nullopt;
    double v;
    if (!util::parse_double(s, v)) {
        bad = true;
        return std::nullopt;
    }
    if (v < 0.0) {
        bad = true;
        return std::nullopt;
    }
    return v;
}

// Count-weighted merge of one optional statistic.
void merge_stat(std::optional<double>& acc, double acc_count,
                const std::optional<double>& add, double add_count) {
    if (!add) return;
    if (!acc) {
        // weight only the records that carry the statistic
        acc = *add;
        return;
    }
    // acc currently averages over acc_count worth of trips
    double w = acc_count + add_count;
    acc = (*acc * acc_count + *add * add_count) / w;
}

}  // namespace

const FlowRecord* FlowSlice::find(const CellId& origin, const CellId& dest) const {
    auto it = std::lower_bound(
        records.begin(), records.end(), std::make_pair(origin, dest),
        [](const FlowRecord& r, const std::pair<CellId, CellId>& key) {
            return std::tie(r.origin, r.dest) < std::tie(key.first, key.second);
        });
    if (it == records.end() || it->origin != origin || it->dest != dest)
        return nullptr;
    return &*it;
}

ParseOptions ParseOptions::from_config(const Config& cfg) {
    ParseOptions o;
    o.col_time = cfg.get("col_time", o.col_time);
    o.col_origin = cfg.get("col_origin", o.col_origin);
    o.col_dest = cfg.get("col_dest", o.col_dest);
    o.col_count = cfg.get("col_count", o.col_count);
    o.col_dist_mean = cfg.get("col_dist_mean", o.col_dist_mean);
    o.col_dist_median = cfg.get("col_dist_median", o.col_dist_median);
    o.col_dist_std = cfg.get("col_dist_std", o.col_dist_std);
    o.col_dur_mean = cfg.get("col_dur_mean", o.col_dur_mean);
    o.col_dur_median = cfg.get("col_dur_median", o.col_dur_median);
    o.col_dur_std = cfg.get("col_dur_std", o.col_dur_std);
    o.interval_minutes = static_cast<int>(cfg.get_int("interval_minutes", o.interval_minutes));
    o.min_count = cfg.get_double("min_count", o.min_count);
    o.error_budget = static_cast<std::size_t>(cfg.get_int("error_budget", static_cast<long long>(o.error_budget)));
    return o;
}

std::vector<FlowSlice> parse_flows(std::istream& in, const ParseOptions& opts,
                                   ParseReport* report) {
    ParseReport local;
    ParseReport& rep = report ? *report : local;

    std::string line;
    if (!std::getline(in, line))
        throw SchemaError("parse_flows: empty input");
    auto header = util::split_csv(line);
    auto col = [&](const std::string& name) -> int {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };
    int c_time = col(opts.col_time), c_origin = col(opts.col_origin),
        c_dest = col(opts.col_dest), c_count = col(opts.col_count);
    for (auto [idx, name] : {std::pair{c_time, opts.col_time},
                             {c_origin, opts.col_origin},
                             {c_dest, opts.col_dest},
                             {c_count, opts.col_count}})
        if (idx < 0)
            throw SchemaError("parse_flows: missing required column '" + name + "'");
    int c_dmean = col(opts.col_dist_mean), c_dmed = col(opts.col_dist_median),
        c_dstd = col(opts.col_dist_std), c_umean = col(opts.col_dur_mean),
        c_umed = col(opts.col_dur_median), c_ustd = col(opts.col_dur_std);

    std::vector<RawRow> rows;
    std::size_t line_no = 1;
    auto row_error = [&](std::size_t ln, std::string msg) {
        rep.row_errors.push_back({ln, std::move(msg)});
        if (rep.row_errors.size() > opts.error_budget)
            throw IngestError("parse_flows: row error budget (" +
                              std::to_string(opts.error_budget) +
                              ") exceeded; first error at line " +
                              std::to_string(rep.row_errors.front().line_no) +
                              ": " + rep.row_errors.front().message);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        ++rep.rows_read;
        auto fields = util::split_csv(line);
        auto need = static_cast<std::size_t>(std::max({c_time, c_origin, c_dest, c_count}));
        if (fields.size() <= need) {
            row_error(line_no, "too few fields");
            continue;
        }
        RawRow row;
        auto tval = util::trim(fields[c_time]);
        long long step;
        if (util::parse_long(tval, step)) {
            row.time_key = step;
        } else if (parse_iso8601(tval, row.time_key)) {
            row.is_epoch = true;
        } else {
            row_error(line_no, "unparsable time '" + std::string(tval) + "'");
            continue;
        }
        row.rec.origin = std::string(util::trim(fields[c_origin]));
        row.rec.dest = std::string(util::trim(fields[c_dest]));
        if (row.rec.origin.empty() || row.rec.dest.empty()) {
            row_error(line_no, "empty origin or dest");
            continue;
        }
        if (!util::parse_double(fields[c_count], row.rec.count)) {
            row_error(line_no, "unparsable count '" + fields[c_count] + "'");
            continue;
        }
        if (row.rec.count <= 0.0) {
            row_error(line_no, "count must be positive, got " + fields[c_count]);
            continue;
        }
        if (row.rec.count < opts.min_count) {
            ++rep.rows_below_min_count;
            continue;
        }
        bool bad = false;
        row.rec.dist_mean = read_stat(fields, c_dmean, bad);
        row.rec.dist_median = read_stat(fields, c_dmed, bad);
        row.rec.dist_std = read_stat(fields, c_dstd, bad);
        row.rec.dur_mean = read_stat(fields, c_umean, bad);
        row.rec.dur_median = read_stat(fields, c_umed, bad);
        row.rec.dur_std = read_stat(fields, c_ustd, bad);
        if (bad) {
            row_error(line_no, "unparsable or negative statistic");
            continue;
        }
        rows.push_back(std::move(row));
        ++rep.rows_kept;
    }
    if (rows.empty()) return {};

    bool any_epoch = std::any_of(rows.begin(), rows.end(),
                                 [](const RawRow& r) { return r.is_epoch; });
    bool any_step = std::any_of(rows.begin(), rows.end(),
                                [](const RawRow& r) { return !r.is_epoch; });
    if (any_epoch && any_step)
        throw IngestError("parse_flows: mixed integer and timestamp time values");

    long long t0 = rows.front().time_key;
    for (const auto& r : rows) t0 = std::min(t0, r.time_key);
    long long interval_s = static_cast<long long>(opts.interval_minutes) * 60;
    if (any_epoch && interval_s <= 0)
        throw SchemaError("parse_flows: timestamp input requires a positive interval length");

    // (step, origin, dest) -> merged record
    std::map<std::tuple<int, CellId, CellId>, FlowRecord> merged;
    long long wall0 = 0;
    for (auto& r : rows) {
        long long step = any_epoch ? (r.time_key - t0) / interval_s
                                   : r.time_key - t0;
        if (any_epoch && step == 0) wall0 = t0;
        r.rec.t = static_cast<int>(step);
        auto key = std::make_tuple(r.rec.t, r.rec.origin, r.rec.dest);
        auto it = merged.find(key);
        if (it == merged.end()) {
            merged.emplace(key, r.rec);
        } else {
            FlowRecord& acc = it->second;
            merge_stat(acc.dist_mean, acc.count, r.rec.dist_mean, r.rec.count);
            merge_stat(acc.dist_median, acc.count, r.rec.dist_median, r.rec.count);
            merge_stat(acc.dist_std, acc.count, r.rec.dist_std, r.rec.count);
            merge_stat(acc.dur_mean, acc.count, r.rec.dur_mean, r.rec.count);
            merge_stat(acc.dur_median, acc.count, r.rec.dur_median, r.rec.count);
            merge_stat(acc.dur_std, acc.count, r.rec.dur_std, r.rec.count);
            acc.count += r.rec.count;
            ++rep.rows_merged;
        }
    }

    int t_max = 0;
    for (const auto& [key, rec] : merged) t_max = std::max(t_max, std::get<0>(key));
    std::vector<FlowSlice> slices(static_cast<std::size_t>(t_max) + 1);
    for (int t = 0; t <= t_max; ++t) {
        slices[t].t = t;
        slices[t].interval_minutes = opts.interval_minutes;
    }
    for (auto& [key, rec] : merged)
        slices[std::get<0>(key)].records.push_back(std::move(rec));
    (void)wall0;
    return slices;
}

namespace {
void write_stat(std::ostream& out, const std::optional<double>& v) {
    out << ',';
    if (v) out << util::format_double(*v);
}
}  // namespace

void write_flows_csv(std::ostream& out, const std::vector<FlowSlice>& slices) {
    out << "time,origin,dest,count,dist_mean,dist_median,dist_std,"
           "dur_mean,dur_median,dur_std\n";
    for (const auto& slice : slices) {
        for (const auto& r : slice.records) {
            out << r.t << ',' << r.origin << ',' << r.dest << ','
                << util::format_double(r.count);
            write_stat(out, r.dist_mean);
            write_stat(out, r.dist_median);
            write_stat(out, r.dist_std);
            write_stat(out, r.dur_mean);
            write_stat(out, r.dur_median);
            write_stat(out, r.dur_std);
            out << '\n';
        }
    }
}

}  // namespace odflow
