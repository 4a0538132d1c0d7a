#include "odflow/cache.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "odflow/error.hpp"

namespace odflow {

namespace {

constexpr char kMagic[4] = {'O', 'D', 'F', '1'};
constexpr std::uint8_t kVersion = 1;
constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw IngestError("cache: truncated file");
    return v;
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    auto len = get<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw IngestError("cache: truncated string");
    return s;
}

void put_stat(std::ostream& out, const std::optional<double>& v) {
    put<double>(out, v ? *v : kAbsent);
}

std::optional<double> get_stat(std::istream& in) {
    double v = get<double>(in);
    if (std::isnan(v)) return std::nullopt;
    return v;
}

}  // namespace

void write_cache(const std::string& path, const ComponentCache& cache) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestError("cache: cannot open '" + path + "' for writing");
    out.write(kMagic, 4);
    put<std::uint8_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(cache.component.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(cache.slices.size()));
    put<std::int32_t>(out, cache.component.t_first);
    put<std::int32_t>(out, cache.component.t_last);
    put<std::int32_t>(out, cache.steps_per_day);
    for (const auto& id : cache.component.cells) {
        put_string(out, id);
        auto c = cache.cells.find(id);
        put<double>(out, c ? c->lat : kAbsent);
        put<double>(out, c ? c->lon : kAbsent);
    }
    for (const auto& slice : cache.slices) {
        put<std::int32_t>(out, slice.t);
        put<std::int32_t>(out, slice.interval_minutes);
        put<std::uint64_t>(out, static_cast<std::uint64_t>(slice.records.size()));
        for (const auto& r : slice.records) {
            put<std::uint32_t>(out, static_cast<std::uint32_t>(cache.component.index_of(r.origin)));
            put<std::uint32_t>(out, static_cast<std::uint32_t>(cache.component.index_of(r.dest)));
            put<double>(out, r.count);
            put_stat(out, r.dist_mean);
            put_stat(out, r.dist_median);
            put_stat(out, r.dist_std);
            put_stat(out, r.dur_mean);
            put_stat(out, r.dur_median);
            put_stat(out, r.dur_std);
        }
    }
    if (!out) throw IngestError("cache: write failed for '" + path + "'");
}

ComponentCache read_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cache: cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IngestError("cache: '" + path + "' is not an ODF1 cache");
    auto version = get<std::uint8_t>(in);
    if (version != kVersion)
        throw IngestError("cache: unsupported version " + std::to_string(version));

    ComponentCache cache;
    auto n = get<std::uint32_t>(in);
    auto t_count = get<std::uint32_t>(in);
    cache.component.t_first = get<std::int32_t>(in);
    cache.component.t_last = get<std::int32_t>(in);
    cache.steps_per_day = get<std::int32_t>(in);
    for (std::uint32_t k = 0; k < n; ++k) {
        auto id = get_string(in);
        double lat = get<double>(in), lon = get<double>(in);
        cache.component.cells.push_back(id);
        if (!std::isnan(lat)) cache.cells.add(id, {lat, lon});
    }
    cache.slices.resize(t_count);
    for (std::uint32_t t = 0; t < t_count; ++t) {
        auto& slice = cache.slices[t];
        slice.t = get<std::int32_t>(in);
        slice.interval_minutes = get<std::int32_t>(in);
        auto count = get<std::uint64_t>(in);
        slice.records.reserve(count);
        for (std::uint64_t k = 0; k < count; ++k) {
            FlowRecord r;
            r.t = slice.t;
            auto oi = get<std::uint32_t>(in);
            auto di = get<std::uint32_t>(in);
            if (oi >= n || di >= n)
                throw IngestError("cache: record references unknown cell index");
            r.origin = cache.component.cells[oi];
            r.dest = cache.component.cells[di];
            r.count = get<double>(in);
            r.dist_mean = get_stat(in);
            r.dist_median = get_stat(in);
            r.dist_std = get_stat(in);
            r.dur_mean = get_stat(in);
            r.dur_median = get_stat(in);
            r.dur_std = get_stat(in);
            slice.records.push_back(std::move(r));
        }
    }
    return cache;
}

}  // namespace odflow
