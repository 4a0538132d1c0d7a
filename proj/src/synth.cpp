#include "odflow/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>

#include "odflow/error.hpp"
#include "odflow/util.hpp"

namespace odflow::synth {

namespace {

constexpr double kKmPerDegLat = 111.19492664455873;  // pi * R_earth / 180

const std::array<Hex, 6> kHexDirections = {
    Hex{1, 0}, Hex{1, -1}, Hex{0, -1}, Hex{-1, 0}, Hex{-1, 1}, Hex{0, 1}};

std::string hex_id(const Hex& h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "hx%+04d%+04d", h.q, h.r);
    return buf;
}

Hex parse_hex(std::string_view s) {
    auto colon = s.find(':');
    long long q, r;
    if (colon == std::string_view::npos ||
        !util::parse_long(s.substr(0, colon), q) ||
        !util::parse_long(s.substr(colon + 1), r))
        throw SchemaError("synth config: bad hex coordinate '" + std::string(s) +
                          "' (expected q:r)");
    return {static_cast<int>(q), static_cast<int>(r)};
}

std::vector<Hex> parse_hex_list(const std::vector<std::string>& items) {
    std::vector<Hex> out;
    for (const auto& s : items) out.push_back(parse_hex(s));
    return out;
}

// counter-based substream: every (day, step, cell) gets its own generator,
// so aggregation order and thread scheduling cannot affect the draw
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t s) : state(s) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    a ^= b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2);
    return a;
}

double triangle(int s, int begin, int end) {
    if (s < begin || s >= end) return 0.0;
    double pos = (s - begin + 0.5) / static_cast<double>(end - begin);
    return 1.0 - std::fabs(2.0 * pos - 1.0);
}

}  // namespace

SynthConfig SynthConfig::from_config(const Config& cfg) {
    SynthConfig c;
    c.lattice_radius = static_cast<int>(cfg.get_int("lattice_radius", c.lattice_radius));
    c.pitch_km = cfg.get_double("pitch_km", c.pitch_km);
    c.base_lat = cfg.get_double("base_lat", c.base_lat);
    c.base_lon = cfg.get_double("base_lon", c.base_lon);
    if (cfg.has("hubs")) c.hubs = parse_hex_list(cfg.get_list("hubs"));
    if (cfg.has("metro")) {
        c.metro.clear();
        for (const auto& item : cfg.get_list("metro")) {
            auto gt = item.find('>');
            if (gt == std::string::npos)
                throw SchemaError("synth config: bad metro pair '" + item +
                                  "' (expected q:r>q:r)");
            c.metro.emplace_back(parse_hex(std::string_view(item).substr(0, gt)),
                                 parse_hex(std::string_view(item).substr(gt + 1)));
        }
    }
    if (cfg.has("center")) c.center = parse_hex_list(cfg.get_list("center"));
    c.period = static_cast<int>(cfg.get_int("period", c.period));
    c.beta = cfg.get_double("beta", c.beta);
    c.stay_base = cfg.get_double("stay_base", c.stay_base);
    c.stay_hub_bonus = cfg.get_double("stay_hub_bonus", c.stay_hub_bonus);
    c.activity_base = cfg.get_double("activity_base", c.activity_base);
    c.activity_hub = cfg.get_double("activity_hub", c.activity_hub);
    c.bias_peak = cfg.get_double("bias_peak", c.bias_peak);
    c.morning_start = static_cast<int>(cfg.get_int("morning_start", c.morning_start));
    c.morning_end = static_cast<int>(cfg.get_int("morning_end", c.morning_end));
    c.evening_start = static_cast<int>(cfg.get_int("evening_start", c.evening_start));
    c.evening_end = static_cast<int>(cfg.get_int("evening_end", c.evening_end));
    c.evening_bias_scale = cfg.get_double("evening_bias_scale", c.evening_bias_scale);
    c.metro_boost_peak = cfg.get_double("metro_boost_peak", c.metro_boost_peak);
    c.self_distance_fraction =
        cfg.get_double("self_distance_fraction", c.self_distance_fraction);
    c.n_agents = cfg.get_int("n_agents", c.n_agents);
    c.n_days = static_cast<int>(cfg.get_int("n_days", c.n_days));
    c.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(c.seed)));
    c.distance_jitter = cfg.get_bool("distance_jitter", c.distance_jitter);
    c.start_date = cfg.get("start_date", c.start_date);
    return c;
}

void SynthConfig::echo(std::ostream& out) const {
    out << "lattice_radius=" << lattice_radius << '\n'
        << "pitch_km=" << util::format_double(pitch_km) << '\n'
        << "base_lat=" << util::format_double(base_lat) << '\n'
        << "base_lon=" << util::format_double(base_lon) << '\n';
    out << "hubs=";
    for (std::size_t k = 0; k < hubs.size(); ++k)
        out << (k ? "," : "") << hubs[k].q << ':' << hubs[k].r;
    out << "\nmetro=";
    for (std::size_t k = 0; k < metro.size(); ++k)
        out << (k ? "," : "") << metro[k].first.q << ':' << metro[k].first.r << '>'
            << metro[k].second.q << ':' << metro[k].second.r;
    out << "\ncenter=";
    for (std::size_t k = 0; k < center.size(); ++k)
        out << (k ? "," : "") << center[k].q << ':' << center[k].r;
    out << "\nperiod=" << period << '\n'
        << "beta=" << util::format_double(beta) << '\n'
        << "stay_base=" << util::format_double(stay_base) << '\n'
        << "stay_hub_bonus=" << util::format_double(stay_hub_bonus) << '\n'
        << "activity_base=" << util::format_double(activity_base) << '\n'
        << "activity_hub=" << util::format_double(activity_hub) << '\n'
        << "bias_peak=" << util::format_double(bias_peak) << '\n'
        << "morning_start=" << morning_start << '\n'
        << "morning_end=" << morning_end << '\n'
        << "evening_start=" << evening_start << '\n'
        << "evening_end=" << evening_end << '\n'
        << "evening_bias_scale=" << util::format_double(evening_bias_scale) << '\n'
        << "metro_boost_peak=" << util::format_double(metro_boost_peak) << '\n'
        << "self_distance_fraction=" << util::format_double(self_distance_fraction) << '\n'
        << "n_agents=" << n_agents << '\n'
        << "n_days=" << n_days << '\n'
        << "seed=" << seed << '\n'
        << "distance_jitter=" << (distance_jitter ? "true" : "false") << '\n'
        << "start_date=" << start_date << '\n';
}

SynthNetwork build_network(const SynthConfig& cfg) {
    if (cfg.lattice_radius < 1)
        throw DomainError("build_network: lattice radius must be >= 1");
    SynthNetwork net;

    std::vector<Hex> hexes;
    int R = cfg.lattice_radius;
    for (int q = -R; q <= R; ++q)
        for (int r = -R; r <= R; ++r)
            if (std::abs(q + r) <= R) hexes.push_back({q, r});

    std::vector<std::pair<CellId, Hex>> labeled;
    for (const auto& h : hexes) labeled.emplace_back(hex_id(h), h);
    std::sort(labeled.begin(), labeled.end());

    double coslat = std::cos(cfg.base_lat * M_PI / 180.0);
    for (const auto& [id, h] : labeled) {
        double x = cfg.pitch_km * (h.q + 0.5 * h.r);
        double y = cfg.pitch_km * (std::sqrt(3.0) / 2.0) * h.r;
        geo::LatLon c{cfg.base_lat + y / kKmPerDegLat,
                      cfg.base_lon + x / (kKmPerDegLat * coslat)};
        int idx = net.size();
        net.cell_ids.push_back(id);
        net.coords.push_back(h);
        net.index[h] = idx;
        net.cells.add(id, c);
    }

    int n = net.size();
    net.neighbors.resize(n);
    for (int j = 0; j < n; ++j)
        for (const auto& d : kHexDirections) {
            Hex nb{net.coords[j].q + d.q, net.coords[j].r + d.r};
            auto it = net.index.find(nb);
            if (it != net.index.end()) net.neighbors[j].push_back(it->second);
        }

    net.is_hub.assign(n, 0);
    for (const auto& h : cfg.hubs) {
        auto it = net.index.find(h);
        if (it == net.index.end())
            throw DomainError("build_network: hub " + hex_id(h) + " not on the lattice");
        net.is_hub[it->second] = 1;
    }
    for (const auto& [a, b] : cfg.metro) {
        auto ia = net.index.find(a), ib = net.index.find(b);
        if (ia == net.index.end() || ib == net.index.end())
            throw DomainError("build_network: metro endpoint not on the lattice");
        if (!net.is_hub[ia->second] || !net.is_hub[ib->second])
            throw DomainError("build_network: metro edge " + hex_id(a) + ">" +
                              hex_id(b) + " must connect hubs");
        int u = ia->second, v = ib->second;
        if (u == v) throw DomainError("build_network: metro self-edge");
        net.metro_edges.insert({std::min(u, v), std::max(u, v)});
        if (std::find(net.neighbors[u].begin(), net.neighbors[u].end(), v) ==
            net.neighbors[u].end()) {
            net.neighbors[u].push_back(v);
            net.neighbors[v].push_back(u);
        }
    }
    for (auto& adj : net.neighbors) std::sort(adj.begin(), adj.end());

    // potential: BFS distance to the nearest center cell over all edges
    net.potential.assign(n, -1);
    std::deque<int> queue;
    for (const auto& h : cfg.center) {
        auto it = net.index.find(h);
        if (it == net.index.end())
            throw DomainError("build_network: center cell " + hex_id(h) +
                              " not on the lattice");
        net.potential[it->second] = 0;
        queue.push_back(it->second);
    }
    if (queue.empty())
        throw DomainError("build_network: no center cells configured");
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int w : net.neighbors[v])
            if (net.potential[w] < 0) {
                net.potential[w] = net.potential[v] + 1;
                queue.push_back(w);
            }
    }
    for (int j = 0; j < n; ++j)
        if (net.potential[j] < 0)
            throw DomainError("build_network: cell " + net.cell_ids[j] +
                              " is disconnected from the rest of the lattice");
    return net;
}

double schedule_bias(const SynthConfig& cfg, int step_of_day) {
    double am = triangle(step_of_day, cfg.morning_start, cfg.morning_end);
    if (am > 0.0) return cfg.bias_peak * am;
    double pm = triangle(step_of_day, cfg.evening_start, cfg.evening_end);
    if (pm > 0.0) return -cfg.bias_peak * cfg.evening_bias_scale * pm;
    return 0.0;
}

double schedule_metro_boost(const SynthConfig& cfg, int step_of_day) {
    double phase = std::max(triangle(step_of_day, cfg.morning_start, cfg.morning_end),
                            triangle(step_of_day, cfg.evening_start, cfg.evening_end));
    return 1.0 + (cfg.metro_boost_peak - 1.0) * phase;
}

std::vector<StepOperator> compile_kernels(const SynthNetwork& net,
                                          const SynthConfig& cfg) {
    int n = net.size();
    std::vector<StepOperator> kernels;
    kernels.reserve(cfg.period);
    for (int s = 0; s < cfg.period; ++s) {
        double bias = schedule_bias(cfg, s);
        double metro_boost = schedule_metro_boost(cfg, s);
        StepOperator op;
        op.t = s;
        op.n = n;
        op.cols.resize(n);
        for (int j = 0; j < n; ++j) {
            double stay = cfg.stay_base + (net.is_hub[j] ? cfg.stay_hub_bonus : 0.0);
            stay = std::clamp(stay, 0.0, 0.99);
            std::vector<double> w(net.neighbors[j].size());
            double wsum = 0.0;
            for (std::size_t e = 0; e < net.neighbors[j].size(); ++e) {
                int k = net.neighbors[j][e];
                double activity = net.is_hub[k] ? cfg.activity_hub : cfg.activity_base;
                double grav = std::exp(-cfg.beta * (net.potential[k] - net.potential[j]) * bias);
                bool on_metro = net.metro_edges.count({std::min(j, k), std::max(j, k)}) != 0;
                w[e] = activity * grav * (on_metro ? metro_boost : 1.0);
                wsum += w[e];
            }
            if (wsum <= 0.0 && stay <= 0.0)
                throw DomainError("compile_kernels: non-normalizable column at cell " +
                                  net.cell_ids[j]);
            auto& col = op.cols[j];
            double out_mass = wsum > 0.0 ? 1.0 - stay : 0.0;
            double self_prob = wsum > 0.0 ? stay : 1.0;
            geo::LatLon cj = net.cells.at(net.cell_ids[j]);
            for (std::size_t e = 0; e < net.neighbors[j].size(); ++e) {
                int k = net.neighbors[j][e];
                double prob = out_mass * w[e] / wsum;
                if (prob <= 0.0) continue;
                double dist = geo::haversine_km(cj, net.cells.at(net.cell_ids[k]));
                col.push_back({k, prob, dist});
            }
            col.push_back({j, self_prob, cfg.pitch_km * cfg.self_distance_fraction});
            std::sort(col.begin(), col.end(),
                      [](const auto& a, const auto& b) { return a.row < b.row; });
        }
        kernels.push_back(std::move(op));
    }
    return kernels;
}

FixedPoint periodic_fixed_point(const std::vector<StepOperator>& daily_ops) {
    if (daily_ops.empty())
        throw DomainError("periodic_fixed_point: empty schedule");
    int n = daily_ops.front().n;

    // dense cyclic product over one day
    Matrix cyc = Matrix::identity(n);
    for (const auto& op : daily_ops) {
        Matrix next(n, n);
        for (int j = 0; j < n; ++j) {
            const double* aj = cyc.col(j);
            double* oj = next.col(j);
            for (int k = 0; k < n; ++k) {
                if (aj[k] == 0.0) continue;
                for (const auto& e : op.cols[k]) oj[e.row] += e.prob * aj[k];
            }
        }
        cyc = std::move(next);
    }

    // primitivity: some boolean power of the support pattern is all-positive
    std::vector<char> pattern(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            pattern[static_cast<std::size_t>(j) * n + i] = cyc(i, j) > 0.0;
    auto all_positive = [&](const std::vector<char>& m) {
        return std::all_of(m.begin(), m.end(), [](char c) { return c != 0; });
    };
    long long power = 1;
    std::vector<char> reach = pattern;
    while (!all_positive(reach) && power < n) {
        std::vector<char> sq(reach.size(), 0);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                if (!reach[static_cast<std::size_t>(j) * n + k]) continue;
                for (int i = 0; i < n; ++i)
                    if (reach[static_cast<std::size_t>(k) * n + i])
                        sq[static_cast<std::size_t>(j) * n + i] = 1;
            }
        reach = std::move(sq);
        power *= 2;
    }
    if (!all_positive(reach))
        throw DomainError("periodic_fixed_point: daily cyclic product is not primitive; "
                          "adjust the schedule (stay probabilities or connectivity)");

    FixedPoint fp;
    fp.v.assign(n, 1.0 / n);
    std::vector<double> next(n);
    for (int it = 0; it < 100000; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int j = 0; j < n; ++j) {
            const double* cj = cyc.col(j);
            for (int i = 0; i < n; ++i) next[i] += cj[i] * fp.v[j];
        }
        double sum = 0.0;
        for (double v : next) sum += v;
        for (double& v : next) v /= sum;
        double change = 0.0;
        for (int i = 0; i < n; ++i) change += std::fabs(next[i] - fp.v[i]);
        fp.v = next;
        fp.iterations = it + 1;
        if (change < 1e-12) break;
    }
    fp.residual_l1 = 0.0;
    std::fill(next.begin(), next.end(), 0.0);
    for (int j = 0; j < n; ++j) {
        const double* cj = cyc.col(j);
        for (int i = 0; i < n; ++i) next[i] += cj[i] * fp.v[j];
    }
    for (int i = 0; i < n; ++i) fp.residual_l1 += std::fabs(next[i] - fp.v[i]);
    return fp;
}

std::vector<FlowSlice> simulate_and_aggregate(const SynthNetwork& net,
                                              const std::vector<StepOperator>& kernels,
                                              const FixedPoint& fixed_point,
                                              const SynthConfig& cfg) {
    if (cfg.n_agents < 1)
        throw DomainError("simulate_and_aggregate: need at least one agent");
    int n = net.size();
    int interval_minutes = 1440 / cfg.period;

    // initial occupancy: multinomial draw from the fixed point
    std::vector<long long> occupancy(n, 0);
    {
        std::vector<double> cdf(n);
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            acc += fixed_point.v[k];
            cdf[k] = acc;
        }
        Rng rng(mix(cfg.seed, 0x696e6974ull));  // "init" stream
        for (long long a = 0; a < cfg.n_agents; ++a) {
            double u = rng.uniform() * acc;
            int k = static_cast<int>(
                std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            if (k >= n) k = n - 1;
            ++occupancy[k];
        }
    }

    std::vector<FlowSlice> slices;
    slices.reserve(static_cast<std::size_t>(cfg.n_days) * cfg.period);
    std::vector<long long> edge_count(static_cast<std::size_t>(n) * n);
    for (int day = 0; day < cfg.n_days; ++day) {
        for (int s = 0; s < cfg.period; ++s) {
            const StepOperator& op = kernels[s];
            std::fill(edge_count.begin(), edge_count.end(), 0);
            for (int j = 0; j < n; ++j) {
                long long c = occupancy[j];
                if (c == 0) continue;
                Rng rng(mix(mix(mix(cfg.seed, static_cast<std::uint64_t>(day) + 1),
                                static_cast<std::uint64_t>(s) + 1),
                            static_cast<std::uint64_t>(j) + 1));
                const auto& col = op.cols[j];
                for (long long a = 0; a < c; ++a) {
                    double u = rng.uniform();
                    double acc = 0.0;
                    int dest = col.back().row;
                    for (const auto& e : col) {
                        acc += e.prob;
                        if (u < acc) {
                            dest = e.row;
                            break;
                        }
                    }
                    ++edge_count[static_cast<std::size_t>(j) * n + dest];
                }
            }

            FlowSlice slice;
            slice.t = day * cfg.period + s;
            slice.interval_minutes = interval_minutes;
            std::vector<long long> next_occ(n, 0);
            for (int j = 0; j < n; ++j) {
                for (const auto& e : op.cols[j]) {
                    long long c = edge_count[static_cast<std::size_t>(j) * n + e.row];
                    if (c == 0) continue;
                    next_occ[e.row] += c;
                    FlowRecord rec;
                    rec.t = slice.t;
                    rec.origin = net.cell_ids[j];
                    rec.dest = net.cell_ids[e.row];
                    rec.count = static_cast<double>(c);
                    if (cfg.distance_jitter) {
                        // per-trip lengths sampled within +-20% of the edge length
                        Rng jrng(mix(mix(mix(mix(cfg.seed, 0x6a697474ull),
                                             static_cast<std::uint64_t>(day) + 1),
                                         static_cast<std::uint64_t>(s) + 1),
                                     (static_cast<std::uint64_t>(j) << 20) ^
                                         static_cast<std::uint64_t>(e.row)));
                        std::vector<double> lengths(static_cast<std::size_t>(c));
                        double sum = 0.0;
                        for (auto& L : lengths) {
                            L = e.cost * (1.0 + 0.4 * (jrng.uniform() - 0.5));
                            sum += L;
                        }
                        std::sort(lengths.begin(), lengths.end());
                        double mean = sum / static_cast<double>(c);
                        double med = c % 2 ? lengths[c / 2]
                                           : 0.5 * (lengths[c / 2 - 1] + lengths[c / 2]);
                        double ss = 0.0;
                        for (double L : lengths) ss += (L - mean) * (L - mean);
                        rec.dist_mean = mean;
                        rec.dist_median = med;
                        rec.dist_std = std::sqrt(ss / static_cast<double>(c));
                    } else {
                        rec.dist_mean = e.cost;
                        rec.dist_median = e.cost;
                        rec.dist_std = 0.0;
                    }
                    slice.records.push_back(std::move(rec));
                }
            }
            std::sort(slice.records.begin(), slice.records.end(),
                      [](const FlowRecord& a, const FlowRecord& b) {
                          return std::tie(a.origin, a.dest) < std::tie(b.origin, b.dest);
                      });
            occupancy = std::move(next_occ);
            slices.push_back(std::move(slice));
        }
    }
    return slices;
}

double expected_potential_drop(const SynthNetwork& net,
                               const std::vector<StepOperator>& kernels,
                               const FixedPoint& fixed_point, int step_begin,
                               int step_end) {
    int n = net.size();
    if (step_begin < 0 || step_end > static_cast<int>(kernels.size()) ||
        step_begin >= step_end)
        throw DomainError("expected_potential_drop: bad step range");
    std::vector<double> occ = fixed_point.v;
    std::vector<double> next(n);
    auto advance = [&](const StepOperator& op) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int j = 0; j < n; ++j)
            for (const auto& e : op.cols[j]) next[e.row] += e.prob * occ[j];
        occ.swap(next);
    };
    for (int s = 0; s < step_begin; ++s) advance(kernels[s]);
    double weighted = 0.0, total = 0.0;
    for (int s = step_begin; s < step_end; ++s) {
        const StepOperator& op = kernels[s];
        for (int j = 0; j < n; ++j)
            for (const auto& e : op.cols[j]) {
                if (e.row == j) continue;
                double w = occ[j] * e.prob;
                weighted += w * (net.potential[j] - net.potential[e.row]);
                total += w;
            }
        advance(op);
    }
    if (total <= 0.0)
        throw DomainError("expected_potential_drop: no off-diagonal flow in range");
    return weighted / total;
}

}  // namespace odflow::synth
