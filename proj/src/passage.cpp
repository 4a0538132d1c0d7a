#include "odflow/passage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "odflow/error.hpp"
#include "odflow/netflow.hpp"
#include "odflow/util.hpp"

namespace odflow {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double PassageTrace::mass_balance(int t) const {
    double s = 0.0;
    for (double v : live[t - 1]) s += v;
    for (int k = 1; k <= t; ++k) s += pi[k - 1] + rho[k - 1];
    return s;
}

PassageTrace propagate(const std::vector<StepOperator>& ops, int origin, int dest,
                       int t_max) {
    if (ops.empty())
        throw DomainError("propagate: no step operators");
    int n = ops.front().n;
    if (origin < 0 || origin >= n || dest < 0 || dest >= n)
        throw DomainError("propagate: origin or dest outside component");
    if (t_max < 1 || t_max > static_cast<int>(ops.size()))
        throw DomainError("propagate: t_max outside available steps");

    const bool self_mode = origin == dest;
    PassageTrace trace;
    trace.origin = origin;
    trace.dest = dest;
    trace.live.reserve(t_max);
    trace.mean_cost.reserve(t_max);

    // step 1: the origin column of M^1; accumulated cost is the step cost
    std::vector<double> p(n, 0.0), y(n, kNaN);
    for (const auto& e : ops[0].cols[origin]) {
        p[e.row] = e.prob;
        y[e.row] = e.cost;
    }
    for (int t = 1; t <= t_max; ++t) {
        if (t >= 2) {
            const StepOperator& op = ops[t - 1];
            std::vector<double> np(n, 0.0), num(n, 0.0);
            for (int r = 0; r < n; ++r) {
                double pr = p[r];
                if (pr == 0.0) continue;  // masked entries are already zero
                double yr = y[r];
                for (const auto& e : op.cols[r]) {
                    np[e.row] += e.prob * pr;
                    num[e.row] += (e.cost + yr) * e.prob * pr;
                }
            }
            p = std::move(np);
            for (int k = 0; k < n; ++k) y[k] = p[k] > 0.0 ? num[k] / p[k] : kNaN;
        }
        trace.pi.push_back(p[dest]);
        trace.x.push_back(p[dest] > 0.0 ? y[dest] : kNaN);
        trace.rho.push_back(self_mode ? 0.0 : p[origin]);
        // absorb: mask the endpoints out of the live vector
        p[dest] = 0.0;
        y[dest] = kNaN;
        p[origin] = 0.0;
        y[origin] = kNaN;
        trace.live.push_back(p);
        trace.mean_cost.push_back(y);
    }
    return trace;
}

WindowedOD windowed_distance(const PassageTrace& trace, int t1, int t2) {
    if (t1 < 1 || t1 > t2 || t2 > trace.t_max())
        throw DomainError("windowed_distance: invalid window [" +
                          std::to_string(t1) + "," + std::to_string(t2) + "]");
    WindowedOD od;
    od.origin = trace.origin;
    od.dest = trace.dest;
    od.t1 = t1;
    od.t2 = t2;
    double num = 0.0;
    int contributing = 0, last_t = 0;
    for (int t = t1; t <= t2; ++t) {
        double pi = trace.pi[t - 1];
        od.P += pi;
        if (pi > 0.0) {
            num += trace.x[t - 1] * pi;
            ++contributing;
            last_t = t;
        }
    }
    if (contributing == 1) {
        od.x_bar = trace.x[last_t - 1];  // exact single-interval reduction
    } else if (od.P > 0.0) {
        od.x_bar = num / od.P;
    }
    return od;
}

bool is_gup(const std::vector<FlowSlice>& slices, int t_first, int t_last,
            const CellId& origin, const CellId& dest) {
    if (t_first > t_last || t_first < 0 ||
        static_cast<std::size_t>(t_last) >= slices.size())
        throw DomainError("is_gup: invalid time range");
    for (int t = t_first; t <= t_last; ++t)
        if (slices[t].find(origin, dest)) return false;
    return true;
}

// --- path decomposition ----------------------------------------------------

namespace {

struct Partial {
    std::vector<int> nodes;
    double prob = 1.0;
    double cost = 0.0;
};

void record_if_complete(PathDecomposition& dec, const Partial& part, int step) {
    PathDecomposition::Path path;
    path.nodes = part.nodes;
    path.arrival_step = step;
    path.prob = part.prob;
    path.cost = part.cost;
    dec.paths.push_back(std::move(path));
}

// Depth-first enumeration of all admissible paths; returns false when the
// expansion budget runs out.
bool enumerate_paths(const std::vector<StepOperator>& ops, int origin, int dest,
                     int t_max, PathDecomposition& dec, Partial& part, int step,
                     std::size_t& budget) {
    if (step > t_max) return true;
    int at = part.nodes.back();
    for (const auto& e : ops[step - 1].cols[at]) {
        if (e.prob <= 0.0) continue;
        if (budget == 0) return false;
        --budget;
        if (e.row == dest) {
            part.nodes.push_back(e.row);
            part.prob *= e.prob;
            part.cost += e.cost;
            record_if_complete(dec, part, step);
            part.nodes.pop_back();
            part.prob /= e.prob;
            part.cost -= e.cost;
            continue;
        }
        if (e.row == origin) continue;  // mask: no intermediate origin visits
        part.nodes.push_back(e.row);
        part.prob *= e.prob;
        part.cost += e.cost;
        bool ok = enumerate_paths(ops, origin, dest, t_max, dec, part, step + 1, budget);
        part.nodes.pop_back();
        part.prob /= e.prob;
        part.cost -= e.cost;
        if (!ok) return false;
    }
    return true;
}

void beam_paths(const std::vector<StepOperator>& ops, int origin, int dest,
                int t_max, int beam_width, PathDecomposition& dec) {
    std::vector<Partial> beam;
    beam.push_back({{origin}, 1.0, 0.0});
    for (int step = 1; step <= t_max; ++step) {
        std::vector<Partial> next;
        for (const auto& part : beam) {
            int at = part.nodes.back();
            for (const auto& e : ops[step - 1].cols[at]) {
                if (e.prob <= 0.0) continue;
                if (e.row == dest) {
                    Partial done = part;
                    done.nodes.push_back(e.row);
                    done.prob *= e.prob;
                    done.cost += e.cost;
                    record_if_complete(dec, done, step);
                    continue;
                }
                if (e.row == origin) continue;
                Partial ext = part;
                ext.nodes.push_back(e.row);
                ext.prob *= e.prob;
                ext.cost += e.cost;
                next.push_back(std::move(ext));
            }
        }
        if (static_cast<int>(next.size()) > beam_width) {
            std::partial_sort(next.begin(), next.begin() + beam_width, next.end(),
                              [](const Partial& a, const Partial& b) {
                                  return a.prob > b.prob;
                              });
            next.resize(beam_width);
        }
        beam = std::move(next);
        if (beam.empty()) break;
    }
}

}  // namespace

PathDecomposition decompose_paths(const std::vector<StepOperator>& ops, int origin,
                                  int dest, int t_max, int top_k,
                                  const DecomposeOptions& opts) {
    if (ops.empty() || t_max < 1 || t_max > static_cast<int>(ops.size()))
        throw DomainError("decompose_paths: invalid step range");
    PathDecomposition dec;
    if (top_k <= 0) return dec;

    std::size_t budget = opts.max_expansions;
    Partial part{{origin}, 1.0, 0.0};
    if (!enumerate_paths(ops, origin, dest, t_max, dec, part, 1, budget)) {
        dec = PathDecomposition{};
        dec.exhaustive = false;
        dec.beam_width = opts.beam_width;
        beam_paths(ops, origin, dest, t_max, opts.beam_width, dec);
    }
    std::stable_sort(dec.paths.begin(), dec.paths.end(),
                     [](const auto& a, const auto& b) { return a.prob > b.prob; });
    if (static_cast<int>(dec.paths.size()) > top_k)
        dec.paths.resize(top_k);
    return dec;
}

void write_paths_json(std::ostream& out, const PathDecomposition& dec,
                      const ComponentSpec& component, int t1, int t2) {
    out << "{\"window\":[" << t1 << ',' << t2 << "],\"exhaustive\":"
        << (dec.exhaustive ? "true" : "false") << ",\"paths\":[";
    bool first_path = true;
    for (const auto& p : dec.paths) {
        if (!first_path) out << ',';
        first_path = false;
        out << "{\"nodes\":[";
        for (std::size_t k = 0; k < p.nodes.size(); ++k) {
            if (k) out << ',';
            out << '"' << component.cells[p.nodes[k]] << '"';
        }
        out << "],\"arrival_step\":" << p.arrival_step
            << ",\"prob\":" << util::format_double(p.prob)
            << ",\"dist_km\":" << util::format_double(p.cost) << '}';
    }
    out << "]}";
}

// --- return-to-origin ------------------------------------------------------

WindowedOD rto(const std::vector<StepOperator>& ops, int origin, int t2,
               RtoVariant variant) {
    if (ops.empty())
        throw DomainError("rto: no step operators");
    WindowedOD od;
    od.origin = origin;
    od.dest = origin;
    if (variant == RtoVariant::home) {
        od.t1 = od.t2 = 1;
        const StepOperator::Entry* self = ops[0].entry(origin, origin);
        if (self && self->prob > 0.0) {
            od.P = self->prob;
            od.x_bar = self->cost;
        }
        return od;
    }
    if (t2 < 2)
        throw DomainError("rto: roaming variant needs t2 >= 2");
    PassageTrace trace = propagate(ops, origin, origin, t2);
    return windowed_distance(trace, 2, t2);
}

CityRto city_rto(const std::vector<StepOperator>& ops, const FlowSlice& first_slice,
                 const ComponentSpec& component, int t2, RtoVariant variant) {
    int n = static_cast<int>(component.size());
    std::vector<double> weight(n, 0.0);
    for (const auto& r : first_slice.records) {
        int j = component.index_of(r.origin), i = component.index_of(r.dest);
        if (j < 0 || i < 0)
            throw DomainError("city_rto: slice not restricted to component");
        if (variant == RtoVariant::home ? (i == j) : (i != j))
            weight[j] += r.count;
    }
    double total = 0.0;
    for (double w : weight) total += w;
    if (total <= 0.0)
        throw DomainError("city_rto: zero total weight for this variant");

    CityRto city;
    double kept_weight = 0.0, weighted_sum = 0.0;
    for (int j = 0; j < n; ++j) {
        if (weight[j] <= 0.0) continue;
        WindowedOD od = rto(ops, j, t2, variant);
        if (od.x_bar && !std::isnan(*od.x_bar)) {
            kept_weight += weight[j];
            weighted_sum += weight[j] * *od.x_bar;
        } else {
            city.excluded_mass += weight[j] / total;
        }
    }
    if (kept_weight <= 0.0)
        throw DomainError("city_rto: every weighted origin has undefined distance");
    city.value_km = weighted_sum / kept_weight;
    return city;
}

// --- time sweeps -----------------------------------------------------------

std::vector<SweepRow> time_sweep(const std::vector<StepOperator>& ops,
                                 const std::vector<std::pair<int, int>>& candidates,
                                 const BaselineModel& baseline,
                                 const std::vector<int>& days, const SweepSpec& spec) {
    if (spec.window_len < 1 || spec.window_start < 0 ||
        spec.window_start + spec.window_len > spec.steps_per_day)
        throw DomainError("time_sweep: window does not fit in a day");
    std::vector<SweepRow> out;
    for (int day : days) {
        int begin = day * spec.steps_per_day + spec.window_start;
        int end = begin + spec.window_len;  // exclusive
        if (begin < 0 || end > static_cast<int>(ops.size()))
            throw DomainError("time_sweep: day " + std::to_string(day) +
                              " outside loaded steps");
        std::vector<StepOperator> window(ops.begin() + begin, ops.begin() + end);
        // re-index so propagate sees steps 1..window_len
        for (std::size_t k = 0; k < window.size(); ++k)
            window[k].t = static_cast<int>(k);

        std::vector<SweepRow> day_rows;
        for (auto [j, i] : candidates) {
            PassageTrace trace = propagate(window, j, i, spec.window_len);
            WindowedOD od = windowed_distance(trace, 1, spec.window_len);
            if (od.P < spec.p_cut || !od.x_bar || std::isnan(*od.x_bar)) continue;
            BaselineValue b = baseline.value_for(j, i);
            double d_eff = effective_distance(*od.x_bar, b.baseline, b.sigma);
            day_rows.push_back({day, j, i, d_eff, od.P});
        }
        if (day_rows.empty()) continue;
        std::vector<double> vals;
        vals.reserve(day_rows.size());
        for (const auto& r : day_rows) vals.push_back(r.d_eff);
        double threshold = percentile_threshold(std::move(vals), spec.q);
        for (const auto& r : day_rows)
            if (r.d_eff >= threshold) out.push_back(r);
    }
    return out;
}

void write_windowed_csv(std::ostream& out, const std::vector<WindowedOD>& rows,
                        const ComponentSpec& component) {
    out << "origin,dest,t1,t2,x_bar_km,P,d_eff,gup\n";
    for (const auto& od : rows) {
        out << component.cells[od.origin] << ',' << component.cells[od.dest] << ','
            << od.t1 << ',' << od.t2 << ',';
        if (od.x_bar) out << util::format_double(*od.x_bar);
        out << ',' << util::format_double(od.P) << ',';
        if (od.d_eff) out << util::format_double(*od.d_eff);
        out << ',' << (od.gup ? 1 : 0) << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                     const ComponentSpec& component) {
    out << "day,origin,dest,d_eff,P\n";
    for (const auto& r : rows)
        out << r.day << ',' << component.cells[r.origin] << ','
            << component.cells[r.dest] << ',' << util::format_double(r.d_eff)
            << ',' << util::format_double(r.P) << '\n';
}

}  // namespace odflow
