// odflow: OD-flow mobility analysis command line.
//
// Subcommands: ingest, netflow, effdist, rto, sweep, synth, root.
// Exit codes: 2 schema error, 3 empty component, 4 empty window/candidate
// set, 5 non-primitive synthetic schedule, 64 usage.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "odflow/baseline.hpp"
#include "odflow/cache.hpp"
#include "odflow/cells.hpp"
#include "odflow/config.hpp"
#include "odflow/error.hpp"
#include "odflow/flows.hpp"
#include "odflow/graph.hpp"
#include "odflow/markov.hpp"
#include "odflow/netflow.hpp"
#include "odflow/passage.hpp"
#include "odflow/synth.hpp"
#include "odflow/util.hpp"

namespace fs = std::filesystem;
using namespace odflow;

namespace {

constexpr int kExitSchema = 2;
constexpr int kExitEmptyComponent = 3;
constexpr int kExitEmptySet = 4;
constexpr int kExitNotPrimitive = 5;
constexpr int kExitUsage = 64;

int log_level() {
    static int level = [] {
        const char* env = std::getenv("ODFLOW_LOG");
        if (!env) return 1;
        std::string v(env);
        if (v == "quiet" || v == "0") return 0;
        if (v == "debug" || v == "2") return 2;
        return 1;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "odflow: " << msg << '\n';
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "odflow[debug]: " << msg << '\n';
}

// Raised for conditions with a contractual exit code.
struct ExitWith {
    int code;
    std::string message;
};

std::pair<int, int> parse_window(const std::string& s) {
    auto dots = s.find("..");
    long long a, b;
    if (dots == std::string::npos ||
        !util::parse_long(std::string_view(s).substr(0, dots), a) ||
        !util::parse_long(std::string_view(s).substr(dots + 2), b))
        throw ExitWith{kExitUsage, "bad window '" + s + "' (expected START..END)"};
    if (a > b) throw ExitWith{kExitUsage, "window start exceeds end in '" + s + "'"};
    return {static_cast<int>(a), static_cast<int>(b)};
}

GapPolicy parse_gap_policy(const std::string& s) {
    if (s == "self_loop") return GapPolicy::self_loop;
    if (s == "uniform") return GapPolicy::uniform;
    if (s == "fail") return GapPolicy::fail;
    throw ExitWith{kExitUsage, "unknown gap policy '" + s + "'"};
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestError("cannot open output file " + path.string());
    return out;
}

Config load_config(const std::string& path) {
    if (path.empty()) return Config{};
    return Config::load(path);
}

// Slices [t_first, t_last] of the cache, re-indexed to 0-based t.
std::vector<FlowSlice> window_slices(const ComponentCache& cache, int t_first,
                                     int t_last) {
    if (t_first < 0 || t_last >= static_cast<int>(cache.slices.size()))
        throw ExitWith{kExitEmptySet,
                       "window [" + std::to_string(t_first) + "," +
                           std::to_string(t_last) + "] outside loaded steps [0," +
                           std::to_string(cache.slices.size() - 1) + "]"};
    std::vector<FlowSlice> out(cache.slices.begin() + t_first,
                               cache.slices.begin() + t_last + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k].t = static_cast<int>(k);
    return out;
}

// --- ingest ----------------------------------------------------------------

struct IngestArgs {
    std::string flows_path, cells_path, config_path, out_dir = ".";
    std::string component_cell;  // empty = largest
    double min_count = -1.0;     // <0 = from config/default
    int steps_per_day = -1;
};

int cmd_ingest(const IngestArgs& args) {
    Config cfg = load_config(args.config_path);
    ParseOptions opts = ParseOptions::from_config(cfg);
    if (args.min_count >= 0.0) opts.min_count = args.min_count;

    std::ifstream in(args.flows_path);
    if (!in) throw IngestError("cannot open " + args.flows_path);
    ParseReport report;
    auto slices = parse_flows(in, opts, &report);
    if (slices.empty()) throw ExitWith{kExitEmptyComponent, "no usable rows"};
    log_info("parsed " + std::to_string(report.rows_kept) + " rows into " +
             std::to_string(slices.size()) + " steps");

    std::ifstream cells_in(args.cells_path);
    if (!cells_in) throw IngestError("cannot open " + args.cells_path);
    CellTable all_cells = CellTable::read_csv(cells_in);

    int t_last = static_cast<int>(slices.size()) - 1;
    auto graph = union_graph(slices, 0, t_last);
    auto components = strongly_connected_components(graph, 0, t_last);

    const ComponentSpec* chosen = nullptr;
    for (const auto& c : components) {
        if (!c.analyzable) continue;
        if (args.component_cell.empty()) {
            chosen = &c;
            break;  // components are sorted by size
        }
        if (c.index_of(args.component_cell) >= 0) {
            chosen = &c;
            break;
        }
    }
    if (!chosen)
        throw ExitWith{kExitEmptyComponent,
                       args.component_cell.empty()
                           ? "no analyzable strongly connected component"
                           : "no analyzable component contains cell '" +
                                 args.component_cell + "'"};

    ComponentCache cache;
    cache.component = *chosen;
    cache.slices = restrict_slices(slices, *chosen);
    for (std::size_t k = 0; k < cache.slices.size(); ++k)
        cache.slices[k].t = static_cast<int>(k);
    for (const auto& id : chosen->cells) {
        auto c = all_cells.find(id);
        if (!c) throw SchemaError("cells manifest is missing cell '" + id + "'");
        cache.cells.add(id, *c);
    }
    cache.steps_per_day = args.steps_per_day >= 0
                              ? args.steps_per_day
                              : static_cast<int>(cfg.get_int("steps_per_day", 0));
    if (cache.steps_per_day == 0 && slices[0].interval_minutes > 0)
        cache.steps_per_day = 1440 / slices[0].interval_minutes;

    fs::create_directories(args.out_dir);
    fs::path cache_path = fs::path(args.out_dir) / "component.odf";
    write_cache(cache_path.string(), cache);
    log_info("wrote " + cache_path.string());

    std::size_t records = 0;
    for (const auto& s : cache.slices) records += s.records.size();
    std::ostringstream summary;
    summary << "{\"cells\":" << cache.component.size()
            << ",\"steps\":" << cache.slices.size() << ",\"records\":" << records
            << ",\"rows_read\":" << report.rows_read
            << ",\"rows_kept\":" << report.rows_kept
            << ",\"rows_below_min_count\":" << report.rows_below_min_count
            << ",\"row_errors\":" << report.row_errors.size()
            << ",\"steps_per_day\":" << cache.steps_per_day << ",\"components\":[";
    for (std::size_t k = 0; k < components.size(); ++k)
        summary << (k ? "," : "") << components[k].size();
    summary << "]}\n";
    std::cout << summary.str();
    open_out(fs::path(args.out_dir) / "ingest_summary.json") << summary.str();
    return 0;
}

// --- netflow ---------------------------------------------------------------

struct NetflowArgs {
    std::string cache_path, out_dir = ".";
    std::string window;  // empty = full range
    double q = 75.0;
};

int cmd_netflow(const NetflowArgs& args) {
    ComponentCache cache = read_cache(args.cache_path);
    int t_first = 0, t_last = static_cast<int>(cache.slices.size()) - 1;
    if (!args.window.empty()) std::tie(t_first, t_last) = parse_window(args.window);
    auto slices = window_slices(cache, t_first, t_last);
    if (slices.front().empty())
        throw ExitWith{kExitEmptySet, "first slice of the window carries no flow"};

    auto init = initial_distribution(slices.front(), cache.component);
    auto ops = build_step_operators(slices, cache.component);
    auto A = elapse(ops);
    log_debug("elapsed operator over " + std::to_string(A.steps()) +
              " steps, max drift " + util::format_double(A.max_drift()));

    auto result = net_flows(A, init);
    result.t_start = t_first;
    result.t_end = t_last;
    if (result.entries.empty())
        throw ExitWith{kExitEmptySet, "no nonzero net flows in the window"};

    std::vector<double> mags;
    for (const auto& e : result.entries) mags.push_back(std::fabs(e.s));
    double threshold = percentile_threshold(mags, args.q);
    auto top = top_percentile(result, args.q);
    std::cout << "{\"pairs\":" << result.entries.size()
              << ",\"kept\":" << top.entries.size()
              << ",\"percentile\":" << util::format_double(args.q)
              << ",\"threshold\":" << util::format_double(threshold) << "}\n";

    fs::create_directories(args.out_dir);
    auto csv = open_out(fs::path(args.out_dir) / "netflow.csv");
    write_netflow_csv(csv, top, cache.component);
    auto geojson = open_out(fs::path(args.out_dir) / "netflow.geojson");
    write_netflow_geojson(geojson, top, cache.component, cache.cells);
    return 0;
}

// --- effdist ---------------------------------------------------------------

struct EffdistArgs {
    std::string cache_path, out_dir = ".";
    std::string window;
    double q = 99.0;
    double p_cut = 1e-6;
    bool all_pairs = false;  // default is GUP-only
    int top_k = 0;
    std::string gap_policy = "self_loop";
};

int cmd_effdist(const EffdistArgs& args) {
    ComponentCache cache = read_cache(args.cache_path);
    int t_first = 0, t_last = static_cast<int>(cache.slices.size()) - 1;
    if (!args.window.empty()) std::tie(t_first, t_last) = parse_window(args.window);
    auto slices = window_slices(cache, t_first, t_last);
    int t_max = static_cast<int>(slices.size());
    int n = static_cast<int>(cache.component.size());

    auto ops = build_step_operators(slices, cache.component,
                                    parse_gap_policy(args.gap_policy));
    BaselineModel baseline(slices, cache.component, cache.cells);
    baseline.impute_costs(ops);

    std::vector<WindowedOD> rows;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            if (i == j) continue;
            bool gup = is_gup(slices, 0, t_max - 1, cache.component.cells[j],
                              cache.component.cells[i]);
            if (!args.all_pairs && !gup) continue;
            auto trace = propagate(ops, j, i, t_max);
            auto od = windowed_distance(trace, 1, t_max);
            if (od.P < args.p_cut || !od.x_bar) continue;
            auto b = baseline.value_for(j, i);
            od.d_eff = effective_distance(*od.x_bar, b.baseline, b.sigma);
            od.gup = gup;
            od.t1 = t_first;  // report absolute steps
            od.t2 = t_last;
            rows.push_back(od);
        }
    }
    if (rows.empty())
        throw ExitWith{kExitEmptySet, "no candidate pairs survive the cutoff"};

    std::vector<double> vals;
    for (const auto& od : rows) vals.push_back(*od.d_eff);
    double threshold = percentile_threshold(vals, args.q);
    std::vector<WindowedOD> kept;
    for (const auto& od : rows)
        if (*od.d_eff >= threshold) kept.push_back(od);
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return *a.d_eff > *b.d_eff;
    });
    std::cout << "{\"candidates\":" << rows.size() << ",\"kept\":" << kept.size()
              << ",\"threshold\":" << util::format_double(threshold) << "}\n";

    fs::create_directories(args.out_dir);
    auto csv = open_out(fs::path(args.out_dir) / "effdist.csv");
    write_windowed_csv(csv, kept, cache.component);
    auto fit_json = open_out(fs::path(args.out_dir) / "baseline_fit.json");
    baseline.write_fit_json(fit_json);
    auto scatter = open_out(fs::path(args.out_dir) / "baseline_scatter.csv");
    baseline.write_scatter_csv(scatter);

    if (args.top_k > 0) {
        auto paths_out = open_out(fs::path(args.out_dir) / "effdist_paths.json");
        paths_out << "[";
        for (std::size_t k = 0; k < kept.size(); ++k) {
            auto dec = decompose_paths(ops, kept[k].origin, kept[k].dest, t_max,
                                       args.top_k);
            std::ostringstream one;
            write_paths_json(one, dec, cache.component, t_first, t_last);
            if (k) paths_out << ',';
            paths_out << "{\"origin\":\"" << cache.component.cells[kept[k].origin]
                      << "\",\"dest\":\"" << cache.component.cells[kept[k].dest]
                      << "\"," << one.str().substr(1);
        }
        paths_out << "]\n";
    }
    return 0;
}

// --- rto -------------------------------------------------------------------

struct RtoArgs {
    std::string cache_path, out_dir = ".";
    std::string variant;
    std::string days;  // empty = all full days
    int t2 = 0;        // 0 = full day
};

int cmd_rto(const RtoArgs& args) {
    ComponentCache cache = read_cache(args.cache_path);
    int spd = cache.steps_per_day > 0 ? cache.steps_per_day
                                      : static_cast<int>(cache.slices.size());
    int n_days = static_cast<int>(cache.slices.size()) / spd;
    int day_first = 0, day_last = n_days - 1;
    if (!args.days.empty()) std::tie(day_first, day_last) = parse_window(args.days);
    if (day_first < 0 || day_last >= n_days || day_first > day_last)
        throw ExitWith{kExitEmptySet, "no full days in the requested range"};
    RtoVariant variant =
        args.variant == "home" ? RtoVariant::home : RtoVariant::roaming;
    int t2 = args.t2 > 0 ? args.t2 : spd;
    if (t2 > spd) throw ExitWith{kExitUsage, "--t2 exceeds steps per day"};

    fs::create_directories(args.out_dir);
    auto out = open_out(fs::path(args.out_dir) / "rto.csv");
    out << "day,variant,city_value_km,excluded_mass\n";
    for (int day = day_first; day <= day_last; ++day) {
        auto slices = window_slices(cache, day * spd, (day + 1) * spd - 1);
        auto ops = build_step_operators(slices, cache.component);
        auto city = city_rto(ops, slices.front(), cache.component, t2, variant);
        out << day << ',' << args.variant << ','
            << util::format_double(city.value_km) << ','
            << util::format_double(city.excluded_mass) << '\n';
    }
    log_info("wrote rto.csv for days " + std::to_string(day_first) + ".." +
             std::to_string(day_last));
    return 0;
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
    std::string cache_path, out_dir = ".";
    std::string window;  // step offsets within a day, START..END inclusive
    std::string days;
    double q = 99.0;
    double p_cut = 1e-6;
    bool all_pairs = false;
};

int cmd_sweep(const SweepArgs& args) {
    ComponentCache cache = read_cache(args.cache_path);
    int spd = cache.steps_per_day > 0 ? cache.steps_per_day
                                      : static_cast<int>(cache.slices.size());
    int n_days = static_cast<int>(cache.slices.size()) / spd;
    int day_first = 0, day_last = n_days - 1;
    if (!args.days.empty()) std::tie(day_first, day_last) = parse_window(args.days);
    if (day_first < 0 || day_last >= n_days || day_first > day_last)
        throw ExitWith{kExitEmptySet, "no full days in the requested range"};

    SweepSpec spec;
    spec.steps_per_day = spd;
    spec.q = args.q;
    spec.p_cut = args.p_cut;
    if (!args.window.empty()) {
        auto [w0, w1] = parse_window(args.window);
        spec.window_start = w0;
        spec.window_len = w1 - w0 + 1;
    } else {
        spec.window_len = spd;
    }

    int t_last = static_cast<int>(cache.slices.size()) - 1;
    int n = static_cast<int>(cache.component.size());
    std::vector<std::pair<int, int>> candidates;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (i == j) continue;
            if (!args.all_pairs &&
                !is_gup(cache.slices, 0, t_last, cache.component.cells[j],
                        cache.component.cells[i]))
                continue;
            candidates.emplace_back(j, i);
        }
    if (candidates.empty())
        throw ExitWith{kExitEmptySet, "no candidate pairs"};

    auto ops = build_step_operators(cache.slices, cache.component);
    BaselineModel baseline(cache.slices, cache.component, cache.cells);
    baseline.impute_costs(ops);
    std::vector<int> days;
    for (int d = day_first; d <= day_last; ++d) days.push_back(d);
    auto rows = time_sweep(ops, candidates, baseline, days, spec);
    if (rows.empty())
        throw ExitWith{kExitEmptySet, "no pairs survive the sweep cutoffs"};

    fs::create_directories(args.out_dir);
    auto csv = open_out(fs::path(args.out_dir) / "sweep.csv");
    write_sweep_csv(csv, rows, cache.component);
    std::cout << "{\"rows\":" << rows.size() << ",\"days\":" << days.size()
              << "}\n";
    return 0;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
    std::string config_path, out_dir = ".";
    long long seed = -1;  // <0 = from config
};

int cmd_synth(const SynthArgs& args) {
    Config cfg = load_config(args.config_path);
    synth::SynthConfig scfg = synth::SynthConfig::from_config(cfg);
    if (args.seed >= 0) scfg.seed = static_cast<std::uint64_t>(args.seed);

    auto net = synth::build_network(scfg);
    auto kernels = synth::compile_kernels(net, scfg);
    synth::FixedPoint fp;
    try {
        fp = synth::periodic_fixed_point(kernels);
    } catch (const DomainError& e) {
        if (std::string(e.what()).find("primitive") != std::string::npos)
            throw ExitWith{kExitNotPrimitive, e.what()};
        throw;
    }
    log_info("fixed point residual " + util::format_double(fp.residual_l1) +
             " after " + std::to_string(fp.iterations) + " iterations");
    auto slices = synth::simulate_and_aggregate(net, kernels, fp, scfg);

    fs::create_directories(args.out_dir);
    auto flows_out = open_out(fs::path(args.out_dir) / "flows.csv");
    write_flows_csv(flows_out, slices);
    auto cells_out = open_out(fs::path(args.out_dir) / "cells.csv");
    net.cells.write_csv(cells_out);
    auto fp_out = open_out(fs::path(args.out_dir) / "fixed_point.csv");
    fp_out << "cell_id,weight\n";
    for (int k = 0; k < net.size(); ++k)
        fp_out << net.cell_ids[k] << ',' << util::format_double(fp.v[k]) << '\n';
    std::ostringstream echoed;
    scfg.echo(echoed);
    open_out(fs::path(args.out_dir) / "synth_config.txt") << echoed.str();
    std::cout << echoed.str();
    return 0;
}

// --- root ------------------------------------------------------------------

struct RootArgs {
    std::string cache_path, out_dir = ".";
    int step = 0;
    int p = 2;
    std::string metric = "frobenius";
    int max_iter = 10000;
    double tol = 1e-8;
};

int cmd_root(const RootArgs& args) {
    ComponentCache cache = read_cache(args.cache_path);
    if (args.step < 0 || args.step >= static_cast<int>(cache.slices.size()))
        throw ExitWith{kExitEmptySet, "step outside loaded range"};
    if (args.p < 2) throw ExitWith{kExitUsage, "--p must be >= 2"};
    auto op = build_step_operator(cache.slices[args.step], cache.component);

    RootOptions opts;
    opts.max_iter = args.max_iter;
    opts.tol = args.tol;
    opts.metric = args.metric == "kl" ? RootMetric::kl : RootMetric::frobenius;
    auto res = approximate_stochastic_root(op.dense(), args.p, opts);

    std::cout << "{\"experimental\":true,\"residual\":"
              << util::format_double(res.residual)
              << ",\"iterations\":" << res.iterations
              << ",\"converged\":" << (res.converged ? "true" : "false") << "}\n";
    log_info("approximate root is an experimental aliasing probe; treat the "
             "result as qualitative");

    fs::create_directories(args.out_dir);
    auto out = open_out(fs::path(args.out_dir) / "root.csv");
    out << "row_cell,col_cell,value\n";
    int n = res.root.rows();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (res.root(i, j) != 0.0)
                out << cache.component.cells[i] << ',' << cache.component.cells[j]
                    << ',' << util::format_double(res.root(i, j)) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"collective time-elapsed mobility measures over OD flow data"};
    app.require_subcommand(1);
    int threads = 1;  // bounds internal parallelism; results never depend on it
    app.add_option("--threads", threads, "max worker threads")
        ->check(CLI::PositiveNumber);

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "parse flows into a component cache");
    c_ingest->add_option("flows", ingest.flows_path, "flow CSV")->required();
    c_ingest->add_option("--cells", ingest.cells_path, "cells manifest CSV")->required();
    c_ingest->add_option("--config", ingest.config_path, "key=value config");
    c_ingest->add_option("--out", ingest.out_dir, "output directory");
    c_ingest->add_option("--component-cell", ingest.component_cell,
                         "pick the component containing this cell");
    c_ingest->add_option("--min-count", ingest.min_count, "drop rows below this count");
    c_ingest->add_option("--steps-per-day", ingest.steps_per_day,
                         "steps per day for windowed commands");

    NetflowArgs netflow;
    auto* c_netflow = app.add_subcommand("netflow", "windowed net flows");
    c_netflow->add_option("cache", netflow.cache_path, "component cache")->required();
    c_netflow->add_option("--window", netflow.window, "step window START..END");
    c_netflow->add_option("--percentile", netflow.q, "keep |s| >= this percentile")
        ->check(CLI::Range(0.0, 100.0));
    c_netflow->add_option("--out", netflow.out_dir, "output directory");

    EffdistArgs effdist;
    auto* c_effdist = app.add_subcommand("effdist", "windowed effective distances");
    c_effdist->add_option("cache", effdist.cache_path, "component cache")->required();
    c_effdist->add_option("--window", effdist.window, "step window START..END");
    c_effdist->add_option("--percentile", effdist.q, "keep d_eff >= this percentile")
        ->check(CLI::Range(0.0, 100.0));
    c_effdist->add_option("--p-cut", effdist.p_cut, "path-hit probability cutoff");
    bool effdist_gup_only = false;
    c_effdist->add_flag("--gup-only", effdist_gup_only,
                        "restrict to globally-unconnected pairs (default)");
    c_effdist->add_flag("--all-pairs", effdist.all_pairs, "include direct pairs too")
        ->excludes("--gup-only");
    c_effdist->add_option("--top-k", effdist.top_k, "path decompositions per pair");
    c_effdist->add_option("--gap-policy", effdist.gap_policy, "self_loop|uniform|fail");
    c_effdist->add_option("--out", effdist.out_dir, "output directory");

    RtoArgs rto_args;
    auto* c_rto = app.add_subcommand("rto", "return-to-origin city averages");
    c_rto->add_option("cache", rto_args.cache_path, "component cache")->required();
    c_rto->add_option("--variant", rto_args.variant, "home or roaming")
        ->required()
        ->check(CLI::IsMember({"home", "roaming"}));
    c_rto->add_option("--days", rto_args.days, "day range START..END");
    c_rto->add_option("--t2", rto_args.t2, "roaming window end step within a day");
    c_rto->add_option("--out", rto_args.out_dir, "output directory");

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("sweep", "per-day effective-distance sweep");
    c_sweep->add_option("cache", sweep.cache_path, "component cache")->required();
    c_sweep->add_option("--window", sweep.window, "daily step offsets START..END");
    c_sweep->add_option("--days", sweep.days, "day range START..END");
    c_sweep->add_option("--percentile", sweep.q, "per-day d_eff percentile")
        ->check(CLI::Range(0.0, 100.0));
    c_sweep->add_option("--p-cut", sweep.p_cut, "path-hit probability cutoff");
    c_sweep->add_flag("--all-pairs", sweep.all_pairs, "include non-GUP pairs");
    c_sweep->add_option("--out", sweep.out_dir, "output directory");

    SynthArgs synth_args;
    auto* c_synth = app.add_subcommand("synth", "generate a synthetic OD dataset");
    c_synth->add_option("--config", synth_args.config_path, "generator config");
    c_synth->add_option("--seed", synth_args.seed, "override the config seed");
    c_synth->add_option("--out", synth_args.out_dir, "output directory");

    RootArgs root_args;
    auto* c_root = app.add_subcommand("root", "approximate stochastic p-th root "
                                              "(experimental)");
    c_root->add_option("cache", root_args.cache_path, "component cache")->required();
    c_root->add_option("--step", root_args.step, "step operator to take the root of");
    c_root->add_option("--p", root_args.p, "root order")->check(CLI::Range(2, 64));
    c_root->add_option("--metric", root_args.metric, "frobenius or kl")
        ->check(CLI::IsMember({"frobenius", "kl"}));
    c_root->add_option("--max-iter", root_args.max_iter, "iteration cap");
    c_root->add_option("--tol", root_args.tol, "target residual");
    c_root->add_option("--out", root_args.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*c_ingest) return cmd_ingest(ingest);
        if (*c_netflow) return cmd_netflow(netflow);
        if (*c_effdist) return cmd_effdist(effdist);
        if (*c_rto) return cmd_rto(rto_args);
        if (*c_sweep) return cmd_sweep(sweep);
        if (*c_synth) return cmd_synth(synth_args);
        if (*c_root) return cmd_root(root_args);
    } catch (const ExitWith& e) {
        std::cerr << "odflow: " << e.message << '\n';
        return e.code;
    } catch (const SchemaError& e) {
        std::cerr << "odflow: " << e.what() << '\n';
        return kExitSchema;
    } catch (const Error& e) {
        std::cerr << "odflow: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "odflow: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
