#ifndef odflow_passage_hpp
#define odflow_passage_hpp

#include <iosfwd>
#include <optional>
#include <vector>

#include "odflow/baseline.hpp"
#include "odflow/flows.hpp"
#include "odflow/graph.hpp"
#include "odflow/markov.hpp"

namespace odflow {

// Masked propagation record for one (origin, dest) pair.
//
// live[t-1][k] is the probability of being at k at step t on a path from
// the origin that has visited neither the origin nor the destination in
// between (absorbed mass already removed). mean_cost[t-1][k] is the mean
// accumulated cost of those paths, NaN wherever live mass is zero.
//
// pi[t-1] is the first-passage probability at the destination at step t,
// x[t-1] the mean cost of those first-passage paths. rho[t-1] is the mass
// absorbed by returning to the origin (zero when dest == origin, where
// returns are the passage event itself).
struct PassageTrace {
    int origin = 0;
    int dest = 0;
    std::vector<std::vector<double>> live;
    std::vector<std::vector<double>> mean_cost;
    std::vector<double> pi;
    std::vector<double> x;
    std::vector<double> rho;

    int t_max() const { return static_cast<int>(pi.size()); }
    // live + absorbed mass at step t (1-based); equals 1 up to drift
    double mass_balance(int t) const;
};

// Windowed summary of a pair: probability-weighted mean cost over the
// window, total path-hit probability, and (once normalized) the effective
// distance.
struct WindowedOD {
    int origin = 0;
    int dest = 0;
    int t1 = 1, t2 = 1;
    std::optional<double> x_bar;  // absent when P == 0
    double P = 0.0;
    std::optional<double> d_eff;
    bool gup = false;
};

// Exact masked recursion. dest == origin runs in return-to-origin mode
// (mask = {origin} only, absorption on return). t_max <= ops.size().
PassageTrace propagate(const std::vector<StepOperator>& ops, int origin, int dest,
                       int t_max);

WindowedOD windowed_distance(const PassageTrace& trace, int t1, int t2);

// True iff no slice in [t_first, t_last] carries a direct origin->dest record.
bool is_gup(const std::vector<FlowSlice>& slices, int t_first, int t_last,
            const CellId& origin, const CellId& dest);

// --- path decomposition ----------------------------------------------------

struct PathDecomposition {
    struct Path {
        std::vector<int> nodes;  // origin ... dest, component indices
        int arrival_step = 0;
        double prob = 0.0;
        double cost = 0.0;
    };
    std::vector<Path> paths;  // ranked by probability, descending
    bool exhaustive = true;   // false when the beam fallback was used
    int beam_width = 0;
};

struct DecomposeOptions {
    std::size_t max_expansions = 1'000'000;  // exhaustive search budget
    int beam_width = 4096;
};

// Top-k admissible paths from origin to dest within t_max steps, ranked by
// probability product. Exhaustive within budget, beam search beyond it.
PathDecomposition decompose_paths(const std::vector<StepOperator>& ops, int origin,
                                  int dest, int t_max, int top_k,
                                  const DecomposeOptions& opts = {});

void write_paths_json(std::ostream& out, const PathDecomposition& dec,
                      const ComponentSpec& component, int t1, int t2);

// --- return-to-origin ------------------------------------------------------

enum class RtoVariant { home, roaming };

// home: first-step self-transition (x = d^1_jj, P = m^1_jj).
// roaming: first passage back to the origin over window [2, t2].
WindowedOD rto(const std::vector<StepOperator>& ops, int origin, int t2,
               RtoVariant variant);

struct CityRto {
    double value_km = 0.0;
    // weight mass of origins that had to be dropped (undefined distance),
    // renormalized away
    double excluded_mass = 0.0;
};

// Flow-weighted city average; weights come from the first slice
// (self-loop counts for home, leaving counts for roaming).
CityRto city_rto(const std::vector<StepOperator>& ops, const FlowSlice& first_slice,
                 const ComponentSpec& component, int t2, RtoVariant variant);

// --- windowed table + time sweeps ------------------------------------------

struct SweepRow {
    int day = 0;
    int origin = 0;
    int dest = 0;
    double d_eff = 0.0;
    double P = 0.0;
};

struct SweepSpec {
    int steps_per_day = 48;
    int window_start = 0;  // 0-based step offset of the window start within a day
    int window_len = 1;    // number of steps in the window
    double q = 99.0;       // per-day percentile of effective distance kept
    double p_cut = 1e-6;   // path-hit probability cutoff
};

// Per-day effective distances over the candidate pairs, filtered by the
// probability cutoff and per-day percentile. Candidate pairs are component
// index pairs (origin, dest).
std::vector<SweepRow> time_sweep(const std::vector<StepOperator>& ops,
                                 const std::vector<std::pair<int, int>>& candidates,
                                 const BaselineModel& baseline,
                                 const std::vector<int>& days, const SweepSpec& spec);

// `origin,dest,t1,t2,x_bar_km,P,d_eff,gup`
void write_windowed_csv(std::ostream& out, const std::vector<WindowedOD>& rows,
                        const ComponentSpec& component);
// `day,origin,dest,d_eff,P`
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                     const ComponentSpec& component);

}  // namespace odflow

#endif
