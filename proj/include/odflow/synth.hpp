#ifndef odflow_synth_hpp
#define odflow_synth_hpp

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "odflow/cells.hpp"
#include "odflow/config.hpp"
#include "odflow/flows.hpp"
#include "odflow/markov.hpp"

namespace odflow::synth {

// Axial hex coordinate on the lattice.
struct Hex {
    int q = 0;
    int r = 0;
    auto operator<=>(const Hex&) const = default;
};

// Generator parameters. Every constant lives here so a config file fully
// determines a run; the defaults reproduce the documented reference
// schedule (24 h period, inward AM / outward PM bias, hub accumulation,
// metro corridors).
struct SynthConfig {
    int lattice_radius = 4;
    double pitch_km = 6.4;       // neighbor centroid spacing
    double base_lat = 33.749;    // lattice anchor
    double base_lon = -84.388;
    std::vector<Hex> hubs = {{0, 0}, {3, 0}, {-3, 2}, {0, -3}};
    std::vector<std::pair<Hex, Hex>> metro = {
        {{0, 0}, {3, 0}}, {{0, 0}, {-3, 2}}, {{0, 0}, {0, -3}}};
    std::vector<Hex> center = {{0, 0}, {1, 0}, {0, 1}};

    int period = 48;  // 30-minute steps per day
    // gravity kernel
    double beta = 1.2;            // potential-bias strength
    double stay_base = 0.55;      // off-peak stay probability
    double stay_hub_bonus = 0.15; // extra stay mass at hubs (delayed release)
    double activity_base = 1.0;
    double activity_hub = 3.0;
    double bias_peak = 1.0;       // |bias| at the peak of each phase
    int morning_start = 12, morning_end = 24;  // steps 06:00-12:00, inward
    int evening_start = 34, evening_end = 46;  // steps 17:00-23:00, outward
    double evening_bias_scale = 0.7;  // PM reversal is partial
    double metro_boost_peak = 4.0;    // long-range link modulation at peaks
    double self_distance_fraction = 1.0 / 3.0;  // intra-cell trip length / pitch

    // simulation
    long long n_agents = 120000;
    int n_days = 1;
    std::uint64_t seed = 1;
    bool distance_jitter = false;  // +-20% uniform per-trip length sampling
    std::string start_date = "2025-06-01";  // cosmetic file-naming label

    static SynthConfig from_config(const Config& cfg);
    void echo(std::ostream& out) const;
};

struct SynthNetwork {
    CellTable cells;
    std::vector<CellId> cell_ids;  // sorted, index = matrix index
    std::map<Hex, int> index;
    std::vector<Hex> coords;                 // index -> axial coordinate
    std::vector<std::vector<int>> neighbors; // adjacency incl. metro edges
    std::set<std::pair<int, int>> metro_edges;  // unordered pairs, both directions
    std::vector<char> is_hub;
    std::vector<int> potential;  // graph distance to the nearest center cell

    int size() const { return static_cast<int>(coords.size()); }
};

// Hex lattice with 6-neighbor adjacency plus metro edges; validates strong
// connectivity and that metro edges connect hubs only.
SynthNetwork build_network(const SynthConfig& cfg);

// One column-stochastic kernel per step of the day. Costs are great-circle
// edge lengths (self-loops: pitch * self_distance_fraction).
std::vector<StepOperator> compile_kernels(const SynthNetwork& net, const SynthConfig& cfg);

// Time-of-day bias sign/strength; positive attracts toward lower potential.
double schedule_bias(const SynthConfig& cfg, int step_of_day);
double schedule_metro_boost(const SynthConfig& cfg, int step_of_day);

struct FixedPoint {
    std::vector<double> v;
    double residual_l1 = 0.0;
    int iterations = 0;
};

// Periodic fixed point of the daily cyclic product, by power iteration from
// the uniform vector. Throws when the cyclic product is not primitive.
FixedPoint periodic_fixed_point(const std::vector<StepOperator>& daily_ops);

// Seeded agent simulation aggregated into per-step OD slices. Identical
// seeds give identical slices regardless of how work is scheduled: each
// (day, step, cell) draws from its own counter-based substream.
std::vector<FlowSlice> simulate_and_aggregate(const SynthNetwork& net,
                                              const std::vector<StepOperator>& kernels,
                                              const FixedPoint& fixed_point,
                                              const SynthConfig& cfg);

// Expected count-weighted mean of (potential_origin - potential_dest) over
// non-self flows in [step_begin, step_end), with occupancy evolved from the
// fixed point. Positive means net movement toward the center.
double expected_potential_drop(const SynthNetwork& net,
                               const std::vector<StepOperator>& kernels,
                               const FixedPoint& fixed_point, int step_begin,
                               int step_end);

}  // namespace odflow::synth

#endif
