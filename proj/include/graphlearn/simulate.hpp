#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "graphlearn/graph.hpp"
#include "graphlearn/scan.hpp"

namespace graphlearn {

// Outbreak injection parameters. On day d the first spread_rate * d nodes of
// the hop-distance ordering from the centre are affected, each receiving
// Poisson(spread_factor * d / (spread_factor + ln(dist + 1))) extra counts.
struct InjectConfig {
    int spread_rate = 2;
    double spread_factor = 2.0;
    int duration = 14;

    void validate() const;
};

struct LabeledInject {
    int center = 0;
    std::vector<int> distances;              // hop distance from center, -1 if unreachable
    std::vector<Snapshot> days;              // days[d-1] is outbreak day d
    std::vector<std::vector<int>> affected;  // ascending node ids per day; nested
};

struct Baselines {
    std::vector<double> mu;
    std::vector<std::vector<double>> null_counts;  // [day][node]
};

Graph gen_erdos_renyi(int n, double p, std::uint64_t seed);

/// Sequential preferential attachment seeded with a random triangle. Degrees are
/// capped at max(3, ceil(0.2 N)); a new node that attaches to nobody gets one
/// edge to a uniformly chosen node below the cap.
Graph gen_pref_attachment(int n, std::uint64_t seed);

/// Stand-in for a region adjacency graph: uniform random points in the unit
/// square joined by their Gabriel graph (connected and planar). Coordinates
/// are attached to the result.
Graph gen_adjacency(int n, std::uint64_t seed);

/// Adds `count` uniformly random edges that are not already present.
Graph add_travel_edges(const Graph& g, std::size_t count, std::uint64_t seed);

enum class GraphFamily { ErdosRenyi, PrefAttachment, Adjacency };

std::string_view to_string(GraphFamily family);
GraphFamily parse_graph_family(std::string_view name);

/// One graph of the family (p is used by Erdos-Renyi only), plus `travel`
/// random extra edges drawn from seed + 1.
Graph generate_graph(GraphFamily family, int n, double p, std::size_t travel, std::uint64_t seed);

/// mu_i ~ U[mean_low, mean_high] once per node; null counts Poisson(mu_i) per day.
Baselines gen_baselines(int n, int days, double mean_low, double mean_high, std::uint64_t seed);

std::vector<double> draw_null_counts(std::span<const double> mu, std::mt19937_64& rng);

/// Expected injected count at hop distance `dist` on outbreak day `day`.
double inject_rate(double spread_factor, int day, int dist);

LabeledInject inject_outbreak(const Graph& g, std::span<const double> mu, const InjectConfig& cfg,
                              std::uint64_t seed);

struct SimulatedExamples {
    std::vector<Snapshot> snapshots;
    std::vector<std::vector<int>> labels;  // true affected nodes; empty for null days
    std::vector<int> days;                 // outbreak day, 0 for null days
};

/// J single-day snapshots; with probability inject_fraction an example is a
/// uniformly chosen day of a fresh outbreak, otherwise a pure null day.
/// Example j draws from seed + j.
SimulatedExamples make_training_set(const Graph& g, std::span<const double> mu, const InjectConfig& cfg,
                                    std::size_t count, double inject_fraction, std::uint64_t seed);

}  // namespace graphlearn
