#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphlearn/graph.hpp"
#include "graphlearn/learn.hpp"
#include "graphlearn/scan.hpp"
#include "graphlearn/search.hpp"
#include "graphlearn/simulate.hpp"

namespace graphlearn {

struct EdgeReport {
    double precision = 0.0;
    double recall = 0.0;
    std::size_t learned_edges = 0;
    std::size_t true_edges = 0;
    std::size_t common_edges = 0;
    bool precision_defined = true;  // false when the learned graph has no edges
};

EdgeReport edge_precision_recall(const Graph& learned, const Graph& truth);

/// |detected ∩ truth| / |detected ∪ truth|.
double overlap_coefficient(std::span<const int> detected, std::span<const int> truth);

inline constexpr double kDaysPerMonth = 30.4;

/// Nearest-rank percentile at level 1 - fp_per_month / 30.4 of the null
/// scores: the order statistic of rank round(level * n), clamped to [1, n].
double detection_threshold(std::span<const double> null_scores, double fp_per_month);

struct DetectionReport {
    int k = 0;  // neighbourhood size; 0 means the whole graph
    double threshold = 0.0;
    std::vector<int> detection_days;
    double mean_days = 0.0;
    std::vector<double> overlaps;  // midpoint-day overlap per inject
    double mean_overlap = 0.0;
    double tpr = 0.0;  // fraction of inject days scoring above the threshold
    std::vector<double> null_scores;
};

struct DetectionOptions {
    SearchMethod method = SearchMethod::Exact;
    Distribution dist;
    double fp_per_month = 1.0;
    /// Neighbourhood sizes to evaluate; 0 searches the whole graph.
    std::vector<int> k_sweep{0};
    int overlap_day = 7;
    unsigned threads = 1;
    std::uint64_t expansion_budget = kDefaultExpansionBudget;
};

/// Scores the null days and every day of every inject with BestSubgraph on
/// g_eval, once per k. Detection day is the first day scoring strictly above
/// the threshold, or the inject duration when none does.
std::vector<DetectionReport> evaluate_detection(const Graph& g_eval, std::span<const LabeledInject> injects,
                                                std::span<const Snapshot> null_days, const DetectionOptions& options);

struct BenchConfig {
    GraphFamily graph = GraphFamily::ErdosRenyi;
    int n = 50;
    double p = 0.1;
    std::size_t travel_edges = 0;
    double mean_low = 1.0;
    double mean_high = 10.0;
    InjectConfig inject;
    std::size_t train_size = 200;
    double inject_fraction = 1.0;
    std::vector<EdgeSelector> methods{EdgeSelector::Corr, EdgeSelector::PsCorr, EdgeSelector::GrCorr};
    SearchMethod learn_engine = SearchMethod::Uls;
    std::optional<int> learn_k;
    std::size_t replicates = kDefaultReplicates;
    SearchMethod detect_engine = SearchMethod::Exact;
    std::vector<int> k_sweep{5, 10, 15, 20, 25, 30, 35, 40, 45};
    double fp_per_month = 1.0;
    std::size_t null_days = 1000;
    std::size_t test_injects = 100;
    /// Also evaluate detection with the true and the complete graph.
    bool reference_graphs = false;
    std::vector<std::uint64_t> seeds{1};
    unsigned threads = 1;

    void validate() const;
};

nlohmann::ordered_json to_json(const BenchConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
BenchConfig bench_config_from_json(const nlohmann::json& j);

/// Independent seeds for the pipeline stages of one master seed.
enum class Stage : std::uint64_t { Graph = 1, Baselines, Training, Significance, TestInjects, NullDays };
std::uint64_t stage_seed(std::uint64_t master, Stage stage);

struct MethodResult {
    std::string method;
    Graph graph;
    EdgeReport edges;
    std::vector<DetectionReport> detection;  // one per k
    std::size_t best_m = 0;
};

struct SeedResult {
    std::uint64_t seed = 0;
    Graph truth;
    std::vector<MethodResult> methods;  // learned methods, then references
};

struct BenchResult {
    BenchConfig config;
    std::vector<SeedResult> seeds;
};

/// Full pipeline per seed: truth graph, baselines, training set, learning with
/// each selector plus the significance test, and detection on fresh injects.
/// Stage failures are rethrown as std::runtime_error tagged with the stage.
BenchResult run_benchmark(const BenchConfig& cfg);

/// Writes edges.csv, detection.csv (means over seeds), one seed_<s>/ directory
/// per seed with the same tables and the graphs, and manifest.json.
void write_bench_bundle(const BenchResult& result, const std::filesystem::path& dir);

}  // namespace graphlearn
