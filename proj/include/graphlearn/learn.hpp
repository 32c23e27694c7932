#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "graphlearn/graph.hpp"
#include "graphlearn/scan.hpp"
#include "graphlearn/search.hpp"

namespace graphlearn {

/// Unlabelled training examples with their unconstrained optima.
class TrainingSet {
public:
    /// Runs the fast subset scan on every snapshot. Throws std::invalid_argument
    /// when snapshots disagree on N or every example scores 0.
    TrainingSet(std::vector<Snapshot> snapshots, Distribution dist = {});

    int node_count() const { return n_; }
    std::size_t size() const { return snapshots_.size(); }
    const Distribution& distribution() const { return dist_; }

    const Snapshot& snapshot(std::size_t j) const { return snapshots_[j]; }
    const ScanData& scan_data(std::size_t j) const { return data_[j]; }
    /// S*_j and F_j.
    const ScoredSubset& unconstrained(std::size_t j) const { return optima_[j]; }
    /// Examples with F_j > 0; only these enter the mean normalised score.
    std::span<const std::size_t> scoring_examples() const { return scoring_; }

private:
    int n_ = 0;
    Distribution dist_;
    std::vector<Snapshot> snapshots_;
    std::vector<ScanData> data_;
    std::vector<ScoredSubset> optima_;
    std::vector<std::size_t> scoring_;
};

/// Symmetric N x N Pearson correlations of observed counts across examples,
/// row-major. Zero-variance nodes correlate 0 with everything else.
class CorrelationMatrix {
public:
    CorrelationMatrix(int n, std::vector<double> values) : n_(n), values_(std::move(values)) {}

    int size() const { return n_; }
    double operator()(int i, int k) const
    {
        return values_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(k)];
    }

private:
    int n_;
    std::vector<double> values_;
};

CorrelationMatrix pearson_correlations(const TrainingSet& ts);

enum class EdgeSelector { Corr, PsCorr, GrCorr };

std::string_view to_string(EdgeSelector selector);
EdgeSelector parse_edge_selector(std::string_view name);

/// One change of an example's best connected subgraph: valid for G_m and
/// every smaller graph until the next change.
struct SubsetChange {
    std::size_t m = 0;
    ScoredSubset best;
};

/// Nested graphs G_M > ... > G_0 produced by edge removal.
struct GraphSequence {
    int n = 0;
    /// removals[i] turns G_{M-i} into G_{M-i-1}.
    std::vector<Edge> removals;
    /// fnorm[m] is the mean normalised score of G_m, m = 0..M.
    std::vector<double> fnorm;
    /// Per example, the history of S*_mj, newest last. history[j][0] has m = M.
    std::vector<std::vector<SubsetChange>> history;
    std::vector<std::size_t> calls_per_example;
    std::size_t bestsubgraph_calls = 0;

    std::size_t max_edges() const { return removals.size(); }
    Graph graph_at(std::size_t m) const;
    const ScoredSubset& best_at(std::size_t m, std::size_t j) const;
};

struct LearnOptions {
    EdgeSelector selector = EdgeSelector::PsCorr;
    SearchEngine engine;
    /// Worker threads for per-example searches; 0 means hardware concurrency.
    unsigned threads = 1;
};

/// Greedy edge removal from the complete graph down to the empty graph,
/// re-running BestSubgraph only for examples whose current best subgraph the
/// removed edge disconnects.
GraphSequence learn_sequence(const TrainingSet& ts, const LearnOptions& options);

/// Current per-example state seen by the edge selectors.
struct LearnerState {
    std::vector<ScoredSubset> best;  // S*_mj per example
};

/// The edge the selector would remove next from g. Throws on an edgeless graph.
Edge best_edge(const Graph& g, const TrainingSet& ts, const LearnerState& state, const CorrelationMatrix& corr,
               EdgeSelector selector, const SearchEngine& engine);

/// Replays a fixed removal order (a permutation of the complete graph's edges).
GraphSequence replay_sequence(const TrainingSet& ts, std::span<const Edge> removal_order, const SearchEngine& engine);

/// Per-edge-count randomisation statistics and the most significant graph.
struct SignificanceCurve {
    std::vector<double> mu;     // index m = 0..M
    std::vector<double> sigma;  // sample standard deviation over replicates
    std::vector<double> z;      // NaN where sigma < kMinSigma
    std::size_t best_m = 0;
    Graph best_graph;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::size_t bestsubgraph_calls = 0;
    std::vector<double> calls_per_example;  // mean over replicates
};

inline constexpr double kMinSigma = 1e-9;
inline constexpr std::size_t kDefaultReplicates = 100;

/// Random edge-removal sequences r = 0..R-1 use seed + r. The chosen graph maximises
/// (fnorm - mu_m) / sigma_m; ties go to the smallest m.
SignificanceCurve significance_test(const TrainingSet& ts, const GraphSequence& seq, const SearchEngine& engine,
                                    std::size_t replicates, std::uint64_t seed, unsigned threads = 1);

/// Mean normalised score of g, computed from scratch.
double mean_normalized_score(const TrainingSet& ts, const Graph& g, const SearchEngine& engine);

}  // namespace graphlearn
