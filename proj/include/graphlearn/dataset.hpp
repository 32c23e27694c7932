#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "graphlearn/graph.hpp"
#include "graphlearn/learn.hpp"
#include "graphlearn/scan.hpp"

namespace graphlearn {

/// Malformed or unreadable input files; the message names the file.
class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// On-disk layout of a simulated dataset directory:
//   graph.edges      true graph, edge list
//   coordinates.txt  node positions, only for spatial graphs
//   baselines.csv    node,mu
//   snapshots.csv    example,node,count
//   labels.csv       example,node   (true affected nodes, evaluation only)
//   meta.json        seeds and the generating configuration
struct Dataset {
    Graph graph;
    std::vector<double> mu;
    std::vector<Snapshot> snapshots;
    std::vector<std::vector<int>> labels;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

void write_dataset(const std::filesystem::path& dir, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& dir);

void save_graph(const std::filesystem::path& file, const Graph& g);
Graph load_graph(const std::filesystem::path& file, std::optional<int> n = std::nullopt);

void save_baselines(const std::filesystem::path& file, std::span<const double> mu);
std::vector<double> load_baselines(const std::filesystem::path& file);

/// Snapshot rows "example,node,count"; every example must list every node once.
void save_snapshots(const std::filesystem::path& file, std::span<const Snapshot> snapshots);
std::vector<Snapshot> load_snapshots(const std::filesystem::path& file, std::span<const double> mu);

void save_labels(const std::filesystem::path& file, std::span<const std::vector<int>> labels);
std::vector<std::vector<int>> load_labels(const std::filesystem::path& file, std::size_t examples, int n);

/// One row per m = 1..M: "m,fnorm,mu,sigma,z".
void save_significance(const std::filesystem::path& file, const GraphSequence& seq, const SignificanceCurve& curve);

void save_json(const std::filesystem::path& file, const nlohmann::ordered_json& j);
nlohmann::json load_json(const std::filesystem::path& file);

}  // namespace graphlearn
