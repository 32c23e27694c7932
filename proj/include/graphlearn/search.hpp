#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "graphlearn/graph.hpp"
#include "graphlearn/scan.hpp"

namespace graphlearn {

enum class SearchMethod { Exact, Uls };

std::string_view to_string(SearchMethod method);
SearchMethod parse_search_method(std::string_view name);

inline constexpr std::uint64_t kDefaultExpansionBudget = 50'000'000;

/// BestSubgraph configuration: which connected-subgraph search to run, and an
/// optional proximity constraint (search each node's k-neighbourhood separately).
struct SearchEngine {
    SearchMethod method = SearchMethod::Exact;
    std::optional<int> neighborhood_k;
    /// Cap on branch-and-bound expansions per exact search.
    std::uint64_t expansion_budget = kDefaultExpansionBudget;
};

/// Thrown when an exact search exceeds its expansion budget.
class SearchBudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Highest-scoring connected subgraph, exactly. Branch and bound over connected
// sets grown from their highest-priority member; a branch is cut when the best
// priority-prefix extension of the current set by still-reachable nodes cannot
// beat the incumbent.
ScoredSubset best_connected_exact(const Graph& g, const Snapshot& snap, const Distribution& dist = {},
                                  std::uint64_t budget = kDefaultExpansionBudget);
ScoredSubset best_connected_exact(const Graph& g, const ScanData& data,
                                  std::uint64_t budget = kDefaultExpansionBudget);

// Upper level sets: best connected component of any priority level set.
ScoredSubset best_connected_uls(const Graph& g, const Snapshot& snap, const Distribution& dist = {});
ScoredSubset best_connected_uls(const Graph& g, const ScanData& data);

/// Runs the engine on the whole graph, or on every local neighbourhood when
/// neighborhood_k is set, and returns the overall best. Score-0 results are
/// reported as {0} (lexicographically smallest subset).
ScoredSubset best_subgraph(const SearchEngine& engine, const Graph& g, const Snapshot& snap,
                           const Distribution& dist = {});
ScoredSubset best_subgraph(const SearchEngine& engine, const Graph& g, const ScanData& data);

/// Same, with neighbourhoods computed once by the caller (ignored when the
/// engine has no neighborhood_k).
ScoredSubset best_subgraph(const SearchEngine& engine, const Graph& g, const ScanData& data,
                           std::span<const Neighborhood> neighborhoods);

}  // namespace graphlearn
