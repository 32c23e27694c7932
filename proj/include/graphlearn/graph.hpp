#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace graphlearn {

/// Undirected edge, always stored with u < v.
struct Edge {
    int u = 0;
    int v = 0;

    auto operator<=>(const Edge&) const = default;
};

/// Normalised edge {a, b}; throws on a self-loop.
Edge make_edge(int a, int b);

/// Position of e among the N(N-1)/2 pairs in lexicographic order.
std::size_t edge_index(int n, Edge e);
Edge edge_from_index(int n, std::size_t index);

/// Fixed-size bitset over node ids.
class NodeMask {
public:
    NodeMask() = default;
    explicit NodeMask(int n) : n_(n), words_((static_cast<std::size_t>(n) + 63) / 64, 0) {}
    NodeMask(int n, std::span<const int> members);

    int size() const { return n_; }
    bool test(int i) const { return (words_[word(i)] >> bit(i)) & 1U; }
    void set(int i) { words_[word(i)] |= std::uint64_t{1} << bit(i); }
    void reset(int i) { words_[word(i)] &= ~(std::uint64_t{1} << bit(i)); }
    int count() const;
    bool any() const;

    /// True if some node is set in all three masks.
    static bool intersects3(const NodeMask& x, const NodeMask& y, const NodeMask& z);

    std::span<const std::uint64_t> words() const { return words_; }
    bool operator==(const NodeMask&) const = default;

private:
    static std::size_t word(int i) { return static_cast<std::size_t>(i) >> 6; }
    static unsigned bit(int i) { return static_cast<unsigned>(i) & 63U; }

    int n_ = 0;
    std::vector<std::uint64_t> words_;
};

using Point = std::pair<double, double>;

/// Simple undirected graph on nodes 0..N-1 with sorted adjacency lists and an
/// adjacency bitset per node. Optional 2-D coordinates drive the proximity
/// metric for neighbourhoods.
class Graph {
public:
    Graph() = default;
    explicit Graph(int n);

    static Graph complete(int n);
    static Graph from_edges(int n, std::span<const Edge> edges);

    int size() const { return n_; }
    std::size_t edge_count() const { return m_; }

    bool has_edge(int a, int b) const;
    /// Returns false when the edge already exists.
    bool add_edge(int a, int b);
    /// In-place removal; throws std::invalid_argument if absent.
    void erase_edge(Edge e);

    std::span<const int> neighbors(int u) const { return adj_[static_cast<std::size_t>(u)]; }
    const NodeMask& adjacency(int u) const { return rows_[static_cast<std::size_t>(u)]; }

    /// All edges in lexicographic order.
    std::vector<Edge> edges() const;

    const std::optional<std::vector<Point>>& coordinates() const { return coords_; }
    void set_coordinates(std::vector<Point> coords);

    /// Node count and edge-set equality; coordinates are ignored.
    bool operator==(const Graph& other) const;

private:
    void check_node(int u) const;

    int n_ = 0;
    std::size_t m_ = 0;
    std::vector<std::vector<int>> adj_;
    std::vector<NodeMask> rows_;
    std::optional<std::vector<Point>> coords_;
};

struct Neighborhood {
    int center = 0;
    std::vector<int> members;  // ascending, includes center
};

/// True iff the subgraph induced on s is connected.
bool is_connected_subset(const Graph& g, std::span<const int> s);

/// Copy of g without e; throws std::invalid_argument if e is not an edge.
Graph remove_edge(const Graph& g, Edge e);

/// True iff both endpoints of e lie in s and the subgraph induced on s
/// becomes disconnected once e is removed.
bool edge_disconnects(const Graph& g, Edge e, std::span<const int> s);
bool edge_disconnects(const Graph& g, Edge e, const NodeMask& s);

/// Connectivity of the induced subgraph on `members`, optionally ignoring one edge.
bool connected_within(const Graph& g, const NodeMask& members, std::optional<Edge> skip = std::nullopt);

/// Bridges of the subgraph induced on s (edges whose removal disconnects it).
std::vector<Edge> subset_bridges(const Graph& g, std::span<const int> s);

/// BFS hop counts from source; -1 for unreachable nodes.
std::vector<int> hop_distances(const Graph& g, int source);

/// Each node plus its k-1 nearest nodes: Euclidean distance when the graph has
/// coordinates, hop distance otherwise; ties by node id.
std::vector<Neighborhood> local_neighborhoods(const Graph& g, int k);

/// Nodes ordered by hop distance from center, uniformly shuffled within each
/// BFS layer; unreachable nodes last in shuffled order.
std::vector<int> graph_distance_ordering(const Graph& g, int center, std::uint64_t seed);

// Edge-list text format: one "i k" pair per line, 0-based ids. Lines starting
// with '#' are comments; a "# nodes N" comment fixes the node count.
void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in, std::optional<int> n = std::nullopt);

// Coordinates format: "i x y" per line.
void write_coordinates(std::ostream& out, const Graph& g);
std::vector<Point> read_coordinates(std::istream& in, int n);

}  // namespace graphlearn
