#include "graphlearn/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace graphlearn {

Edge make_edge(int a, int b)
{
    if (a == b)
        throw std::invalid_argument("self-loop edge {" + std::to_string(a) + "," + std::to_string(b) + "}");
    return a < b ? Edge{a, b} : Edge{b, a};
}

std::size_t edge_index(int n, Edge e)
{
    const auto u = static_cast<std::size_t>(e.u);
    const auto nn = static_cast<std::size_t>(n);
    return u * (2 * nn - u - 1) / 2 + static_cast<std::size_t>(e.v - e.u - 1);
}

Edge edge_from_index(int n, std::size_t index)
{
    int u = 0;
    std::size_t row = static_cast<std::size_t>(n - 1);
    while (index >= row) {
        index -= row;
        ++u;
        --row;
    }
    return {u, u + 1 + static_cast<int>(index)};
}

NodeMask::NodeMask(int n, std::span<const int> members) : NodeMask(n)
{
    for (int v : members)
        set(v);
}

int NodeMask::count() const
{
    int c = 0;
    for (auto w : words_)
        c += std::popcount(w);
    return c;
}

bool NodeMask::any() const
{
    return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
}

bool NodeMask::intersects3(const NodeMask& x, const NodeMask& y, const NodeMask& z)
{
    for (std::size_t k = 0; k < x.words_.size(); ++k)
        if (x.words_[k] & y.words_[k] & z.words_[k])
            return true;
    return false;
}

Graph::Graph(int n) : n_(n)
{
    if (n < 0)
        throw std::invalid_argument("graph node count must be non-negative");
    adj_.resize(static_cast<std::size_t>(n));
    rows_.assign(static_cast<std::size_t>(n), NodeMask(n));
}

Graph Graph::complete(int n)
{
    Graph g(n);
    for (int u = 0; u < n; ++u) {
        auto& list = g.adj_[static_cast<std::size_t>(u)];
        list.reserve(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
        for (int v = 0; v < n; ++v) {
            if (v == u)
                continue;
            list.push_back(v);
            g.rows_[static_cast<std::size_t>(u)].set(v);
        }
    }
    g.m_ = static_cast<std::size_t>(n) * static_cast<std::size_t>(n > 0 ? n - 1 : 0) / 2;
    return g;
}

Graph Graph::from_edges(int n, std::span<const Edge> edges)
{
    Graph g(n);
    for (const Edge& e : edges)
        if (!g.add_edge(e.u, e.v))
            throw std::invalid_argument("duplicate edge {" + std::to_string(e.u) + "," + std::to_string(e.v) + "}");
    return g;
}

void Graph::check_node(int u) const
{
    if (u < 0 || u >= n_)
        throw std::invalid_argument("node id " + std::to_string(u) + " out of range");
}

bool Graph::has_edge(int a, int b) const
{
    check_node(a);
    check_node(b);
    return a != b && rows_[static_cast<std::size_t>(a)].test(b);
}

bool Graph::add_edge(int a, int b)
{
    const Edge e = make_edge(a, b);
    check_node(e.u);
    check_node(e.v);
    if (rows_[static_cast<std::size_t>(e.u)].test(e.v))
        return false;
    for (auto [x, y] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
        auto& list = adj_[static_cast<std::size_t>(x)];
        list.insert(std::lower_bound(list.begin(), list.end(), y), y);
        rows_[static_cast<std::size_t>(x)].set(y);
    }
    ++m_;
    return true;
}

void Graph::erase_edge(Edge e)
{
    check_node(e.u);
    check_node(e.v);
    if (e.u == e.v || !rows_[static_cast<std::size_t>(e.u)].test(e.v))
        throw std::invalid_argument("edge {" + std::to_string(e.u) + "," + std::to_string(e.v) + "} not in graph");
    for (auto [x, y] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
        auto& list = adj_[static_cast<std::size_t>(x)];
        list.erase(std::lower_bound(list.begin(), list.end(), y));
        rows_[static_cast<std::size_t>(x)].reset(y);
    }
    --m_;
}

std::vector<Edge> Graph::edges() const
{
    std::vector<Edge> out;
    out.reserve(m_);
    for (int u = 0; u < n_; ++u)
        for (int v : adj_[static_cast<std::size_t>(u)])
            if (v > u)
                out.push_back({u, v});
    return out;
}

void Graph::set_coordinates(std::vector<Point> coords)
{
    if (coords.size() != static_cast<std::size_t>(n_))
        throw std::invalid_argument("coordinate count does not match node count");
    coords_ = std::move(coords);
}

bool Graph::operator==(const Graph& other) const
{
    return n_ == other.n_ && m_ == other.m_ && rows_ == other.rows_;
}

namespace {

std::vector<int> checked_members(const Graph& g, std::span<const int> s)
{
    if (s.empty())
        throw std::invalid_argument("node set must be non-empty");
    std::vector<int> members(s.begin(), s.end());
    for (int v : members)
        if (v < 0 || v >= g.size())
            throw std::invalid_argument("node id " + std::to_string(v) + " out of range");
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    return members;
}

}  // namespace

bool connected_within(const Graph& g, const NodeMask& members, std::optional<Edge> skip)
{
    const int total = members.count();
    if (total <= 1)
        return true;
    int start = -1;
    for (int v = 0; v < g.size(); ++v)
        if (members.test(v)) {
            start = v;
            break;
        }
    NodeMask seen(g.size());
    std::vector<int> stack{start};
    seen.set(start);
    int reached = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int w : g.neighbors(u)) {
            if (!members.test(w) || seen.test(w))
                continue;
            if (skip && make_edge(u, w) == *skip)
                continue;
            seen.set(w);
            ++reached;
            stack.push_back(w);
        }
    }
    return reached == total;
}

bool is_connected_subset(const Graph& g, std::span<const int> s)
{
    const auto members = checked_members(g, s);
    return connected_within(g, NodeMask(g.size(), members));
}

Graph remove_edge(const Graph& g, Edge e)
{
    Graph copy = g;
    copy.erase_edge(e);
    return copy;
}

bool edge_disconnects(const Graph& g, Edge e, const NodeMask& s)
{
    if (!g.has_edge(e.u, e.v))
        throw std::invalid_argument("edge {" + std::to_string(e.u) + "," + std::to_string(e.v) + "} not in graph");
    if (!s.test(e.u) || !s.test(e.v))
        return false;
    // A common neighbour inside s keeps u and v joined without e.
    if (NodeMask::intersects3(g.adjacency(e.u), g.adjacency(e.v), s))
        return !connected_within(g, s);
    return !connected_within(g, s, e);
}

bool edge_disconnects(const Graph& g, Edge e, std::span<const int> s)
{
    const auto members = checked_members(g, s);
    return edge_disconnects(g, e, NodeMask(g.size(), members));
}

std::vector<Edge> subset_bridges(const Graph& g, std::span<const int> s)
{
    std::vector<Edge> bridges;
    if (s.size() < 2)
        return bridges;
    const auto members = checked_members(g, s);
    const std::size_t k = members.size();
    std::vector<int> local(static_cast<std::size_t>(g.size()), -1);
    for (std::size_t i = 0; i < k; ++i)
        local[static_cast<std::size_t>(members[i])] = static_cast<int>(i);

    // Iterative Tarjan bridge finding on the induced subgraph.
    std::vector<int> disc(k, -1), low(k, 0), parent(k, -1);
    std::vector<std::size_t> next(k, 0);
    int timer = 0;
    for (std::size_t root = 0; root < k; ++root) {
        if (disc[root] >= 0)
            continue;
        std::vector<std::size_t> stack{root};
        disc[root] = low[root] = timer++;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            const auto nbrs = g.neighbors(members[u]);
            if (next[u] < nbrs.size()) {
                const int gw = nbrs[next[u]++];
                const int w = local[static_cast<std::size_t>(gw)];
                if (w < 0)
                    continue;
                const auto wi = static_cast<std::size_t>(w);
                if (disc[wi] < 0) {
                    parent[wi] = static_cast<int>(u);
                    disc[wi] = low[wi] = timer++;
                    stack.push_back(wi);
                } else if (w != parent[u]) {
                    low[u] = std::min(low[u], disc[wi]);
                }
            } else {
                stack.pop_back();
                if (parent[u] >= 0) {
                    const auto p = static_cast<std::size_t>(parent[u]);
                    low[p] = std::min(low[p], low[u]);
                    if (low[u] > disc[p])
                        bridges.push_back(make_edge(members[p], members[u]));
                }
            }
        }
    }
    std::sort(bridges.begin(), bridges.end());
    return bridges;
}

std::vector<int> hop_distances(const Graph& g, int source)
{
    if (source < 0 || source >= g.size())
        throw std::invalid_argument("source node out of range");
    std::vector<int> dist(static_cast<std::size_t>(g.size()), -1);
    std::vector<int> queue{source};
    dist[static_cast<std::size_t>(source)] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int u = queue[head];
        for (int w : g.neighbors(u)) {
            auto& d = dist[static_cast<std::size_t>(w)];
            if (d < 0) {
                d = dist[static_cast<std::size_t>(u)] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

std::vector<Neighborhood> local_neighborhoods(const Graph& g, int k)
{
    const int n = g.size();
    if (k < 1 || k > n)
        throw std::invalid_argument("neighborhood size k must lie in [1, N]");
    const auto& coords = g.coordinates();
    std::vector<Neighborhood> out;
    out.reserve(static_cast<std::size_t>(n));
    std::vector<double> dist(static_cast<std::size_t>(n));
    std::vector<int> nodes(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        if (coords) {
            const auto [cx, cy] = (*coords)[static_cast<std::size_t>(c)];
            for (int v = 0; v < n; ++v) {
                const auto [x, y] = (*coords)[static_cast<std::size_t>(v)];
                dist[static_cast<std::size_t>(v)] = std::hypot(x - cx, y - cy);
            }
        } else {
            const auto hops = hop_distances(g, c);
            for (int v = 0; v < n; ++v) {
                const int h = hops[static_cast<std::size_t>(v)];
                dist[static_cast<std::size_t>(v)] = h < 0 ? std::numeric_limits<double>::infinity() : h;
            }
        }
        dist[static_cast<std::size_t>(c)] = -1.0;  // center always first
        std::iota(nodes.begin(), nodes.end(), 0);
        std::partial_sort(nodes.begin(), nodes.begin() + k, nodes.end(), [&](int l, int r) {
            const double dl = dist[static_cast<std::size_t>(l)];
            const double dr = dist[static_cast<std::size_t>(r)];
            return dl != dr ? dl < dr : l < r;
        });
        Neighborhood nb;
        nb.center = c;
        nb.members.assign(nodes.begin(), nodes.begin() + k);
        std::sort(nb.members.begin(), nb.members.end());
        out.push_back(std::move(nb));
    }
    return out;
}

std::vector<int> graph_distance_ordering(const Graph& g, int center, std::uint64_t seed)
{
    const auto dist = hop_distances(g, center);
    const int max_hop = *std::max_element(dist.begin(), dist.end());
    std::vector<std::vector<int>> layers(static_cast<std::size_t>(max_hop) + 2);
    for (int v = 0; v < g.size(); ++v) {
        const int d = dist[static_cast<std::size_t>(v)];
        layers[d < 0 ? layers.size() - 1 : static_cast<std::size_t>(d)].push_back(v);
    }
    std::mt19937_64 rng(seed);
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(g.size()));
    for (auto& layer : layers) {
        std::shuffle(layer.begin(), layer.end(), rng);
        order.insert(order.end(), layer.begin(), layer.end());
    }
    return order;
}

void write_edge_list(std::ostream& out, const Graph& g)
{
    out << "# nodes " << g.size() << '\n';
    for (const Edge& e : g.edges())
        out << e.u << ' ' << e.v << '\n';
}

Graph read_edge_list(std::istream& in, std::optional<int> n)
{
    std::vector<Edge> edges;
    std::optional<int> declared;
    std::string line;
    int line_no = 0;
    int max_id = -1;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first))
            continue;
        if (first[0] == '#') {
            std::string key;
            int value = 0;
            std::istringstream cs(line.substr(line.find('#') + 1));
            if (cs >> key >> value && key == "nodes")
                declared = value;
            continue;
        }
        int a = 0;
        int b = 0;
        std::string rest;
        try {
            std::size_t pos = 0;
            a = std::stoi(first, &pos);
            if (pos != first.size())
                throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw std::invalid_argument("edge list line " + std::to_string(line_no) + ": malformed node id");
        }
        if (!(ls >> b) || (ls >> rest))
            throw std::invalid_argument("edge list line " + std::to_string(line_no) + ": expected \"i k\"");
        if (a < 0 || b < 0)
            throw std::invalid_argument("edge list line " + std::to_string(line_no) + ": negative node id");
        edges.push_back(make_edge(a, b));
        max_id = std::max({max_id, a, b});
    }
    if (n && declared && *n != *declared)
        throw std::invalid_argument("edge list declares " + std::to_string(*declared) + " nodes, expected " +
                                    std::to_string(*n));
    const int nodes = n ? *n : declared ? *declared : max_id + 1;
    if (max_id >= nodes)
        throw std::invalid_argument("edge list references node " + std::to_string(max_id) + " beyond node count");
    return Graph::from_edges(nodes, edges);
}

void write_coordinates(std::ostream& out, const Graph& g)
{
    if (!g.coordinates())
        return;
    const auto old = out.precision(17);
    const auto& coords = *g.coordinates();
    for (std::size_t i = 0; i < coords.size(); ++i)
        out << i << ' ' << coords[i].first << ' ' << coords[i].second << '\n';
    out.precision(old);
}

std::vector<Point> read_coordinates(std::istream& in, int n)
{
    std::vector<Point> coords(static_cast<std::size_t>(n));
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        int i = 0;
        double x = 0;
        double y = 0;
        if (line.empty() || line[0] == '#')
            continue;
        if (!(ls >> i >> x >> y) || i < 0 || i >= n)
            throw std::invalid_argument("malformed coordinate line: " + line);
        coords[static_cast<std::size_t>(i)] = {x, y};
        seen[static_cast<std::size_t>(i)] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw std::invalid_argument("coordinates missing for some nodes");
    return coords;
}

}  // namespace graphlearn
