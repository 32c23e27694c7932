#include "graphlearn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace graphlearn {

void InjectConfig::validate() const
{
    if (spread_rate < 1)
        throw std::invalid_argument("spread_rate must be at least 1");
    if (!(spread_factor > 0.0))
        throw std::invalid_argument("spread_factor must be positive");
    if (duration < 1)
        throw std::invalid_argument("duration must be at least 1 day");
}

namespace {

int uniform_int(std::mt19937_64& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double uniform01(std::mt19937_64& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double poisson(std::mt19937_64& rng, double mean)
{
    if (!(mean > 0.0))
        return 0.0;
    return static_cast<double>(std::poisson_distribution<long long>(mean)(rng));
}

}  // namespace

Graph gen_erdos_renyi(int n, double p, std::uint64_t seed)
{
    if (n < 1)
        throw std::invalid_argument("node count must be positive");
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("edge probability p must lie in (0, 1)");
    std::mt19937_64 rng(seed);
    Graph g(n);
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k)
            if (uniform01(rng) < p)
                g.add_edge(i, k);
    return g;
}

Graph gen_pref_attachment(int n, std::uint64_t seed)
{
    if (n < 4)
        throw std::invalid_argument("preferential attachment needs at least 4 nodes");
    std::mt19937_64 rng(seed);
    const int cap = std::max(3, static_cast<int>(std::ceil(0.2 * n)));
    std::vector<int> arrival(static_cast<std::size_t>(n));
    std::iota(arrival.begin(), arrival.end(), 0);
    std::shuffle(arrival.begin(), arrival.end(), rng);

    Graph g(n);
    std::vector<int> degree(static_cast<std::size_t>(n), 0);
    auto connect = [&](int a, int b) {
        g.add_edge(a, b);
        ++degree[static_cast<std::size_t>(a)];
        ++degree[static_cast<std::size_t>(b)];
    };
    connect(arrival[0], arrival[1]);
    connect(arrival[1], arrival[2]);
    connect(arrival[0], arrival[2]);
    int total = 6;

    for (std::size_t t = 3; t < arrival.size(); ++t) {
        const int node = arrival[t];
        std::vector<int> targets;
        for (std::size_t s = 0; s < t; ++s) {
            const int v = arrival[s];
            const int d = degree[static_cast<std::size_t>(v)];
            const double prob = static_cast<double>(d) / total;
            if (uniform01(rng) < prob && d < cap && static_cast<int>(targets.size()) < cap)
                targets.push_back(v);
        }
        if (targets.empty()) {
            std::vector<int> eligible;
            for (std::size_t s = 0; s < t; ++s)
                if (degree[static_cast<std::size_t>(arrival[s])] < cap)
                    eligible.push_back(arrival[s]);
            if (eligible.empty())
                eligible.assign(arrival.begin(), arrival.begin() + static_cast<std::ptrdiff_t>(t));
            targets.push_back(eligible[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(eligible.size()) - 1))]);
        }
        for (int v : targets) {
            connect(node, v);
            total += 2;
        }
    }
    return g;
}

Graph gen_adjacency(int n, std::uint64_t seed)
{
    if (n < 1)
        throw std::invalid_argument("node count must be positive");
    std::mt19937_64 rng(seed);
    std::vector<Point> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) {
        p.first = uniform01(rng);
        p.second = uniform01(rng);
    }
    Graph g(n);
    auto d2 = [&](int a, int b) {
        const double dx = pts[static_cast<std::size_t>(a)].first - pts[static_cast<std::size_t>(b)].first;
        const double dy = pts[static_cast<std::size_t>(a)].second - pts[static_cast<std::size_t>(b)].second;
        return dx * dx + dy * dy;
    };
    // Gabriel graph: {a, b} is an edge iff no other point lies in the disc
    // with diameter ab.
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const double ab = d2(a, b);
            bool empty = true;
            for (int c = 0; c < n && empty; ++c)
                if (c != a && c != b && d2(a, c) + d2(b, c) < ab)
                    empty = false;
            if (empty)
                g.add_edge(a, b);
        }
    g.set_coordinates(std::move(pts));
    return g;
}

Graph add_travel_edges(const Graph& g, std::size_t count, std::uint64_t seed)
{
    const int n = g.size();
    std::vector<Edge> absent;
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k)
            if (!g.has_edge(i, k))
                absent.push_back({i, k});
    if (count > absent.size())
        throw std::invalid_argument("not enough non-edges to add " + std::to_string(count) + " travel edges");
    std::mt19937_64 rng(seed);
    Graph out = g;
    for (std::size_t t = 0; t < count; ++t) {
        const auto pick = static_cast<std::size_t>(
            uniform_int(rng, static_cast<int>(t), static_cast<int>(absent.size()) - 1));
        std::swap(absent[t], absent[pick]);
        out.add_edge(absent[t].u, absent[t].v);
    }
    return out;
}

std::string_view to_string(GraphFamily family)
{
    switch (family) {
    case GraphFamily::ErdosRenyi: return "er";
    case GraphFamily::PrefAttachment: return "pa";
    case GraphFamily::Adjacency: return "adjacency";
    }
    return "?";
}

GraphFamily parse_graph_family(std::string_view name)
{
    if (name == "er" || name == "erdos-renyi") return GraphFamily::ErdosRenyi;
    if (name == "pa" || name == "pref-attachment") return GraphFamily::PrefAttachment;
    if (name == "adjacency" || name == "adj") return GraphFamily::Adjacency;
    throw std::invalid_argument("unknown graph family '" + std::string(name) + "'");
}

Graph generate_graph(GraphFamily family, int n, double p, std::size_t travel, std::uint64_t seed)
{
    Graph g;
    switch (family) {
    case GraphFamily::ErdosRenyi: g = gen_erdos_renyi(n, p, seed); break;
    case GraphFamily::PrefAttachment: g = gen_pref_attachment(n, seed); break;
    case GraphFamily::Adjacency: g = gen_adjacency(n, seed); break;
    }
    if (travel > 0)
        g = add_travel_edges(g, travel, seed + 1);
    return g;
}

std::vector<double> draw_null_counts(std::span<const double> mu, std::mt19937_64& rng)
{
    std::vector<double> counts(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        counts[i] = poisson(rng, mu[i]);
    return counts;
}

Baselines gen_baselines(int n, int days, double mean_low, double mean_high, std::uint64_t seed)
{
    if (n < 1)
        throw std::invalid_argument("node count must be positive");
    if (days < 0)
        throw std::invalid_argument("day count must be non-negative");
    if (!(mean_low > 0.0) || !(mean_low <= mean_high))
        throw std::invalid_argument("baseline range must satisfy 0 < mean_low <= mean_high");
    std::mt19937_64 rng(seed);
    Baselines out;
    out.mu.resize(static_cast<std::size_t>(n));
    for (auto& m : out.mu)
        m = mean_low == mean_high ? mean_low : mean_low + (mean_high - mean_low) * uniform01(rng);
    out.null_counts.reserve(static_cast<std::size_t>(days));
    for (int d = 0; d < days; ++d)
        out.null_counts.push_back(draw_null_counts(out.mu, rng));
    return out;
}

double inject_rate(double spread_factor, int day, int dist)
{
    return spread_factor * day / (spread_factor + std::log(static_cast<double>(dist) + 1.0));
}

LabeledInject inject_outbreak(const Graph& g, std::span<const double> mu, const InjectConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    const int n = g.size();
    if (n < 1 || mu.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("baselines do not match the graph");
    std::mt19937_64 rng(seed);
    LabeledInject out;
    out.center = uniform_int(rng, 0, n - 1);
    const auto order = graph_distance_ordering(g, out.center, rng());
    out.distances = hop_distances(g, out.center);
    const auto reachable = static_cast<int>(
        std::count_if(out.distances.begin(), out.distances.end(), [](int d) { return d >= 0; }));

    for (int day = 1; day <= cfg.duration; ++day) {
        const int k = std::min(cfg.spread_rate * day, reachable);
        std::vector<int> affected(order.begin(), order.begin() + k);
        std::sort(affected.begin(), affected.end());
        Snapshot snap;
        snap.baselines.assign(mu.begin(), mu.end());
        snap.counts = draw_null_counts(mu, rng);
        for (int v : affected)
            snap.counts[static_cast<std::size_t>(v)] +=
                poisson(rng, inject_rate(cfg.spread_factor, day, out.distances[static_cast<std::size_t>(v)]));
        out.days.push_back(std::move(snap));
        out.affected.push_back(std::move(affected));
    }
    return out;
}

SimulatedExamples make_training_set(const Graph& g, std::span<const double> mu, const InjectConfig& cfg,
                                    std::size_t count, double inject_fraction, std::uint64_t seed)
{
    cfg.validate();
    if (count < 1)
        throw std::invalid_argument("training set size must be at least 1");
    if (!(inject_fraction >= 0.0 && inject_fraction <= 1.0))
        throw std::invalid_argument("inject fraction must lie in [0, 1]");
    SimulatedExamples out;
    for (std::size_t j = 0; j < count; ++j) {
        std::mt19937_64 rng(seed + j);
        if (uniform01(rng) < inject_fraction) {
            const int day = uniform_int(rng, 1, cfg.duration);
            auto inject = inject_outbreak(g, mu, cfg, rng());
            out.snapshots.push_back(std::move(inject.days[static_cast<std::size_t>(day - 1)]));
            out.labels.push_back(std::move(inject.affected[static_cast<std::size_t>(day - 1)]));
            out.days.push_back(day);
        } else {
            Snapshot snap;
            snap.baselines.assign(mu.begin(), mu.end());
            snap.counts = draw_null_counts(mu, rng);
            out.snapshots.push_back(std::move(snap));
            out.labels.emplace_back();
            out.days.push_back(0);
        }
    }
    return out;
}

}  // namespace graphlearn
