#pragma once

// Independent oracles and generators shared by the unit and acceptance tests.
// Nothing here calls the search or scan code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <vector>

#include "graphlearn/graph.hpp"
#include "graphlearn/scan.hpp"

namespace testsupport {

using graphlearn::Graph;
using graphlearn::Snapshot;

inline double poisson_score(double c, double b)
{
    return c > b ? c * std::log(c / b) + b - c : 0.0;
}

// Score from raw counts for the Poisson family, summing in the given order.
inline double brute_score(const Snapshot& s, const std::vector<int>& nodes)
{
    double c = 0.0;
    double b = 0.0;
    for (int v : nodes) {
        c += s.counts[static_cast<std::size_t>(v)];
        b += s.baselines[static_cast<std::size_t>(v)];
    }
    return poisson_score(c, b);
}

inline std::vector<int> mask_nodes(std::uint32_t mask, int n)
{
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (mask & (1U << i))
            out.push_back(i);
    return out;
}

inline bool mask_connected(const Graph& g, std::uint32_t mask)
{
    const int n = g.size();
    int start = -1;
    for (int i = 0; i < n && start < 0; ++i)
        if (mask & (1U << i))
            start = i;
    if (start < 0)
        return false;
    std::uint32_t seen = 1U << start;
    std::queue<int> q;
    q.push(start);
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v = 0; v < n; ++v)
            if ((mask & (1U << v)) && !(seen & (1U << v)) && g.has_edge(u, v)) {
                seen |= 1U << v;
                q.push(v);
            }
    }
    return seen == mask;
}

struct BruteResult {
    double score = 0.0;
    std::vector<int> nodes;
};

// Max over every non-empty subset (optionally only the connected ones).
inline BruteResult brute_best(const Snapshot& s, const Graph* g = nullptr)
{
    const int n = static_cast<int>(s.size());
    BruteResult best;
    for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
        if (g && !mask_connected(*g, mask))
            continue;
        const auto nodes = mask_nodes(mask, n);
        const double f = brute_score(s, nodes);
        if (f > best.score) {
            best.score = f;
            best.nodes = nodes;
        }
    }
    return best;
}

inline Graph random_graph(int n, double p, std::mt19937_64& rng)
{
    std::bernoulli_distribution coin(p);
    Graph g(n);
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k)
            if (coin(rng))
                g.add_edge(i, k);
    return g;
}

// Poisson counts around random baselines, with a few elevated nodes.
inline Snapshot random_snapshot(int n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> base(1.0, 10.0);
    std::bernoulli_distribution hot(0.3);
    Snapshot s;
    for (int i = 0; i < n; ++i) {
        const double mu = base(rng);
        const double rate = hot(rng) ? mu * 2.0 : mu;
        s.baselines.push_back(mu);
        s.counts.push_back(static_cast<double>(std::poisson_distribution<int>(rate)(rng)));
    }
    return s;
}

// Random spanning tree (random attachment) plus extra random chords.
inline Graph random_tree_plus(int n, int chords, std::mt19937_64& rng)
{
    Graph g(n);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (int i = 1; i < n; ++i) {
        std::uniform_int_distribution<int> pick(0, i - 1);
        g.add_edge(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
    }
    std::uniform_int_distribution<int> node(0, n - 1);
    int added = 0;
    while (added < chords) {
        const int a = node(rng);
        const int b = node(rng);
        if (a != b && g.add_edge(a, b))
            ++added;
    }
    return g;
}

// Random connected node set of the given size grown by BFS-style frontier picks.
inline std::vector<int> random_connected_set(const Graph& g, int size, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> node(0, g.size() - 1);
    std::vector<int> set{node(rng)};
    std::vector<char> in(static_cast<std::size_t>(g.size()), 0);
    in[static_cast<std::size_t>(set[0])] = 1;
    while (static_cast<int>(set.size()) < size) {
        std::vector<int> frontier;
        for (int u : set)
            for (int v : g.neighbors(u))
                if (!in[static_cast<std::size_t>(v)])
                    frontier.push_back(v);
        if (frontier.empty())
            break;
        std::sort(frontier.begin(), frontier.end());
        frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
        const int v = frontier[std::uniform_int_distribution<std::size_t>(0, frontier.size() - 1)(rng)];
        in[static_cast<std::size_t>(v)] = 1;
        set.push_back(v);
    }
    std::sort(set.begin(), set.end());
    return set;
}

// Poisson snapshot with a planted affected set whose excess risks r = x/mu - 1
// satisfy the homogeneity and strength conditions, with eta the affected share of total baseline:
//   homogeneity  r_min_aff > r_mle_from_rmax(r_max_aff)
//   strength     eta * r_min_aff > r_max_from_rmle(r_max_unaff)
// Unaffected excess risks lie in [0, r_max_unaff].
struct PlantedSignal {
    Snapshot snap;
    double eta = 0.0;
    double r_min_aff = 0.0;
    double r_max_aff = 0.0;
    double r_max_unaff = 0.0;
};

inline PlantedSignal planted_snapshot(int n, const std::vector<int>& affected, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> base(1.0, 10.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PlantedSignal p;
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    for (int v : affected)
        in[static_cast<std::size_t>(v)] = 1;
    double total = 0.0;
    double aff = 0.0;
    for (int i = 0; i < n; ++i) {
        const double mu = base(rng);
        p.snap.baselines.push_back(mu);
        total += mu;
        if (in[static_cast<std::size_t>(i)])
            aff += mu;
    }
    p.eta = aff / total;
    p.r_max_unaff = 0.02 + 0.2 * unit(rng);
    const double need = graphlearn::r_max_from_rmle(p.r_max_unaff) / p.eta;
    p.r_min_aff = need * (1.05 + unit(rng));
    // Widest affected spread still homogeneous: r_mle_from_rmax(r_max_aff) < r_min_aff.
    const double widest = graphlearn::r_max_from_rmle(p.r_min_aff);
    p.r_max_aff = p.r_min_aff + (widest - p.r_min_aff) * (0.1 + 0.8 * unit(rng));
    for (int i = 0; i < n; ++i) {
        const double r = in[static_cast<std::size_t>(i)] ? p.r_min_aff + (p.r_max_aff - p.r_min_aff) * unit(rng)
                                                        : p.r_max_unaff * unit(rng);
        p.snap.counts.push_back(p.snap.baselines[static_cast<std::size_t>(i)] * (1.0 + r));
    }
    // Pin the extremes so the stated bounds are attained.
    if (!affected.empty()) {
        const auto a0 = static_cast<std::size_t>(affected.front());
        p.snap.counts[a0] = p.snap.baselines[a0] * (1.0 + p.r_min_aff);
        if (affected.size() > 1) {
            const auto a1 = static_cast<std::size_t>(affected.back());
            p.snap.counts[a1] = p.snap.baselines[a1] * (1.0 + p.r_max_aff);
        }
    }
    return p;
}

// Training examples planted on connected subsets of truth: one pair example per
// true edge, then random connected sets until `count` examples exist. Every
// example satisfies the homogeneity and strength conditions.
inline std::vector<Snapshot> planted_examples(const Graph& truth, int count, std::mt19937_64& rng)
{
    std::vector<Snapshot> out;
    const int n = truth.size();
    for (const auto& e : truth.edges())
        out.push_back(planted_snapshot(n, {e.u, e.v}, rng).snap);
    while (static_cast<int>(out.size()) < count) {
        const int size = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1));
        out.push_back(planted_snapshot(n, random_connected_set(truth, size, rng), rng).snap);
    }
    return out;
}

}  // namespace testsupport
