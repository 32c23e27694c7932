#include "graphlearn/search.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace graphlearn {

std::string_view to_string(SearchMethod method)
{
    return method == SearchMethod::Exact ? "exact" : "uls";
}

SearchMethod parse_search_method(std::string_view name)
{
    if (name == "exact" || name == "gs" || name == "graphscan")
        return SearchMethod::Exact;
    if (name == "uls")
        return SearchMethod::Uls;
    throw std::invalid_argument("unknown search engine: " + std::string(name));
}

namespace {

// A searchable subgraph with nodes relabelled so that local id order is
// descending priority order.
struct Region {
    std::vector<int> global;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<std::vector<int>> adj;

    int size() const { return static_cast<int>(global.size()); }
    double priority(int i) const { return a[static_cast<std::size_t>(i)] / b[static_cast<std::size_t>(i)]; }
};

Region make_region(const Graph& g, const ScanData& data, std::vector<int> members)
{
    std::sort(members.begin(), members.end(), [&](int l, int r) { return data.rank(l) < data.rank(r); });
    Region region;
    const std::size_t k = members.size();
    std::vector<int> local(static_cast<std::size_t>(g.size()), -1);
    region.a.resize(k);
    region.b.resize(k);
    region.adj.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        local[static_cast<std::size_t>(members[i])] = static_cast<int>(i);
        region.a[i] = data.a(members[i]);
        region.b[i] = data.b(members[i]);
    }
    for (std::size_t i = 0; i < k; ++i)
        for (int w : g.neighbors(members[i]))
            if (const int lw = local[static_cast<std::size_t>(w)]; lw >= 0)
                region.adj[i].push_back(lw);
    region.global = std::move(members);
    return region;
}

struct LocalResult {
    double score = 0.0;
    std::vector<int> members;  // local ids
};

ScoredSubset to_global(const Region& region, const ScanData& data, const LocalResult& res)
{
    std::vector<int> nodes;
    nodes.reserve(res.members.size());
    for (int l : res.members)
        nodes.push_back(region.global[static_cast<std::size_t>(l)]);
    std::sort(nodes.begin(), nodes.end());
    return data.score(std::move(nodes));
}

std::optional<LocalResult> uls_region(const Region& region, Family family, double floor)
{
    const int n = region.size();
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<double> sum_a = region.a;
    std::vector<double> sum_b = region.b;
    std::vector<int> stamp(static_cast<std::size_t>(n), -1);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            auto& p = parent[static_cast<std::size_t>(x)];
            p = parent[static_cast<std::size_t>(p)];
            x = p;
        }
        return x;
    };

    double best = floor;
    int best_threshold = -1;
    int best_node = -1;
    int i = 0;
    while (i < n) {
        // Nodes of equal priority enter the level set together.
        int j = i + 1;
        while (j < n && region.priority(j) == region.priority(i))
            ++j;
        for (int t = i; t < j; ++t)
            for (int w : region.adj[static_cast<std::size_t>(t)]) {
                if (w >= j)
                    continue;
                const int rt = find(t);
                const int rw = find(w);
                if (rt == rw)
                    continue;
                parent[static_cast<std::size_t>(rw)] = rt;
                sum_a[static_cast<std::size_t>(rt)] += sum_a[static_cast<std::size_t>(rw)];
                sum_b[static_cast<std::size_t>(rt)] += sum_b[static_cast<std::size_t>(rw)];
            }
        for (int t = i; t < j; ++t) {
            const int root = find(t);
            if (stamp[static_cast<std::size_t>(root)] == i)
                continue;
            stamp[static_cast<std::size_t>(root)] = i;
            const double f = family_score(family, sum_a[static_cast<std::size_t>(root)],
                                          sum_b[static_cast<std::size_t>(root)]);
            if (f > best) {
                best = f;
                best_threshold = j - 1;
                best_node = t;
            }
        }
        i = j;
    }
    if (best_node < 0)
        return std::nullopt;

    LocalResult res;
    res.score = best;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{best_node};
    seen[static_cast<std::size_t>(best_node)] = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        res.members.push_back(u);
        for (int w : region.adj[static_cast<std::size_t>(u)])
            if (w <= best_threshold && !seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                stack.push_back(w);
            }
    }
    return res;
}

class ExactSearch {
public:
    ExactSearch(const Region& region, Family family, std::uint64_t budget)
        : region_(region),
          family_(family),
          budget_(budget),
          n_(region.size()),
          in_set_(static_cast<std::size_t>(n_), 0),
          excluded_(static_cast<std::size_t>(n_), 0),
          mark_(static_cast<std::size_t>(n_), 0)
    {
    }

    std::optional<LocalResult> run(double floor, std::optional<LocalResult> seed)
    {
        best_ = floor;
        if (seed && seed->score > best_) {
            best_ = seed->score;
            best_set_ = std::move(seed->members);
        }
        for (int r = 0; r < n_; ++r) {
            // A positive-scoring set must contain a node with priority above 1,
            // and the root is the set's highest-priority member.
            if (!(region_.a[static_cast<std::size_t>(r)] > region_.b[static_cast<std::size_t>(r)]))
                break;
            in_set_[static_cast<std::size_t>(r)] = 1;
            set_ = {r};
            expand(region_.a[static_cast<std::size_t>(r)], region_.b[static_cast<std::size_t>(r)]);
            in_set_[static_cast<std::size_t>(r)] = 0;
            excluded_[static_cast<std::size_t>(r)] = 1;
        }
        if (best_set_.empty())
            return std::nullopt;
        return LocalResult{best_, best_set_};
    }

private:
    void expand(double sum_a, double sum_b)
    {
        if (++expansions_ > budget_)
            throw SearchBudgetExceeded("exact connected search exceeded its expansion budget of " +
                                       std::to_string(budget_));

        // Nodes reachable from the current set without passing through
        // excluded nodes; only these can still join it.
        ++stamp_;
        std::vector<int> pool;
        std::vector<int> queue(set_.begin(), set_.end());
        int frontier = n_;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int u = queue[head];
            for (int w : region_.adj[static_cast<std::size_t>(u)]) {
                const auto wi = static_cast<std::size_t>(w);
                if (in_set_[wi] || excluded_[wi] || mark_[wi] == stamp_)
                    continue;
                mark_[wi] = stamp_;
                pool.push_back(w);
                queue.push_back(w);
                if (head < set_.size())
                    frontier = std::min(frontier, w);
            }
        }
        std::sort(pool.begin(), pool.end());

        const double current = family_score(family_, sum_a, sum_b);
        if (current > best_) {
            best_ = current;
            best_set_ = set_;
        }
        double bound = current;
        std::size_t bound_len = 0;
        double cum_a = sum_a;
        double cum_b = sum_b;
        for (std::size_t k = 0; k < pool.size(); ++k) {
            cum_a += region_.a[static_cast<std::size_t>(pool[k])];
            cum_b += region_.b[static_cast<std::size_t>(pool[k])];
            const double f = family_score(family_, cum_a, cum_b);
            if (f > bound) {
                bound = f;
                bound_len = k + 1;
            }
        }
        if (bound <= best_)
            return;

        // If the bound-achieving extension is itself connected it is optimal
        // for this whole branch.
        if (bound_len > 0 && extension_connected(pool, bound_len)) {
            best_ = bound;
            best_set_ = set_;
            best_set_.insert(best_set_.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(bound_len));
            return;
        }

        const int u = frontier;
        const auto ui = static_cast<std::size_t>(u);
        in_set_[ui] = 1;
        set_.push_back(u);
        expand(sum_a + region_.a[ui], sum_b + region_.b[ui]);
        set_.pop_back();
        in_set_[ui] = 0;

        excluded_[ui] = 1;
        expand(sum_a, sum_b);
        excluded_[ui] = 0;
    }

    bool extension_connected(const std::vector<int>& pool, std::size_t len)
    {
        ++stamp_;
        const int target = stamp_;
        for (std::size_t k = 0; k < len; ++k)
            mark_[static_cast<std::size_t>(pool[k])] = target;
        // The current set is connected, so start from all of it at once.
        std::size_t reached = 0;
        std::vector<int> queue(set_.begin(), set_.end());
        ++stamp_;
        const int visited = stamp_;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int u = queue[head];
            for (int w : region_.adj[static_cast<std::size_t>(u)]) {
                const auto wi = static_cast<std::size_t>(w);
                if (mark_[wi] != target)
                    continue;
                mark_[wi] = visited;
                ++reached;
                queue.push_back(w);
            }
        }
        return reached == len;
    }

    const Region& region_;
    Family family_;
    std::uint64_t budget_;
    std::uint64_t expansions_ = 0;
    int n_;
    std::vector<char> in_set_;
    std::vector<char> excluded_;
    std::vector<int> mark_;
    int stamp_ = 0;
    std::vector<int> set_;
    double best_ = 0.0;
    std::vector<int> best_set_;
};

std::optional<LocalResult> search_region(const Region& region, SearchMethod method, Family family, double floor,
                                         std::uint64_t budget)
{
    auto heuristic = uls_region(region, family, floor);
    if (method == SearchMethod::Uls)
        return heuristic;
    ExactSearch exact(region, family, budget);
    return exact.run(floor, std::move(heuristic));
}

// Best score over subsets of `members`, ignoring connectivity.
double unconstrained_bound(const ScanData& data, std::vector<int>& members)
{
    std::sort(members.begin(), members.end(), [&](int l, int r) { return data.rank(l) < data.rank(r); });
    const Family family = data.distribution().family;
    double sa = 0.0;
    double sb = 0.0;
    double best = 0.0;
    for (int v : members) {
        sa += data.a(v);
        sb += data.b(v);
        best = std::max(best, family_score(family, sa, sb));
    }
    return best;
}

ScoredSubset zero_result(const ScanData& data)
{
    ScoredSubset out = data.score({0});
    out.score = 0.0;
    out.q_mle = 1.0;
    return out;
}

ScoredSubset whole_graph(const Graph& g, const ScanData& data, SearchMethod method, std::uint64_t budget)
{
    if (static_cast<std::size_t>(g.size()) != data.size())
        throw std::invalid_argument("graph and snapshot node counts differ");
    std::vector<int> all(static_cast<std::size_t>(g.size()));
    std::iota(all.begin(), all.end(), 0);
    const Region region = make_region(g, data, std::move(all));
    const auto res = search_region(region, method, data.distribution().family, 0.0, budget);
    return res ? to_global(region, data, *res) : zero_result(data);
}

}  // namespace

ScoredSubset best_connected_exact(const Graph& g, const Snapshot& snap, const Distribution& dist, std::uint64_t budget)
{
    return best_connected_exact(g, ScanData(snap, dist), budget);
}

ScoredSubset best_connected_exact(const Graph& g, const ScanData& data, std::uint64_t budget)
{
    return whole_graph(g, data, SearchMethod::Exact, budget);
}

ScoredSubset best_connected_uls(const Graph& g, const Snapshot& snap, const Distribution& dist)
{
    return best_connected_uls(g, ScanData(snap, dist));
}

ScoredSubset best_connected_uls(const Graph& g, const ScanData& data)
{
    return whole_graph(g, data, SearchMethod::Uls, 0);
}

ScoredSubset best_subgraph(const SearchEngine& engine, const Graph& g, const Snapshot& snap, const Distribution& dist)
{
    return best_subgraph(engine, g, ScanData(snap, dist));
}

ScoredSubset best_subgraph(const SearchEngine& engine, const Graph& g, const ScanData& data)
{
    if (!engine.neighborhood_k)
        return whole_graph(g, data, engine.method, engine.expansion_budget);
    const auto neighborhoods = local_neighborhoods(g, *engine.neighborhood_k);
    return best_subgraph(engine, g, data, neighborhoods);
}

ScoredSubset best_subgraph(const SearchEngine& engine, const Graph& g, const ScanData& data,
                           std::span<const Neighborhood> neighborhoods)
{
    if (!engine.neighborhood_k)
        return whole_graph(g, data, engine.method, engine.expansion_budget);
    if (static_cast<std::size_t>(g.size()) != data.size())
        throw std::invalid_argument("graph and snapshot node counts differ");
    const Family family = data.distribution().family;
    double best = 0.0;
    std::optional<ScoredSubset> winner;
    for (const Neighborhood& nb : neighborhoods) {
        std::vector<int> members = nb.members;
        if (unconstrained_bound(data, members) <= best)
            continue;
        const Region region = make_region(g, data, std::move(members));
        const auto res = search_region(region, engine.method, family, best, engine.expansion_budget);
        if (res && res->score > best) {
            best = res->score;
            winner = to_global(region, data, *res);
        }
    }
    return winner ? *winner : zero_result(data);
}

}  // namespace graphlearn
