#include "graphlearn/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "graphlearn/parallel.hpp"

namespace graphlearn {

TrainingSet::TrainingSet(std::vector<Snapshot> snapshots, Distribution dist)
    : dist_(dist), snapshots_(std::move(snapshots))
{
    if (snapshots_.empty())
        throw std::invalid_argument("training set must contain at least one example");
    n_ = static_cast<int>(snapshots_.front().size());
    data_.reserve(snapshots_.size());
    optima_.reserve(snapshots_.size());
    for (std::size_t j = 0; j < snapshots_.size(); ++j) {
        if (static_cast<int>(snapshots_[j].size()) != n_)
            throw std::invalid_argument("training example " + std::to_string(j) + " has a different node count");
        data_.emplace_back(snapshots_[j], dist_);
        optima_.push_back(fast_subset_scan(data_.back()));
        if (optima_.back().score > 0.0)
            scoring_.push_back(j);
    }
    if (scoring_.empty())
        throw std::invalid_argument("every training example scores 0; nothing to learn from");
}

CorrelationMatrix pearson_correlations(const TrainingSet& ts)
{
    const std::size_t J = ts.size();
    if (J < 2)
        throw std::invalid_argument("correlations need at least two training examples");
    const int n = ts.node_count();
    const auto nn = static_cast<std::size_t>(n);
    std::vector<double> centered(nn * J);
    std::vector<double> norm(nn, 0.0);
    for (std::size_t i = 0; i < nn; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < J; ++j)
            mean += ts.snapshot(j).counts[i];
        mean /= static_cast<double>(J);
        for (std::size_t j = 0; j < J; ++j) {
            const double c = ts.snapshot(j).counts[i] - mean;
            centered[i * J + j] = c;
            norm[i] += c * c;
        }
        norm[i] = std::sqrt(norm[i]);
    }
    std::vector<double> values(nn * nn, 0.0);
    for (std::size_t i = 0; i < nn; ++i) {
        values[i * nn + i] = 1.0;
        for (std::size_t k = i + 1; k < nn; ++k) {
            double rho = 0.0;
            if (norm[i] > 0.0 && norm[k] > 0.0) {
                double dot = 0.0;
                for (std::size_t j = 0; j < J; ++j)
                    dot += centered[i * J + j] * centered[k * J + j];
                rho = std::clamp(dot / (norm[i] * norm[k]), -1.0, 1.0);
            }
            values[i * nn + k] = values[k * nn + i] = rho;
        }
    }
    return CorrelationMatrix(n, std::move(values));
}

std::string_view to_string(EdgeSelector selector)
{
    switch (selector) {
    case EdgeSelector::Corr: return "corr";
    case EdgeSelector::PsCorr: return "pscorr";
    case EdgeSelector::GrCorr: return "grcorr";
    }
    return "unknown";
}

EdgeSelector parse_edge_selector(std::string_view name)
{
    if (name == "corr") return EdgeSelector::Corr;
    if (name == "pscorr") return EdgeSelector::PsCorr;
    if (name == "grcorr") return EdgeSelector::GrCorr;
    throw std::invalid_argument("unknown edge selector: " + std::string(name));
}

Graph GraphSequence::graph_at(std::size_t m) const
{
    const std::size_t M = removals.size();
    if (m > M)
        throw std::invalid_argument("graph_at: m exceeds the complete graph's edge count");
    Graph g = Graph::complete(n);
    for (std::size_t i = 0; i < M - m; ++i)
        g.erase_edge(removals[i]);
    return g;
}

const ScoredSubset& GraphSequence::best_at(std::size_t m, std::size_t j) const
{
    const auto& changes = history.at(j);
    for (auto it = changes.rbegin(); it != changes.rend(); ++it)
        if (it->m >= m)
            return it->best;
    throw std::invalid_argument("best_at: m exceeds the complete graph's edge count");
}

namespace {

constexpr double kTieTolerance = 1e-12;

// Whether removing e splits the (connected) subset `s` of g.
bool splits(const Graph& g, Edge e, const NodeMask& s)
{
    if (!s.test(e.u) || !s.test(e.v))
        return false;
    if (NodeMask::intersects3(g.adjacency(e.u), g.adjacency(e.v), s))
        return false;
    return !connected_within(g, s, e);
}

// Complete-graph edges sorted by ascending correlation, then lexicographically.
std::vector<Edge> correlation_ranking(const CorrelationMatrix& corr)
{
    const int n = corr.size();
    std::vector<Edge> edges = Graph::complete(n).edges();
    std::stable_sort(edges.begin(), edges.end(), [&](Edge l, Edge r) { return corr(l.u, l.v) < corr(r.u, r.v); });
    return edges;
}

using Results = std::unordered_map<std::size_t, ScoredSubset>;  // example -> new best

// The running state of the greedy learner for one removal sequence.
class SequenceRunner {
public:
    SequenceRunner(const TrainingSet& ts, const SearchEngine& engine, unsigned threads)
        : ts_(ts), engine_(engine), threads_(threads), graph_(Graph::complete(ts.node_count()))
    {
        const std::size_t J = ts.size();
        const auto M = graph_.edge_count();
        state_.best.reserve(J);
        masks_.reserve(J);
        for (std::size_t j = 0; j < J; ++j) {
            state_.best.push_back(ts.unconstrained(j));
            masks_.emplace_back(ts.node_count(), state_.best.back().nodes);
        }
        seq_.n = ts.node_count();
        seq_.fnorm.assign(M + 1, 0.0);
        seq_.fnorm[M] = ratio_mean();
        seq_.history.resize(J);
        for (std::size_t j = 0; j < J; ++j)
            seq_.history[j].push_back({M, state_.best[j]});
        seq_.calls_per_example.assign(J, 0);
        seq_.removals.reserve(M);
    }

    const Graph& graph() const { return graph_; }
    const LearnerState& state() const { return state_; }
    const TrainingSet& training() const { return ts_; }
    const SearchEngine& engine() const { return engine_; }
    unsigned threads() const { return threads_; }

    double ratio_sum() const
    {
        double sum = 0.0;
        for (std::size_t j : ts_.scoring_examples())
            sum += state_.best[j].score / ts_.unconstrained(j).score;
        return sum;
    }
    double ratio_mean() const { return ratio_sum() / static_cast<double>(ts_.scoring_examples().size()); }

    /// BestSubgraph on `g` for each listed example, in parallel.
    std::vector<ScoredSubset> search(const Graph& g, std::span<const std::size_t> examples)
    {
        std::vector<ScoredSubset> out(examples.size());
        parallel_for(examples.size(), threads_, [&](std::size_t i) {
            out[i] = best_subgraph(engine_, g, ts_.scan_data(examples[i]));
        });
        for (std::size_t j : examples)
            ++seq_.calls_per_example[j];
        seq_.bestsubgraph_calls += examples.size();
        return out;
    }

    /// Removes e; examples whose best subgraph it splits take the supplied
    /// result or are re-searched.
    void remove(Edge e, const Results& known = {})
    {
        std::vector<std::size_t> affected;
        for (std::size_t j : ts_.scoring_examples())
            if (splits(graph_, e, masks_[j]))
                affected.push_back(j);
        graph_.erase_edge(e);

        std::vector<std::size_t> missing;
        for (std::size_t j : affected)
            if (!known.count(j))
                missing.push_back(j);
        const auto fresh = search(graph_, missing);

        const std::size_t m = graph_.edge_count();
        std::size_t next_fresh = 0;
        for (std::size_t j : affected) {
            const auto it = known.find(j);
            state_.best[j] = it != known.end() ? it->second : fresh[next_fresh++];
            masks_[j] = NodeMask(ts_.node_count(), state_.best[j].nodes);
            seq_.history[j].push_back({m, state_.best[j]});
        }
        seq_.removals.push_back(e);
        seq_.fnorm[m] = ratio_mean();
    }

    GraphSequence finish() { return std::move(seq_); }

private:
    const TrainingSet& ts_;
    SearchEngine engine_;
    unsigned threads_;
    Graph graph_;
    LearnerState state_;
    std::vector<NodeMask> masks_;
    GraphSequence seq_;
};

// Examples whose current best subgraph each edge would disconnect, keyed by
// edge index. Only bridges of the induced subgraphs can disconnect them.
std::unordered_map<std::size_t, std::vector<std::size_t>> disconnect_lists(const Graph& g, const TrainingSet& ts,
                                                                          const LearnerState& state)
{
    std::unordered_map<std::size_t, std::vector<std::size_t>> lists;
    for (std::size_t j : ts.scoring_examples()) {
        const auto& nodes = state.best[j].nodes;
        if (nodes.size() < 2)
            continue;
        const auto bridges = subset_bridges(g, nodes);
        // A spanning tree of S*_mj has |S*_mj| - 1 edges and only tree edges
        // can be bridges.
        if (bridges.size() > nodes.size() - 1)
            throw std::logic_error("more disconnecting edges than a spanning tree allows");
        for (const Edge& b : bridges)
            lists[edge_index(g.size(), b)].push_back(j);
    }
    return lists;
}

struct Choice {
    Edge edge;
    Results results;  // searches already done for this edge
};

class EdgeChooser {
public:
    EdgeChooser(const CorrelationMatrix& corr, EdgeSelector selector, bool use_cache)
        : ranking_(correlation_ranking(corr)), selector_(selector), use_cache_(use_cache)
    {
    }

    template <class SearchFn>
    Choice choose(const Graph& g, const TrainingSet& ts, const LearnerState& state, double ratio_sum,
                  SearchFn&& search)
    {
        if (g.edge_count() == 0)
            throw std::invalid_argument("best_edge: graph has no edges");
        const int n = g.size();
        if (selector_ == EdgeSelector::Corr) {
            for (const Edge& e : ranking_)
                if (g.has_edge(e.u, e.v))
                    return {e, {}};
        }
        const auto lists = disconnect_lists(g, ts, state);
        auto count_of = [&](const Edge& e) {
            const auto it = lists.find(edge_index(n, e));
            return it == lists.end() ? std::size_t{0} : it->second.size();
        };

        if (selector_ == EdgeSelector::PsCorr) {
            std::optional<Edge> best;
            std::size_t best_count = std::numeric_limits<std::size_t>::max();
            for (const Edge& e : ranking_) {
                if (!g.has_edge(e.u, e.v))
                    continue;
                const std::size_t c = count_of(e);
                if (c < best_count) {
                    best_count = c;
                    best = e;
                    if (c == 0)
                        break;
                }
            }
            return {*best, {}};
        }

        // GrCorr. Edges that disconnect nothing keep the mean normalised
        // score unchanged, which is the best possible outcome; the lowest-
        // correlation such edge wins unless an earlier-ranked edge also
        // leaves the score unchanged after re-searching.
        const double examples = static_cast<double>(ts.scoring_examples().size());
        std::optional<Choice> best;
        double best_fnorm = -std::numeric_limits<double>::infinity();
        const double current = ratio_sum / examples;
        for (const Edge& e : ranking_) {
            if (!g.has_edge(e.u, e.v))
                continue;
            const auto it = lists.find(edge_index(n, e));
            if (it == lists.end()) {
                if (!best || current > best_fnorm + kTieTolerance)
                    best = Choice{e, {}};
                break;
            }
            Choice candidate{e, evaluate(g, e, it->second, ts, search)};
            double delta = 0.0;
            for (std::size_t j : it->second)
                delta += (candidate.results.at(j).score - state.best[j].score) / ts.unconstrained(j).score;
            const double fnorm = (ratio_sum + delta) / examples;
            if (!best || fnorm > best_fnorm + kTieTolerance) {
                best_fnorm = fnorm;
                best = std::move(candidate);
                if (fnorm >= current - kTieTolerance)
                    break;
            }
        }
        return std::move(*best);
    }

private:
    template <class SearchFn>
    Results evaluate(const Graph& g, Edge e, const std::vector<std::size_t>& examples, const TrainingSet& ts,
                     SearchFn&& search)
    {
        Results results;
        const std::size_t eid = edge_index(g.size(), e);
        std::vector<std::size_t> pending;
        for (std::size_t j : examples) {
            // An exact optimum on a supergraph stays optimal while it remains connected.
            if (use_cache_) {
                const auto it = cache_.find(key(ts, j, eid));
                if (it != cache_.end() && connected_within(g, NodeMask(g.size(), it->second.nodes), e)) {
                    results.emplace(j, it->second);
                    continue;
                }
            }
            pending.push_back(j);
        }
        if (!pending.empty()) {
            const Graph reduced = remove_edge(g, e);
            auto found = search(reduced, pending);
            for (std::size_t i = 0; i < pending.size(); ++i) {
                if (use_cache_)
                    cache_[key(ts, pending[i], eid)] = found[i];
                results.emplace(pending[i], std::move(found[i]));
            }
        }
        return results;
    }

    static std::size_t key(const TrainingSet& ts, std::size_t j, std::size_t eid)
    {
        const auto n = static_cast<std::size_t>(ts.node_count());
        return j * (n * (n - 1) / 2) + eid;
    }

    std::vector<Edge> ranking_;
    EdgeSelector selector_;
    bool use_cache_;
    std::unordered_map<std::size_t, ScoredSubset> cache_;
};

}  // namespace

Edge best_edge(const Graph& g, const TrainingSet& ts, const LearnerState& state, const CorrelationMatrix& corr,
               EdgeSelector selector, const SearchEngine& engine)
{
    if (state.best.size() != ts.size())
        throw std::invalid_argument("best_edge: state does not match training set");
    double ratio_sum = 0.0;
    for (std::size_t j : ts.scoring_examples())
        ratio_sum += state.best[j].score / ts.unconstrained(j).score;
    EdgeChooser chooser(corr, selector, false);
    auto search = [&](const Graph& reduced, std::span<const std::size_t> examples) {
        std::vector<ScoredSubset> out;
        for (std::size_t j : examples)
            out.push_back(best_subgraph(engine, reduced, ts.scan_data(j)));
        return out;
    };
    return chooser.choose(g, ts, state, ratio_sum, search).edge;
}

GraphSequence learn_sequence(const TrainingSet& ts, const LearnOptions& options)
{
    const auto corr = pearson_correlations(ts);
    SequenceRunner runner(ts, options.engine, options.threads);
    const bool cache = options.engine.method == SearchMethod::Exact && !options.engine.neighborhood_k;
    EdgeChooser chooser(corr, options.selector, cache);
    auto search = [&](const Graph& g, std::span<const std::size_t> examples) { return runner.search(g, examples); };
    while (runner.graph().edge_count() > 0) {
        auto choice = chooser.choose(runner.graph(), ts, runner.state(), runner.ratio_sum(), search);
        runner.remove(choice.edge, choice.results);
    }
    return runner.finish();
}

GraphSequence replay_sequence(const TrainingSet& ts, std::span<const Edge> removal_order, const SearchEngine& engine)
{
    const int n = ts.node_count();
    const std::size_t M = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
    if (removal_order.size() != M)
        throw std::invalid_argument("removal order must list every edge of the complete graph");
    SequenceRunner runner(ts, engine, 1);
    for (const Edge& e : removal_order)
        runner.remove(e);
    return runner.finish();
}

SignificanceCurve significance_test(const TrainingSet& ts, const GraphSequence& seq, const SearchEngine& engine,
                                    std::size_t replicates, std::uint64_t seed, unsigned threads)
{
    if (replicates < 2)
        throw std::invalid_argument("significance test needs at least two replicates");
    const std::size_t M = seq.max_edges();
    if (seq.fnorm.size() != M + 1 || seq.n != ts.node_count())
        throw std::invalid_argument("sequence does not match training set");

    const std::vector<Edge> all_edges = Graph::complete(ts.node_count()).edges();
    std::vector<std::vector<double>> curves(replicates);
    std::vector<std::vector<std::size_t>> calls(replicates);
    parallel_for(replicates, threads, [&](std::size_t r) {
        std::vector<Edge> order = all_edges;
        std::mt19937_64 rng(seed + r);
        std::shuffle(order.begin(), order.end(), rng);
        auto replay = replay_sequence(ts, order, engine);
        curves[r] = std::move(replay.fnorm);
        calls[r] = std::move(replay.calls_per_example);
    });

    SignificanceCurve out;
    out.replicates = replicates;
    out.seed = seed;
    out.mu.assign(M + 1, 0.0);
    out.sigma.assign(M + 1, 0.0);
    out.z.assign(M + 1, std::numeric_limits<double>::quiet_NaN());
    const double R = static_cast<double>(replicates);
    for (std::size_t m = 0; m <= M; ++m) {
        double mean = 0.0;
        for (const auto& c : curves)
            mean += c[m];
        mean /= R;
        double ss = 0.0;
        for (const auto& c : curves)
            ss += (c[m] - mean) * (c[m] - mean);
        out.mu[m] = mean;
        out.sigma[m] = std::sqrt(ss / (R - 1.0));
        if (out.sigma[m] >= kMinSigma)
            out.z[m] = (seq.fnorm[m] - mean) / out.sigma[m];
    }
    std::optional<std::size_t> best;
    for (std::size_t m = 0; m <= M; ++m)
        if (!std::isnan(out.z[m]) && (!best || out.z[m] > out.z[*best]))
            best = m;
    out.best_m = best.value_or(M);
    out.best_graph = seq.graph_at(out.best_m);

    out.calls_per_example.assign(ts.size(), 0.0);
    for (const auto& c : calls) {
        for (std::size_t j = 0; j < c.size(); ++j)
            out.calls_per_example[j] += static_cast<double>(c[j]) / R;
        out.bestsubgraph_calls += std::accumulate(c.begin(), c.end(), std::size_t{0});
    }
    return out;
}

double mean_normalized_score(const TrainingSet& ts, const Graph& g, const SearchEngine& engine)
{
    double sum = 0.0;
    for (std::size_t j : ts.scoring_examples())
        sum += best_subgraph(engine, g, ts.scan_data(j)).score / ts.unconstrained(j).score;
    return sum / static_cast<double>(ts.scoring_examples().size());
}

}  // namespace graphlearn
