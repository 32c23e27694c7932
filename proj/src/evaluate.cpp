#include "graphlearn/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "graphlearn/parallel.hpp"

namespace graphlearn {

EdgeReport edge_precision_recall(const Graph& learned, const Graph& truth)
{
    if (learned.size() != truth.size())
        throw std::invalid_argument("learned and true graphs have different node counts");
    EdgeReport r;
    r.learned_edges = learned.edge_count();
    r.true_edges = truth.edge_count();
    for (const Edge& e : learned.edges())
        if (truth.has_edge(e.u, e.v))
            ++r.common_edges;
    r.precision_defined = r.learned_edges > 0;
    r.precision = r.precision_defined ? static_cast<double>(r.common_edges) / static_cast<double>(r.learned_edges) : 0.0;
    r.recall = r.true_edges > 0 ? static_cast<double>(r.common_edges) / static_cast<double>(r.true_edges) : 0.0;
    return r;
}

double overlap_coefficient(std::span<const int> detected, std::span<const int> truth)
{
    if (truth.empty())
        throw std::invalid_argument("true affected set is empty");
    if (detected.empty())
        return 0.0;
    std::vector<int> a(detected.begin(), detected.end());
    std::vector<int> b(truth.begin(), truth.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    std::vector<int> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    const std::size_t uni = a.size() + b.size() - common.size();
    return static_cast<double>(common.size()) / static_cast<double>(uni);
}

double detection_threshold(std::span<const double> null_scores, double fp_per_month)
{
    if (null_scores.size() < 30)
        throw std::invalid_argument("need at least 30 null scores to calibrate a threshold");
    if (!(fp_per_month > 0.0 && fp_per_month < kDaysPerMonth))
        throw std::invalid_argument("false positive rate must lie in (0, 30.4) per month");
    std::vector<double> sorted(null_scores.begin(), null_scores.end());
    std::sort(sorted.begin(), sorted.end());
    const double level = 1.0 - fp_per_month / kDaysPerMonth;
    const auto n = static_cast<long>(sorted.size());
    const long rank = std::clamp(std::lround(level * static_cast<double>(n)), 1L, n);
    return sorted[static_cast<std::size_t>(rank - 1)];
}

std::vector<DetectionReport> evaluate_detection(const Graph& g_eval, std::span<const LabeledInject> injects,
                                                std::span<const Snapshot> null_days, const DetectionOptions& options)
{
    if (injects.empty())
        throw std::invalid_argument("no test injects to evaluate");
    if (options.overlap_day < 1)
        throw std::invalid_argument("overlap day must be at least 1");
    const int n = g_eval.size();
    std::vector<ScanData> null_data;
    null_data.reserve(null_days.size());
    for (const auto& s : null_days) {
        if (s.size() != static_cast<std::size_t>(n))
            throw std::invalid_argument("null day does not match the graph's node count");
        null_data.emplace_back(s, options.dist);
    }
    // Flattened (inject, day) pairs.
    std::vector<ScanData> day_data;
    std::vector<std::size_t> first_day;
    for (const auto& inj : injects) {
        if (inj.days.empty() || inj.days.size() != inj.affected.size())
            throw std::invalid_argument("malformed inject");
        first_day.push_back(day_data.size());
        for (const auto& s : inj.days) {
            if (s.size() != static_cast<std::size_t>(n))
                throw std::invalid_argument("inject day does not match the graph's node count");
            day_data.emplace_back(s, options.dist);
        }
    }

    std::vector<DetectionReport> reports;
    for (int k : options.k_sweep) {
        if (k < 0 || k > n)
            throw std::invalid_argument("neighbourhood size " + std::to_string(k) + " outside [0, N]");
        SearchEngine engine;
        engine.method = options.method;
        engine.expansion_budget = options.expansion_budget;
        std::vector<Neighborhood> hoods;
        if (k > 0) {
            engine.neighborhood_k = k;
            hoods = local_neighborhoods(g_eval, k);
        }
        const std::size_t total = null_data.size() + day_data.size();
        std::vector<ScoredSubset> results(total);
        parallel_for(total, options.threads, [&](std::size_t t) {
            const ScanData& d = t < null_data.size() ? null_data[t] : day_data[t - null_data.size()];
            results[t] = best_subgraph(engine, g_eval, d, hoods);
        });

        DetectionReport rep;
        rep.k = k;
        for (std::size_t t = 0; t < null_data.size(); ++t)
            rep.null_scores.push_back(results[t].score);
        rep.threshold = detection_threshold(rep.null_scores, options.fp_per_month);
        std::size_t above = 0;
        std::size_t inject_days = 0;
        for (std::size_t i = 0; i < injects.size(); ++i) {
            const auto& inj = injects[i];
            const int duration = static_cast<int>(inj.days.size());
            int detected = duration;
            for (int d = duration; d >= 1; --d) {
                const double score = results[null_data.size() + first_day[i] + static_cast<std::size_t>(d - 1)].score;
                if (score > rep.threshold) {
                    detected = d;
                    ++above;
                }
            }
            inject_days += static_cast<std::size_t>(duration);
            rep.detection_days.push_back(detected);
            const int od = std::min(options.overlap_day, duration);
            const auto& found = results[null_data.size() + first_day[i] + static_cast<std::size_t>(od - 1)];
            const auto& truth = inj.affected[static_cast<std::size_t>(od - 1)];
            rep.overlaps.push_back(found.score > 0.0 && !truth.empty() ? overlap_coefficient(found.nodes, truth) : 0.0);
        }
        double days = 0.0;
        double overlap = 0.0;
        for (std::size_t i = 0; i < injects.size(); ++i) {
            days += rep.detection_days[i];
            overlap += rep.overlaps[i];
        }
        rep.mean_days = days / static_cast<double>(injects.size());
        rep.mean_overlap = overlap / static_cast<double>(injects.size());
        rep.tpr = static_cast<double>(above) / static_cast<double>(inject_days);
        reports.push_back(std::move(rep));
    }
    return reports;
}

void BenchConfig::validate() const
{
    if (n < 4)
        throw std::invalid_argument("n must be at least 4");
    if (graph == GraphFamily::ErdosRenyi && !(p > 0.0 && p < 1.0))
        throw std::invalid_argument("edge probability p must lie in (0, 1)");
    if (!(mean_low > 0.0) || !(mean_low <= mean_high))
        throw std::invalid_argument("baseline range must satisfy 0 < mean_low <= mean_high");
    inject.validate();
    if (train_size < 2)
        throw std::invalid_argument("train_size must be at least 2");
    if (!(inject_fraction >= 0.0 && inject_fraction <= 1.0))
        throw std::invalid_argument("inject_fraction must lie in [0, 1]");
    if (methods.empty() && !reference_graphs)
        throw std::invalid_argument("no methods to evaluate");
    if (learn_k && (*learn_k < 1 || *learn_k > n))
        throw std::invalid_argument("learn_k must lie in [1, n]");
    if (replicates < 2)
        throw std::invalid_argument("replicates must be at least 2");
    if (k_sweep.empty())
        throw std::invalid_argument("k_sweep is empty");
    for (int k : k_sweep)
        if (k < 0 || k > n)
            throw std::invalid_argument("k_sweep values must lie in [0, n]");
    if (!(fp_per_month > 0.0 && fp_per_month < kDaysPerMonth))
        throw std::invalid_argument("fp_per_month must lie in (0, 30.4)");
    if (null_days < 30)
        throw std::invalid_argument("null_days must be at least 30");
    if (test_injects < 1)
        throw std::invalid_argument("test_injects must be at least 1");
    if (seeds.empty())
        throw std::invalid_argument("no seeds given");
}

nlohmann::ordered_json to_json(const BenchConfig& cfg)
{
    nlohmann::ordered_json j;
    j["graph"] = std::string(to_string(cfg.graph));
    j["n"] = cfg.n;
    j["p"] = cfg.p;
    j["travel_edges"] = cfg.travel_edges;
    j["mean_low"] = cfg.mean_low;
    j["mean_high"] = cfg.mean_high;
    j["spread_rate"] = cfg.inject.spread_rate;
    j["spread_factor"] = cfg.inject.spread_factor;
    j["duration"] = cfg.inject.duration;
    j["train_size"] = cfg.train_size;
    j["inject_fraction"] = cfg.inject_fraction;
    auto methods = nlohmann::ordered_json::array();
    for (auto m : cfg.methods)
        methods.push_back(std::string(to_string(m)));
    j["methods"] = methods;
    j["learn_engine"] = std::string(to_string(cfg.learn_engine));
    j["learn_k"] = cfg.learn_k ? nlohmann::ordered_json(*cfg.learn_k) : nlohmann::ordered_json(nullptr);
    j["replicates"] = cfg.replicates;
    j["detect_engine"] = std::string(to_string(cfg.detect_engine));
    j["k_sweep"] = cfg.k_sweep;
    j["fp_per_month"] = cfg.fp_per_month;
    j["null_days"] = cfg.null_days;
    j["test_injects"] = cfg.test_injects;
    j["reference_graphs"] = cfg.reference_graphs;
    j["seeds"] = cfg.seeds;
    return j;
}

BenchConfig bench_config_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw std::invalid_argument("bench config must be a JSON object");
    BenchConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "graph") cfg.graph = parse_graph_family(value.get<std::string>());
            else if (key == "n") cfg.n = value.get<int>();
            else if (key == "p") cfg.p = value.get<double>();
            else if (key == "travel_edges") cfg.travel_edges = value.get<std::size_t>();
            else if (key == "mean_low") cfg.mean_low = value.get<double>();
            else if (key == "mean_high") cfg.mean_high = value.get<double>();
            else if (key == "spread_rate") cfg.inject.spread_rate = value.get<int>();
            else if (key == "spread_factor") cfg.inject.spread_factor = value.get<double>();
            else if (key == "duration") cfg.inject.duration = value.get<int>();
            else if (key == "train_size") cfg.train_size = value.get<std::size_t>();
            else if (key == "inject_fraction") cfg.inject_fraction = value.get<double>();
            else if (key == "methods") {
                cfg.methods.clear();
                for (const auto& m : value)
                    cfg.methods.push_back(parse_edge_selector(m.get<std::string>()));
            }
            else if (key == "learn_engine") cfg.learn_engine = parse_search_method(value.get<std::string>());
            else if (key == "learn_k") {
                if (value.is_null()) cfg.learn_k.reset();
                else cfg.learn_k = value.get<int>();
            }
            else if (key == "replicates") cfg.replicates = value.get<std::size_t>();
            else if (key == "detect_engine") cfg.detect_engine = parse_search_method(value.get<std::string>());
            else if (key == "k_sweep") cfg.k_sweep = value.get<std::vector<int>>();
            else if (key == "fp_per_month") cfg.fp_per_month = value.get<double>();
            else if (key == "null_days") cfg.null_days = value.get<std::size_t>();
            else if (key == "test_injects") cfg.test_injects = value.get<std::size_t>();
            else if (key == "reference_graphs") cfg.reference_graphs = value.get<bool>();
            else if (key == "seeds") cfg.seeds = value.get<std::vector<std::uint64_t>>();
            else throw std::invalid_argument("unknown bench config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad bench config value: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::uint64_t stage_seed(std::uint64_t master, Stage stage)
{
    // splitmix64 finaliser over master + stage * golden ratio.
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(stage);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

template <class Fn>
auto run_stage(const char* stage, std::uint64_t seed, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("stage ") + stage + " (seed " + std::to_string(seed) + "): " + e.what());
    }
}

}  // namespace

BenchResult run_benchmark(const BenchConfig& cfg)
{
    cfg.validate();
    BenchResult out;
    out.config = cfg;
    for (std::uint64_t seed : cfg.seeds) {
        SeedResult sr;
        sr.seed = seed;
        sr.truth = run_stage("graph", seed, [&] { return generate_graph(cfg.graph, cfg.n, cfg.p, cfg.travel_edges, stage_seed(seed, Stage::Graph)); });
        const auto mu = run_stage("baselines", seed, [&] {
            return gen_baselines(cfg.n, 0, cfg.mean_low, cfg.mean_high, stage_seed(seed, Stage::Baselines)).mu;
        });
        const TrainingSet ts = run_stage("training", seed, [&] {
            auto ex = make_training_set(sr.truth, mu, cfg.inject, cfg.train_size, cfg.inject_fraction,
                                        stage_seed(seed, Stage::Training));
            return TrainingSet(std::move(ex.snapshots));
        });

        SearchEngine learn_engine;
        learn_engine.method = cfg.learn_engine;
        learn_engine.neighborhood_k = cfg.learn_k;
        for (EdgeSelector sel : cfg.methods) {
            MethodResult mr;
            mr.method = std::string(to_string(sel));
            run_stage("learn", seed, [&] {
                LearnOptions opts;
                opts.selector = sel;
                opts.engine = learn_engine;
                opts.threads = cfg.threads;
                const GraphSequence seq = learn_sequence(ts, opts);
                const SignificanceCurve curve = significance_test(ts, seq, learn_engine, cfg.replicates,
                                                                  stage_seed(seed, Stage::Significance), cfg.threads);
                mr.graph = curve.best_graph;
                mr.best_m = curve.best_m;
                return 0;
            });
            mr.edges = edge_precision_recall(mr.graph, sr.truth);
            sr.methods.push_back(std::move(mr));
        }
        if (cfg.reference_graphs) {
            MethodResult t;
            t.method = "true";
            t.graph = sr.truth;
            t.best_m = sr.truth.edge_count();
            t.edges = edge_precision_recall(t.graph, sr.truth);
            sr.methods.push_back(std::move(t));
            MethodResult c;
            c.method = "complete";
            c.graph = Graph::complete(cfg.n);
            c.best_m = c.graph.edge_count();
            c.edges = edge_precision_recall(c.graph, sr.truth);
            sr.methods.push_back(std::move(c));
        }

        std::vector<LabeledInject> injects;
        std::vector<Snapshot> nulls;
        run_stage("test data", seed, [&] {
            const auto inject_seed = stage_seed(seed, Stage::TestInjects);
            for (std::size_t i = 0; i < cfg.test_injects; ++i)
                injects.push_back(inject_outbreak(sr.truth, mu, cfg.inject, inject_seed + i));
            std::mt19937_64 rng(stage_seed(seed, Stage::NullDays));
            for (std::size_t d = 0; d < cfg.null_days; ++d) {
                Snapshot s;
                s.baselines = mu;
                s.counts = draw_null_counts(mu, rng);
                nulls.push_back(std::move(s));
            }
            return 0;
        });

        DetectionOptions dopts;
        dopts.method = cfg.detect_engine;
        dopts.fp_per_month = cfg.fp_per_month;
        dopts.k_sweep = cfg.k_sweep;
        dopts.threads = cfg.threads;
        for (auto& mr : sr.methods)
            mr.detection = run_stage("detect", seed, [&] { return evaluate_detection(mr.graph, injects, nulls, dopts); });
        out.seeds.push_back(std::move(sr));
    }
    return out;
}

namespace {

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p)
{
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + p.string());
    return out;
}

void write_graph_file(const std::filesystem::path& p, const Graph& g)
{
    auto out = open_out(p);
    write_edge_list(out, g);
}

}  // namespace

void write_bench_bundle(const BenchResult& result, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    if (result.seeds.empty())
        throw std::invalid_argument("benchmark result has no seeds");
    const auto& methods0 = result.seeds.front().methods;
    const double ns = static_cast<double>(result.seeds.size());

    auto edges = open_out(dir / "edges.csv");
    edges << "method,true_edges,learned_edges,precision,recall\n";
    for (std::size_t m = 0; m < methods0.size(); ++m) {
        double te = 0, le = 0, pr = 0, rc = 0;
        for (const auto& s : result.seeds) {
            const auto& e = s.methods[m].edges;
            te += static_cast<double>(e.true_edges);
            le += static_cast<double>(e.learned_edges);
            pr += e.precision;
            rc += e.recall;
        }
        edges << methods0[m].method << ',' << fmt(te / ns) << ',' << fmt(le / ns) << ',' << fmt(pr / ns) << ','
              << fmt(rc / ns) << '\n';
    }

    auto det = open_out(dir / "detection.csv");
    det << "method,k,mean_days,mean_overlap,tpr\n";
    for (std::size_t m = 0; m < methods0.size(); ++m)
        for (std::size_t k = 0; k < methods0[m].detection.size(); ++k) {
            double days = 0, ov = 0, tpr = 0;
            for (const auto& s : result.seeds) {
                const auto& r = s.methods[m].detection[k];
                days += r.mean_days;
                ov += r.mean_overlap;
                tpr += r.tpr;
            }
            det << methods0[m].method << ',' << methods0[m].detection[k].k << ',' << fmt(days / ns) << ','
                << fmt(ov / ns) << ',' << fmt(tpr / ns) << '\n';
        }

    nlohmann::ordered_json manifest;
    manifest["config"] = to_json(result.config);
    auto seeds = nlohmann::ordered_json::array();
    for (const auto& s : result.seeds) {
        const auto sub = dir / ("seed_" + std::to_string(s.seed));
        std::filesystem::create_directories(sub);
        write_graph_file(sub / "truth.edges", s.truth);
        auto se = open_out(sub / "edges.csv");
        se << "method,true_edges,learned_edges,precision,recall\n";
        auto sd = open_out(sub / "detection.csv");
        sd << "method,k,mean_days,mean_overlap,tpr,threshold\n";
        auto methods = nlohmann::ordered_json::array();
        for (const auto& m : s.methods) {
            write_graph_file(sub / (m.method + ".edges"), m.graph);
            se << m.method << ',' << m.edges.true_edges << ',' << m.edges.learned_edges << ',' << fmt(m.edges.precision)
               << ',' << fmt(m.edges.recall) << '\n';
            for (const auto& r : m.detection)
                sd << m.method << ',' << r.k << ',' << fmt(r.mean_days) << ',' << fmt(r.mean_overlap) << ','
                   << fmt(r.tpr) << ',' << fmt(r.threshold) << '\n';
            methods.push_back({{"method", m.method}, {"best_m", m.best_m}, {"precision_defined", m.edges.precision_defined}});
        }
        nlohmann::ordered_json stages;
        stages["graph"] = stage_seed(s.seed, Stage::Graph);
        stages["baselines"] = stage_seed(s.seed, Stage::Baselines);
        stages["training"] = stage_seed(s.seed, Stage::Training);
        stages["significance"] = stage_seed(s.seed, Stage::Significance);
        stages["test_injects"] = stage_seed(s.seed, Stage::TestInjects);
        stages["null_days"] = stage_seed(s.seed, Stage::NullDays);
        seeds.push_back({{"seed", s.seed}, {"stage_seeds", stages}, {"methods", methods}});
    }
    manifest["seeds"] = seeds;
    auto mf = open_out(dir / "manifest.json");
    mf << manifest.dump(2) << '\n';
}

}  // namespace graphlearn
