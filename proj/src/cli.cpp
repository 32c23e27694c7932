#include "graphlearn/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphlearn/dataset.hpp"
#include "graphlearn/evaluate.hpp"
#include "graphlearn/learn.hpp"
#include "graphlearn/parallel.hpp"
#include "graphlearn/search.hpp"
#include "graphlearn/simulate.hpp"

namespace graphlearn {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

unsigned default_threads()
{
    if (const char* env = std::getenv("GRAPHLEARN_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 0)
                return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return 0;
}

std::string json_scalar(const nlohmann::json& v)
{
    if (v.is_string())
        return v.get<std::string>();
    return v.dump();
}

// Turns a JSON config object into command-line tokens for every key not given
// explicitly; keys map to long options with '_' replaced by '-'.
std::vector<std::string> config_tokens(const nlohmann::json& cfg, const std::vector<std::string>& explicit_args)
{
    if (!cfg.is_object())
        throw UsageError("config file must hold a JSON object");
    std::vector<std::string> tokens;
    for (const auto& [key, value] : cfg.items()) {
        std::string name = "--" + key;
        std::replace(name.begin(), name.end(), '_', '-');
        if (name == "--config")
            continue;
        const bool given = std::any_of(explicit_args.begin(), explicit_args.end(), [&](const std::string& a) {
            return a == name || a.rfind(name + "=", 0) == 0;
        });
        if (given || value.is_null())
            continue;
        if (value.is_boolean()) {
            if (value.get<bool>())
                tokens.push_back(name);
            continue;
        }
        tokens.push_back(name);
        if (value.is_array()) {
            std::string joined;
            for (const auto& item : value) {
                if (!joined.empty())
                    joined += ',';
                joined += json_scalar(item);
            }
            tokens.push_back(joined);
        } else {
            tokens.push_back(json_scalar(value));
        }
    }
    return tokens;
}

// Expands --config for simulate/learn/detect. A run.json (with a "config"
// member) is accepted as well as a flat object.
std::vector<std::string> expand_config(const std::vector<std::string>& args)
{
    std::optional<std::string> path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (!path)
        return args;
    if (!fs::exists(*path))
        throw UsageError("config file " + *path + " does not exist");
    nlohmann::json cfg;
    try {
        cfg = load_json(*path);
    } catch (const DatasetError& e) {
        throw UsageError(e.what());
    }
    if (cfg.is_object() && cfg.contains("config") && cfg["config"].is_object())
        cfg = cfg["config"];
    std::vector<std::string> out{args.front()};
    auto tokens = config_tokens(cfg, args);
    out.insert(out.end(), tokens.begin(), tokens.end());
    out.insert(out.end(), args.begin() + 1, args.end());
    return out;
}

template <class T>
std::vector<T> split_list(const std::string& s, T (*parse)(std::string_view))
{
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(parse(item));
    if (out.empty())
        throw UsageError("empty list '" + s + "'");
    return out;
}

std::uint64_t parse_seed(std::string_view s)
{
    std::size_t pos = 0;
    const std::string str(s);
    if (str.empty() || str[0] == '-')
        throw UsageError("bad seed '" + str + "'");
    const auto v = std::stoull(str, &pos);
    if (pos != str.size())
        throw UsageError("bad seed '" + str + "'");
    return v;
}

const std::vector<std::string> kSelectors{"corr", "pscorr", "grcorr"};
const std::vector<std::string> kEngines{"exact", "gs", "graphscan", "uls"};
const std::vector<std::string> kFamilies{"poisson", "gaussian", "exponential"};
const std::vector<std::string> kGraphs{"er", "erdos-renyi", "pa", "pref-attachment", "adjacency", "adj"};

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Runs one pipeline stage, prefixing runtime failures with its name.
template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string graph = "er";
    int n = 50;
    double p = 0.1;
    std::size_t travel = 0;
    std::size_t j = 100;
    double inject_fraction = 1.0;
    InjectConfig inject;
    double mean_low = 1.0;
    double mean_high = 10.0;
    std::uint64_t seed = 1;
    std::string out;
};

void add_simulate(CLI::App& app, SimulateArgs& a)
{
    app.add_option("--graph", a.graph, "graph family")->check(CLI::IsMember(kGraphs))->capture_default_str();
    app.add_option("--n", a.n, "node count")->capture_default_str();
    app.add_option("--p", a.p, "Erdos-Renyi edge probability")->capture_default_str();
    app.add_option("--travel", a.travel, "random extra edges")->capture_default_str();
    app.add_option("--j", a.j, "training examples")->capture_default_str();
    app.add_option("--inject-fraction", a.inject_fraction, "fraction of examples with an outbreak")->capture_default_str();
    app.add_option("--spread-rate", a.inject.spread_rate)->capture_default_str();
    app.add_option("--spread-factor", a.inject.spread_factor)->capture_default_str();
    app.add_option("--duration", a.inject.duration)->capture_default_str();
    app.add_option("--mean-low", a.mean_low)->capture_default_str();
    app.add_option("--mean-high", a.mean_high)->capture_default_str();
    app.add_option("--seed", a.seed, "master seed")->capture_default_str();
    app.add_option("--out", a.out, "output dataset directory")->required();
}

ojson simulate_config(const SimulateArgs& a)
{
    ojson j;
    j["graph"] = a.graph;
    j["n"] = a.n;
    j["p"] = a.p;
    j["travel"] = a.travel;
    j["j"] = a.j;
    j["inject_fraction"] = a.inject_fraction;
    j["spread_rate"] = a.inject.spread_rate;
    j["spread_factor"] = a.inject.spread_factor;
    j["duration"] = a.inject.duration;
    j["mean_low"] = a.mean_low;
    j["mean_high"] = a.mean_high;
    j["seed"] = a.seed;
    j["out"] = a.out;
    return j;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out)
{
    const GraphFamily family = parse_graph_family(a.graph);
    try {
        if (a.n < 1 || (family == GraphFamily::PrefAttachment && a.n < 4))
            throw std::invalid_argument("--n too small for the graph family");
        if (family == GraphFamily::ErdosRenyi && !(a.p > 0.0 && a.p < 1.0))
            throw std::invalid_argument("--p must lie in (0, 1)");
        if (a.j < 1)
            throw std::invalid_argument("--j must be at least 1");
        if (!(a.inject_fraction >= 0.0 && a.inject_fraction <= 1.0))
            throw std::invalid_argument("--inject-fraction must lie in [0, 1]");
        if (!(a.mean_low > 0.0) || !(a.mean_low <= a.mean_high))
            throw std::invalid_argument("baseline range must satisfy 0 < mean-low <= mean-high");
        a.inject.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    Dataset ds;
    ds.graph = generate_graph(family, a.n, a.p, a.travel, stage_seed(a.seed, Stage::Graph));
    ds.mu = gen_baselines(a.n, 0, a.mean_low, a.mean_high, stage_seed(a.seed, Stage::Baselines)).mu;
    auto ex = make_training_set(ds.graph, ds.mu, a.inject, a.j, a.inject_fraction, stage_seed(a.seed, Stage::Training));
    ds.snapshots = std::move(ex.snapshots);
    ds.labels = std::move(ex.labels);
    ds.meta["seed"] = a.seed;
    ds.meta["stage_seeds"] = {{"graph", stage_seed(a.seed, Stage::Graph)},
                              {"baselines", stage_seed(a.seed, Stage::Baselines)},
                              {"training", stage_seed(a.seed, Stage::Training)}};
    ds.meta["config"] = simulate_config(a);
    ds.meta["outbreak_days"] = ex.days;
    write_dataset(a.out, ds);
    out << "simulated N=" << a.n << " m=" << ds.graph.edge_count() << " J=" << a.j << " seed=" << a.seed << " -> "
        << a.out << '\n';
    return kExitOk;
}

// ------------------------------------------------------------------- learn

struct LearnArgs {
    std::string in;
    std::string out;
    std::string selector = "pscorr";
    std::string engine = "uls";
    std::optional<int> k;
    std::size_t r = kDefaultReplicates;
    std::optional<std::uint64_t> seed;
    std::string family = "poisson";
    std::uint64_t budget = kDefaultExpansionBudget;
    unsigned threads = 0;
};

void add_learn(CLI::App& app, LearnArgs& a)
{
    app.add_option("--in", a.in, "dataset directory")->required();
    app.add_option("--out", a.out, "output directory (default: --in)");
    app.add_option("--selector", a.selector)->check(CLI::IsMember(kSelectors))->capture_default_str();
    app.add_option("--engine", a.engine)->check(CLI::IsMember(kEngines))->capture_default_str();
    app.add_option("--k", a.k, "neighbourhood size for BestSubgraph");
    app.add_option("--r", a.r, "randomised replicates")->capture_default_str();
    app.add_option("--seed", a.seed, "master seed (default: the dataset's)");
    app.add_option("--family", a.family)->check(CLI::IsMember(kFamilies))->capture_default_str();
    app.add_option("--budget", a.budget, "exact search expansion budget")->capture_default_str();
    app.add_option("--threads", a.threads, "worker threads, 0 = all cores")->capture_default_str();
}

ojson learn_config(const LearnArgs& a, std::uint64_t seed)
{
    ojson j;
    j["in"] = a.in;
    j["out"] = a.out;
    j["selector"] = a.selector;
    j["engine"] = a.engine;
    j["k"] = a.k ? ojson(*a.k) : ojson(nullptr);
    j["r"] = a.r;
    j["seed"] = seed;
    j["family"] = a.family;
    j["budget"] = a.budget;
    return j;
}

int cmd_learn(LearnArgs a, std::ostream& out)
{
    if (a.r < 2)
        throw UsageError("--r must be at least 2");
    if (a.k && *a.k < 1)
        throw UsageError("--k must be positive");
    if (a.out.empty())
        a.out = a.in;
    const auto start = std::chrono::steady_clock::now();

    Dataset ds = stage("load dataset", [&] { return read_dataset(a.in); });
    const std::uint64_t seed = a.seed ? *a.seed : ds.meta.value("seed", std::uint64_t{1});
    if (a.k && *a.k > ds.graph.size())
        throw UsageError("--k exceeds the node count");

    SearchEngine engine;
    engine.method = parse_search_method(a.engine);
    engine.neighborhood_k = a.k;
    engine.expansion_budget = a.budget;
    const TrainingSet ts = stage("training set", [&] {
        return TrainingSet(std::move(ds.snapshots), Distribution{parse_family(a.family)});
    });
    LearnOptions opts;
    opts.selector = parse_edge_selector(a.selector);
    opts.engine = engine;
    opts.threads = a.threads;
    const GraphSequence seq = stage("learn", [&] { return learn_sequence(ts, opts); });
    const SignificanceCurve curve = stage("significance", [&] {
        return significance_test(ts, seq, engine, a.r, stage_seed(seed, Stage::Significance), a.threads);
    });
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    stage("write outputs", [&] {
        std::error_code ec;
        fs::create_directories(a.out, ec);
        save_graph(fs::path(a.out) / "learned.edges", curve.best_graph);
        save_significance(fs::path(a.out) / "significance.csv", seq, curve);
        return 0;
    });

    double calls = 0.0;
    for (auto c : seq.calls_per_example)
        calls += static_cast<double>(c);
    ojson results;
    results["best_m"] = curve.best_m;
    results["fnorm_at_best"] = seq.fnorm[curve.best_m];
    results["z_at_best"] = std::isnan(curve.z[curve.best_m]) ? ojson(nullptr) : ojson(curve.z[curve.best_m]);
    results["bestsubgraph_calls"] = seq.bestsubgraph_calls;
    results["mean_calls_per_example"] = calls / static_cast<double>(seq.calls_per_example.size());
    results["significance_calls"] = curve.bestsubgraph_calls;
    const EdgeReport rep = edge_precision_recall(curve.best_graph, ds.graph);
    results["true_edges"] = rep.true_edges;
    results["precision"] = rep.precision;
    results["recall"] = rep.recall;

    ojson run;
    run["subcommand"] = "learn";
    run["config"] = learn_config(a, seed);
    run["results"] = results;
    run["wall_time_seconds"] = seconds;
    save_json(fs::path(a.out) / "run.json", run);
    out << "learned " << curve.best_m << " edges (" << a.selector << ", " << a.engine << "), precision "
        << fmt(rep.precision) << " recall " << fmt(rep.recall) << " against " << a.in << "/graph.edges\n";
    return kExitOk;
}

// ------------------------------------------------------------------ detect

struct DetectArgs {
    std::string graph;
    std::string in;
    std::string baselines;
    std::string snapshots;
    std::optional<int> k;
    std::string engine = "exact";
    std::string family = "poisson";
    std::uint64_t budget = kDefaultExpansionBudget;
    std::string out;
    unsigned threads = 0;
};

void add_detect(CLI::App& app, DetectArgs& a)
{
    app.add_option("--graph", a.graph, "graph used for the connected search")->required();
    app.add_option("--in", a.in, "directory holding baselines.csv and snapshots.csv");
    app.add_option("--baselines", a.baselines, "baselines CSV (node,mu)");
    app.add_option("--snapshots", a.snapshots, "snapshot CSV (example,node,count); example is the day");
    app.add_option("--k", a.k, "neighbourhood size");
    app.add_option("--engine", a.engine)->check(CLI::IsMember(kEngines))->capture_default_str();
    app.add_option("--family", a.family)->check(CLI::IsMember(kFamilies))->capture_default_str();
    app.add_option("--budget", a.budget, "exact search expansion budget")->capture_default_str();
    app.add_option("--out", a.out, "output CSV (default: stdout)");
    app.add_option("--threads", a.threads, "worker threads, 0 = all cores")->capture_default_str();
}

int cmd_detect(DetectArgs a, std::ostream& out)
{
    if (a.baselines.empty() && !a.in.empty())
        a.baselines = (fs::path(a.in) / "baselines.csv").string();
    if (a.snapshots.empty() && !a.in.empty())
        a.snapshots = (fs::path(a.in) / "snapshots.csv").string();
    if (a.baselines.empty() || a.snapshots.empty())
        throw UsageError("detect needs --in or both --baselines and --snapshots");
    if (a.k && *a.k < 1)
        throw UsageError("--k must be positive");

    const auto mu = stage("load baselines", [&] { return load_baselines(a.baselines); });
    const auto snaps = stage("load snapshots", [&] { return load_snapshots(a.snapshots, mu); });
    const Graph g = stage("load graph", [&] { return load_graph(a.graph); });
    if (g.size() != static_cast<int>(mu.size()))
        throw std::runtime_error("graph has " + std::to_string(g.size()) + " nodes but the snapshots have " +
                                 std::to_string(mu.size()));
    if (a.k && *a.k > g.size())
        throw UsageError("--k exceeds the node count");

    SearchEngine engine;
    engine.method = parse_search_method(a.engine);
    engine.neighborhood_k = a.k;
    engine.expansion_budget = a.budget;
    const Distribution dist{parse_family(a.family)};
    std::vector<Neighborhood> hoods;
    if (a.k)
        hoods = local_neighborhoods(g, *a.k);
    std::vector<ScoredSubset> results(snaps.size());
    parallel_for(snaps.size(), a.threads, [&](std::size_t d) {
        results[d] = best_subgraph(engine, g, ScanData(snaps[d], dist), hoods);
    });

    std::ofstream file;
    if (!a.out.empty()) {
        file.open(a.out, std::ios::binary);
        if (!file)
            throw std::runtime_error("cannot write " + a.out);
    }
    std::ostream& sink = a.out.empty() ? out : file;
    sink << "day,score,subset\n";
    for (std::size_t d = 0; d < results.size(); ++d) {
        sink << d << ',' << fmt(results[d].score) << ',';
        if (results[d].score > 0.0)
            for (std::size_t i = 0; i < results[d].nodes.size(); ++i)
                sink << (i ? ";" : "") << results[d].nodes[i];
        sink << '\n';
    }
    return kExitOk;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
    std::string config;
    std::string out;
    std::string methods;
    std::string seeds;
    unsigned threads = 0;
};

void add_bench(CLI::App& app, BenchArgs& a)
{
    app.add_option("--config", a.config, "benchmark JSON config")->required();
    app.add_option("--out", a.out, "report bundle directory")->required();
    app.add_option("--methods", a.methods, "comma-separated selectors, overrides the config");
    app.add_option("--seeds", a.seeds, "comma-separated master seeds, overrides the config");
    app.add_option("--threads", a.threads, "worker threads, 0 = all cores")->capture_default_str();
}

int cmd_bench(const BenchArgs& a, std::ostream& out)
{
    if (!fs::exists(a.config))
        throw UsageError("config file " + a.config + " does not exist");
    BenchConfig cfg;
    try {
        nlohmann::json j = load_json(a.config);
        if (!a.methods.empty())
            j["methods"] = a.methods == "none" ? nlohmann::json::array() : nlohmann::json(split_list<std::string>(a.methods, [](std::string_view s) { return std::string(s); }));
        if (!a.seeds.empty())
            j["seeds"] = split_list<std::uint64_t>(a.seeds, parse_seed);
        cfg = bench_config_from_json(j);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    cfg.threads = a.threads;
    const BenchResult result = run_benchmark(cfg);
    write_bench_bundle(result, a.out);
    out << "bench: " << result.seeds.size() << " seed(s), " << result.seeds.front().methods.size()
        << " method(s) -> " << a.out << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Graph structure learning from unlabelled count data and event detection", "graphlearn"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "graphlearn 1.0");

    SimulateArgs sim;
    LearnArgs learn;
    DetectArgs detect;
    BenchArgs bench;
    std::string ignored_config;
    learn.threads = detect.threads = bench.threads = default_threads();

    auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic dataset");
    add_simulate(*sim_cmd, sim);
    sim_cmd->add_option("--config", ignored_config, "JSON file with option defaults");
    auto* learn_cmd = app.add_subcommand("learn", "learn a graph from a dataset");
    add_learn(*learn_cmd, learn);
    learn_cmd->add_option("--config", ignored_config, "JSON file with option defaults (run.json accepted)");
    auto* detect_cmd = app.add_subcommand("detect", "score a snapshot stream on a graph");
    add_detect(*detect_cmd, detect);
    detect_cmd->add_option("--config", ignored_config, "JSON file with option defaults");
    auto* bench_cmd = app.add_subcommand("bench", "run a benchmark and write a report bundle");
    add_bench(*bench_cmd, bench);

    try {
        std::vector<std::string> args = raw_args;
        if (!args.empty() && (args[0] == "simulate" || args[0] == "learn" || args[0] == "detect"))
            args = expand_config(args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*sim_cmd)
            return cmd_simulate(sim, out);
        if (*learn_cmd)
            return cmd_learn(learn, out);
        if (*detect_cmd)
            return cmd_detect(detect, out);
        return cmd_bench(bench, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace graphlearn
