#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "graphlearn/evaluate.hpp"
#include "support.hpp"

using namespace graphlearn;
namespace fs = std::filesystem;

namespace {

Graph ring(int n)
{
    Graph g(n);
    for (int i = 0; i < n; ++i)
        g.add_edge(i, (i + 1) % n);
    return g;
}

std::vector<Snapshot> null_days(std::span<const double> mu, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<Snapshot> out;
    for (int d = 0; d < count; ++d) {
        Snapshot s;
        s.baselines.assign(mu.begin(), mu.end());
        s.counts = draw_null_counts(mu, rng);
        out.push_back(std::move(s));
    }
    return out;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

BenchConfig tiny_config()
{
    BenchConfig cfg;
    cfg.n = 12;
    cfg.p = 0.3;
    cfg.train_size = 20;
    cfg.replicates = 3;
    cfg.k_sweep = {4, 0};
    cfg.null_days = 40;
    cfg.test_injects = 4;
    cfg.inject.duration = 8;
    cfg.seeds = {3, 4};
    cfg.reference_graphs = true;
    return cfg;
}

}  // namespace

TEST_CASE("edge metrics")
{
    const Graph truth = ring(9);
    const auto same = edge_precision_recall(truth, truth);
    CHECK(same.precision == 1.0);
    CHECK(same.recall == 1.0);
    Graph extra = truth;
    extra.add_edge(0, 4);
    const auto r = edge_precision_recall(extra, truth);
    CHECK(r.precision == doctest::Approx(0.9));
    CHECK(r.recall == 1.0);
    CHECK(r.common_edges == 9);
    Graph other(9);
    other.add_edge(0, 2);
    const auto d = edge_precision_recall(other, truth);
    CHECK(d.precision == 0.0);
    CHECK(d.recall == 0.0);
    const auto empty = edge_precision_recall(Graph(9), truth);
    CHECK_FALSE(empty.precision_defined);
    CHECK(empty.precision == 0.0);
    CHECK_THROWS_AS(edge_precision_recall(Graph(4), truth), std::invalid_argument);
}

TEST_CASE("edge metrics are symmetric")
{
    std::mt19937_64 rng(5);
    for (int t = 0; t < 50; ++t) {
        const Graph a = testsupport::random_graph(10, 0.3, rng);
        const Graph b = testsupport::random_graph(10, 0.3, rng);
        if (a.edge_count() == 0 || b.edge_count() == 0)
            continue;
        CHECK(edge_precision_recall(a, b).precision == edge_precision_recall(b, a).recall);
    }
}

TEST_CASE("overlap coefficient")
{
    const int a[] = {1, 2};
    const int b[] = {2, 3};
    const int c[] = {4, 5};
    CHECK(overlap_coefficient(a, a) == 1.0);
    CHECK(overlap_coefficient(a, b) == doctest::Approx(1.0 / 3.0));
    CHECK(overlap_coefficient(a, c) == 0.0);
    CHECK(overlap_coefficient({}, a) == 0.0);
    CHECK_THROWS_AS(overlap_coefficient(a, {}), std::invalid_argument);
}

TEST_CASE("threshold percentile")
{
    CHECK(1.0 - 1.0 / kDaysPerMonth == doctest::Approx(0.967).epsilon(1e-3));
    std::vector<double> scores(1000);
    for (int i = 0; i < 1000; ++i)
        scores[static_cast<std::size_t>(i)] = i + 1.0;
    std::mt19937_64 rng(1);
    std::shuffle(scores.begin(), scores.end(), rng);
    CHECK(detection_threshold(scores, 1.0) == 967.0);
    CHECK(detection_threshold(std::vector<double>(50, 2.5), 1.0) == 2.5);
    CHECK_THROWS_AS(detection_threshold(std::vector<double>(29, 1.0), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(detection_threshold(scores, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(detection_threshold(scores, 31.0), std::invalid_argument);
    // Nearest rank against a direct order-statistic computation.
    for (int n : {30, 31, 97, 365, 1000})
        for (double fp : {0.5, 1.0, 2.0, 5.0}) {
            std::vector<double> s(static_cast<std::size_t>(n));
            for (auto& x : s)
                x = std::uniform_real_distribution<double>(0, 10)(rng);
            auto sorted = s;
            std::sort(sorted.begin(), sorted.end());
            const double level = 1.0 - fp / 30.4;
            const long rank = std::clamp<long>(std::lround(level * n), 1, n);
            CHECK(detection_threshold(s, fp) == sorted[static_cast<std::size_t>(rank - 1)]);
        }
}

TEST_CASE("threshold calibration on null data")
{
    const Graph g = ring(15);
    const auto mu = gen_baselines(15, 0, 1.0, 10.0, 2).mu;
    const auto calib = null_days(mu, 1000, 3);
    const auto fresh = null_days(mu, 3000, 4);
    std::vector<double> scores;
    for (const auto& s : calib)
        scores.push_back(best_subgraph(SearchEngine{}, g, s).score);
    const double thr = detection_threshold(scores, 1.0);
    const auto self = std::count_if(scores.begin(), scores.end(), [&](double x) { return x > thr; });
    CHECK(self <= 33);
    CHECK(self >= 25);
    int flagged = 0;
    for (const auto& s : fresh)
        flagged += best_subgraph(SearchEngine{}, g, s).score > thr;
    const double rate = flagged / 3000.0;
    const double p = 1.0 / 30.4;
    CHECK(std::abs(rate - p) <= 4.0 * std::sqrt(p * (1 - p) / 3000.0) + 4.0 * std::sqrt(p * (1 - p) / 1000.0));
}

TEST_CASE("detection: no signal, saturated signal, oracle overlaps")
{
    const int n = 12;
    const Graph g = ring(n);
    const std::vector<double> mu(n, 3.0);
    const auto nulls = null_days(mu, 200, 9);

    // Injects that add nothing: detection mostly falls back to the duration.
    std::vector<LabeledInject> flat;
    for (int i = 0; i < 40; ++i) {
        LabeledInject inj;
        inj.center = 0;
        const auto days = null_days(mu, 14, 100 + static_cast<std::uint64_t>(i));
        for (int d = 1; d <= 14; ++d) {
            inj.days.push_back(days[static_cast<std::size_t>(d - 1)]);
            inj.affected.push_back({0});
        }
        flat.push_back(inj);
    }
    DetectionOptions opts;
    const auto none = evaluate_detection(g, flat, nulls, opts).front();
    CHECK(none.tpr <= 0.1);
    const auto at_end = std::count(none.detection_days.begin(), none.detection_days.end(), 14);
    CHECK(at_end >= 15);

    // All-zero null scores and a huge inject: detected on day 1.
    std::vector<Snapshot> quiet(40);
    for (auto& s : quiet) {
        s.baselines = mu;
        s.counts.assign(n, 0.0);
    }
    LabeledInject big;
    for (int d = 1; d <= 14; ++d) {
        Snapshot s;
        s.baselines = mu;
        s.counts.assign(n, 0.0);
        s.counts[0] = s.counts[1] = 50.0;
        big.days.push_back(s);
        big.affected.push_back({0, 1});
    }
    const std::vector<LabeledInject> one{big};
    const auto sat = evaluate_detection(g, one, quiet, opts).front();
    CHECK(sat.threshold == 0.0);
    CHECK(sat.detection_days == std::vector<int>{1});
    CHECK(sat.overlaps == std::vector<double>{1.0});
    CHECK(sat.tpr == 1.0);

    // Real injects against independent recomputation.
    const Graph er = gen_erdos_renyi(20, 0.2, 1);
    const auto mu20 = gen_baselines(20, 0, 1.0, 10.0, 2).mu;
    std::vector<LabeledInject> injects;
    for (std::uint64_t s = 0; s < 10; ++s)
        injects.push_back(inject_outbreak(er, mu20, InjectConfig{}, s));
    const auto nulls20 = null_days(mu20, 60, 7);
    DetectionOptions sweep;
    sweep.k_sweep = {0, 5};
    sweep.threads = 3;
    const auto reps = evaluate_detection(er, injects, nulls20, sweep);
    REQUIRE(reps.size() == 2);
    for (const auto& rep : reps) {
        const std::optional<int> k = rep.k ? std::optional<int>(rep.k) : std::nullopt;
        const SearchEngine engine{SearchMethod::Exact, k};
        std::vector<double> ns;
        for (const auto& s : nulls20)
            ns.push_back(best_subgraph(engine, er, s).score);
        CHECK(ns == rep.null_scores);
        const double thr = detection_threshold(ns, 1.0);
        CHECK(rep.threshold == thr);
        int above = 0;
        for (std::size_t i = 0; i < injects.size(); ++i) {
            int first = 14;
            for (int d = 14; d >= 1; --d)
                if (best_subgraph(engine, er, injects[i].days[static_cast<std::size_t>(d - 1)]).score > thr) {
                    first = d;
                    ++above;
                }
            CHECK(rep.detection_days[i] == first);
            const auto day7 = best_subgraph(engine, er, injects[i].days[6]);
            const double ov = day7.score > 0 ? overlap_coefficient(day7.nodes, injects[i].affected[6]) : 0.0;
            CHECK(rep.overlaps[i] == doctest::Approx(ov));
        }
        CHECK(rep.tpr == doctest::Approx(above / 140.0));
    }
}

TEST_CASE("detection day is monotone in the threshold; complete graph dominates scores")
{
    const Graph truth = gen_erdos_renyi(18, 0.2, 4);
    const auto mu = gen_baselines(18, 0, 1.0, 10.0, 5).mu;
    std::vector<LabeledInject> injects;
    for (std::uint64_t s = 0; s < 15; ++s)
        injects.push_back(inject_outbreak(truth, mu, InjectConfig{}, 50 + s));
    const auto nulls = null_days(mu, 100, 6);
    DetectionOptions strict;
    strict.fp_per_month = 0.5;
    DetectionOptions loose;
    loose.fp_per_month = 3.0;
    const auto a = evaluate_detection(truth, injects, nulls, strict).front();
    const auto b = evaluate_detection(truth, injects, nulls, loose).front();
    CHECK(a.threshold >= b.threshold);
    for (std::size_t i = 0; i < injects.size(); ++i)
        CHECK(b.detection_days[i] <= a.detection_days[i]);

    const auto c = evaluate_detection(Graph::complete(18), injects, nulls, DetectionOptions{}).front();
    const auto t = evaluate_detection(truth, injects, nulls, DetectionOptions{}).front();
    for (std::size_t d = 0; d < nulls.size(); ++d)
        CHECK(c.null_scores[d] >= t.null_scores[d] - 1e-12);
}

TEST_CASE("stage seeds")
{
    std::vector<std::uint64_t> seen;
    for (std::uint64_t master : {0ULL, 1ULL, 2ULL})
        for (auto st : {Stage::Graph, Stage::Baselines, Stage::Training, Stage::Significance, Stage::TestInjects,
                        Stage::NullDays})
            seen.push_back(stage_seed(master, st));
    auto sorted = seen;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    CHECK(stage_seed(7, Stage::Training) == stage_seed(7, Stage::Training));
}

TEST_CASE("bench config JSON")
{
    BenchConfig cfg = tiny_config();
    cfg.methods = {EdgeSelector::GrCorr};
    cfg.learn_k = 6;
    const auto j = to_json(cfg);
    CHECK(j.at("n") == 12);
    CHECK(j.at("spread_rate") == 2);
    CHECK_FALSE(j.contains("threads"));
    const BenchConfig back = bench_config_from_json(nlohmann::json::parse(j.dump()));
    CHECK(to_json(back) == j);
    CHECK(bench_config_from_json(nlohmann::json::object()).n == 50);
    CHECK_THROWS_AS(bench_config_from_json(nlohmann::json{{"bogus", 1}}), std::invalid_argument);
    CHECK_THROWS_AS(bench_config_from_json(nlohmann::json{{"n", "many"}}), std::invalid_argument);
    CHECK_THROWS_AS(bench_config_from_json(nlohmann::json{{"methods", {"magic"}}}), std::invalid_argument);
    CHECK_THROWS_AS(bench_config_from_json(nlohmann::json::array()), std::invalid_argument);
    BenchConfig bad = tiny_config();
    bad.k_sweep = {13};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = tiny_config();
    bad.seeds.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("benchmark runs are deterministic and the bundle is byte-identical")
{
    const BenchConfig cfg = tiny_config();
    const auto r1 = run_benchmark(cfg);
    const auto r2 = run_benchmark(cfg);
    REQUIRE(r1.seeds.size() == 2);
    CHECK(r1.seeds[0].methods.size() == 5);
    CHECK(r1.seeds[0].methods[3].method == "true");
    CHECK(r1.seeds[0].methods[3].edges.recall == 1.0);
    CHECK(r1.seeds[0].methods[4].method == "complete");
    CHECK(r1.seeds[0].truth != r1.seeds[1].truth);

    const fs::path base = fs::temp_directory_path() / "graphlearn_bundle_test";
    fs::remove_all(base);
    write_bench_bundle(r1, base / "a");
    BenchConfig threaded = cfg;
    threaded.threads = 4;
    write_bench_bundle(run_benchmark(threaded), base / "b");
    for (std::size_t i = 0; i < r1.seeds.size(); ++i)
        for (std::size_t m = 0; m < r1.seeds[i].methods.size(); ++m) {
            CHECK(r1.seeds[i].methods[m].graph == r2.seeds[i].methods[m].graph);
            CHECK(r1.seeds[i].methods[m].detection.front().null_scores ==
                  r2.seeds[i].methods[m].detection.front().null_scores);
        }
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(base / "a"))
        if (e.is_regular_file())
            files.push_back(fs::relative(e.path(), base / "a").string());
    std::sort(files.begin(), files.end());
    CHECK(std::find(files.begin(), files.end(), "edges.csv") != files.end());
    CHECK(std::find(files.begin(), files.end(), "detection.csv") != files.end());
    CHECK(std::find(files.begin(), files.end(), "manifest.json") != files.end());
    CHECK(std::find(files.begin(), files.end(), "seed_3/truth.edges") != files.end());
    for (const auto& f : files)
        CHECK_MESSAGE(slurp(base / "a" / f) == slurp(base / "b" / f), f);

    const auto edges = slurp(base / "a" / "edges.csv");
    CHECK(edges.rfind("method,true_edges,learned_edges,precision,recall\n", 0) == 0);
    const auto det = slurp(base / "a" / "detection.csv");
    CHECK(det.rfind("method,k,mean_days,mean_overlap,tpr\n", 0) == 0);
    CHECK(std::count(det.begin(), det.end(), '\n') == 1 + 5 * 2);
    fs::remove_all(base);

    BenchConfig broken = cfg;
    broken.inject.spread_rate = 0;
    CHECK_THROWS_AS(run_benchmark(broken), std::invalid_argument);
}
