#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "graphlearn/scan.hpp"
#include "support.hpp"

using namespace graphlearn;

namespace {

Snapshot snap_of(std::vector<double> x, std::vector<double> mu)
{
    Snapshot s;
    s.counts = std::move(x);
    s.baselines = std::move(mu);
    return s;
}

const Distribution kGaussian{Family::Gaussian};
const Distribution kExponential{Family::Exponential};

// Root of lambda(q) = 0 for q > 1 by bisection on the raw formula.
double lambda_root(Family fam, double r_mle)
{
    const double q_mle = 1.0 + r_mle;
    auto lam = [&](double q) {
        // Unit baseline with x chosen so that the peak sits at q_mle.
        switch (fam) {
        case Family::Poisson: return q_mle * std::log(q) - (q - 1.0);
        case Family::Gaussian: return q_mle * (q - 1.0) - (q * q - 1.0) / 2.0;
        case Family::Exponential: return q_mle * (1.0 - 1.0 / q) - std::log(q);
        }
        return 0.0;
    };
    double lo = q_mle;
    double hi = q_mle * 2.0 + 1.0;
    while (lam(hi) > 0.0)
        hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (lam(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) - 1.0;
}

}  // namespace

TEST_CASE("poisson subset scores")
{
    const auto s = snap_of({10, 5, 3}, {5, 5, 5});
    const int a[] = {0};
    const auto r = score_subset(a, s);
    CHECK(r.score == doctest::Approx(10 * std::log(2.0) + 5 - 10).epsilon(1e-12));
    CHECK(r.score == doctest::Approx(1.931472).epsilon(1e-6));
    CHECK(r.q_mle == doctest::Approx(2.0));
    const int b[] = {1};
    CHECK(score_subset(b, s).score == 0.0);
    const int c[] = {2};
    CHECK(score_subset(c, s).score == 0.0);
    CHECK(score_subset(c, s).q_mle == 1.0);
}

TEST_CASE("score_subset rejects bad input")
{
    const auto s = snap_of({1, 2}, {1, 1});
    CHECK_THROWS_AS(score_subset(std::span<const int>{}, s), std::invalid_argument);
    const int bad[] = {5};
    CHECK_THROWS_AS(score_subset(bad, s), std::invalid_argument);
    auto zero = snap_of({1}, {0});
    const int a[] = {0};
    CHECK_THROWS_AS(score_subset(a, zero), std::invalid_argument);
}

TEST_CASE("snapshot validation")
{
    CHECK_THROWS_AS(snap_of({1, 2}, {1}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(snap_of({-1}, {1}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(snap_of({}, {}).validate(), std::invalid_argument);
    auto g = snap_of({1}, {1});
    g.sigmas = std::vector<double>{0.0};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    CHECK_NOTHROW(snap_of({0, 3}, {1, 2}).validate());
}

TEST_CASE("priority")
{
    CHECK(priority(10, 5) == 2.0);
    CHECK(priority(0, 5) == 0.0);
    CHECK(priority(4, 5) == doctest::Approx(0.8));
    CHECK_THROWS_AS(priority(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(priority(1, -2), std::invalid_argument);
}

TEST_CASE("fast subset scan on the three-node example")
{
    const auto s = snap_of({10, 6, 4}, {5, 5, 5});
    const auto r = fast_subset_scan(s);
    CHECK(r.nodes == std::vector<int>{0});
    CHECK(r.score == doctest::Approx(1.931472).epsilon(1e-6));
    // The alternatives named alongside it.
    const int ab[] = {0, 1};
    const int abc[] = {0, 1, 2};
    CHECK(score_subset(ab, s).score == doctest::Approx(1.52006).epsilon(1e-5));
    CHECK(score_subset(abc, s).score == doctest::Approx(0.75364).epsilon(1e-5));
}

TEST_CASE("fast subset scan on null data returns a zero-score sentinel")
{
    const auto s = snap_of({5, 3, 7}, {5, 3, 7});
    const auto r = fast_subset_scan(s);
    CHECK(r.score == 0.0);
    REQUIRE(r.nodes.size() == 1);
    CHECK(r.nodes[0] == 0);  // all priorities equal: lowest id first
}

TEST_CASE("fast subset scan matches exhaustive enumeration")
{
    std::mt19937_64 rng(11);
    for (int t = 0; t < 100; ++t) {
        const int n = 1 + static_cast<int>(rng() % 12);
        const auto s = testsupport::random_snapshot(n, rng);
        const auto fast = fast_subset_scan(s);
        const auto brute = testsupport::brute_best(s);
        CHECK(fast.score == doctest::Approx(brute.score).epsilon(1e-12));
        CHECK(std::abs(fast.score - brute.score) <= 1e-9);
        // Prefix property.
        const ScanData data(s, {});
        const auto order = data.order();
        std::vector<int> prefix(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(fast.nodes.size()));
        std::sort(prefix.begin(), prefix.end());
        CHECK(prefix == fast.nodes);
    }
}

TEST_CASE("priority ties are broken by node id")
{
    const auto s = snap_of({4, 8, 2, 4}, {2, 4, 1, 2});
    const ScanData data(s, {});
    const auto order = data.order();
    CHECK(std::vector<int>(order.begin(), order.end()) == std::vector<int>{0, 1, 2, 3});
    for (int i = 0; i < 4; ++i)
        CHECK(data.rank(i) == i);
}

TEST_CASE("lambda_i basics")
{
    for (auto fam : {Family::Poisson, Family::Gaussian, Family::Exponential})
        CHECK(lambda_i(1.0, 7.0, 3.0, {fam}) == 0.0);
    CHECK(lambda_i(2.0, 10.0, 5.0) == doctest::Approx(10 * std::log(2.0) - 5).epsilon(1e-12));
    CHECK_THROWS_AS(lambda_i(0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(lambda_i(-1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(lambda_i(2.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("lambda_i peaks at the single-node q_mle (finite differences)")
{
    const double h = 1e-5;
    for (auto fam : {Family::Poisson, Family::Gaussian, Family::Exponential}) {
        const Distribution d{fam};
        for (auto [x, mu] : {std::pair{10.0, 5.0}, std::pair{7.0, 2.0}, std::pair{3.5, 1.5}}) {
            const double q = x / mu;
            const double grad = (lambda_i(q + h, x, mu, d) - lambda_i(q - h, x, mu, d)) / (2 * h);
            CHECK(std::abs(grad) < 1e-6);
            const double curv = (lambda_i(q + h, x, mu, d) - 2 * lambda_i(q, x, mu, d) + lambda_i(q - h, x, mu, d)) / (h * h);
            CHECK(curv < 0.0);
            // Single-node score equals lambda at its maximiser.
            const auto s = snap_of({x}, {mu});
            const int a[] = {0};
            CHECK(score_subset(a, s, d).score == doctest::Approx(lambda_i(q, x, mu, d)).epsilon(1e-10));
        }
    }
}

TEST_CASE("family scores equal max_q of summed lambdas")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.5, 6.0);
    for (auto fam : {Family::Poisson, Family::Gaussian, Family::Exponential}) {
        const Distribution d{fam};
        for (int t = 0; t < 20; ++t) {
            const int n = 1 + static_cast<int>(rng() % 5);
            Snapshot s;
            for (int i = 0; i < n; ++i) {
                s.baselines.push_back(u(rng));
                s.counts.push_back(u(rng) * 1.5);
            }
            std::vector<int> all(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                all[static_cast<std::size_t>(i)] = i;
            // Golden-section search over q in (1, 50].
            auto total = [&](double q) {
                double sum = 0.0;
                for (int i = 0; i < n; ++i)
                    sum += lambda_i(q, s.counts[static_cast<std::size_t>(i)], s.baselines[static_cast<std::size_t>(i)], d);
                return sum;
            };
            double lo = 1.0;
            double hi = 50.0;
            const double gr = (std::sqrt(5.0) - 1) / 2;
            for (int it = 0; it < 300; ++it) {
                const double m1 = hi - gr * (hi - lo);
                const double m2 = lo + gr * (hi - lo);
                (total(m1) < total(m2) ? lo : hi) = (total(m1) < total(m2) ? m1 : m2);
            }
            const double best = std::max(0.0, total(0.5 * (lo + hi)));
            CHECK(score_subset(all, s, d).score == doctest::Approx(best).epsilon(1e-8));
        }
    }
}

TEST_CASE("gaussian sigma defaults to sqrt(mu)")
{
    auto s = snap_of({9, 4}, {4, 1});
    const int a[] = {0, 1};
    const double base = score_subset(a, s, kGaussian).score;
    s.sigmas = std::vector<double>{2.0, 1.0};
    CHECK(score_subset(a, s, kGaussian).score == doctest::Approx(base).epsilon(1e-12));
    s.sigmas = std::vector<double>{1.0, 1.0};
    CHECK(score_subset(a, s, kGaussian).score != doctest::Approx(base));
}

TEST_CASE("r_mle_from_rmax closed forms")
{
    CHECK(r_mle_from_rmax(4.0, kGaussian) == doctest::Approx(2.0).epsilon(1e-14));
    const double l2 = std::log(2.0);
    CHECK(r_mle_from_rmax(1.0) == doctest::Approx((l2 - (2 * l2 - 1)) / l2).epsilon(1e-12));
    CHECK(r_mle_from_rmax(1.0) == doctest::Approx(0.442695).epsilon(1e-6));
    for (auto fam : {Family::Poisson, Family::Gaussian, Family::Exponential}) {
        CHECK(r_mle_from_rmax(1e-9, {fam}) < 1e-8);
        CHECK(r_mle_from_rmax(1e-9, {fam}) > 0.0);
        CHECK_THROWS_AS(r_mle_from_rmax(0.0, {fam}), std::invalid_argument);
        CHECK_THROWS_AS(r_mle_from_rmax(-1.0, {fam}), std::invalid_argument);
    }
}

TEST_CASE("r_mle_from_rmax agrees with a root-finding oracle")
{
    for (auto fam : {Family::Poisson, Family::Gaussian, Family::Exponential}) {
        for (double r_mle : {1e-3, 0.05, 0.3, 1.0, 2.5, 10.0}) {
            const double r_max = lambda_root(fam, r_mle);
            CHECK(r_mle_from_rmax(r_max, {fam}) == doctest::Approx(r_mle).epsilon(1e-7));
            CHECK(r_max_from_rmle(r_mle, {fam}) == doctest::Approx(r_max).epsilon(1e-7));
        }
    }
}

TEST_CASE("r_mle_from_rmax is increasing and at most r/2")
{
    for (auto fam : {Family::Poisson, Family::Gaussian, Family::Exponential}) {
        double prev = 0.0;
        for (double r = 0.01; r <= 100.0; r *= 1.1) {
            const double v = r_mle_from_rmax(r, {fam});
            CHECK(v > prev);
            if (fam == Family::Gaussian)
                CHECK(v == doctest::Approx(r / 2));
            else
                CHECK(v <= r / 2 + 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("small-argument series match the closed form near the switch point")
{
    for (auto fam : {Family::Poisson, Family::Exponential}) {
        const double below = r_mle_from_rmax(0.99e-4, {fam});
        const double above = r_mle_from_rmax(1.01e-4, {fam});
        CHECK(above > below);
        CHECK((above - below) == doctest::Approx(0.02e-4 / 2).epsilon(0.01));
    }
}

TEST_CASE("homogeneous strong signals give S* equal to the planted subset")
{
    std::mt19937_64 rng(21);
    for (int t = 0; t < 200; ++t) {
        const int n = 4 + static_cast<int>(rng() % 20);
        const int k = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1));
        std::vector<int> nodes(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            nodes[static_cast<std::size_t>(i)] = i;
        std::shuffle(nodes.begin(), nodes.end(), rng);
        std::vector<int> planted(nodes.begin(), nodes.begin() + k);
        std::sort(planted.begin(), planted.end());
        const auto p = testsupport::planted_snapshot(n, planted, rng);
        CHECK(r_mle_from_rmax(p.r_max_aff) < p.r_min_aff);
        CHECK(r_max_from_rmle(p.r_max_unaff) < p.eta * p.r_min_aff);
        CHECK(fast_subset_scan(p.snap).nodes == planted);
    }
}
