#include "graphlearn/scan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace graphlearn {

std::string_view to_string(Family family)
{
    switch (family) {
    case Family::Poisson: return "poisson";
    case Family::Gaussian: return "gaussian";
    case Family::Exponential: return "exponential";
    }
    return "unknown";
}

Family parse_family(std::string_view name)
{
    if (name == "poisson") return Family::Poisson;
    if (name == "gaussian") return Family::Gaussian;
    if (name == "exponential") return Family::Exponential;
    throw std::invalid_argument("unknown distribution family: " + std::string(name));
}

void Snapshot::validate() const
{
    if (counts.empty())
        throw std::invalid_argument("snapshot has no nodes");
    if (baselines.size() != counts.size())
        throw std::invalid_argument("snapshot counts/baselines length mismatch");
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (!(baselines[i] > 0.0) || !std::isfinite(baselines[i]))
            throw std::invalid_argument("snapshot baseline must be positive at node " + std::to_string(i));
        if (!(counts[i] >= 0.0) || !std::isfinite(counts[i]))
            throw std::invalid_argument("snapshot count must be non-negative at node " + std::to_string(i));
    }
    if (sigmas) {
        if (sigmas->size() != counts.size())
            throw std::invalid_argument("snapshot sigmas length mismatch");
        for (double s : *sigmas)
            if (!(s > 0.0) || !std::isfinite(s))
                throw std::invalid_argument("snapshot sigma must be positive");
    }
}

namespace {

// (a_i, b_i) for one node.
std::pair<double, double> node_stats(Family family, double x, double mu, double sigma)
{
    switch (family) {
    case Family::Poisson:
        return {x, mu};
    case Family::Gaussian: {
        const double z = mu / (sigma * sigma);
        return {x * z, mu * z};
    }
    case Family::Exponential:
        return {x / mu, 1.0};
    }
    throw std::logic_error("unreachable family");
}

}  // namespace

ScanData::ScanData(const Snapshot& snap, const Distribution& dist) : dist_(dist)
{
    snap.validate();
    const std::size_t n = snap.size();
    a_.resize(n);
    b_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double sigma = snap.sigmas ? (*snap.sigmas)[i] : std::sqrt(snap.baselines[i]);
        std::tie(a_[i], b_[i]) = node_stats(dist.family, snap.counts[i], snap.baselines[i], sigma);
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [this](int l, int r) {
        return priority(l) > priority(r);
    });
    rank_.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        rank_[static_cast<std::size_t>(order_[k])] = static_cast<int>(k);
}

ScoredSubset ScanData::score(std::vector<int> sorted_nodes) const
{
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (int v : sorted_nodes) {
        sum_a += a(v);
        sum_b += b(v);
    }
    ScoredSubset out;
    out.score = family_score(dist_.family, sum_a, sum_b);
    out.q_mle = out.score > 0.0 ? family_q_mle(sum_a, sum_b) : 1.0;
    out.nodes = std::move(sorted_nodes);
    return out;
}

double family_score(Family family, double sum_a, double sum_b)
{
    if (!(sum_b > 0.0))
        throw std::invalid_argument("subset baseline total must be positive");
    if (!(sum_a > sum_b))
        return 0.0;
    double f = 0.0;
    switch (family) {
    case Family::Poisson:
        f = sum_a * std::log(sum_a / sum_b) + sum_b - sum_a;
        break;
    case Family::Gaussian: {
        const double d = sum_a - sum_b;
        f = d * d / (2.0 * sum_b);
        break;
    }
    case Family::Exponential:
        f = sum_a - sum_b - sum_b * std::log(sum_a / sum_b);
        break;
    }
    return std::max(f, 0.0);
}

double family_q_mle(double sum_a, double sum_b)
{
    return std::max(1.0, sum_a / sum_b);
}

ScoredSubset score_subset(std::span<const int> subset, const Snapshot& snap, const Distribution& dist)
{
    if (subset.empty())
        throw std::invalid_argument("score_subset: empty subset");
    std::vector<int> nodes(subset.begin(), subset.end());
    std::sort(nodes.begin(), nodes.end());
    if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
        throw std::invalid_argument("score_subset: duplicate node");
    if (nodes.front() < 0 || static_cast<std::size_t>(nodes.back()) >= snap.size())
        throw std::invalid_argument("score_subset: node index out of range");
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (int v : nodes) {
        const auto i = static_cast<std::size_t>(v);
        const double sigma = snap.sigmas ? (*snap.sigmas)[i] : std::sqrt(snap.baselines[i]);
        const auto [a, b] = node_stats(dist.family, snap.counts[i], snap.baselines[i], sigma);
        sum_a += a;
        sum_b += b;
    }
    if (!(sum_b > 0.0))
        throw std::invalid_argument("score_subset: baseline total must be positive");
    ScoredSubset out;
    out.score = family_score(dist.family, sum_a, sum_b);
    out.q_mle = family_q_mle(sum_a, sum_b);
    out.nodes = std::move(nodes);
    return out;
}

double priority(double x, double mu, const Distribution&)
{
    if (!(mu > 0.0))
        throw std::invalid_argument("priority: expected count must be positive");
    return x / mu;
}

ScoredSubset fast_subset_scan(const Snapshot& snap, const Distribution& dist)
{
    return fast_subset_scan(ScanData(snap, dist));
}

ScoredSubset fast_subset_scan(const ScanData& data)
{
    const auto order = data.order();
    const Family family = data.distribution().family;
    double sum_a = 0.0;
    double sum_b = 0.0;
    double best = 0.0;
    std::size_t best_len = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        sum_a += data.a(order[k]);
        sum_b += data.b(order[k]);
        const double f = family_score(family, sum_a, sum_b);
        if (f > best) {
            best = f;
            best_len = k + 1;
        }
    }
    if (best_len == 0)
        return data.score({order.front()});
    std::vector<int> nodes(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best_len));
    std::sort(nodes.begin(), nodes.end());
    return data.score(std::move(nodes));
}

double lambda_i(double q, double x, double mu, const Distribution& dist, std::optional<double> sigma)
{
    if (!(q > 0.0))
        throw std::invalid_argument("lambda_i: q must be positive");
    if (!(mu > 0.0))
        throw std::invalid_argument("lambda_i: expected count must be positive");
    const auto [a, b] = node_stats(dist.family, x, mu, sigma.value_or(std::sqrt(mu)));
    switch (dist.family) {
    case Family::Poisson: return a * std::log(q) - b * (q - 1.0);
    case Family::Gaussian: return a * (q - 1.0) - b * (q * q - 1.0) / 2.0;
    case Family::Exponential: return a * (1.0 - 1.0 / q) - b * std::log(q);
    }
    throw std::logic_error("unreachable family");
}

double theta0(Family family, double q)
{
    switch (family) {
    case Family::Poisson: return std::log(q);
    case Family::Gaussian: return q;
    case Family::Exponential: return -1.0 / q;
    }
    throw std::logic_error("unreachable family");
}

double theta0_integral(Family family, double q)
{
    switch (family) {
    case Family::Poisson: return q * std::log(q) - q + 1.0;
    case Family::Gaussian: return (q * q - 1.0) / 2.0;
    case Family::Exponential: return -std::log(q);
    }
    throw std::logic_error("unreachable family");
}

double r_mle_from_rmax(double r_max, const Distribution& dist)
{
    if (!(r_max > 0.0) || !std::isfinite(r_max))
        throw std::invalid_argument("r_mle_from_rmax: r_max must be positive");
    const Family family = dist.family;
    if (family == Family::Gaussian)
        return r_max / 2.0;
    // Below this the general expression loses most of its digits to
    // cancellation; the Taylor series is exact to double precision there.
    if (r_max < 1e-4) {
        const double r = r_max;
        if (family == Family::Poisson)
            return r / 2.0 - r * r / 12.0 + r * r * r / 24.0;
        return r / 2.0 - r * r / 6.0 + r * r * r / 12.0;
    }
    const double top = r_max + 1.0;
    const double mean_theta = theta0_integral(family, top) / r_max;
    return r_max * (theta0(family, top) - mean_theta) / (theta0(family, top) - theta0(family, 1.0));
}

double r_max_from_rmle(double r_mle, const Distribution& dist)
{
    if (!(r_mle > 0.0) || !std::isfinite(r_mle))
        throw std::invalid_argument("r_max_from_rmle: r_mle must be positive");
    // r_mle_from_rmax(r) <= r / 2, so the root lies at or above 2 r_mle.
    double lo = 0.0;
    double hi = 2.0 * r_mle;
    while (r_mle_from_rmax(hi, dist) < r_mle)
        hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (r_mle_from_rmax(mid, dist) < r_mle)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace graphlearn
