#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace graphlearn {

// Expectation-based scan statistics for the separable exponential family.
//
// Every family here has T(x) = x and theta(q mu_i) = z_i theta0(q) + v_i, so a
// node enters all subset scores only through the pair
//     a_i = T(x_i) z_i,   b_i = mu_i z_i
// and a subset S scores
//     F(S) = max_{q>1} A (theta0(q) - theta0(1)) + B (theta0(1) - q theta0(q) + int_1^q theta0)
// with A = sum a_i, B = sum b_i, maximised at q = A / B.

enum class Family { Poisson, Gaussian, Exponential };

struct Distribution {
    Family family = Family::Poisson;
};

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

/// One training/test example: observed counts, expected counts and (Gaussian
/// only) standard deviations, one entry per node.
struct Snapshot {
    std::vector<double> counts;
    std::vector<double> baselines;
    std::optional<std::vector<double>> sigmas;

    std::size_t size() const { return counts.size(); }

    /// Throws std::invalid_argument if the invariants do not hold.
    void validate() const;
};

struct ScoredSubset {
    std::vector<int> nodes;  // ascending node ids
    double score = 0.0;
    double q_mle = 1.0;
};

// Per-node sufficient statistics of a snapshot, plus the node order by
// descending priority (ties by ascending node id). Built once per snapshot and
// shared by every search over it.
class ScanData {
public:
    ScanData(const Snapshot& snap, const Distribution& dist);

    std::size_t size() const { return a_.size(); }
    const Distribution& distribution() const { return dist_; }

    double a(int i) const { return a_[static_cast<std::size_t>(i)]; }
    double b(int i) const { return b_[static_cast<std::size_t>(i)]; }
    double priority(int i) const { return a(i) / b(i); }

    /// Nodes sorted by descending priority.
    std::span<const int> order() const { return order_; }
    /// Position of node i in order().
    int rank(int i) const { return rank_[static_cast<std::size_t>(i)]; }

    /// Score of a subset given as ascending node ids; sums in id order.
    ScoredSubset score(std::vector<int> sorted_nodes) const;

private:
    Distribution dist_;
    std::vector<double> a_;
    std::vector<double> b_;
    std::vector<int> order_;
    std::vector<int> rank_;
};

/// Closed-form family score from the aggregate statistics; 0 unless A > B.
double family_score(Family family, double sum_a, double sum_b);

/// max(1, A / B).
double family_q_mle(double sum_a, double sum_b);

ScoredSubset score_subset(std::span<const int> subset, const Snapshot& snap,
                          const Distribution& dist = {});

/// T(x) / mu.
double priority(double x, double mu, const Distribution& dist = {});

/// Unconstrained optimum over all subsets via linear-time subset scanning:
/// only the N priority-ordered prefixes are scored. When no prefix scores above
/// zero the highest-priority node is returned with score 0.
ScoredSubset fast_subset_scan(const Snapshot& snap, const Distribution& dist = {});
ScoredSubset fast_subset_scan(const ScanData& data);

/// Per-node contribution lambda_i(q); sigma only matters for the Gaussian
/// (defaults to sqrt(mu)).
double lambda_i(double q, double x, double mu, const Distribution& dist = {},
                std::optional<double> sigma = std::nullopt);

double theta0(Family family, double q);
/// int_1^q theta0(t) dt.
double theta0_integral(Family family, double q);

/// Maps the excess risk at which lambda_i crosses zero (r_max) to the excess
/// risk at which it peaks (r_mle).
double r_mle_from_rmax(double r_max, const Distribution& dist = {});

/// Inverse of r_mle_from_rmax.
double r_max_from_rmle(double r_mle, const Distribution& dist = {});

}  // namespace graphlearn
