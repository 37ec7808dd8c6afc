#pragma once

#include <Eigen/Dense>

#include <map>
#include <vector>

#include "prefrank/dataset.hpp"
#include "prefrank/rng.hpp"
#include "prefrank/samplers.hpp"

namespace prefrank {

/// Synthetic annotator: P(c = 1) = sigma(noise_scale * theta_star^T z).
class LogisticAnnotator {
public:
    LogisticAnnotator(Eigen::VectorXd theta_star, double noise_scale, Rng rng);

    int annotate(const Eigen::VectorXd& z);
    double probability(const Eigen::VectorXd& z) const;

    const Eigen::VectorXd& theta_star() const { return theta_star_; }
    double noise_scale() const { return noise_scale_; }

private:
    Eigen::VectorXd theta_star_;
    double noise_scale_;
    Rng rng_;
};

/// Answers queries from a pool of pre-collected annotations; each
/// annotation is consumed once.
class ReplayAnnotator {
public:
    ReplayAnnotator(const std::vector<Comparison>& replay, std::size_t n_items);

    /// Draws one remaining annotation for {i, j} uniformly, removes it, and
    /// returns its label oriented to the (i, j) query order.
    int annotate(ItemId i, ItemId j, Rng& rng);

    std::size_t remaining(ItemId i, ItemId j) const;
    std::size_t remaining_total() const { return total_; }
    /// Pairs with at least one annotation left.
    PairDomain eligible() const;
    /// Same, restricted to items with id < n_active.
    PairDomain eligible(std::size_t n_active) const;

private:
    // Labels stored as "first item of the sorted pair wins".
    std::map<Pair, std::vector<int>> labels_;
    std::size_t n_items_;
    std::size_t total_ = 0;
};

/// Fraction of the C(n, 2) unordered pairs ordered differently by two
/// rankings (each lists item ids best first). O(n log n).
double kendall_tau_error(const std::vector<ItemId>& ranking, const std::vector<ItemId>& truth);

/// Fraction of holdout comparisons where the hard decision from `scores`
/// disagrees with the recorded label.
double holdout_error(const Eigen::VectorXd& scores, const std::vector<Comparison>& holdout);

/// R(eval) - R(train) for the rankings induced by each pool's scores.
double generalization_gap(const Eigen::VectorXd& train_scores, const Eigen::VectorXd& train_truth,
                          const Eigen::VectorXd& eval_scores, const Eigen::VectorXd& eval_truth);

/// Synthetic instance: standard-normal features, theta_* uniform in
/// [-range, range]; redraws theta_* while any pair is exactly tied.
struct SyntheticInstance {
    ItemPool pool;
    Eigen::VectorXd theta_star;
};
SyntheticInstance make_synthetic_instance(std::size_t n, std::size_t d, double theta_range, Rng& rng);

}  // namespace prefrank
