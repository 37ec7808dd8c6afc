#include "prefrank/simulate.hpp"

#include <algorithm>
#include <random>

#include "prefrank/logistic.hpp"
#include "prefrank/models.hpp"

namespace prefrank {

LogisticAnnotator::LogisticAnnotator(Eigen::VectorXd theta_star, double noise_scale, Rng rng)
    : theta_star_(std::move(theta_star)), noise_scale_(noise_scale), rng_(std::move(rng)) {
    if (!(noise_scale_ > 0.0)) throw ValidationError("noise scale must be positive");
}

double LogisticAnnotator::probability(const Eigen::VectorXd& z) const {
    return sigmoid(noise_scale_ * theta_star_.dot(z));
}

int LogisticAnnotator::annotate(const Eigen::VectorXd& z) {
    std::bernoulli_distribution coin(probability(z));
    return coin(rng_) ? 1 : 0;
}

ReplayAnnotator::ReplayAnnotator(const std::vector<Comparison>& replay, std::size_t n_items) : n_items_(n_items) {
    for (const auto& c : replay) {
        if (c.i == c.j || c.i >= n_items || c.j >= n_items) throw ValidationError("replay annotation references invalid pair");
        const Pair p = make_pair_sorted(c.i, c.j);
        const int first_wins = (c.i == p.first) ? c.c : 1 - c.c;
        labels_[p].push_back(first_wins);
        ++total_;
    }
}

int ReplayAnnotator::annotate(ItemId i, ItemId j, Rng& rng) {
    const Pair p = make_pair_sorted(i, j);
    auto it = labels_.find(p);
    if (i == j || it == labels_.end() || it->second.empty())
        throw ExhaustedError("no annotations remain for pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    auto& v = it->second;
    std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
    const std::size_t k = pick(rng);
    const int first_wins = v[k];
    v[k] = v.back();
    v.pop_back();
    if (v.empty()) labels_.erase(it);
    --total_;
    return i == p.first ? first_wins : 1 - first_wins;
}

std::size_t ReplayAnnotator::remaining(ItemId i, ItemId j) const {
    auto it = labels_.find(make_pair_sorted(i, j));
    return it == labels_.end() ? 0 : it->second.size();
}

PairDomain ReplayAnnotator::eligible() const { return eligible(n_items_); }

PairDomain ReplayAnnotator::eligible(std::size_t n_active) const {
    std::vector<Pair> pairs;
    pairs.reserve(labels_.size());
    for (const auto& [p, v] : labels_)
        if (p.second < n_active) pairs.push_back(p);
    return PairDomain::of(std::move(pairs), n_active);
}

namespace {

// Inversions of `seq` by merge sort.
std::uint64_t count_inversions(std::vector<std::size_t>& seq, std::vector<std::size_t>& buf, std::size_t lo,
                               std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t inv = count_inversions(seq, buf, lo, mid) + count_inversions(seq, buf, mid, hi);
    std::size_t a = lo, b = mid, k = lo;
    while (a < mid && b < hi) {
        if (seq[a] <= seq[b]) {
            buf[k++] = seq[a++];
        } else {
            inv += mid - a;
            buf[k++] = seq[b++];
        }
    }
    while (a < mid) buf[k++] = seq[a++];
    while (b < hi) buf[k++] = seq[b++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              seq.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

}  // namespace

double kendall_tau_error(const std::vector<ItemId>& ranking, const std::vector<ItemId>& truth) {
    const std::size_t n = truth.size();
    if (ranking.size() != n) throw ValidationError("rankings cover different item sets");
    if (n < 2) throw ValidationError("ordering error needs at least two items");
    std::vector<std::size_t> pos(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        if (truth[r] >= n || pos[truth[r]] != n) throw ValidationError("truth is not a permutation of 0..n-1");
        pos[truth[r]] = r;
    }
    std::vector<std::size_t> seq(n);
    std::vector<bool> seen(n, false);
    for (std::size_t r = 0; r < n; ++r) {
        if (ranking[r] >= n || seen[ranking[r]]) throw ValidationError("rankings cover different item sets");
        seen[ranking[r]] = true;
        seq[r] = pos[ranking[r]];
    }
    std::vector<std::size_t> buf(n);
    const auto inv = count_inversions(seq, buf, 0, n);
    return static_cast<double>(inv) / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

double holdout_error(const Eigen::VectorXd& scores, const std::vector<Comparison>& holdout) {
    if (holdout.empty()) throw ValidationError("holdout set is empty");
    std::size_t wrong = 0;
    for (const auto& c : holdout) {
        if (static_cast<Eigen::Index>(std::max(c.i, c.j)) >= scores.size())
            throw ValidationError("holdout references unknown item");
        if (hard_decision(scores, c.i, c.j) != c.c) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(holdout.size());
}

double generalization_gap(const Eigen::VectorXd& train_scores, const Eigen::VectorXd& train_truth,
                          const Eigen::VectorXd& eval_scores, const Eigen::VectorXd& eval_truth) {
    const double r_train = kendall_tau_error(induced_ranking(train_scores), induced_ranking(train_truth));
    const double r_eval = kendall_tau_error(induced_ranking(eval_scores), induced_ranking(eval_truth));
    return r_eval - r_train;
}

SyntheticInstance make_synthetic_instance(std::size_t n, std::size_t d, double theta_range, Rng& rng) {
    if (n < 2 || d < 1) throw ValidationError("synthetic instance needs n >= 2 and d >= 1");
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = normal(rng);
    std::uniform_real_distribution<double> uni(-theta_range, theta_range);
    Eigen::VectorXd theta(static_cast<Eigen::Index>(d));
    for (int attempt = 0;; ++attempt) {
        for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) = uni(rng);
        Eigen::VectorXd s = x * theta;
        std::vector<double> sorted(s.data(), s.data() + s.size());
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) break;
        if (attempt > 100) throw TieError("could not draw a tie-free synthetic parameter");
    }
    Eigen::VectorXd truth = x * theta;
    return {ItemPool(std::move(x), std::move(truth)), std::move(theta)};
}

}  // namespace prefrank
