#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "prefrank/dataset.hpp"
#include "prefrank/info_matrix.hpp"

namespace prefrank {

struct FitOptions {
    double grad_tol = 1e-6;     // on the penalized-gradient infinity norm
    std::size_t max_iter = 100; // Newton iterations
};

/// Outcome of one optimizer run; `converged == false` means the best iterate
/// was returned after max_iter.
struct FitStatus {
    bool converged = true;
    std::size_t iterations = 0;
    double grad_inf = 0.0;
};

/// Fully contextual model f(i, j) = theta^T (x_i - x_j) with ridge penalty
/// reg * |theta|^2 / 2.
struct LinearModel {
    Eigen::VectorXd theta;
    double reg = 1.0;
    FitStatus status;
};

/// Gaussian-prior logistic model; posterior by Laplace approximation around
/// the MAP estimate.
struct BayesLinearModel {
    Eigen::VectorXd theta_map;
    Eigen::VectorXd prior_mean;
    Eigen::MatrixXd prior_precision;
    InfoMatrix posterior;
    FitStatus status;
};

/// Contextual score plus per-item offsets:
/// f(i, j) = theta^T (x_i - x_j) + zeta_i - zeta_j.
struct HybridModel {
    Eigen::VectorXd theta;
    Eigen::VectorXd zeta;
    double reg_theta = 1.0;
    double reg_zeta = 1.0;
    FitStatus status;

    /// Extends zeta with zeros up to n items.
    void grow(std::size_t n);
};

LinearModel fit_mle(const ComparisonHistory& history, const ItemPool& pool, double reg, const FitOptions& opts = {},
                    const Eigen::VectorXd* warm_start = nullptr);

BayesLinearModel fit_map(const ComparisonHistory& history, const ItemPool& pool, const Eigen::VectorXd& prior_mean,
                         const Eigen::MatrixXd& prior_precision, const FitOptions& opts = {},
                         const Eigen::VectorXd* warm_start = nullptr);

HybridModel fit_hybrid(const ComparisonHistory& history, const ItemPool& pool, double reg_theta, double reg_zeta,
                       const FitOptions& opts = {}, const HybridModel* warm_start = nullptr);

/// Gradient of the penalized log-likelihood (ascent direction).
Eigen::VectorXd loglik_grad(const LinearModel& model, const ComparisonHistory& history, const ItemPool& pool);
Eigen::VectorXd loglik_grad(const BayesLinearModel& model, const ComparisonHistory& history, const ItemPool& pool);
/// Stacked (theta, zeta) gradient.
Eigen::VectorXd loglik_grad(const HybridModel& model, const ComparisonHistory& history, const ItemPool& pool);

/// Penalized log-likelihood value.
double penalized_loglik(const LinearModel& model, const ComparisonHistory& history, const ItemPool& pool);
double penalized_loglik(const HybridModel& model, const ComparisonHistory& history, const ItemPool& pool);

/// Per-item scores: X theta (+ zeta).
Eigen::VectorXd item_scores(const LinearModel& model, const ItemPool& pool);
Eigen::VectorXd item_scores(const HybridModel& model, const ItemPool& pool);

double predict_prob(const LinearModel& model, const ItemPool& pool, ItemId i, ItemId j);
double predict_prob(const HybridModel& model, const ItemPool& pool, ItemId i, ItemId j);

/// Items by decreasing score; ties by ascending id.
std::vector<ItemId> induced_ranking(const Eigen::VectorXd& scores);
std::vector<ItemId> induced_ranking(const LinearModel& model, const ItemPool& pool);
std::vector<ItemId> induced_ranking(const HybridModel& model, const ItemPool& pool);

/// Hard decision h(i, j) = 1 when i outranks j (score ties go to the smaller id).
inline int hard_decision(const Eigen::VectorXd& scores, ItemId i, ItemId j) {
    const double si = scores(static_cast<Eigen::Index>(i));
    const double sj = scores(static_cast<Eigen::Index>(j));
    if (si != sj) return si > sj ? 1 : 0;
    return i < j ? 1 : 0;
}

}  // namespace prefrank
