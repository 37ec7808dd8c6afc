#pragma once

#include <Eigen/Dense>

#include <cstddef>

#include "prefrank/dataset.hpp"
#include "prefrank/rng.hpp"

namespace prefrank {

/// Observed Fisher information H = P + sum_s w_s z_s z_s^T together with a
/// maintained inverse. P is the prior precision (ridge * I by default).
///
/// The inverse is updated by Sherman-Morrison on every rank-one term and is
/// periodically rebuilt from H to bound drift.
class InfoMatrix {
public:
    static constexpr std::size_t kRefreshInterval = 1000;
    static constexpr std::size_t kResidualCheckInterval = 100;
    static constexpr double kResidualTolerance = 1e-6;

    InfoMatrix() = default;
    /// ridge * I; ridge must be > 0 for an empty matrix to be invertible.
    InfoMatrix(std::size_t dim, double ridge);
    /// General positive-definite prior precision.
    explicit InfoMatrix(const Eigen::MatrixXd& prior_precision);

    std::size_t dim() const { return static_cast<std::size_t>(h_.rows()); }
    const Eigen::MatrixXd& h() const { return h_; }
    const Eigen::MatrixXd& h_inv() const { return h_inv_; }
    const Eigen::MatrixXd& prior() const { return prior_; }
    std::size_t updates() const { return updates_; }
    std::size_t clamped_norms() const { return clamped_; }

    /// H += w z z^T, inverse by Sherman-Morrison. w must be >= 0.
    void update(const Eigen::Ref<const Eigen::VectorXd>& z, double w);

    /// z^T H^{-1} z, clamped at 0 (each clamp bumps a diagnostic counter).
    double norm_sq(const Eigen::Ref<const Eigen::VectorXd>& z) const;
    double norm(const Eigen::Ref<const Eigen::VectorXd>& z) const;

    /// Rebuild the inverse from H by a symmetric factorization.
    void refresh();

    /// max |H * H^{-1} - I|.
    double identity_residual() const;

    /// Restore a serialized state verbatim (checkpoints).
    static InfoMatrix restore(Eigen::MatrixXd prior, Eigen::MatrixXd h, Eigen::MatrixXd h_inv, std::size_t updates);

private:
    Eigen::MatrixXd prior_;
    Eigen::MatrixXd h_;
    Eigen::MatrixXd h_inv_;
    std::size_t updates_ = 0;
    mutable std::size_t clamped_ = 0;
};

/// Inverse of a symmetric matrix via LDLT; throws RankDeficientError naming
/// the number of unidentified directions.
Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& m);

/// H = ridge I + sum_s sigma'(theta^T z_s) z_s z_s^T over a history, with the
/// inverse computed directly.
InfoMatrix observed_fisher(const ComparisonHistory& history, const ItemPool& pool, const Eigen::VectorXd& theta,
                           double ridge);

/// Sherman-Morrison step on a copy.
InfoMatrix sherman_morrison_update(InfoMatrix m, const Eigen::VectorXd& z, double w);

/// sqrt(z^T H^{-1} z).
double weighted_norm(const InfoMatrix& m, const Eigen::VectorXd& z);

/// k draws (rows) from N(mean, cov). Cholesky with up to three jitter
/// retries of 1e-10 I.
Eigen::MatrixXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, std::size_t k, Rng& rng);

}  // namespace prefrank
