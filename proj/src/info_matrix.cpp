#include "prefrank/info_matrix.hpp"

#include <cmath>
#include <random>

#include "prefrank/logistic.hpp"

namespace prefrank {

InfoMatrix::InfoMatrix(std::size_t dim, double ridge)
    : InfoMatrix(Eigen::MatrixXd(ridge * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                                                      static_cast<Eigen::Index>(dim)))) {}

InfoMatrix::InfoMatrix(const Eigen::MatrixXd& prior_precision)
    : prior_(prior_precision), h_(prior_precision) {
    if (prior_.rows() != prior_.cols()) throw ValidationError("prior precision must be square");
    if (prior_.isZero(0.0)) {
        h_inv_ = Eigen::MatrixXd::Zero(prior_.rows(), prior_.cols());
    } else {
        h_inv_ = symmetric_inverse(h_);
    }
}

InfoMatrix InfoMatrix::restore(Eigen::MatrixXd prior, Eigen::MatrixXd h, Eigen::MatrixXd h_inv, std::size_t updates) {
    InfoMatrix m;
    m.prior_ = std::move(prior);
    m.h_ = std::move(h);
    m.h_inv_ = std::move(h_inv);
    m.updates_ = updates;
    return m;
}

void InfoMatrix::update(const Eigen::Ref<const Eigen::VectorXd>& z, double w) {
    if (!(w >= 0.0)) throw ValidationError("information weight must be nonnegative");
    ++updates_;
    if (w == 0.0) return;
    // Symmetric rank-one terms keep H exactly symmetric.
    h_.selfadjointView<Eigen::Lower>().rankUpdate(z, w);
    h_.triangularView<Eigen::StrictlyUpper>() = h_.transpose();

    const Eigen::VectorXd u = h_inv_ * z;
    const double denom = 1.0 + w * z.dot(u);
    h_inv_.selfadjointView<Eigen::Lower>().rankUpdate(u, -w / denom);
    h_inv_.triangularView<Eigen::StrictlyUpper>() = h_inv_.transpose();

    if (updates_ % kRefreshInterval == 0) {
        refresh();
    } else if (updates_ % kResidualCheckInterval == 0 && identity_residual() > kResidualTolerance) {
        refresh();
    }
}

double InfoMatrix::norm_sq(const Eigen::Ref<const Eigen::VectorXd>& z) const {
    const double q = z.dot(h_inv_ * z);
    if (q < 0.0) {
        ++clamped_;
        return 0.0;
    }
    return q;
}

double InfoMatrix::norm(const Eigen::Ref<const Eigen::VectorXd>& z) const { return std::sqrt(norm_sq(z)); }

void InfoMatrix::refresh() { h_inv_ = symmetric_inverse(h_); }

double InfoMatrix::identity_residual() const {
    const auto n = h_.rows();
    return (h_ * h_inv_ - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& m) {
    const auto n = m.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) {
        Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
        return 0.5 * (inv + inv.transpose());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    const auto& ev = eig.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    const double tol = scale * static_cast<double>(n) * 1e-12;
    std::size_t deficient = 0;
    for (Eigen::Index k = 0; k < n; ++k)
        if (ev(k) <= tol) ++deficient;
    if (deficient == 0) deficient = 1;
    throw RankDeficientError(deficient, static_cast<std::size_t>(n));
}

InfoMatrix observed_fisher(const ComparisonHistory& history, const ItemPool& pool, const Eigen::VectorXd& theta,
                           double ridge) {
    if (!(ridge >= 0.0)) throw ValidationError("ridge must be nonnegative");
    const auto d = static_cast<Eigen::Index>(pool.dim());
    Eigen::MatrixXd h = ridge * Eigen::MatrixXd::Identity(d, d);
    for (const auto& r : history) {
        const Eigen::VectorXd z = diff_vector(pool, r.i, r.j);
        h.selfadjointView<Eigen::Lower>().rankUpdate(z, sigmoid_slope(theta.dot(z)));
    }
    h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
    Eigen::MatrixXd prior = ridge * Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd inv = symmetric_inverse(h);
    return InfoMatrix::restore(std::move(prior), std::move(h), std::move(inv), history.size());
}

InfoMatrix sherman_morrison_update(InfoMatrix m, const Eigen::VectorXd& z, double w) {
    m.update(z, w);
    return m;
}

double weighted_norm(const InfoMatrix& m, const Eigen::VectorXd& z) { return m.norm(z); }

Eigen::MatrixXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, std::size_t k, Rng& rng) {
    if (k < 1) throw ValidationError("need at least one sample");
    const auto d = mean.size();
    if (cov.rows() != d || cov.cols() != d) throw ValidationError("covariance shape mismatch");
    if (cov.isZero(0.0)) {
        // Point mass: every draw is the mean.
        return mean.transpose().replicate(static_cast<Eigen::Index>(k), 1);
    }
    Eigen::MatrixXd c = cov;
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    for (int attempt = 0; llt.info() != Eigen::Success; ++attempt) {
        if (attempt == 3) throw FactorizationError("covariance is not positive definite after jitter");
        c.diagonal().array() += 1e-10;
        llt.compute(c);
    }
    std::normal_distribution<double> normal;
    Eigen::MatrixXd z(static_cast<Eigen::Index>(k), d);
    for (Eigen::Index r = 0; r < z.rows(); ++r)
        for (Eigen::Index col = 0; col < d; ++col) z(r, col) = normal(rng);
    Eigen::MatrixXd out = z * llt.matrixL().transpose();
    out.rowwise() += mean.transpose();
    return out;
}

}  // namespace prefrank
