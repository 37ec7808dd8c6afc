#include "prefrank/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "prefrank/kernels.hpp"
#include "prefrank/logistic.hpp"
#include "prefrank/models.hpp"

namespace prefrank {

double BoundConstants::rho() const { return std::sqrt(3.0 + 2.0 * std::log(1.0 + 4.0 * Q * Q / lambda0)); }

double BoundConstants::c1() const {
    const double rho_sq = 3.0 + 2.0 * std::log(1.0 + 4.0 * Q * Q / lambda0);
    return rho_sq * (1.0 + 2.0 * S) * (1.0 + 2.0 * S);
}

void BoundConstants::validate() const {
    if (!(S > 0.0) || !(Q > 0.0) || !(lambda0 > 0.0) || d < 1)
        throw ValidationError("bound constants need S, Q, lambda0 > 0 and d >= 1");
}

BoundConstants estimate_constants(const ItemPool& pool, const Eigen::VectorXd& theta_star, const InfoMatrix& info,
                                  std::size_t t) {
    BoundConstants c;
    c.d = pool.dim();
    c.S = theta_star.norm();
    c.Q = pool.features().rowwise().norm().maxCoeff();
    const double scale = 1.0 / static_cast<double>(std::max<std::size_t>(t, 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info.h() * scale, Eigen::EigenvaluesOnly);
    c.lambda0 = std::max(eig.eigenvalues().minCoeff(), kLambda0Floor);
    return c;
}

namespace {

// log alpha and log beta from the normalized quantities.
struct LogTerms {
    double log_alpha;
    double log_beta;
};

LogTerms log_terms(double first_order, double second_order, double delta, double t, double d, double c1) {
    const double inf = std::numeric_limits<double>::infinity();
    LogTerms lt{-inf, -inf};
    if (first_order > 0.0) lt.log_alpha = -delta * delta * t / (8.0 * d * c1 * first_order * first_order);
    if (second_order > 0.0) lt.log_beta = -delta * t / (d * c1 * second_order);
    return lt;
}

// (x^{-1} - 1)^{-1} = x / (1 - x), from log x.
double odds_from_log(double log_x) {
    if (log_x == -std::numeric_limits<double>::infinity()) return 0.0;
    return -std::exp(log_x) / std::expm1(log_x);
}

}  // namespace

ConcentrationTerms concentration_terms(const Eigen::VectorXd& z, const Eigen::VectorXd& theta, const InfoMatrix& info,
                                       double delta, std::size_t t, const BoundConstants& consts) {
    consts.validate();
    if (!(delta > 0.0)) throw ValidationError("margin must be positive");
    if (t < 1) throw ValidationError("T must be >= 1");
    const double tt = static_cast<double>(t);
    const double nn = tt * info.norm_sq(z);
    const double first = sigmoid_slope(z.dot(theta)) * std::sqrt(nn);
    const auto lt = log_terms(first, nn, delta, tt, static_cast<double>(consts.d), consts.c1());
    return {std::exp(lt.log_alpha), std::exp(lt.log_beta)};
}

MarginSpec oracle_margins(const ItemPool& pool, const Eigen::VectorXd& theta_star) {
    const std::size_t n = pool.size();
    if (n < 2) throw ValidationError("margins need at least two items");
    const Eigen::VectorXd s = pool.features() * theta_star;
    const auto ranking = induced_ranking(s);
    std::vector<std::size_t> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[ranking[r]] = r;

    MarginSpec m;
    m.pair_margins.reserve(n * (n - 1) / 2);
    m.delta_star = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double f = s(static_cast<Eigen::Index>(i)) - s(static_cast<Eigen::Index>(j));
            if (f == 0.0)
                throw TieError("items " + std::to_string(i) + " and " + std::to_string(j) + " are tied under theta_*");
            const double margin = std::fabs(sigmoid(f) - 0.5);
            m.pair_margins.push_back(margin);
            const double dist = static_cast<double>(rank[i] > rank[j] ? rank[i] - rank[j] : rank[j] - rank[i]);
            m.delta_star = std::min(m.delta_star, margin / dist);
        }
    }
    return m;
}

BoundResult ordering_error_bound(const ItemPool& pool, const Eigen::VectorXd& theta, const InfoMatrix& info,
                                 std::size_t t, double eps, const BoundConstants& consts, const MarginSpec& margins) {
    consts.validate();
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("eps must lie in (0, 1)");
    if (!(margins.delta_star > 0.0)) throw ValidationError("Delta_* must be positive");
    if (t < 1) throw ValidationError("T must be >= 1");
    const std::size_t n = pool.size();
    const double tt = static_cast<double>(t);
    const double d = static_cast<double>(consts.d);

    // Maxima over pairs of the normalized first- and second-order quantities;
    // alpha_ij and beta_ij are monotone in them.
    const auto& x = pool.features();
    const Eigen::MatrixXd p = x * info.h_inv();
    const Eigen::VectorXd g = (p.array() * x.array()).rowwise().sum();
    const Eigen::VectorXd s = x * theta;
    double max_first = 0.0, max_second = 0.0;
    std::vector<double> cross, q, mu, crit;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto m = n - i - 1;
        cross.resize(m);
        q.resize(m);
        mu.resize(m);
        crit.resize(m);
        const auto ii = static_cast<Eigen::Index>(i);
        Eigen::Map<Eigen::VectorXd>(cross.data(), static_cast<Eigen::Index>(m)).noalias() =
            x.bottomRows(static_cast<Eigen::Index>(m)) * p.row(ii).transpose();
        kernels::pair_quadform(g(ii), std::span<const double>(g.data() + i + 1, m), cross, q);
        for (std::size_t k = 0; k < m; ++k) mu[k] = s(ii) - s(static_cast<Eigen::Index>(i + 1 + k));
        kernels::guro_criterion(mu, q, crit);
        for (std::size_t k = 0; k < m; ++k) {
            max_first = std::max(max_first, crit[k]);
            max_second = std::max(max_second, q[k]);
        }
    }
    // Normalize to H_tilde = H / T.
    max_first *= std::sqrt(tt);
    max_second *= tt;

    BoundResult r;
    r.max_first_order = max_first;
    r.max_second_order = max_second;
    const auto lt = log_terms(max_first, max_second, margins.delta_star, tt, d, consts.c1());
    r.log_alpha_star = lt.log_alpha;
    r.log_beta_star = lt.log_beta;
    r.alpha_star = std::exp(lt.log_alpha);
    r.beta_star = std::exp(lt.log_beta);

    const double scale = 4.0 * d * tt / (eps * static_cast<double>(n));
    r.approx = std::min(1.0, scale * (r.alpha_star + r.beta_star));
    const double threshold = 1.0 / (4.0 * d * tt);
    r.vacuous = !(r.alpha_star <= threshold && r.beta_star <= threshold);
    if (r.vacuous) {
        r.value = 1.0;
    } else {
        r.value = std::min(1.0, scale * (odds_from_log(lt.log_alpha) + odds_from_log(lt.log_beta)));
    }
    return r;
}

}  // namespace prefrank
