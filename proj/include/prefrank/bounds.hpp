#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "prefrank/dataset.hpp"
#include "prefrank/info_matrix.hpp"

namespace prefrank {

/// Constants of the concentration result.
struct BoundConstants {
    double S = 1.0;        // |theta_*| <= S
    double Q = 1.0;        // |x_i| <= Q
    double lambda0 = 1.0;  // minimum-eigenvalue floor
    std::size_t d = 1;

    /// rho(lambda0) = sqrt(3 + 2 log(1 + 4 Q^2 / lambda0)).
    double rho() const;
    /// C1 = rho^2 (1 + 2S)^2 (>= 3).
    double c1() const;
    void validate() const;
};

/// lambda0 floor used when estimating constants from data.
inline constexpr double kLambda0Floor = 1e-6;

/// S = |theta_star|, Q = max_i |x_i|, lambda0 = max(lambda_min(H / T), 1e-6).
BoundConstants estimate_constants(const ItemPool& pool, const Eigen::VectorXd& theta_star, const InfoMatrix& info,
                                  std::size_t t);

struct ConcentrationTerms {
    double alpha = 0.0;  // first-order (aleatoric-weighted) term
    double beta = 0.0;   // second-order term
};

/// alpha = exp(-Delta^2 T / (8 d C1 (sigma'(z^T theta) |z|_{Ht^-1})^2)),
/// beta  = exp(-Delta T / (d C1 |z|^2_{Ht^-1})), where |z|^2_{Ht^-1} = T |z|^2_{H^-1}.
/// A zero norm gives alpha = beta = 0.
ConcentrationTerms concentration_terms(const Eigen::VectorXd& z, const Eigen::VectorXd& theta, const InfoMatrix& info,
                                       double delta, std::size_t t, const BoundConstants& consts);

struct MarginSpec {
    double delta_star = 0.0;
    /// Per-pair margins |sigma(z_ij^T theta_*) - 1/2|, row-major over i < j.
    std::vector<double> pair_margins;
};

/// Margins from a known parameter; throws TieError on an exact tie.
MarginSpec oracle_margins(const ItemPool& pool, const Eigen::VectorXd& theta_star);

struct BoundResult {
    double value = 1.0;        // min(1, exact form); 1 when vacuous
    double approx = 1.0;       // min(1, 4dT/(eps n) (alpha_* + beta_*))
    bool vacuous = true;       // validity condition alpha_*, beta_* <= 1/(4dT) unmet
    double alpha_star = 1.0;
    double beta_star = 1.0;
    double log_alpha_star = 0.0;
    double log_beta_star = 0.0;
    double max_first_order = 0.0;   // max_ij sigma'(z^T theta) |z|_{Ht^-1}
    double max_second_order = 0.0;  // max_ij |z|^2_{Ht^-1}
};

/// Upper bound on P(R(theta_T) >= eps) over all item pairs of `pool`.
BoundResult ordering_error_bound(const ItemPool& pool, const Eigen::VectorXd& theta, const InfoMatrix& info,
                                 std::size_t t, double eps, const BoundConstants& consts, const MarginSpec& margins);

}  // namespace prefrank
