#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "prefrank/types.hpp"

namespace prefrank {

struct TrueSkillParams {
    double mu0 = 25.0;
    double sigma0 = 25.0 / 3.0;
    double beta = 25.0 / 6.0;   // performance noise, sigma0 / 2
    double tau = 25.0 / 300.0;  // dynamics, sigma0 / 100
};

/// Non-contextual Gaussian skill ratings, one (mu, sigma^2) per item.
struct TrueSkillState {
    Eigen::VectorXd mu;
    Eigen::VectorXd sigma2;
    double beta2 = 0.0;
    double tau2 = 0.0;

    static TrueSkillState initial(std::size_t n, const TrueSkillParams& params = {});
    std::size_t size() const { return static_cast<std::size_t>(mu.size()); }
    /// Adds items at the prior.
    void grow(std::size_t n, const TrueSkillParams& params = {});
};

/// Two-player, no-draw update; c = 1 means i won. tau^2 is added to both
/// variances before the moment-matching step.
TrueSkillState trueskill_update(TrueSkillState state, ItemId i, ItemId j, int c);
void trueskill_update_inplace(TrueSkillState& state, ItemId i, ItemId j, int c);

/// Probability that i beats j: Phi((mu_i - mu_j) / c).
double trueskill_win_probability(const TrueSkillState& state, ItemId i, ItemId j);

/// Draw-margin-free match quality sqrt(2 beta^2 / c^2) exp(-(mu_i - mu_j)^2 / (2 c^2)).
double trueskill_match_quality(const TrueSkillState& state, ItemId i, ItemId j);

}  // namespace prefrank
