#include "prefrank/trueskill.hpp"

#include <cmath>
#include <numbers>

namespace prefrank {

namespace {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// v(t) = phi(t) / Phi(t), with the asymptote -t for very negative t.
double v_win(double t) {
    const double denom = normal_cdf(t);
    if (denom < 1e-300) return -t;
    return normal_pdf(t) / denom;
}

double w_win(double t) {
    const double v = v_win(t);
    return v * (v + t);
}

void check_pair(const TrueSkillState& s, ItemId i, ItemId j) {
    if (i == j) throw InvalidPairError("trueskill update of an item against itself");
    if (i >= s.size() || j >= s.size()) throw InvalidPairError("item id out of range");
}

}  // namespace

TrueSkillState TrueSkillState::initial(std::size_t n, const TrueSkillParams& params) {
    TrueSkillState s;
    s.mu = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), params.mu0);
    s.sigma2 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), params.sigma0 * params.sigma0);
    s.beta2 = params.beta * params.beta;
    s.tau2 = params.tau * params.tau;
    return s;
}

void TrueSkillState::grow(std::size_t n, const TrueSkillParams& params) {
    const auto old = mu.size();
    if (static_cast<std::size_t>(old) >= n) return;
    mu.conservativeResize(static_cast<Eigen::Index>(n));
    sigma2.conservativeResize(static_cast<Eigen::Index>(n));
    mu.tail(static_cast<Eigen::Index>(n) - old).setConstant(params.mu0);
    sigma2.tail(static_cast<Eigen::Index>(n) - old).setConstant(params.sigma0 * params.sigma0);
}

void trueskill_update_inplace(TrueSkillState& s, ItemId i, ItemId j, int c) {
    check_pair(s, i, j);
    const auto winner = static_cast<Eigen::Index>(c == 1 ? i : j);
    const auto loser = static_cast<Eigen::Index>(c == 1 ? j : i);
    s.sigma2(winner) += s.tau2;
    s.sigma2(loser) += s.tau2;
    const double c2 = 2.0 * s.beta2 + s.sigma2(winner) + s.sigma2(loser);
    const double cc = std::sqrt(c2);
    const double t = (s.mu(winner) - s.mu(loser)) / cc;
    const double v = v_win(t);
    const double w = w_win(t);
    const double sw = s.sigma2(winner);
    const double sl = s.sigma2(loser);
    s.mu(winner) += sw / cc * v;
    s.mu(loser) -= sl / cc * v;
    // w lies in (0, 1), so the factors stay positive; the floor guards rounding.
    s.sigma2(winner) = std::max(sw * (1.0 - sw / c2 * w), 1e-300);
    s.sigma2(loser) = std::max(sl * (1.0 - sl / c2 * w), 1e-300);
}

TrueSkillState trueskill_update(TrueSkillState state, ItemId i, ItemId j, int c) {
    trueskill_update_inplace(state, i, j, c);
    return state;
}

double trueskill_win_probability(const TrueSkillState& s, ItemId i, ItemId j) {
    check_pair(s, i, j);
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(j);
    const double c2 = 2.0 * s.beta2 + s.sigma2(a) + s.sigma2(b);
    return normal_cdf((s.mu(a) - s.mu(b)) / std::sqrt(c2));
}

double trueskill_match_quality(const TrueSkillState& s, ItemId i, ItemId j) {
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(j);
    const double c2 = 2.0 * s.beta2 + s.sigma2(a) + s.sigma2(b);
    const double dmu = s.mu(a) - s.mu(b);
    return std::sqrt(2.0 * s.beta2 / c2) * std::exp(-dmu * dmu / (2.0 * c2));
}

}  // namespace prefrank
