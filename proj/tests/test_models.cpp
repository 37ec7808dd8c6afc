#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "prefrank/logistic.hpp"
#include "prefrank/models.hpp"
#include "prefrank/trueskill.hpp"

using namespace prefrank;

namespace {

struct Problem {
    ItemPool pool;
    ComparisonHistory history;
    Eigen::VectorXd theta_star;
};

Problem random_problem(std::size_t n, std::size_t d, std::size_t t, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
    Eigen::VectorXd th(static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < th.size(); ++k) th(k) = nd(rng);
    Problem p{ItemPool(x), {}, th};
    std::uniform_int_distribution<std::size_t> item(0, n - 1);
    while (p.history.size() < t) {
        const auto i = item(rng), j = item(rng);
        if (i == j) continue;
        const double pr = oracle::sigmoid(th.dot(diff_vector(p.pool, i, j)));
        p.history.append(i, j, std::bernoulli_distribution(pr)(rng) ? 1 : 0);
    }
    return p;
}

}  // namespace

TEST_SUITE("preference-models") {

TEST_CASE("uninformed model predicts one half") {
    const ItemPool pool(Eigen::MatrixXd::Random(3, 2));
    LinearModel m{Eigen::VectorXd::Zero(2), 1.0, {}};
    CHECK(predict_prob(m, pool, 0, 1) == 0.5);
    HybridModel h{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3), 1.0, 1.0, {}};
    CHECK(predict_prob(h, pool, 2, 1) == 0.5);
}

TEST_CASE("logistic value at a unit margin") {
    Eigen::MatrixXd x(2, 1);
    x << 1, 0;
    LinearModel m{Eigen::VectorXd::Ones(1), 1.0, {}};
    // 1 / (1 + e^-1), 30-digit reference
    CHECK(predict_prob(m, ItemPool(x), 0, 1) == doctest::Approx(0.731058578630004879).epsilon(1e-15));
}

TEST_CASE("hybrid with zero features reduces to per-item offsets") {
    HybridModel h{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3), 1.0, 1.0, {}};
    h.zeta << 2.0, 0.0, -1.0;
    const ItemPool pool(Eigen::MatrixXd::Zero(3, 2));
    CHECK(predict_prob(h, pool, 0, 1) == doctest::Approx(oracle::sigmoid(2.0)).epsilon(1e-15));
}

TEST_CASE("complementary probabilities sum to one exactly") {
    const auto p = random_problem(12, 4, 0, 3);
    LinearModel m{Eigen::VectorXd::Random(4) * 10.0, 1.0, {}};
    HybridModel h{m.theta, Eigen::VectorXd::Random(12) * 5.0, 1.0, 1.0, {}};
    for (ItemId i = 0; i < 12; ++i)
        for (ItemId j = 0; j < 12; ++j) {
            if (i == j) continue;
            CHECK(predict_prob(m, p.pool, i, j) + predict_prob(m, p.pool, j, i) == 1.0);
            CHECK(predict_prob(h, p.pool, i, j) + predict_prob(h, p.pool, j, i) == 1.0);
        }
}

TEST_CASE("empty history fits to zero") {
    const auto p = random_problem(5, 3, 0, 1);
    const auto m = fit_mle(p.history, p.pool, 1.0);
    CHECK(m.theta.isZero(0.0));
    CHECK(m.status.converged);
}

TEST_CASE("balanced labels fit to zero") {
    Eigen::MatrixXd x(2, 2);
    x << 1, -1, 0, 2;
    ComparisonHistory h;
    h.append(0, 1, 1);
    h.append(0, 1, 0);
    CHECK(fit_mle(h, ItemPool(x), 1.0).theta.norm() < 1e-9);
}

TEST_CASE("one-dimensional fit matches bisection") {
    Eigen::MatrixXd x(2, 1);
    x << 1, 0;
    ComparisonHistory h;
    for (int k = 0; k < 10; ++k) h.append(0, 1, 1);
    const double root = oracle::bisect([](double t) { return 10.0 * oracle::sigmoid(t) - 10.0 + t; }, -10, 10);
    CHECK(root == doctest::Approx(1.633506170155846384).epsilon(1e-12));
    CHECK(fit_mle(h, ItemPool(x), 1.0).theta(0) == doctest::Approx(root).epsilon(1e-7));
}

TEST_CASE("gradient vanishes at the optimum") {
    const auto p = random_problem(20, 5, 200, 7);
    const auto m = fit_mle(p.history, p.pool, 1.0);
    CHECK(m.status.converged);
    CHECK(loglik_grad(m, p.history, p.pool).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("empty history gradient is -theta") {
    const auto p = random_problem(4, 3, 0, 2);
    LinearModel m{Eigen::Vector3d(0.5, -1.0, 2.0), 1.0, {}};
    CHECK((loglik_grad(m, p.history, p.pool) + m.theta).norm() < 1e-15);
}

TEST_CASE("analytic gradient matches central differences") {
    const auto p = random_problem(15, 5, 60, 11);
    Rng rng(99);
    std::normal_distribution<double> nd;
    const Eigen::MatrixXd prior = Eigen::MatrixXd::Identity(5, 5);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd th(5);
        for (Eigen::Index k = 0; k < 5; ++k) th(k) = nd(rng);
        LinearModel m{th, 1.0, {}};
        const Eigen::VectorXd g = loglik_grad(m, p.history, p.pool);
        const Eigen::VectorXd fd = oracle::central_difference(
            [&](const Eigen::VectorXd& t) { return oracle::linear_loglik(t, p.history, p.pool, prior, Eigen::VectorXd::Zero(5)); }, th);
        CHECK((g - fd).norm() / fd.norm() < 1e-4);
    }
}

TEST_CASE("hybrid gradient matches central differences") {
    const auto p = random_problem(6, 3, 40, 5);
    HybridModel m{Eigen::Vector3d(0.3, -0.2, 0.1), Eigen::VectorXd::Random(6), 1.0, 0.5, {}};
    const Eigen::VectorXd g = loglik_grad(m, p.history, p.pool);
    Eigen::VectorXd beta(9);
    beta << m.theta, m.zeta;
    const Eigen::VectorXd fd = oracle::central_difference(
        [&](const Eigen::VectorXd& b) {
            HybridModel q = m;
            q.theta = b.head(3);
            q.zeta = b.tail(6);
            return penalized_loglik(q, p.history, p.pool);
        },
        beta);
    CHECK((g - fd).norm() / fd.norm() < 1e-4);
}

TEST_CASE("fit is invariant to history order") {
    const auto p = random_problem(25, 4, 150, 13);
    std::vector<std::size_t> order(p.history.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), Rng(4));
    ComparisonHistory shuffled;
    for (auto k : order) shuffled.append(p.history[k].i, p.history[k].j, p.history[k].c);
    const auto a = fit_mle(p.history, p.pool, 1.0);
    const auto b = fit_mle(shuffled, p.pool, 1.0);
    CHECK((a.theta - b.theta).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("unit-prior MAP equals ridge MLE") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto p = random_problem(20, 6, 30 + 10 * s, 100 + s);
        const auto mle = fit_mle(p.history, p.pool, 1.0);
        const auto map = fit_map(p.history, p.pool, Eigen::VectorXd::Zero(6), Eigen::MatrixXd::Identity(6, 6));
        CHECK((mle.theta - map.theta_map).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("MAP without data is the prior") {
    const auto p = random_problem(4, 2, 0, 1);
    const Eigen::Vector2d m(0.7, -0.3);
    Eigen::MatrixXd prec(2, 2);
    prec << 2, 0.5, 0.5, 1;
    const auto b = fit_map(p.history, p.pool, m, prec);
    CHECK((b.theta_map - m).norm() < 1e-12);
    CHECK((b.posterior.h() - prec).norm() < 1e-15);
}

TEST_CASE("Laplace posterior precision") {
    const auto p = random_problem(10, 3, 50, 21);
    const auto b = fit_map(p.history, p.pool, Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3));
    Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(3, 3);
    for (const auto& r : p.history) {
        const Eigen::VectorXd z = diff_vector(p.pool, r.i, r.j);
        expect += oracle::sigmoid_slope(b.theta_map.dot(z)) * z * z.transpose();
    }
    CHECK((b.posterior.h() - expect).norm() < 1e-10);
}

TEST_CASE("hybrid with zero features matches a per-item fit") {
    // Per-item logistic fit written independently: gradient ascent on zeta.
    const std::size_t n = 6;
    Rng rng(31);
    ComparisonHistory h;
    std::uniform_int_distribution<std::size_t> item(0, n - 1);
    const Eigen::VectorXd truth = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n), 2.0, -2.0);
    while (h.size() < 120) {
        const auto i = item(rng), j = item(rng);
        if (i == j) continue;
        h.append(i, j, std::bernoulli_distribution(oracle::sigmoid(truth(i) - truth(j)))(rng) ? 1 : 0);
    }
    const ItemPool pool(Eigen::MatrixXd::Zero(n, 2));
    const auto m = fit_hybrid(h, pool, 1.0, 1.0);
    CHECK(m.theta.isZero(0.0));

    Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (int it = 0; it < 20000; ++it) {
        Eigen::VectorXd g = -z;
        for (const auto& r : h) {
            const double res = r.c - oracle::sigmoid(z(r.i) - z(r.j));
            g(r.i) += res;
            g(r.j) -= res;
        }
        z += 0.02 * g;
    }
    CHECK((m.zeta - z).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(induced_ranking(m, pool) == induced_ranking(z));
}

TEST_CASE("hybrid empty history and new items") {
    const auto p = random_problem(5, 2, 0, 3);
    auto m = fit_hybrid(p.history, p.pool, 1.0, 1.0);
    CHECK(m.theta.isZero(0.0));
    CHECK(m.zeta.isZero(0.0));

    const auto q = random_problem(6, 2, 80, 9);
    auto fitted = fit_hybrid(q.history, q.pool, 1.0, 1.0);
    // Append an item; refit with no comparisons touching it.
    Eigen::MatrixXd x(7, 2);
    x << q.pool.features(), Eigen::RowVector2d(0.3, 0.4);
    fitted.grow(7);
    const auto refit = fit_hybrid(q.history, ItemPool(x), 1.0, 1.0, {}, &fitted);
    CHECK(refit.zeta(6) == 0.0);
    const Eigen::VectorXd s = item_scores(refit, ItemPool(x));
    CHECK(s(6) == doctest::Approx(refit.theta.dot(Eigen::Vector2d(0.3, 0.4))));
}

TEST_CASE("induced ranking") {
    CHECK(induced_ranking(Eigen::VectorXd::Zero(4)) == std::vector<ItemId>{0, 1, 2, 3});
    Eigen::MatrixXd x(3, 1);
    x << 3, 1, 2;
    LinearModel m{Eigen::VectorXd::Ones(1), 1.0, {}};
    CHECK(induced_ranking(m, ItemPool(x)) == std::vector<ItemId>{0, 2, 1});
}

TEST_CASE("ranking agrees with pairwise signs") {
    const auto p = random_problem(20, 3, 0, 17);
    LinearModel m{p.theta_star, 1.0, {}};
    const auto rank = induced_ranking(m, p.pool);
    const Eigen::VectorXd s = item_scores(m, p.pool);
    std::vector<std::size_t> pos(20);
    for (std::size_t r = 0; r < 20; ++r) pos[rank[r]] = r;
    for (ItemId i = 0; i < 20; ++i)
        for (ItemId j = i + 1; j < 20; ++j) {
            const double f = s(static_cast<Eigen::Index>(i)) - s(static_cast<Eigen::Index>(j));
            if (f != 0.0) CHECK((pos[i] < pos[j]) == (f > 0.0));
        }
}

TEST_CASE("iteration cap reports non-convergence") {
    const auto p = random_problem(20, 5, 100, 8);
    FitOptions opts;
    opts.max_iter = 1;
    opts.grad_tol = 1e-14;
    const auto m = fit_mle(p.history, p.pool, 1.0, opts);
    CHECK_FALSE(m.status.converged);
    CHECK(m.theta.allFinite());
}

// --- TrueSkill ---------------------------------------------------------------

TEST_CASE("equal priors update symmetrically") {
    auto s = TrueSkillState::initial(2);
    const auto u = trueskill_update(s, 0, 1, 1);
    CHECK(u.mu(0) > u.mu(1));
    CHECK(u.mu(0) - s.mu(0) == doctest::Approx(s.mu(1) - u.mu(1)).epsilon(1e-14));
    CHECK(u.sigma2(0) < s.sigma2(0) + s.tau2);
    CHECK(u.sigma2(1) < s.sigma2(1) + s.tau2);
}

TEST_CASE("repeated wins drive the win probability to one") {
    auto s = TrueSkillState::initial(2);
    double prev = trueskill_win_probability(s, 0, 1);
    for (int k = 0; k < 50; ++k) {
        trueskill_update_inplace(s, 0, 1, 1);
        const double p = trueskill_win_probability(s, 0, 1);
        CHECK(p > prev);
        prev = p;
        CHECK((s.sigma2.array() > 0.0).all());
    }
    CHECK(prev > 0.99);
}

TEST_CASE("one win matches a Monte Carlo moment-matching oracle") {
    const TrueSkillParams prm;
    auto s = TrueSkillState::initial(2, prm);
    const auto u = trueskill_update(s, 0, 1, 1);

    Rng rng(123);
    const double sd = std::sqrt(prm.sigma0 * prm.sigma0 + prm.tau * prm.tau);
    std::normal_distribution<double> skill(prm.mu0, sd), perf(0.0, prm.beta);
    double n = 0, m0 = 0, m1 = 0, q0 = 0, q1 = 0;
    for (int k = 0; k < 1000000; ++k) {
        const double a = skill(rng), b = skill(rng);
        if (a + perf(rng) <= b + perf(rng)) continue;
        n += 1;
        m0 += a;
        m1 += b;
        q0 += a * a;
        q1 += b * b;
    }
    m0 /= n;
    m1 /= n;
    const double v0 = q0 / n - m0 * m0, v1 = q1 / n - m1 * m1;
    CHECK(u.mu(0) == doctest::Approx(m0).epsilon(1e-2));
    CHECK(u.mu(1) == doctest::Approx(m1).epsilon(1e-2));
    CHECK(u.sigma2(0) == doctest::Approx(v0).epsilon(1e-2));
    CHECK(u.sigma2(1) == doctest::Approx(v1).epsilon(1e-2));
}

TEST_CASE("extreme upsets keep variances positive") {
    auto s = TrueSkillState::initial(2);
    s.mu(0) = 1e4;
    s.sigma2.setConstant(1e-8);
    trueskill_update_inplace(s, 0, 1, 0);
    CHECK((s.sigma2.array() > 0.0).all());
    CHECK(s.mu.allFinite());
}

}  // TEST_SUITE
