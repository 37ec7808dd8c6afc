#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "prefrank/info_matrix.hpp"

using namespace prefrank;

namespace {

Eigen::VectorXd random_vec(std::size_t d, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Eigen::VectorXd v(static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = nd(rng);
    return v;
}

double rel_frob(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_SUITE("info-matrix") {

TEST_CASE("empty history with ridge 1 is the identity") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 4);
    const auto m = observed_fisher(ComparisonHistory{}, ItemPool(x), Eigen::VectorXd::Zero(4), 1.0);
    CHECK(m.h().isIdentity(0.0));
    CHECK(m.h_inv().isIdentity(0.0));
}

TEST_CASE("one record at theta = 0 adds z z^T / 4") {
    Eigen::MatrixXd x(2, 2);
    x << 1, 2, 0, -1;
    ComparisonHistory h;
    h.append(0, 1, 1);
    const auto m = observed_fisher(h, ItemPool(x), Eigen::VectorXd::Zero(2), 2.0);
    Eigen::Vector2d z(1, 3);
    const Eigen::MatrixXd expect = 2.0 * Eigen::MatrixXd::Identity(2, 2) + 0.25 * z * z.transpose();
    CHECK((m.h() - expect).norm() < 1e-15);
}

TEST_CASE("orthogonal unit directions without ridge") {
    Eigen::MatrixXd x(3, 2);
    x << 0, 0, 1, 0, 0, 1;
    ComparisonHistory h;
    h.append(1, 0, 1);
    h.append(2, 0, 0);
    const auto m = observed_fisher(h, ItemPool(x), Eigen::VectorXd::Zero(2), 0.0);
    CHECK((m.h() - 0.25 * Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-15);
    CHECK((m.h_inv() - 4.0 * Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("rank deficiency names the missing directions") {
    Eigen::MatrixXd x(2, 3);
    x << 0, 0, 0, 1, 0, 0;
    ComparisonHistory h;
    h.append(1, 0, 1);
    try {
        observed_fisher(h, ItemPool(x), Eigen::VectorXd::Zero(3), 0.0);
        FAIL("expected rank deficiency");
    } catch (const RankDeficientError& e) {
        CHECK(e.deficient_dimensions() == 2);
    }
}

TEST_CASE("zero-weight update leaves the inverse unchanged") {
    InfoMatrix m(3, 1.5);
    const Eigen::MatrixXd before = m.h_inv();
    m.update(Eigen::Vector3d(1, 2, 3), 0.0);
    CHECK(m.h_inv() == before);
}

TEST_CASE("scalar Sherman-Morrison") {
    InfoMatrix m(1, 0.5);  // Hinv = [2]
    const auto u = sherman_morrison_update(m, Eigen::VectorXd::Ones(1), 0.25);
    CHECK(u.h()(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(u.h_inv()(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("100 random updates at d = 10 match direct inversion") {
    Rng rng(3);
    InfoMatrix m(10, 1.0);
    std::uniform_real_distribution<double> w(0.0, 0.25);
    for (int k = 0; k < 100; ++k) m.update(random_vec(10, rng), w(rng));
    CHECK(rel_frob(m.h_inv(), m.h().inverse()) < 1e-8);
}

TEST_CASE("maintained inverse over 1000 updates at d = 20") {
    Rng rng(4);
    InfoMatrix m(20, 1.0);
    std::uniform_real_distribution<double> w(0.0, 0.25);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        m.update(random_vec(20, rng, 2.0), w(rng));
        if (k % 50 == 49) worst = std::max(worst, rel_frob(m.h_inv(), m.h().inverse()));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("H stays exactly symmetric") {
    Rng rng(8);
    InfoMatrix m(6, 1.0);
    for (int k = 0; k < 200; ++k) m.update(random_vec(6, rng), 0.2);
    CHECK((m.h() - m.h().transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weighted norms shrink monotonically, strictly for the played direction") {
    Rng rng(12);
    InfoMatrix m(5, 1.0);
    const Eigen::VectorXd probe = random_vec(5, rng);
    double prev = m.norm_sq(probe);
    for (int k = 0; k < 100; ++k) {
        const Eigen::VectorXd z = random_vec(5, rng);
        const double before = m.norm_sq(z);
        m.update(z, 0.1);
        CHECK(m.norm_sq(z) < before);
        const double now = m.norm_sq(probe);
        CHECK(now <= prev + 1e-15);
        prev = now;
    }
}

TEST_CASE("weighted norm examples") {
    InfoMatrix id(3, 1.0);
    CHECK(weighted_norm(id, Eigen::Vector3d::Zero()) == 0.0);
    CHECK(weighted_norm(id, Eigen::Vector3d(1, 2, 2)) == doctest::Approx(3.0));
    Eigen::MatrixXd prec(2, 2);
    prec << 0.25, 0, 0, 1;  // inverse diag(4, 1)
    InfoMatrix m(prec);
    CHECK(weighted_norm(m, Eigen::Vector2d(1, 1)) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
}

TEST_CASE("negative quadratic forms clamp and count") {
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd bad(2, 2);
    bad << -1e-20, 0, 0, -1e-20;
    const auto m = InfoMatrix::restore(h, h, bad, 0);
    CHECK(m.norm(Eigen::Vector2d(1, 0)) == 0.0);
    CHECK(m.clamped_norms() == 1);
}

TEST_CASE("gaussian sampling moments") {
    Rng rng(2024);
    const auto s = sample_gaussian(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3), 100000, rng);
    const Eigen::RowVectorXd mean = s.colwise().mean();
    CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
    const Eigen::MatrixXd centered = s.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(s.rows() - 1);
    CHECK((cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("degenerate covariance returns the mean") {
    Rng rng(1);
    Eigen::Vector2d mu(1.5, -2.0);
    const auto s = sample_gaussian(mu, Eigen::MatrixXd::Zero(2, 2), 5, rng);
    for (Eigen::Index r = 0; r < 5; ++r) CHECK((s.row(r).transpose() - mu).norm() < 1e-4);
}

TEST_CASE("sampling is deterministic given the seed") {
    Eigen::MatrixXd cov(2, 2);
    cov << 2, 0.5, 0.5, 1;
    Rng a(9), b(9);
    CHECK(sample_gaussian(Eigen::Vector2d(0, 1), cov, 20, a) == sample_gaussian(Eigen::Vector2d(0, 1), cov, 20, b));
}

TEST_CASE("indefinite covariance fails after jitter") {
    Eigen::MatrixXd cov(2, 2);
    cov << 1, 0, 0, -1;
    Rng rng(1);
    CHECK_THROWS_AS(sample_gaussian(Eigen::Vector2d::Zero(), cov, 3, rng), FactorizationError);
}

TEST_CASE("refresh keeps the identity residual small") {
    Rng rng(5);
    InfoMatrix m(8, 0.1);
    for (int k = 0; k < 2500; ++k) m.update(random_vec(8, rng, 3.0), 0.25);
    CHECK(m.identity_residual() < 1e-6);
    CHECK(m.updates() == 2500);
}

}  // TEST_SUITE
