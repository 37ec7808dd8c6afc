#pragma once

// Independent reference computations used as test oracles. They favour
// obviousness over speed and share no code with the library.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

#include "prefrank/dataset.hpp"

namespace oracle {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double sigmoid_slope(double x) { return sigmoid(x) * (1.0 - sigmoid(x)); }

// O(n^2) count of discordant pairs between two rankings (best first),
// normalized by n(n-1)/2.
inline double kendall_brute(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    const std::size_t n = a.size();
    std::vector<std::size_t> pa(n), pb(n);
    for (std::size_t r = 0; r < n; ++r) {
        pa[a[r]] = r;
        pb[b[r]] = r;
    }
    std::size_t bad = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if ((pa[i] < pa[j]) != (pb[i] < pb[j])) ++bad;
    return static_cast<double>(bad) / (static_cast<double>(n) * (n - 1) / 2.0);
}

// Penalized log-likelihood of a linear model written out term by term.
inline double linear_loglik(const Eigen::VectorXd& theta, const prefrank::ComparisonHistory& h,
                            const prefrank::ItemPool& pool, const Eigen::MatrixXd& prior_precision,
                            const Eigen::VectorXd& prior_mean) {
    double ll = 0.0;
    for (const auto& r : h) {
        const Eigen::VectorXd z = pool.feature(r.i).transpose() - pool.feature(r.j).transpose();
        const double p = sigmoid(theta.dot(z));
        ll += r.c ? std::log(p) : std::log(1.0 - p);
    }
    const Eigen::VectorXd dv = theta - prior_mean;
    return ll - 0.5 * dv.dot(prior_precision * dv);
}

inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double step = 1e-5) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Eigen::VectorXd a = x, b = x;
        a(k) += step;
        b(k) -= step;
        g(k) = (f(a) - f(b)) / (2.0 * step);
    }
    return g;
}

// Bisection for a monotone increasing function on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double binary_entropy_bits(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

}  // namespace oracle
