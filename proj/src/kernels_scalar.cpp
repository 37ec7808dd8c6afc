#include <algorithm>
#include <cmath>
#include <numbers>

#include "kernels_impl.hpp"

namespace prefrank::kernels::scalar {

void pair_quadform(double diag_i, const double* diag, const double* cross, double* q, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) q[k] = diag_i + diag[k] - 2.0 * cross[k];
}

void guro_criterion(const double* mu, const double* q, double* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const double u = std::exp(-std::fabs(mu[k]));
        const double d = 1.0 + u;
        out[k] = u / (d * d) * std::sqrt(q[k] > 0.0 ? q[k] : 0.0);
    }
}

void norm_criterion(const double* q, double* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) out[k] = std::sqrt(q[k] > 0.0 ? q[k] : 0.0);
}

void bald_criterion(const double* mu, const double* q, double* out, std::size_t n, bool halved_exponent) {
    const double c2 = kBaldC2;
    const double c = std::sqrt(c2);
    const double k_exp = halved_exponent ? 0.5 : 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double s2 = q[k] > 0.0 ? q[k] : 0.0;
        const double x = std::fabs(mu[k]) / std::sqrt(1.0 + std::numbers::pi * s2 / 8.0);
        const double u = std::exp(-x);
        // h(sigma(x)) ln 2 = log1p(u) + x u / (1 + u), even in x
        const double entropy = (std::log1p(u) + x * u / (1.0 + u)) * std::numbers::log2e;
        const double denom = s2 + c2;
        const double expected = c / std::sqrt(denom) * std::exp(-k_exp * mu[k] * mu[k] / denom);
        out[k] = entropy - expected;
    }
}

double sigmoid_diff_variance(const double* a, const double* b, std::size_t k) {
    // Shifted by the first sample so identical draws give exactly zero.
    const double p0 = 1.0 / (1.0 + std::exp(b[0] - a[0]));
    double sum = 0.0, ss = 0.0;
    for (std::size_t s = 1; s < k; ++s) {
        const double dv = 1.0 / (1.0 + std::exp(b[s] - a[s])) - p0;
        sum += dv;
        ss += dv * dv;
    }
    const double kd = static_cast<double>(k);
    return std::max(0.0, (ss - sum * sum / kd) / (kd - 1.0));
}

}  // namespace prefrank::kernels::scalar
