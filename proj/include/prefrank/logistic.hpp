#pragma once

#include <cmath>

namespace prefrank {

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// sigma'(x) = sigma(x)(1 - sigma(x)), even in x.
inline double sigmoid_slope(double x) {
    const double e = std::exp(-std::fabs(x));
    const double d = 1.0 + e;
    return e / (d * d);
}

/// log(1 + e^x) without overflow.
inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// Probability that the pair's first item wins given score difference f.
/// Orientation-exact: p(f) + p(-f) == 1 in floating point.
inline double preference_probability(double f) {
    return f >= 0.0 ? sigmoid(f) : 1.0 - sigmoid(-f);
}

}  // namespace prefrank
