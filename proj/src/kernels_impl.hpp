#pragma once

#include <cstddef>

#include "prefrank/kernels.hpp"

namespace prefrank::kernels {

// C^2 = 4 ln 2 in the BALD expected-entropy term.
inline constexpr double kBaldC2 = 2.772588722239781237668928485832706272302;

namespace scalar {
void pair_quadform(double diag_i, const double* diag, const double* cross, double* q, std::size_t n);
void guro_criterion(const double* mu, const double* q, double* out, std::size_t n);
void norm_criterion(const double* q, double* out, std::size_t n);
void bald_criterion(const double* mu, const double* q, double* out, std::size_t n, bool halved_exponent);
double sigmoid_diff_variance(const double* a, const double* b, std::size_t k);
}  // namespace scalar

#if defined(PREFRANK_HAVE_AVX2)
namespace avx2 {
void pair_quadform(double diag_i, const double* diag, const double* cross, double* q, std::size_t n);
void guro_criterion(const double* mu, const double* q, double* out, std::size_t n);
void norm_criterion(const double* q, double* out, std::size_t n);
void bald_criterion(const double* mu, const double* q, double* out, std::size_t n, bool halved_exponent);
double sigmoid_diff_variance(const double* a, const double* b, std::size_t k);
}  // namespace avx2
#endif

}  // namespace prefrank::kernels
