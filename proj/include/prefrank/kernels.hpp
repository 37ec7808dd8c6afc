#pragma once

// Data-parallel inner loops shared by the pair-selection criteria and the
// bound diagnostics. Each kernel has a scalar reference implementation and,
// on x86-64, an AVX2+FMA variant; the variant is chosen once at runtime.
// Setting PREFRANK_SIMD=scalar in the environment forces the reference path.

#include <cstddef>
#include <span>

namespace prefrank::kernels {

/// Function table for one instruction-set variant. All pointer arguments
/// are length n (k for the variance kernel); outputs may not alias inputs.
struct KernelSet {
    const char* name;

    /// q[k] = diag_i + diag[k] - 2 cross[k]  (squared weighted norm of x_i - x_k
    /// given Gram entries of X H^{-1} X^T).
    void (*pair_quadform)(double diag_i, const double* diag, const double* cross, double* q, std::size_t n);

    /// out[k] = sigma'(mu[k]) * sqrt(max(q[k], 0)).
    void (*guro_criterion)(const double* mu, const double* q, double* out, std::size_t n);

    /// out[k] = sqrt(max(q[k], 0)).
    void (*norm_criterion)(const double* q, double* out, std::size_t n);

    /// Probit-approximated BALD mutual information in bits:
    ///   h(sigma(mu / sqrt(1 + pi q / 8))) - C / sqrt(q + C^2) exp(-mu^2 / (k (q + C^2)))
    /// with C^2 = 4 ln 2 and k = 1, or k = 2 when `halved_exponent` is set.
    void (*bald_criterion)(const double* mu, const double* q, double* out, std::size_t n, bool halved_exponent);

    /// Unbiased sample variance over s of sigma(a[s] - b[s]); k >= 2.
    double (*sigmoid_diff_variance)(const double* a, const double* b, std::size_t k);
};

const KernelSet& scalar_kernels();

/// AVX2 table, or nullptr when not compiled in or not supported by the CPU.
const KernelSet* avx2_kernels();

/// The table used by the library.
const KernelSet& active_kernels();

// Span conveniences over the active table.
void pair_quadform(double diag_i, std::span<const double> diag, std::span<const double> cross, std::span<double> q);
void guro_criterion(std::span<const double> mu, std::span<const double> q, std::span<double> out);
void norm_criterion(std::span<const double> q, std::span<double> out);
void bald_criterion(std::span<const double> mu, std::span<const double> q, std::span<double> out,
                    bool halved_exponent = false);
double sigmoid_diff_variance(std::span<const double> a, std::span<const double> b);

}  // namespace prefrank::kernels
