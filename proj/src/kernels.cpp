#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"
#include "prefrank/types.hpp"

namespace prefrank::kernels {

namespace {

constexpr KernelSet kScalar{
    "scalar",
    &scalar::pair_quadform,
    &scalar::guro_criterion,
    &scalar::norm_criterion,
    &scalar::bald_criterion,
    &scalar::sigmoid_diff_variance,
};

#if defined(PREFRANK_HAVE_AVX2)
constexpr KernelSet kAvx2{
    "avx2",
    &avx2::pair_quadform,
    &avx2::guro_criterion,
    &avx2::norm_criterion,
    &avx2::bald_criterion,
    &avx2::sigmoid_diff_variance,
};
#endif

const KernelSet& select_kernels() {
    const char* forced = std::getenv("PREFRANK_SIMD");
    if (forced && std::strcmp(forced, "scalar") == 0) return kScalar;
    if (const KernelSet* k = avx2_kernels()) return *k;
    return kScalar;
}

void check_same_length(std::size_t a, std::size_t b) {
    if (a != b) throw ValidationError("kernel span lengths differ");
}

}  // namespace

const KernelSet& scalar_kernels() { return kScalar; }

const KernelSet* avx2_kernels() {
#if defined(PREFRANK_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

const KernelSet& active_kernels() {
    static const KernelSet& chosen = select_kernels();
    return chosen;
}

void pair_quadform(double diag_i, std::span<const double> diag, std::span<const double> cross, std::span<double> q) {
    check_same_length(diag.size(), cross.size());
    check_same_length(diag.size(), q.size());
    active_kernels().pair_quadform(diag_i, diag.data(), cross.data(), q.data(), q.size());
}

void guro_criterion(std::span<const double> mu, std::span<const double> q, std::span<double> out) {
    check_same_length(mu.size(), q.size());
    check_same_length(mu.size(), out.size());
    active_kernels().guro_criterion(mu.data(), q.data(), out.data(), out.size());
}

void norm_criterion(std::span<const double> q, std::span<double> out) {
    check_same_length(q.size(), out.size());
    active_kernels().norm_criterion(q.data(), out.data(), out.size());
}

void bald_criterion(std::span<const double> mu, std::span<const double> q, std::span<double> out,
                    bool halved_exponent) {
    check_same_length(mu.size(), q.size());
    check_same_length(mu.size(), out.size());
    active_kernels().bald_criterion(mu.data(), q.data(), out.data(), out.size(), halved_exponent);
}

double sigmoid_diff_variance(std::span<const double> a, std::span<const double> b) {
    check_same_length(a.size(), b.size());
    if (a.size() < 2) throw ValidationError("variance needs at least two samples");
    return active_kernels().sigmoid_diff_variance(a.data(), b.data(), a.size());
}

}  // namespace prefrank::kernels
