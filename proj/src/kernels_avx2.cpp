// Compiled with -mavx2 -mfma; only entered after a runtime CPU check.
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kernels_impl.hpp"

namespace prefrank::kernels::avx2 {

namespace {

inline __m256d polevl3(__m256d x, double c0, double c1, double c2) {
    return _mm256_fmadd_pd(_mm256_fmadd_pd(_mm256_set1_pd(c0), x, _mm256_set1_pd(c1)), x, _mm256_set1_pd(c2));
}

// exp(x), Cephes rational approximation on [-ln2/2, ln2/2] scaled by 2^n.
// Inputs are clamped to [-708, 708], so the result is always a normal number.
inline __m256d exp_pd(__m256d x) {
    x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(708.0));
    const __m256d fx = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(std::numbers::log2e)),
                                       _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(6.93145751953125E-1), x);
    x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(1.42860682030941723212E-6), x);
    const __m256d xx = _mm256_mul_pd(x, x);
    const __m256d px = _mm256_mul_pd(
        x, polevl3(xx, 1.26177193074810590878E-4, 3.02994407707441961300E-2, 9.99999999999999999910E-1));
    const __m256d qx = _mm256_fmadd_pd(
        polevl3(xx, 3.00198505138664455042E-6, 2.52448340349684104192E-3, 2.27265548208155028766E-1), xx,
        _mm256_set1_pd(2.00000000000000000009E0));
    __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    r = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, _mm256_set1_pd(1.0));
    // 2^fx via the exponent field.
    const __m128i n32 = _mm256_cvtpd_epi32(fx);
    __m256i n64 = _mm256_cvtepi32_epi64(n32);
    n64 = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(r, _mm256_castsi256_pd(n64));
}

// log(y) for y in [1, 2]; Cephes log with the frexp split done on the bits.
inline __m256d log_1to2_pd(__m256d y) {
    const __m256i bits = _mm256_castpd_si256(y);
    const __m256i exp_field = _mm256_srli_epi64(bits, 52);
    // exponent e such that y = m 2^e with m in [0.5, 1)
    const __m256i e_int = _mm256_sub_epi64(exp_field, _mm256_set1_epi64x(1022));
    // int64 -> double for small magnitudes: or into 2^52 and subtract.
    const __m256d magic = _mm256_set1_pd(4503599627370496.0);
    __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(e_int, _mm256_castpd_si256(magic))), magic);
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                                                    _mm256_set1_epi64x(0x3FE0000000000000LL)));
    const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(std::numbers::sqrt2 / 2.0), _CMP_LT_OQ);
    e = _mm256_sub_pd(e, _mm256_and_pd(small, _mm256_set1_pd(1.0)));
    // x = 2m - 1 when small, else m - 1
    const __m256d x = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(small, m)), _mm256_set1_pd(1.0));
    const __m256d z = _mm256_mul_pd(x, x);

    __m256d p = _mm256_set1_pd(1.01875663804580931796E-4);
    p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(4.97494994976747001425E-1));
    p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(4.70579119878881725854E0));
    p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(1.44989225341610930846E1));
    p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(1.79368678507819816313E1));
    p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(7.70838733755885391666E0));
    __m256d q = _mm256_add_pd(x, _mm256_set1_pd(1.12873587189167450590E1));
    q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(4.52279145837532221105E1));
    q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(8.29875266912776603211E1));
    q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(7.11544750618563894466E1));
    q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(2.31251620126765340583E1));

    __m256d r = _mm256_mul_pd(x, _mm256_div_pd(_mm256_mul_pd(z, p), q));
    r = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), r);
    r = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, r);
    __m256d out = _mm256_add_pd(x, r);
    return _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), out);
}

// log1p(u) for u in [0, 1].
inline __m256d log1p_unit_pd(__m256d u) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d y = _mm256_add_pd(one, u);
    // correct the rounding of 1 + u: log1p(u) ~ log(y) - ((y - 1) - u) / y
    const __m256d corr = _mm256_div_pd(_mm256_sub_pd(_mm256_sub_pd(y, one), u), y);
    return _mm256_sub_pd(log_1to2_pd(y), corr);
}

inline __m256d abs_pd(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

inline __m256d sqrt_clamped(__m256d q) { return _mm256_sqrt_pd(_mm256_max_pd(q, _mm256_setzero_pd())); }

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void pair_quadform(double diag_i, const double* diag, const double* cross, double* q, std::size_t n) {
    const __m256d di = _mm256_set1_pd(diag_i);
    const __m256d m2 = _mm256_set1_pd(-2.0);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d v = _mm256_fmadd_pd(m2, _mm256_loadu_pd(cross + k), _mm256_add_pd(di, _mm256_loadu_pd(diag + k)));
        _mm256_storeu_pd(q + k, v);
    }
    scalar::pair_quadform(diag_i, diag + k, cross + k, q + k, n - k);
}

void guro_criterion(const double* mu, const double* q, double* out, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d u = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), abs_pd(_mm256_loadu_pd(mu + k))));
        const __m256d d = _mm256_add_pd(one, u);
        const __m256d slope = _mm256_div_pd(u, _mm256_mul_pd(d, d));
        _mm256_storeu_pd(out + k, _mm256_mul_pd(slope, sqrt_clamped(_mm256_loadu_pd(q + k))));
    }
    scalar::guro_criterion(mu + k, q + k, out + k, n - k);
}

void norm_criterion(const double* q, double* out, std::size_t n) {
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) _mm256_storeu_pd(out + k, sqrt_clamped(_mm256_loadu_pd(q + k)));
    scalar::norm_criterion(q + k, out + k, n - k);
}

void bald_criterion(const double* mu, const double* q, double* out, std::size_t n, bool halved_exponent) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d pi8 = _mm256_set1_pd(std::numbers::pi / 8.0);
    const __m256d c2 = _mm256_set1_pd(kBaldC2);
    const __m256d c = _mm256_set1_pd(std::sqrt(kBaldC2));
    const __m256d inv_ln2 = _mm256_set1_pd(std::numbers::log2e);
    const __m256d k_exp = _mm256_set1_pd(halved_exponent ? 0.5 : 1.0);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d m = _mm256_loadu_pd(mu + k);
        const __m256d s2 = _mm256_max_pd(_mm256_loadu_pd(q + k), zero);
        const __m256d x = _mm256_div_pd(abs_pd(m), _mm256_sqrt_pd(_mm256_fmadd_pd(pi8, s2, one)));
        const __m256d u = exp_pd(_mm256_sub_pd(zero, x));
        const __m256d ent =
            _mm256_mul_pd(_mm256_add_pd(log1p_unit_pd(u), _mm256_div_pd(_mm256_mul_pd(x, u), _mm256_add_pd(one, u))),
                          inv_ln2);
        const __m256d denom = _mm256_add_pd(s2, c2);
        const __m256d arg = _mm256_div_pd(_mm256_mul_pd(k_exp, _mm256_mul_pd(m, m)), denom);
        const __m256d expected = _mm256_mul_pd(_mm256_div_pd(c, _mm256_sqrt_pd(denom)), exp_pd(_mm256_sub_pd(zero, arg)));
        _mm256_storeu_pd(out + k, _mm256_sub_pd(ent, expected));
    }
    scalar::bald_criterion(mu + k, q + k, out + k, n - k, halved_exponent);
}

double sigmoid_diff_variance(const double* a, const double* b, std::size_t k) {
    // Every sample, the tail included, goes through exp_pd so identical
    // draws give exactly zero.
    const __m256d one = _mm256_set1_pd(1.0);
    auto sig = [&](__m256d av, __m256d bv) { return _mm256_div_pd(one, _mm256_add_pd(one, exp_pd(_mm256_sub_pd(bv, av)))); };
    const double p0 = _mm256_cvtsd_f64(sig(_mm256_set1_pd(a[0]), _mm256_set1_pd(b[0])));
    const __m256d pv = _mm256_set1_pd(p0);
    __m256d acc = _mm256_setzero_pd(), sq = _mm256_setzero_pd();
    std::size_t s = 0;
    for (; s + 4 <= k; s += 4) {
        const __m256d dv = _mm256_sub_pd(sig(_mm256_loadu_pd(a + s), _mm256_loadu_pd(b + s)), pv);
        acc = _mm256_add_pd(acc, dv);
        sq = _mm256_fmadd_pd(dv, dv, sq);
    }
    if (s < k) {
        const auto rem = static_cast<long long>(k - s);
        const __m256i mask = _mm256_set_epi64x(rem > 3 ? -1 : 0, rem > 2 ? -1 : 0, rem > 1 ? -1 : 0, -1);
        const __m256d dv = _mm256_and_pd(
            _mm256_sub_pd(sig(_mm256_maskload_pd(a + s, mask), _mm256_maskload_pd(b + s, mask)), pv),
            _mm256_castsi256_pd(mask));
        acc = _mm256_add_pd(acc, dv);
        sq = _mm256_fmadd_pd(dv, dv, sq);
    }
    const double sum = hsum(acc), ss = hsum(sq);
    const double kd = static_cast<double>(k);
    return std::max(0.0, (ss - sum * sum / kd) / (kd - 1.0));
}

}  // namespace prefrank::kernels::avx2
