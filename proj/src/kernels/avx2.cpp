// AVX2/FMA variants of the measure kernels. Compiled with -mavx2 -mfma and only
// ever called after a runtime CPU check.

#include "coopcomp/kernels.hpp"

#include <immintrin.h>

#include <cfloat>
#include <cmath>
#include <cstdint>
#include <limits>

namespace coopcomp::kernels::avx2 {
namespace {

// log2 for normal positive doubles. x = 2^e * m with m in [sqrt(1/2), sqrt(2)),
// ln(m) = 2 atanh(s), s = (m-1)/(m+1), |s| < 0.1716; the odd series is cut
// after 12 terms, which leaves a relative error below 2e-17.
inline __m256d log2_normal(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_mask = _mm256_set1_epi64x(0x7ff0000000000000LL);
  const __m256i mant_mask = _mm256_set1_epi64x(0x000fffffffffffffLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3ff0000000000000LL);

  __m256i e_raw = _mm256_srli_epi64(_mm256_and_si256(bits, exp_mask), 52);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

  // int64 -> double for small exponents via the 2^52 magic constant
  const __m256d magic = _mm256_set1_pd(4503599627370496.0);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(e_raw, _mm256_castpd_si256(magic))), magic);
  e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));

  const __m256d sqrt2 = _mm256_set1_pd(1.4142135623730951);
  const __m256d big = _mm256_cmp_pd(m, sqrt2, _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const __m256d z = _mm256_mul_pd(s, s);

  __m256d poly = _mm256_set1_pd(1.0 / 23.0);
  poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(1.0 / 21.0));
  poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(1.0 / 19.0));
  poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(1.0 / 17.0));
  poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(1.0 / 15.0));
  poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(1.0 / 13.0));
  poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(1.0 / 11.0));
  poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(1.0 / 9.0));
  poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(1.0 / 7.0));
  poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(1.0 / 5.0));
  poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(1.0 / 3.0));
  poly = _mm256_fmadd_pd(poly, z, one);

  const __m256d two_over_ln2 = _mm256_set1_pd(2.0 / 0.69314718055994530942);
  return _mm256_fmadd_pd(_mm256_mul_pd(s, poly), two_over_ln2, e);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double entropy_bits(std::span<const double> p) noexcept {
  const std::size_t n = p.size();
  const __m256d tiny = _mm256_set1_pd(DBL_MIN);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(p.data() + i);
    const __m256d ok = _mm256_cmp_pd(v, tiny, _CMP_GE_OQ);
    const __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), v, ok);
    const __m256d term = _mm256_mul_pd(v, log2_normal(safe));
    acc = _mm256_sub_pd(acc, _mm256_and_pd(ok, term));
  }
  double out = hsum(acc);
  for (; i < n; ++i) {
    if (p[i] > 0.0) out -= p[i] * std::log2(p[i]);
  }
  return out;
}

double cross_entropy_bits(std::span<const double> p, std::span<const double> q) noexcept {
  const std::size_t n = p.size() < q.size() ? p.size() : q.size();
  const __m256d zero = _mm256_setzero_pd();
  const __m256d tiny = _mm256_set1_pd(DBL_MIN);
  __m256d acc = _mm256_setzero_pd();
  double extra = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d pv = _mm256_loadu_pd(p.data() + i);
    const __m256d qv = _mm256_loadu_pd(q.data() + i);
    const __m256d use = _mm256_cmp_pd(pv, zero, _CMP_GT_OQ);
    const __m256d qok = _mm256_cmp_pd(qv, tiny, _CMP_GE_OQ);
    if (_mm256_movemask_pd(_mm256_andnot_pd(qok, use)) != 0) {
      // q underflows where p carries mass: defer to the scalar rule for this block
      for (std::size_t j = i; j < i + 4; ++j) {
        if (p[j] > 0.0) extra -= p[j] * std::log2(q[j]);
      }
      continue;
    }
    const __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), qv, qok);
    const __m256d term = _mm256_mul_pd(pv, log2_normal(safe));
    acc = _mm256_sub_pd(acc, _mm256_and_pd(use, term));
  }
  double out = hsum(acc) + extra;
  for (; i < n; ++i) {
    if (p[i] > 0.0) out -= p[i] * std::log2(q[i]);
  }
  return out;
}

void log2_array(std::span<const double> in, std::span<double> out) noexcept {
  const std::size_t n = in.size() < out.size() ? in.size() : out.size();
  const __m256d tiny = _mm256_set1_pd(DBL_MIN);
  const __m256d ninf = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(in.data() + i);
    const __m256d ok = _mm256_cmp_pd(v, tiny, _CMP_GE_OQ);
    if (_mm256_movemask_pd(ok) != 0xf) {
      for (std::size_t j = i; j < i + 4; ++j) {
        out[j] = in[j] > 0.0 ? std::log2(in[j]) : -std::numeric_limits<double>::infinity();
      }
      continue;
    }
    _mm256_storeu_pd(out.data() + i, _mm256_blendv_pd(ninf, log2_normal(v), ok));
  }
  for (; i < n; ++i) {
    out[i] = in[i] > 0.0 ? std::log2(in[i]) : -std::numeric_limits<double>::infinity();
  }
}

double dot(std::span<const double> p, std::span<const double> q) noexcept {
  const std::size_t n = p.size() < q.size() ? p.size() : q.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(p.data() + i), _mm256_loadu_pd(q.data() + i), acc);
  }
  double out = hsum(acc);
  for (; i < n; ++i) out += p[i] * q[i];
  return out;
}

}  // namespace coopcomp::kernels::avx2
