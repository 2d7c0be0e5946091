#include "pnarm/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cfloat>
#include <cmath>
#include <limits>

// Functions carry the target attribute instead of the TU being built with
// -mavx2, so no inline library code compiled for AVX2 can leak into the
// scalar path through ODR merging.
#define PNARM_AVX2 __attribute__((target("avx2,fma")))

namespace pnarm::kernels::detail {
namespace {

constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kLog2e = 1.44269504088896338700e+00;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kTwo52 = 4503599627370496.0;
constexpr double kExpMin = -708.39;  // below this the result is subnormal or 0
constexpr double kExpMax = 709.78;

// log for finite x >= DBL_MIN. m in [sqrt(2)/2, sqrt(2)), s = (m-1)/(m+1),
// log m = 2 atanh(s) summed to s^23 (|s| < 0.1716 so truncation < 1e-17).
PNARM_AVX2 inline __m256d log_normal_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));
  // Biased exponent as double via the 2^52 trick.
  const __m256i biased = _mm256_srli_epi64(bits, 52);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(biased, _mm256_castpd_si256(_mm256_set1_pd(kTwo52)))),
      _mm256_set1_pd(kTwo52 + 1023.0));
  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrt2), _CMP_GE_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const __m256d s2 = _mm256_mul_pd(s, s);
  __m256d p = _mm256_set1_pd(1.0 / 23.0);
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 21.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 19.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 17.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 15.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 13.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 11.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 9.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 7.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 5.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 3.0));
  // 2s + 2s*s2*p keeps the leading term exact.
  const __m256d two_s = _mm256_add_pd(s, s);
  const __m256d tail = _mm256_mul_pd(_mm256_mul_pd(two_s, s2), p);
  const __m256d lo = _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Lo), tail);
  return _mm256_add_pd(_mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Hi), two_s), lo);
}

// log with a scalar fallback for lanes outside [DBL_MIN, inf).
PNARM_AVX2 inline __m256d log_pd(__m256d x) {
  const __m256d ok = _mm256_and_pd(_mm256_cmp_pd(x, _mm256_set1_pd(DBL_MIN), _CMP_GE_OQ),
                                   _mm256_cmp_pd(x, _mm256_set1_pd(DBL_MAX), _CMP_LE_OQ));
  if (_mm256_movemask_pd(ok) == 0xF) return log_normal_pd(x);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, x);
  for (double& v : lanes) v = std::log(v);
  return _mm256_load_pd(lanes);
}

// exp with Cody-Waite reduction and a degree-13 Taylor polynomial on
// |r| <= ln2/2. Results below kExpMin flush to 0; above kExpMax give inf.
PNARM_AVX2 inline __m256d exp_pd(__m256d x) {
  const __m256d under = _mm256_cmp_pd(x, _mm256_set1_pd(kExpMin), _CMP_LT_OQ);
  const __m256d over = _mm256_cmp_pd(x, _mm256_set1_pd(kExpMax), _CMP_GT_OQ);
  const __m256d nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(kExpMin)),
                                   _mm256_set1_pd(kExpMax));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, _mm256_set1_pd(kLog2e)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Hi), xc);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Lo), r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);  // 1/13!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // 2^n assembled in the exponent field; n + 1023 lies in [1, 2047].
  const __m256d biased = _mm256_add_pd(n, _mm256_set1_pd(kTwo52 + 1023.0));
  const __m256i pow2_bits = _mm256_slli_epi64(_mm256_castpd_si256(biased), 52);
  __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(pow2_bits));
  result = _mm256_andnot_pd(under, result);
  result = _mm256_blendv_pd(result, _mm256_set1_pd(std::numeric_limits<double>::infinity()), over);
  return _mm256_blendv_pd(result, x, nan);
}

PNARM_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

PNARM_AVX2 double poisson_loglik(const double* theta, double v, const double* x,
                                 const double* ylag, const double* y, const double* log_fact,
                                 std::size_t n) {
  const double base = theta[0] * v;
  const __m256d vbase = _mm256_set1_pd(base);
  const __m256d th1 = _mm256_set1_pd(theta[1]);
  const __m256d th2 = _mm256_set1_pd(theta[2]);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = zero;
  std::size_t t = 0;
  for (; t + 4 <= n; t += 4) {
    const __m256d vy = _mm256_loadu_pd(y + t);
    __m256d lambda = _mm256_fmadd_pd(th1, _mm256_loadu_pd(x + t), vbase);
    lambda = _mm256_fmadd_pd(th2, _mm256_loadu_pd(ylag + t), lambda);
    const __m256d positive_y = _mm256_cmp_pd(vy, zero, _CMP_GT_OQ);
    const __m256d dead = _mm256_and_pd(positive_y, _mm256_cmp_pd(lambda, zero, _CMP_NGT_UQ));
    if (_mm256_movemask_pd(dead) != 0) return -std::numeric_limits<double>::infinity();
    // Lanes with y == 0 take log(1) so 0 * log(lambda) stays 0 when lambda == 0.
    const __m256d safe = _mm256_blendv_pd(one, lambda, positive_y);
    const __m256d term = _mm256_mul_pd(vy, log_pd(safe));
    acc = _mm256_add_pd(acc, _mm256_sub_pd(term, _mm256_add_pd(lambda, _mm256_loadu_pd(log_fact + t))));
  }
  double sum = hsum(acc);
  for (; t < n; ++t) {
    const double lambda = base + theta[1] * x[t] + theta[2] * ylag[t];
    if (y[t] > 0.0) {
      if (!(lambda > 0.0)) return -std::numeric_limits<double>::infinity();
      sum += y[t] * std::log(lambda);
    }
    sum -= lambda + log_fact[t];
  }
  return sum;
}

PNARM_AVX2 double mixture_pmf(const double* rates, const double* weights, std::size_t m,
                              double y, double log_fact_y) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d vy = _mm256_set1_pd(y);
  const __m256d vlf = _mm256_set1_pd(log_fact_y);
  // With lambda == 0 the pmf is 1 at y == 0 and 0 elsewhere.
  const __m256d zero_rate_value = y == 0.0 ? one : zero;
  __m256d acc = zero;
  std::size_t k = 0;
  for (; k + 4 <= m; k += 4) {
    const __m256d lambda = _mm256_loadu_pd(rates + k);
    const __m256d is_zero = _mm256_cmp_pd(lambda, zero, _CMP_LE_OQ);
    const __m256d safe = _mm256_blendv_pd(lambda, one, is_zero);
    const __m256d logp = _mm256_sub_pd(_mm256_fmsub_pd(vy, log_pd(safe), safe), vlf);
    const __m256d pmf = _mm256_blendv_pd(exp_pd(logp), zero_rate_value, is_zero);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(weights + k), pmf, acc);
  }
  double p = hsum(acc);
  for (; k < m; ++k) {
    const double lambda = rates[k];
    if (lambda <= 0.0) {
      if (y == 0.0) p += weights[k];
      continue;
    }
    p += weights[k] * std::exp(y * std::log(lambda) - lambda - log_fact_y);
  }
  return p;
}

PNARM_AVX2 void accumulate_cocluster(const std::int32_t* labels, std::size_t n,
                                     std::uint32_t* counts) {
  for (std::size_t i = 0; i < n; ++i) {
    const __m256i li = _mm256_set1_epi32(labels[i]);
    std::uint32_t* row = counts + i * n;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      const __m256i lj = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(labels + j));
      const __m256i eq = _mm256_cmpeq_epi32(li, lj);  // all ones == -1
      __m256i c = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row + j));
      c = _mm256_sub_epi32(c, eq);
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(row + j), c);
    }
    for (; j < n; ++j) row[j] += labels[i] == labels[j] ? 1u : 0u;
  }
}

PNARM_AVX2 double ls_loss(const std::int32_t* labels, const double* c_hat, std::size_t n) {
  const __m128i ones = _mm_set1_epi32(1);
  __m256d acc = _mm256_setzero_pd();
  double tail = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const __m128i li = _mm_set1_epi32(labels[i]);
    const double* row = c_hat + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const __m128i lj = _mm_loadu_si128(reinterpret_cast<const __m128i*>(labels + j));
      const __m256d same = _mm256_cvtepi32_pd(_mm_and_si128(_mm_cmpeq_epi32(li, lj), ones));
      const __m256d d = _mm256_sub_pd(same, _mm256_loadu_pd(row + j));
      acc = _mm256_fmadd_pd(d, d, acc);
    }
    for (; j < n; ++j) {
      const double d = (labels[i] == labels[j] ? 1.0 : 0.0) - row[j];
      tail += d * d;
    }
  }
  return hsum(acc) + tail;
}

PNARM_AVX2 void log_n(const double* in, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) _mm256_storeu_pd(out + k, log_pd(_mm256_loadu_pd(in + k)));
  for (; k < n; ++k) out[k] = std::log(in[k]);
}

PNARM_AVX2 void exp_n(const double* in, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) _mm256_storeu_pd(out + k, exp_pd(_mm256_loadu_pd(in + k)));
  for (; k < n; ++k) out[k] = std::exp(in[k]);
}

constexpr Table kAvx2{Isa::avx2, poisson_loglik, mixture_pmf, accumulate_cocluster,
                      ls_loss,   log_n,          exp_n};

}  // namespace

const Table* avx2_table() { return &kAvx2; }

}  // namespace pnarm::kernels::detail

#else

namespace pnarm::kernels::detail {
const Table* avx2_table() { return nullptr; }
}  // namespace pnarm::kernels::detail

#endif
