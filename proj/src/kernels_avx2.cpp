#include "gnan/kernels.hpp"

#if GNAN_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <cmath>

#define GNAN_AVX2 __attribute__((target("avx2")))

namespace gnan::kernels::avx2 {
namespace {

// Lane mask for the final partial chunk of a length-C row.
GNAN_AVX2 inline __m256i tail_mask(std::size_t remaining) {
  const __m256i idx = _mm256_setr_epi64x(0, 1, 2, 3);
  return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(remaining)), idx);
}

GNAN_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

GNAN_AVX2 std::size_t responsibilities(std::span<const double> left,
                                       std::span<const double> right,
                                       std::span<const Entry> entries, std::size_t C,
                                       std::span<double> out, std::span<double> norms) {
  const bool want_norms = !norms.empty();
  const std::size_t full = C & ~std::size_t{3};
  const __m256i mask = tail_mask(C - full);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const double* l = left.data() + entries[e].row * C;
    const double* r = right.data() + entries[e].col * C;
    double* q = out.data() + e * C;
    __m256d acc = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c < full; c += 4) {
      const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(l + c), _mm256_loadu_pd(r + c));
      _mm256_storeu_pd(q + c, p);
      acc = _mm256_add_pd(acc, p);
    }
    if (c < C) {
      const __m256d p =
          _mm256_mul_pd(_mm256_maskload_pd(l + c, mask), _mm256_maskload_pd(r + c, mask));
      _mm256_maskstore_pd(q + c, mask, p);
      acc = _mm256_add_pd(acc, p);
    }
    const double sum = hsum(acc);
    if (!(sum > 0.0) || !std::isfinite(sum)) return e;
    if (want_norms) norms[e] = sum;
    const __m256d s = _mm256_set1_pd(sum);
    for (c = 0; c < full; c += 4) _mm256_storeu_pd(q + c, _mm256_div_pd(_mm256_loadu_pd(q + c), s));
    if (c < C) _mm256_maskstore_pd(q + c, mask, _mm256_div_pd(_mm256_maskload_pd(q + c, mask), s));
  }
  return entries.size();
}

GNAN_AVX2 void accumulate(std::span<const double> resp, std::span<const Entry> entries,
                          std::span<const double> weights, std::size_t C,
                          std::span<double> acc_row, std::span<double> acc_col) {
  const std::size_t full = C & ~std::size_t{3};
  const __m256i mask = tail_mask(C - full);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const __m256d w = _mm256_set1_pd(weights[e]);
    const double* q = resp.data() + e * C;
    double* a = acc_row.data() + entries[e].row * C;
    double* b = acc_col.data() + entries[e].col * C;
    std::size_t c = 0;
    for (; c < full; c += 4) {
      const __m256d wq = _mm256_mul_pd(w, _mm256_loadu_pd(q + c));
      _mm256_storeu_pd(a + c, _mm256_add_pd(_mm256_loadu_pd(a + c), wq));
      _mm256_storeu_pd(b + c, _mm256_add_pd(_mm256_loadu_pd(b + c), wq));
    }
    if (c < C) {
      const __m256d wq = _mm256_mul_pd(w, _mm256_maskload_pd(q + c, mask));
      _mm256_maskstore_pd(a + c, mask, _mm256_add_pd(_mm256_maskload_pd(a + c, mask), wq));
      _mm256_maskstore_pd(b + c, mask, _mm256_add_pd(_mm256_maskload_pd(b + c, mask), wq));
    }
  }
}

GNAN_AVX2 void rates(std::span<const double> left, std::span<const double> right,
                     std::span<const Entry> entries, std::size_t C, std::span<double> out) {
  const std::size_t full = C & ~std::size_t{3};
  const __m256i mask = tail_mask(C - full);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const double* l = left.data() + entries[e].row * C;
    const double* r = right.data() + entries[e].col * C;
    __m256d acc = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c < full; c += 4)
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(l + c), _mm256_loadu_pd(r + c)));
    if (c < C)
      acc = _mm256_add_pd(
          acc, _mm256_mul_pd(_mm256_maskload_pd(l + c, mask), _mm256_maskload_pd(r + c, mask)));
    out[e] = hsum(acc);
  }
}

}  // namespace gnan::kernels::avx2

#endif
