#include <cmath>

#include "gnan/kernels.hpp"

namespace gnan::kernels::scalar {

std::size_t responsibilities(std::span<const double> left, std::span<const double> right,
                             std::span<const Entry> entries, std::size_t C,
                             std::span<double> out, std::span<double> norms) {
  const bool want_norms = !norms.empty();
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const double* l = left.data() + entries[e].row * C;
    const double* r = right.data() + entries[e].col * C;
    double* q = out.data() + e * C;
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      q[c] = l[c] * r[c];
      sum += q[c];
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) return e;
    if (want_norms) norms[e] = sum;
    for (std::size_t c = 0; c < C; ++c) q[c] /= sum;
  }
  return entries.size();
}

void accumulate(std::span<const double> resp, std::span<const Entry> entries,
                std::span<const double> weights, std::size_t C, std::span<double> acc_row,
                std::span<double> acc_col) {
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const double w = weights[e];
    const double* q = resp.data() + e * C;
    double* a = acc_row.data() + entries[e].row * C;
    double* b = acc_col.data() + entries[e].col * C;
    for (std::size_t c = 0; c < C; ++c) {
      const double wq = w * q[c];
      a[c] += wq;
      b[c] += wq;
    }
  }
}

void rates(std::span<const double> left, std::span<const double> right,
           std::span<const Entry> entries, std::size_t C, std::span<double> out) {
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const double* l = left.data() + entries[e].row * C;
    const double* r = right.data() + entries[e].col * C;
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) sum += l[c] * r[c];
    out[e] = sum;
  }
}

}  // namespace gnan::kernels::scalar
