#pragma once

// Inner loops of the EM updates. Each kernel has a portable scalar reference
// and, on x86-64, an AVX2 variant compiled with a function-level target so
// the rest of the library needs no special flags. The active table is chosen
// once at startup from CPUID and can be overridden with set_backend() or the
// GNAN_KERNEL environment variable (scalar | avx2).
//
// All kernels work on an entry list (row, col) and two dense factor tables
// `left` (rows x C) and `right` (cols x C), both row-major. The expected rate
// of an entry is the C-vector left[row] * right[col] (elementwise).

#include <cstddef>
#include <span>
#include <string_view>

#include "gnan/graph.hpp"

namespace gnan::kernels {

/// Writes out[e*C + r] = left[row,r] * right[col,r] / sum_s left[row,s] * right[col,s]
/// and, when `norms` is non-empty, norms[e] = that normalizer (the expected
/// rate of the entry). Returns the index of the first entry whose normalizer
/// is not a positive finite number (its row in `out` is unspecified), or
/// entries.size() on success.
using ResponsibilitiesFn = std::size_t (*)(std::span<const double> left,
                                           std::span<const double> right,
                                           std::span<const Entry> entries, std::size_t C,
                                           std::span<double> out, std::span<double> norms);

/// acc_row[row*C + r] += weight[e] * resp[e*C + r] and the same into
/// acc_col[col*C + r]. Entries are processed in order.
using AccumulateFn = void (*)(std::span<const double> resp, std::span<const Entry> entries,
                              std::span<const double> weights, std::size_t C,
                              std::span<double> acc_row, std::span<double> acc_col);

/// out[e] = sum_r left[row,r] * right[col,r].
using RatesFn = void (*)(std::span<const double> left, std::span<const double> right,
                         std::span<const Entry> entries, std::size_t C, std::span<double> out);

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  Backend backend;
  ResponsibilitiesFn responsibilities;
  AccumulateFn accumulate;
  RatesFn rates;
};

std::string_view backend_name(Backend b) noexcept;

/// True when `b` can run on this CPU.
bool backend_supported(Backend b) noexcept;

/// The table for a specific backend. Throws InputError if unsupported.
const KernelTable& table(Backend b);

/// The table used by the EM code.
const KernelTable& active();

/// Override the active backend (process-wide). Throws InputError if unsupported.
void set_backend(Backend b);

/// Scalar reference kernels, exposed for equivalence tests.
namespace scalar {
std::size_t responsibilities(std::span<const double> left, std::span<const double> right,
                             std::span<const Entry> entries, std::size_t C,
                             std::span<double> out, std::span<double> norms);
void accumulate(std::span<const double> resp, std::span<const Entry> entries,
                std::span<const double> weights, std::size_t C, std::span<double> acc_row,
                std::span<double> acc_col);
void rates(std::span<const double> left, std::span<const double> right,
           std::span<const Entry> entries, std::size_t C, std::span<double> out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define GNAN_HAVE_AVX2_KERNELS 1
namespace avx2 {
std::size_t responsibilities(std::span<const double> left, std::span<const double> right,
                             std::span<const Entry> entries, std::size_t C,
                             std::span<double> out, std::span<double> norms);
void accumulate(std::span<const double> resp, std::span<const Entry> entries,
                std::span<const double> weights, std::size_t C, std::span<double> acc_row,
                std::span<double> acc_col);
void rates(std::span<const double> left, std::span<const double> right,
           std::span<const Entry> entries, std::size_t C, std::span<double> out);
}  // namespace avx2
#else
#define GNAN_HAVE_AVX2_KERNELS 0
#endif

}  // namespace gnan::kernels
