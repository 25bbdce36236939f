#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gnan/graph.hpp"
#include "gnan/model.hpp"
#include "gnan/rng.hpp"

namespace gnan {

/// Added to every active parameter entry after each M-step (rows are then
/// renormalized), so no observed entry can have a zero expected rate.
inline constexpr double kSmoothing = 1e-12;

struct FitConfig {
  std::size_t n_communities = 0;
  std::size_t max_iters = 500;
  double tolerance = 1e-6;
  double init_jitter = 0.1;
  std::size_t n_restarts = 10;
  std::uint64_t seed = 0;
  Mode mode = Mode::Both;
  /// Worker threads for restarts. Results do not depend on this.
  std::size_t threads = 1;

  /// Throws InputError if any field is out of range.
  void validate() const;
};

struct FitResult {
  ModelParams params;
  /// Bound at the initial point followed by one value per iteration.
  std::vector<double> bound_trace;
  bool converged = false;
  std::size_t iterations_used = 0;
  std::size_t restart_index = 0;

  double final_bound() const { return bound_trace.empty() ? 0.0 : bound_trace.back(); }
};

Mode parse_mode(std::string_view text);
std::string_view mode_name(Mode m) noexcept;

/// Every entry drawn uniformly from [0.5 - jitter, 0.5 + jitter], then each
/// row normalized. jitter = 0 gives exactly uniform rows.
ModelParams init_params(std::size_t n_nodes, std::size_t n_communities, std::size_t n_attrs,
                        double jitter, Rng& rng);

/// Posterior community attribution of every observed edge and attribute
/// entry. The block for a switched-off data term is left empty. Throws
/// DegenerateError when an observed entry has zero expected rate.
Responsibilities e_step(const ModelParams& params, const SparseGraph& graph,
                        const AttributeMatrix& attrs, Mode mode);

/// Closed-form maximizer of the lower bound for fixed responsibilities.
/// Matrices belonging to a switched-off term are copied from `previous`.
/// A membership row with no observed data is set uniform; likewise a
/// behavior or profile row that receives no responsibility mass. No
/// smoothing is applied here.
ModelParams m_step(const Responsibilities& resp, const SparseGraph& graph,
                   const AttributeMatrix& attrs, Mode mode, const ModelParams& previous);

/// Adds `delta` to every entry of the matrices used by `mode` (membership
/// always) and renormalizes rows.
void smooth(ModelParams& params, Mode mode, double delta = kSmoothing);

/// Jensen lower bound of the log-likelihood for arbitrary responsibilities.
/// Terms with zero responsibility contribute zero.
double lower_bound(const ModelParams& params, const Responsibilities& resp,
                   const SparseGraph& graph, const AttributeMatrix& attrs, Mode mode);

/// Poisson log-likelihood without the parameter-free log(x!) terms. Throws
/// DegenerateError when an observed entry has zero expected rate.
double log_likelihood(const ModelParams& params, const SparseGraph& graph,
                      const AttributeMatrix& attrs, Mode mode);

/// One EM chain from a given starting point. Stops when the absolute change
/// of the bound drops below config.tolerance or after config.max_iters
/// iterations. config.n_restarts and config.seed are ignored.
FitResult run_chain(const SparseGraph& graph, const AttributeMatrix& attrs, ModelParams init,
                    const FitConfig& config);

/// All restarts, in restart order. Restart r starts from init_params seeded
/// with derive_seed(config.seed, r).
std::vector<FitResult> fit_restarts(const SparseGraph& graph, const AttributeMatrix& attrs,
                                    const FitConfig& config);

/// Index of the restart with the highest final bound (lowest index on ties).
std::size_t best_restart(const std::vector<FitResult>& runs);

/// The restart with the highest final bound.
FitResult fit(const SparseGraph& graph, const AttributeMatrix& attrs, const FitConfig& config);

}  // namespace gnan
