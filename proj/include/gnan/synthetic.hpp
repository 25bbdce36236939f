#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "gnan/graph.hpp"
#include "gnan/matrix.hpp"
#include "gnan/rng.hpp"

namespace gnan {

/// Symmetric-use C x C matrix of block-pair edge probabilities.
struct BlockMatrix {
  DenseMatrix probs;

  std::size_t n_blocks() const noexcept { return probs.rows(); }
  /// Throws InputError unless square with entries in [0, 1].
  void validate() const;
};

/// C x K matrix of per-block Bernoulli attribute probabilities.
struct DependencyMatrix {
  DenseMatrix probs;

  std::size_t n_blocks() const noexcept { return probs.rows(); }
  std::size_t n_attrs() const noexcept { return probs.cols(); }
  void validate() const;
};

/// Assortative planted partition: `within` on the diagonal, `between`
/// elsewhere. Requires 0 <= between <= within <= 1.
BlockMatrix planted_community(std::size_t n_blocks, double within, double between);

/// Three-block disassortative design with fixed diagonal (0.05, 0.03, 0.02)
/// and off-diagonals base, base + 0.1 (blocks 1-3), base + 0.05 (blocks 2-3).
/// Requires base > 0.05 and base + 0.1 <= 1.
BlockMatrix planted_disassortative(double base);

/// Five-block mixture: blocks 1-2 bipartite (zero diagonal, `bipartite`
/// between them), block 3 assortative (`community`), block 4 a core
/// (`core`) coupled to periphery block 5 (`core_periphery`, zero diagonal),
/// `background` everywhere else.
BlockMatrix planted_mixture(double bipartite, double community, double core,
                            double core_periphery, double background);

/// Two-block core-periphery design: core density `core`, core-periphery
/// coupling `core_periphery`, no periphery-periphery edges.
BlockMatrix planted_core_periphery(double core, double core_periphery);

/// Block-contiguous labels for the given block sizes.
Partition block_partition(const std::vector<std::size_t>& block_sizes);

/// Undirected SBM sample without self-loops. Node ids are block-contiguous.
std::pair<SparseGraph, Partition> sbm_sample(const std::vector<std::size_t>& block_sizes,
                                             const BlockMatrix& blocks, Rng& rng);

/// Binary attributes: x_ik ~ Bernoulli(deps[block(i)][k]) independently.
AttributeMatrix attr_sample(const std::vector<std::size_t>& block_sizes,
                            const DependencyMatrix& deps, Rng& rng);

/// Layout of a community/attribute dependency matrix. Attributes come in
/// groups of `strong_per_block` columns, one group per community, followed by
/// `extra_noise_attrs` columns that are noise for every community.
struct DependencyDesign {
  std::size_t n_blocks = 0;
  std::size_t strong_per_block = 10;
  /// One value shared by every community, or one per community.
  std::vector<double> p_strong;
  double p_noise = 0.1;
  std::size_t extra_noise_attrs = 0;
  /// Overrides which attribute groups are strong for each community (group g
  /// covers columns [g * strong_per_block, (g + 1) * strong_per_block)).
  /// Default: community r is strong on group r only.
  std::optional<std::vector<std::vector<std::size_t>>> strong_groups;
};

DependencyMatrix dependency_design(const DependencyDesign& design);

/// The four-community design with communities 1-2 sharing strong attributes
/// 1-20 (p = 0.9), communities 3-4 sharing 21-30 (p = 0.7) and attributes
/// 31-40 noise (p = 0.1) for everyone.
DependencyDesign shared_attribute_design();

}  // namespace gnan
