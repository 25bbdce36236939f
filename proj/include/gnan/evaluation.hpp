#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gnan/graph.hpp"
#include "gnan/matrix.hpp"

namespace gnan {

/// Co-membership counts between a reference and a predicted partition.
/// counts[i][j] is the number of nodes in reference community i that are
/// assigned to predicted community j.
struct ConfusionCounts {
  std::vector<std::vector<std::size_t>> counts;
  std::vector<std::size_t> truth_sizes;
  std::vector<std::size_t> predicted_sizes;
  std::size_t total = 0;
};

ConfusionCounts confusion(const Partition& truth, const Partition& predicted);

/// label(i) = argmax_r membership(i, r); ties go to the lowest index.
Partition hard_assign(const DenseMatrix& membership);

/// Normalized mutual information in the arithmetic-mean form
///
///   NMI = -2 sum_ij N_ij log(N N_ij / (N_i N_j))
///         / (sum_i N_i log(N_i / N) + sum_j N_j log(N_j / N))
///
/// over the rectangular confusion table, natural log, 0 log 0 = 0, clamped
/// to [0, 1]. When either partition uses a single community the ratio is
/// 0/0; the result is then 1 if the partitions are identical up to
/// relabeling and 0 otherwise. Throws InputError on a node-count mismatch.
double nmi(const Partition& truth, const Partition& predicted);

/// Newman-Girvan modularity of `partition` on the undirected view of
/// `graph` (each unordered pair counted once, self-loops once with degree 2).
/// Throws InputError on an edgeless graph or a size mismatch.
double modularity(const SparseGraph& graph, const Partition& partition);

struct RankedAttribute {
  std::uint32_t attr;
  double weight;
};

/// Per-community attribute ranking of a profile matrix (C x K).
struct AttributeReport {
  double threshold = 0.1;
  /// ranking[r] lists every attribute by descending weight (ties by index).
  std::vector<std::vector<RankedAttribute>> ranking;

  /// The prefix of ranking[r] with weight strictly above the threshold.
  std::vector<RankedAttribute> above_threshold(std::size_t community) const;
};

AttributeReport top_attributes(const DenseMatrix& profile, double threshold = 0.1);

}  // namespace gnan
