#include "gnan/synthetic.hpp"

#include <cmath>
#include <string>

#include "gnan/error.hpp"

namespace gnan {
namespace {

bool is_prob(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

void check_prob(double p, const char* name) {
  if (!is_prob(p)) throw InputError(std::string(name) + " must lie in [0, 1]");
}

void check_sizes(const std::vector<std::size_t>& sizes, std::size_t n_blocks) {
  if (sizes.size() != n_blocks)
    throw InputError("expected " + std::to_string(n_blocks) + " block sizes, got " +
                     std::to_string(sizes.size()));
  for (std::size_t s : sizes)
    if (s == 0) throw InputError("block sizes must be positive");
}

}  // namespace

void BlockMatrix::validate() const {
  if (probs.rows() != probs.cols()) throw InputError("block matrix must be square");
  for (double p : probs.data())
    if (!is_prob(p)) throw InputError("block probabilities must lie in [0, 1]");
}

void DependencyMatrix::validate() const {
  for (double p : probs.data())
    if (!is_prob(p)) throw InputError("dependency probabilities must lie in [0, 1]");
}

BlockMatrix planted_community(std::size_t n_blocks, double within, double between) {
  check_prob(within, "within-block probability");
  check_prob(between, "between-block probability");
  if (within < between) throw InputError("within-block probability must be >= between-block");
  if (n_blocks == 0) throw InputError("need at least one block");
  BlockMatrix b{DenseMatrix(n_blocks, n_blocks, between)};
  for (std::size_t r = 0; r < n_blocks; ++r) b.probs(r, r) = within;
  return b;
}

BlockMatrix planted_disassortative(double base) {
  if (!(base > 0.05)) throw InputError("disassortative base probability must exceed 0.05");
  if (!(base + 0.1 <= 1.0)) throw InputError("disassortative base probability + 0.1 exceeds 1");
  return {DenseMatrix::from_rows({{0.05, base, base + 0.1},
                                  {base, 0.03, base + 0.05},
                                  {base + 0.1, base + 0.05, 0.02}})};
}

BlockMatrix planted_mixture(double bipartite, double community, double core,
                            double core_periphery, double background) {
  check_prob(bipartite, "bipartite coupling");
  check_prob(community, "community density");
  check_prob(core, "core density");
  check_prob(core_periphery, "core-periphery coupling");
  check_prob(background, "background probability");
  BlockMatrix b{DenseMatrix(5, 5, background)};
  b.probs(0, 0) = 0.0;
  b.probs(1, 1) = 0.0;
  b.probs(0, 1) = b.probs(1, 0) = bipartite;
  b.probs(2, 2) = community;
  b.probs(3, 3) = core;
  b.probs(3, 4) = b.probs(4, 3) = core_periphery;
  b.probs(4, 4) = 0.0;
  return b;
}

BlockMatrix planted_core_periphery(double core, double core_periphery) {
  check_prob(core, "core density");
  check_prob(core_periphery, "core-periphery coupling");
  return {DenseMatrix::from_rows({{core, core_periphery}, {core_periphery, 0.0}})};
}

Partition block_partition(const std::vector<std::size_t>& block_sizes) {
  std::vector<std::uint32_t> labels;
  for (std::size_t b = 0; b < block_sizes.size(); ++b)
    labels.insert(labels.end(), block_sizes[b], static_cast<std::uint32_t>(b));
  return Partition(std::move(labels), block_sizes.size());
}

std::pair<SparseGraph, Partition> sbm_sample(const std::vector<std::size_t>& block_sizes,
                                             const BlockMatrix& blocks, Rng& rng) {
  blocks.validate();
  check_sizes(block_sizes, blocks.n_blocks());
  Partition truth = block_partition(block_sizes);
  const auto labels = truth.labels();
  const std::size_t n = labels.size();
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(blocks.probs(labels[i], labels[j])))
        edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
  return {SparseGraph::build(n, edges, /*directed=*/false), std::move(truth)};
}

AttributeMatrix attr_sample(const std::vector<std::size_t>& block_sizes,
                            const DependencyMatrix& deps, Rng& rng) {
  deps.validate();
  check_sizes(block_sizes, deps.n_blocks());
  const Partition truth = block_partition(block_sizes);
  const std::size_t k_attrs = deps.n_attrs();
  std::vector<AttributeTriplet> triplets;
  for (std::size_t i = 0; i < truth.n_nodes(); ++i)
    for (std::size_t k = 0; k < k_attrs; ++k)
      if (rng.bernoulli(deps.probs(truth[i], k)))
        triplets.push_back({static_cast<NodeId>(i), static_cast<std::uint32_t>(k), 1});
  return AttributeMatrix::build(truth.n_nodes(), k_attrs, triplets);
}

DependencyMatrix dependency_design(const DependencyDesign& d) {
  if (d.n_blocks == 0) throw InputError("need at least one block");
  check_prob(d.p_noise, "noise probability");
  if (d.p_strong.size() != 1 && d.p_strong.size() != d.n_blocks)
    throw InputError("p_strong needs one value or one per community");
  for (double p : d.p_strong) check_prob(p, "strong probability");
  const std::size_t k_attrs = d.n_blocks * d.strong_per_block + d.extra_noise_attrs;
  DependencyMatrix deps{DenseMatrix(d.n_blocks, k_attrs, d.p_noise)};
  for (std::size_t r = 0; r < d.n_blocks; ++r) {
    const double p = d.p_strong.size() == 1 ? d.p_strong[0] : d.p_strong[r];
    std::vector<std::size_t> groups{r};
    if (d.strong_groups) {
      if (d.strong_groups->size() != d.n_blocks)
        throw InputError("strong_groups needs one entry per community");
      groups = (*d.strong_groups)[r];
    }
    for (std::size_t g : groups) {
      if (g >= d.n_blocks) throw InputError("strong attribute group out of range");
      for (std::size_t k = g * d.strong_per_block; k < (g + 1) * d.strong_per_block; ++k)
        deps.probs(r, k) = p;
    }
  }
  return deps;
}

DependencyDesign shared_attribute_design() {
  DependencyDesign d;
  d.n_blocks = 4;
  d.strong_per_block = 10;
  d.p_strong = {0.9, 0.9, 0.7, 0.7};
  d.p_noise = 0.1;
  d.extra_noise_attrs = 0;
  d.strong_groups = std::vector<std::vector<std::size_t>>{{0, 1}, {0, 1}, {2}, {2}};
  return d;
}

}  // namespace gnan
