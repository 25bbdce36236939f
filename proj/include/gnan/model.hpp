#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gnan/graph.hpp"
#include "gnan/matrix.hpp"

namespace gnan {

/// Which data terms take part in the likelihood and the updates.
enum class Mode { Both, LinksOnly, AttrsOnly };

inline bool uses_links(Mode m) noexcept { return m != Mode::AttrsOnly; }
inline bool uses_attrs(Mode m) noexcept { return m != Mode::LinksOnly; }

/// Model parameters. Every row of each matrix lies on the probability simplex.
///
///   membership  N x C   probability that node i belongs to community r
///   behavior    C x N   probability that a member of r sends a link to node j
///   profile     C x K   probability that community r exhibits attribute k
struct ModelParams {
  DenseMatrix membership;
  DenseMatrix behavior;
  DenseMatrix profile;

  std::size_t n_nodes() const noexcept { return membership.rows(); }
  std::size_t n_communities() const noexcept { return membership.cols(); }
  std::size_t n_attrs() const noexcept { return profile.cols(); }

  /// Throws InputError when shapes disagree or a simplex invariant fails.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Builds ModelParams from nonnegative weights by normalizing each row.
ModelParams make_params(DenseMatrix membership, DenseMatrix behavior, DenseMatrix profile);

/// E-step posteriors. Row e of `edge` is the simplex vector for the e-th edge
/// of the graph (in graph.edges() order); row e of `attr` likewise for the
/// e-th attribute entry. Either block may be empty when its data term is
/// switched off.
struct Responsibilities {
  std::size_t n_communities = 0;
  std::vector<double> edge;
  std::vector<double> attr;

  std::size_t num_edges() const noexcept { return n_communities ? edge.size() / n_communities : 0; }
  std::size_t num_attr_entries() const noexcept {
    return n_communities ? attr.size() / n_communities : 0;
  }

  std::span<const double> edge_row(std::size_t e) const noexcept {
    return {edge.data() + e * n_communities, n_communities};
  }
  std::span<double> edge_row(std::size_t e) noexcept {
    return {edge.data() + e * n_communities, n_communities};
  }
  std::span<const double> attr_row(std::size_t e) const noexcept {
    return {attr.data() + e * n_communities, n_communities};
  }
  std::span<double> attr_row(std::size_t e) noexcept {
    return {attr.data() + e * n_communities, n_communities};
  }

  /// Lookup by key; empty span when the edge is not present.
  std::span<const double> for_edge(const SparseGraph& g, NodeId i, NodeId j) const noexcept;
  std::span<const double> for_attr(const AttributeMatrix& x, NodeId i, std::uint32_t k) const noexcept;
};

}  // namespace gnan
