#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace gnan {

using NodeId = std::uint32_t;

/// Row/column coordinate of one stored nonzero. Shared by edges (source,
/// target) and attribute entries (node, attribute).
struct Entry {
  std::uint32_t row;
  std::uint32_t col;

  friend auto operator<=>(const Entry&, const Entry&) = default;
};

/// Directed 0/1 adjacency over N nodes, stored as a sorted set of ordered
/// pairs. Undirected input is closed under reversal at construction, so
/// num_edges() counts ordered pairs in both cases.
class SparseGraph {
 public:
  SparseGraph() = default;

  /// Throws InputError on an index >= n_nodes. Duplicates are dropped.
  static SparseGraph build(std::size_t n_nodes, std::span<const std::pair<NodeId, NodeId>> edges,
                           bool directed);
  static SparseGraph build(std::size_t n_nodes,
                           const std::vector<std::pair<NodeId, NodeId>>& edges, bool directed) {
    return build(n_nodes, std::span<const std::pair<NodeId, NodeId>>(edges), directed);
  }

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  bool directed() const noexcept { return directed_; }

  /// Number of stored ordered pairs (the M used throughout the EM updates).
  std::size_t num_edges() const noexcept { return edges_.size(); }
  /// Number of links as a user would count them: ordered pairs if directed,
  /// unordered pairs (self-loops once) if undirected.
  std::size_t num_links() const noexcept;

  std::span<const Entry> edges() const noexcept { return edges_; }
  bool has_edge(NodeId source, NodeId target) const noexcept;
  /// Position of (source, target) in edges(), or num_edges() if absent.
  std::size_t edge_index(NodeId source, NodeId target) const noexcept;

  std::vector<std::size_t> out_degrees() const;
  std::vector<std::size_t> in_degrees() const;

  friend bool operator==(const SparseGraph&, const SparseGraph&) = default;

 private:
  std::size_t n_nodes_ = 0;
  bool directed_ = true;
  std::vector<Entry> edges_;
};

struct AttributeTriplet {
  NodeId node;
  std::uint32_t attr;
  std::uint32_t value;
};

/// N x K matrix of nonnegative integer counts with implicit zeros. Entries are
/// sorted by (node, attr); entries() and values() are parallel arrays.
class AttributeMatrix {
 public:
  AttributeMatrix() = default;
  /// Empty N x K matrix.
  AttributeMatrix(std::size_t n_nodes, std::size_t n_attrs) : n_nodes_(n_nodes), n_attrs_(n_attrs) {}

  /// Throws InputError on out-of-range index, zero value, or a duplicate key.
  static AttributeMatrix build(std::size_t n_nodes, std::size_t n_attrs,
                               std::span<const AttributeTriplet> triplets);
  static AttributeMatrix build(std::size_t n_nodes, std::size_t n_attrs,
                               const std::vector<AttributeTriplet>& triplets) {
    return build(n_nodes, n_attrs, std::span<const AttributeTriplet>(triplets));
  }

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t n_attrs() const noexcept { return n_attrs_; }
  std::size_t num_entries() const noexcept { return entries_.size(); }

  std::span<const Entry> entries() const noexcept { return entries_; }
  std::span<const double> values() const noexcept { return values_; }
  /// 0 when the entry is not stored.
  std::uint32_t value(NodeId node, std::uint32_t attr) const noexcept;
  std::size_t entry_index(NodeId node, std::uint32_t attr) const noexcept;

  friend bool operator==(const AttributeMatrix&, const AttributeMatrix&) = default;

 private:
  std::size_t n_nodes_ = 0;
  std::size_t n_attrs_ = 0;
  std::vector<Entry> entries_;
  std::vector<double> values_;
};

/// Hard assignment of every node to one of `n_communities` labels. Labels
/// need not all be used.
class Partition {
 public:
  Partition() = default;
  /// Throws InputError if labels is empty or any label >= n_communities.
  Partition(std::vector<std::uint32_t> labels, std::size_t n_communities);

  std::size_t n_nodes() const noexcept { return labels_.size(); }
  std::size_t n_communities() const noexcept { return n_communities_; }
  std::span<const std::uint32_t> labels() const noexcept { return labels_; }
  std::uint32_t operator[](std::size_t node) const noexcept { return labels_[node]; }

  /// Community sizes, length n_communities().
  std::vector<std::size_t> sizes() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<std::uint32_t> labels_;
  std::size_t n_communities_ = 0;
};

}  // namespace gnan
