#include "gnan/graph.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "gnan/error.hpp"

namespace gnan {

SparseGraph SparseGraph::build(std::size_t n_nodes,
                               std::span<const std::pair<NodeId, NodeId>> edges, bool directed) {
  SparseGraph g;
  g.n_nodes_ = n_nodes;
  g.directed_ = directed;
  g.edges_.reserve(directed ? edges.size() : 2 * edges.size());
  for (const auto& [s, t] : edges) {
    if (s >= n_nodes || t >= n_nodes)
      throw InputError("edge (" + std::to_string(s) + ", " + std::to_string(t) +
                       ") out of range for " + std::to_string(n_nodes) + " nodes");
    g.edges_.push_back({s, t});
    if (!directed && s != t) g.edges_.push_back({t, s});
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());
  return g;
}

std::size_t SparseGraph::num_links() const noexcept {
  if (directed_) return edges_.size();
  std::size_t loops = 0;
  for (const Entry& e : edges_) loops += (e.row == e.col);
  return (edges_.size() - loops) / 2 + loops;
}

std::size_t SparseGraph::edge_index(NodeId source, NodeId target) const noexcept {
  const Entry key{source, target};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return edges_.size();
  return static_cast<std::size_t>(it - edges_.begin());
}

bool SparseGraph::has_edge(NodeId source, NodeId target) const noexcept {
  return edge_index(source, target) != edges_.size();
}

std::vector<std::size_t> SparseGraph::out_degrees() const {
  std::vector<std::size_t> deg(n_nodes_, 0);
  for (const Entry& e : edges_) ++deg[e.row];
  return deg;
}

std::vector<std::size_t> SparseGraph::in_degrees() const {
  std::vector<std::size_t> deg(n_nodes_, 0);
  for (const Entry& e : edges_) ++deg[e.col];
  return deg;
}

AttributeMatrix AttributeMatrix::build(std::size_t n_nodes, std::size_t n_attrs,
                                       std::span<const AttributeTriplet> triplets) {
  std::vector<AttributeTriplet> sorted(triplets.begin(), triplets.end());
  for (const auto& t : sorted) {
    if (t.node >= n_nodes || t.attr >= n_attrs)
      throw InputError("attribute entry (" + std::to_string(t.node) + ", " +
                       std::to_string(t.attr) + ") out of range");
    if (t.value == 0)
      throw InputError("attribute entry (" + std::to_string(t.node) + ", " +
                       std::to_string(t.attr) + ") has value 0; zeros are implicit");
  }
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::tie(a.node, a.attr) < std::tie(b.node, b.attr);
  });
  AttributeMatrix m(n_nodes, n_attrs);
  m.entries_.reserve(sorted.size());
  m.values_.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i].node == sorted[i - 1].node && sorted[i].attr == sorted[i - 1].attr)
      throw InputError("duplicate attribute entry (" + std::to_string(sorted[i].node) + ", " +
                       std::to_string(sorted[i].attr) + ")");
    m.entries_.push_back({sorted[i].node, sorted[i].attr});
    m.values_.push_back(static_cast<double>(sorted[i].value));
  }
  return m;
}

std::size_t AttributeMatrix::entry_index(NodeId node, std::uint32_t attr) const noexcept {
  const Entry key{node, attr};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key);
  if (it == entries_.end() || *it != key) return entries_.size();
  return static_cast<std::size_t>(it - entries_.begin());
}

std::uint32_t AttributeMatrix::value(NodeId node, std::uint32_t attr) const noexcept {
  const std::size_t idx = entry_index(node, attr);
  return idx == entries_.size() ? 0u : static_cast<std::uint32_t>(values_[idx]);
}

Partition::Partition(std::vector<std::uint32_t> labels, std::size_t n_communities)
    : labels_(std::move(labels)), n_communities_(n_communities) {
  if (labels_.empty()) throw InputError("partition must cover at least one node");
  for (std::uint32_t l : labels_)
    if (l >= n_communities_)
      throw InputError("label " + std::to_string(l) + " >= community count " +
                       std::to_string(n_communities_));
}

std::vector<std::size_t> Partition::sizes() const {
  std::vector<std::size_t> out(n_communities_, 0);
  for (std::uint32_t l : labels_) ++out[l];
  return out;
}

}  // namespace gnan
