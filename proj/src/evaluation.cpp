#include "gnan/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "gnan/error.hpp"

namespace gnan {
namespace {

std::size_t used_communities(const std::vector<std::size_t>& sizes) {
  return static_cast<std::size_t>(std::count_if(sizes.begin(), sizes.end(),
                                                [](std::size_t s) { return s > 0; }));
}

// Identical up to relabeling: the confusion table is a partial permutation.
bool same_partition(const ConfusionCounts& cc) {
  for (const auto& row : cc.counts)
    for (std::size_t j = 0; j < row.size(); ++j)
      if (row[j] != 0 && row[j] != cc.predicted_sizes[j]) return false;
  for (std::size_t i = 0; i < cc.counts.size(); ++i)
    for (std::size_t v : cc.counts[i])
      if (v != 0 && v != cc.truth_sizes[i]) return false;
  return true;
}

}  // namespace

ConfusionCounts confusion(const Partition& truth, const Partition& predicted) {
  if (truth.n_nodes() != predicted.n_nodes())
    throw InputError("partitions cover different node counts");
  if (truth.n_nodes() == 0) throw InputError("partitions are empty");
  ConfusionCounts cc;
  cc.counts.assign(truth.n_communities(), std::vector<std::size_t>(predicted.n_communities(), 0));
  cc.truth_sizes.assign(truth.n_communities(), 0);
  cc.predicted_sizes.assign(predicted.n_communities(), 0);
  for (std::size_t v = 0; v < truth.n_nodes(); ++v) {
    ++cc.counts[truth[v]][predicted[v]];
    ++cc.truth_sizes[truth[v]];
    ++cc.predicted_sizes[predicted[v]];
  }
  cc.total = truth.n_nodes();
  return cc;
}

Partition hard_assign(const DenseMatrix& membership) {
  if (membership.cols() == 0) throw InputError("membership has no communities");
  std::vector<std::uint32_t> labels(membership.rows());
  for (std::size_t i = 0; i < membership.rows(); ++i) {
    const auto row = membership.row(i);
    labels[i] = static_cast<std::uint32_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return Partition(std::move(labels), membership.cols());
}

double nmi(const Partition& truth, const Partition& predicted) {
  const ConfusionCounts cc = confusion(truth, predicted);
  if (used_communities(cc.truth_sizes) < 2 || used_communities(cc.predicted_sizes) < 2)
    return same_partition(cc) ? 1.0 : 0.0;

  const double n = static_cast<double>(cc.total);
  double mutual = 0.0;
  for (std::size_t i = 0; i < cc.counts.size(); ++i)
    for (std::size_t j = 0; j < cc.counts[i].size(); ++j) {
      const double nij = static_cast<double>(cc.counts[i][j]);
      if (nij == 0.0) continue;
      mutual += nij * std::log(n * nij / (static_cast<double>(cc.truth_sizes[i]) *
                                          static_cast<double>(cc.predicted_sizes[j])));
    }
  auto entropy_term = [n](const std::vector<std::size_t>& sizes) {
    double s = 0.0;
    for (std::size_t c : sizes)
      if (c > 0) s += static_cast<double>(c) * std::log(static_cast<double>(c) / n);
    return s;
  };
  const double denom = entropy_term(cc.truth_sizes) + entropy_term(cc.predicted_sizes);
  return std::clamp(-2.0 * mutual / denom, 0.0, 1.0);
}

double modularity(const SparseGraph& graph, const Partition& partition) {
  if (partition.n_nodes() != graph.n_nodes())
    throw InputError("partition and graph cover different node counts");
  std::size_t m = 0;
  std::vector<double> inside(partition.n_communities(), 0.0);
  std::vector<double> degree(partition.n_communities(), 0.0);
  for (const Entry& e : graph.edges()) {
    // Undirected view: keep (i, j) with i <= j, plus (j, i) when only the
    // reverse orientation is stored.
    if (e.row > e.col && graph.has_edge(e.col, e.row)) continue;
    ++m;
    const auto a = partition[e.row];
    const auto b = partition[e.col];
    degree[a] += 1.0;
    degree[b] += 1.0;
    if (a == b) inside[a] += 1.0;
  }
  if (m == 0) throw InputError("modularity is undefined on an edgeless graph");
  const double links = static_cast<double>(m);
  double q = 0.0;
  for (std::size_t r = 0; r < inside.size(); ++r) {
    const double frac = degree[r] / (2.0 * links);
    q += inside[r] / links - frac * frac;
  }
  return q;
}

std::vector<RankedAttribute> AttributeReport::above_threshold(std::size_t community) const {
  std::vector<RankedAttribute> out;
  for (const auto& a : ranking.at(community)) {
    if (!(a.weight > threshold)) break;
    out.push_back(a);
  }
  return out;
}

AttributeReport top_attributes(const DenseMatrix& profile, double threshold) {
  AttributeReport report;
  report.threshold = threshold;
  report.ranking.resize(profile.rows());
  for (std::size_t r = 0; r < profile.rows(); ++r) {
    auto& list = report.ranking[r];
    for (std::size_t k = 0; k < profile.cols(); ++k)
      list.push_back({static_cast<std::uint32_t>(k), profile(r, k)});
    std::stable_sort(list.begin(), list.end(),
                     [](const auto& a, const auto& b) { return a.weight > b.weight; });
  }
  return report;
}

}  // namespace gnan
