#include "gnan/model.hpp"

#include <string>

#include "gnan/error.hpp"

namespace gnan {

void ModelParams::validate() const {
  const std::size_t n = membership.rows();
  const std::size_t c = membership.cols();
  if (c == 0) throw InputError("model needs at least one community");
  if (behavior.rows() != c || behavior.cols() != n)
    throw InputError("behavior matrix must be C x N");
  if (profile.rows() != c) throw InputError("profile matrix must have C rows");
  if (!is_row_stochastic(membership)) throw InputError("membership rows are not on the simplex");
  if (!is_row_stochastic(behavior)) throw InputError("behavior rows are not on the simplex");
  if (!is_row_stochastic(profile)) throw InputError("profile rows are not on the simplex");
}

ModelParams make_params(DenseMatrix membership, DenseMatrix behavior, DenseMatrix profile) {
  ModelParams p{normalize_rows(std::move(membership)), normalize_rows(std::move(behavior)),
                normalize_rows(std::move(profile))};
  p.validate();
  return p;
}

std::span<const double> Responsibilities::for_edge(const SparseGraph& g, NodeId i,
                                                    NodeId j) const noexcept {
  const std::size_t e = g.edge_index(i, j);
  if (e == g.num_edges() || e >= num_edges()) return {};
  return edge_row(e);
}

std::span<const double> Responsibilities::for_attr(const AttributeMatrix& x, NodeId i,
                                                    std::uint32_t k) const noexcept {
  const std::size_t e = x.entry_index(i, k);
  if (e == x.num_entries() || e >= num_attr_entries()) return {};
  return attr_row(e);
}

}  // namespace gnan
