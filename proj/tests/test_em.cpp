#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gnan/em.hpp"
#include "gnan/error.hpp"
#include "gnan/kernels.hpp"
#include "oracles.hpp"

using namespace gnan;

namespace {

const std::vector<std::pair<NodeId, NodeId>> kNoEdges;

struct Instance {
  SparseGraph graph;
  AttributeMatrix attrs;
  std::size_t C;
};

Instance random_instance(std::uint64_t seed, bool directed = false) {
  Rng rng(seed);
  const std::size_t n = 10 + static_cast<std::size_t>(rng.uniform() * 21);
  const std::size_t c = 1 + static_cast<std::size_t>(rng.uniform() * 4);
  const std::size_t k = static_cast<std::size_t>(rng.uniform() * 12);
  auto g = oracle::random_graph(n, 0.15, directed, rng);
  auto x = oracle::random_attributes(n, k, 0.2, 3, rng);
  return {std::move(g), std::move(x), c};
}

ModelParams permute_communities(const ModelParams& p, const std::vector<std::size_t>& perm) {
  ModelParams out = p;
  for (std::size_t r = 0; r < perm.size(); ++r) {
    for (std::size_t i = 0; i < p.n_nodes(); ++i) out.membership(i, perm[r]) = p.membership(i, r);
    for (std::size_t j = 0; j < p.n_nodes(); ++j) out.behavior(perm[r], j) = p.behavior(r, j);
    for (std::size_t k = 0; k < p.n_attrs(); ++k) out.profile(perm[r], k) = p.profile(r, k);
  }
  return out;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

FitConfig chain_config(std::size_t c, Mode mode = Mode::Both) {
  FitConfig cfg;
  cfg.n_communities = c;
  cfg.mode = mode;
  return cfg;
}

}  // namespace

TEST_CASE("mode names round-trip") {
  for (Mode m : {Mode::Both, Mode::LinksOnly, Mode::AttrsOnly})
    CHECK(parse_mode(mode_name(m)) == m);
  CHECK(parse_mode("links+attrs") == Mode::Both);
  CHECK_THROWS_AS(parse_mode("edges"), InputError);
}

TEST_CASE("fit config validation") {
  FitConfig cfg;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg.n_communities = 2;
  CHECK_NOTHROW(cfg.validate());
  cfg.init_jitter = 0.5;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg.init_jitter = 0.1;
  cfg.n_restarts = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg.n_restarts = 1;
  cfg.tolerance = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("init with zero jitter is exactly uniform") {
  Rng rng(1);
  const auto p = init_params(7, 3, 5, 0.0, rng);
  for (double v : p.membership.data()) CHECK(v == 1.0 / 3);
  for (double v : p.behavior.data()) CHECK(v == 1.0 / 7);
  for (double v : p.profile.data()) CHECK(v == 1.0 / 5);
}

TEST_CASE("init is deterministic in the seed") {
  Rng a(99), b(99), c(100);
  const auto pa = init_params(20, 4, 6, 0.1, a);
  CHECK(pa == init_params(20, 4, 6, 0.1, b));
  CHECK_FALSE(pa == init_params(20, 4, 6, 0.1, c));
}

TEST_CASE("init membership stays inside the jitter interval") {
  // Raw entries lie in [0.4, 0.6], so a normalized entry is at least
  // 0.4 / (4 * 0.6) and at most 0.6 / (4 * 0.4).
  Rng rng(5);
  const auto p = init_params(500, 4, 0, 0.1, rng);
  for (double v : p.membership.data()) {
    CHECK(v >= 1.0 / 6);
    CHECK(v <= 3.0 / 8);
  }
  CHECK(is_row_stochastic(p.membership));
  CHECK(is_row_stochastic(p.behavior));
}

TEST_CASE("e_step with one community gives unit responsibilities") {
  const Instance inst = random_instance(11);
  Rng rng(2);
  const auto p = init_params(inst.graph.n_nodes(), 1, inst.attrs.n_attrs(), 0.1, rng);
  const auto r = e_step(p, inst.graph, inst.attrs, Mode::Both);
  for (double v : r.edge) CHECK(v == 1.0);
  for (double v : r.attr) CHECK(v == 1.0);
  CHECK(r.num_edges() == inst.graph.num_edges());
  CHECK(r.num_attr_entries() == inst.attrs.num_entries());
}

TEST_CASE("e_step hand examples") {
  const auto g = SparseGraph::build(2, {{0, 1}}, true);
  const AttributeMatrix x(2, 0);
  SUBCASE("symmetric behavior splits evenly") {
    const auto p = make_params(DenseMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}),
                               DenseMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}), DenseMatrix(2, 0));
    const auto r = e_step(p, g, x, Mode::Both);
    CHECK(r.edge_row(0)[0] == 0.5);
    CHECK(r.edge_row(0)[1] == 0.5);
  }
  SUBCASE("weights 0.06 and 0.12 give one third and two thirds") {
    const auto p = make_params(DenseMatrix::from_rows({{0.6, 0.4}, {0.5, 0.5}}),
                               DenseMatrix::from_rows({{0.9, 0.1}, {0.7, 0.3}}), DenseMatrix(2, 0));
    const auto r = e_step(p, g, x, Mode::Both);
    CHECK(r.edge_row(0)[0] == doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(r.edge_row(0)[1] == doctest::Approx(2.0 / 3).epsilon(1e-14));
  }
}

TEST_CASE("e_step rejects a zero expected rate") {
  const auto g = SparseGraph::build(2, {{0, 1}}, true);
  const auto p = make_params(DenseMatrix::from_rows({{1, 0}, {0, 1}}),
                             DenseMatrix::from_rows({{1, 0}, {1, 0}}), DenseMatrix(2, 0));
  CHECK_THROWS_AS(e_step(p, g, AttributeMatrix(2, 0), Mode::Both), DegenerateError);
  CHECK_THROWS_AS(log_likelihood(p, g, AttributeMatrix(2, 0), Mode::Both), DegenerateError);
}

TEST_CASE("e_step leaves the switched-off block empty") {
  const Instance inst = random_instance(12);
  Rng rng(3);
  const auto p = init_params(inst.graph.n_nodes(), 2, inst.attrs.n_attrs(), 0.1, rng);
  CHECK(e_step(p, inst.graph, inst.attrs, Mode::LinksOnly).attr.empty());
  CHECK(e_step(p, inst.graph, inst.attrs, Mode::AttrsOnly).edge.empty());
}

TEST_CASE("m_step with one community gives in-degree over M") {
  Rng rng(4);
  const auto g = oracle::random_graph(15, 0.2, true, rng);
  const AttributeMatrix x(15, 0);
  const auto prev = init_params(15, 1, 0, 0.1, rng);
  const auto resp = e_step(prev, g, x, Mode::Both);
  const auto next = m_step(resp, g, x, Mode::Both, prev);
  const auto indeg = g.in_degrees();
  for (std::size_t j = 0; j < 15; ++j)
    CHECK(next.behavior(0, j) ==
          doctest::Approx(static_cast<double>(indeg[j]) / g.num_edges()).epsilon(1e-14));
}

TEST_CASE("m_step membership from a single out-edge, isolated node uniform") {
  const auto g = SparseGraph::build(3, {{0, 1}}, true);
  const AttributeMatrix x(3, 0);
  Rng rng(5);
  const auto prev = init_params(3, 2, 0, 0.1, rng);
  Responsibilities resp;
  resp.n_communities = 2;
  resp.edge = {0.3, 0.7};
  const auto next = m_step(resp, g, x, Mode::Both, prev);
  CHECK(next.membership(0, 0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(next.membership(0, 1) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(next.membership(2, 0) == 0.5);
  CHECK(next.membership(2, 1) == 0.5);
}

TEST_CASE("m_step errors and frozen matrices") {
  Rng rng(6);
  const auto prev = init_params(4, 2, 3, 0.1, rng);
  const SparseGraph empty = SparseGraph::build(4, kNoEdges, false);
  const AttributeMatrix no_attrs(4, 3);
  Responsibilities resp;
  resp.n_communities = 2;
  CHECK_THROWS_AS(m_step(resp, empty, no_attrs, Mode::Both, prev), InputError);

  const auto x = AttributeMatrix::build(4, 3, {{0, 1, 1}, {2, 2, 1}});
  CHECK_THROWS_AS(m_step(resp, empty, x, Mode::LinksOnly, prev), InputError);
  const auto attr_resp = e_step(prev, empty, x, Mode::AttrsOnly);
  const auto next = m_step(attr_resp, empty, x, Mode::AttrsOnly, prev);
  CHECK(next.behavior == prev.behavior);
  CHECK_FALSE(next.profile == prev.profile);
}

TEST_CASE("smoothing keeps rows on the simplex and strictly positive") {
  auto p = make_params(DenseMatrix::from_rows({{1, 0}, {0, 1}}),
                       DenseMatrix::from_rows({{1, 0}, {0, 1}}),
                       DenseMatrix::from_rows({{1, 0, 0}, {0, 0, 1}}));
  const auto before = p.profile;
  smooth(p, Mode::LinksOnly);
  for (double v : p.membership.data()) CHECK(v > 0);
  for (double v : p.behavior.data()) CHECK(v > 0);
  CHECK(p.profile == before);
  smooth(p, Mode::Both);
  for (double v : p.profile.data()) CHECK(v > 0);
  CHECK(is_row_stochastic(p.membership));
  CHECK(is_row_stochastic(p.profile));
}

TEST_CASE("lower bound of an empty dataset is -2N") {
  Rng rng(7);
  const auto p = oracle::random_params(9, 3, 4, rng);
  Responsibilities resp;
  resp.n_communities = 3;
  const double lb =
      lower_bound(p, resp, SparseGraph::build(9, kNoEdges, true), AttributeMatrix(9, 4), Mode::Both);
  CHECK(lb == doctest::Approx(-18.0).epsilon(1e-14));
}

TEST_CASE("log-likelihood closed forms") {
  SUBCASE("one community, single edge") {
    const auto g = SparseGraph::build(3, {{0, 1}}, true);
    const auto p = make_params(DenseMatrix(3, 1, 1.0), DenseMatrix::from_rows({{0.2, 0.5, 0.3}}),
                               DenseMatrix(1, 0));
    CHECK(log_likelihood(p, g, AttributeMatrix(3, 0), Mode::Both) ==
          doctest::Approx(std::log(0.5) - 3).epsilon(1e-15));
  }
  SUBCASE("single node without data") {
    Rng rng(8);
    const auto p = init_params(1, 2, 3, 0.1, rng);
    CHECK(log_likelihood(p, SparseGraph::build(1, kNoEdges, false), AttributeMatrix(1, 3), Mode::Both) ==
          doctest::Approx(-2.0).epsilon(1e-15));
  }
}

TEST_CASE("bound and likelihood agree with the dense oracle") {
  for (std::uint64_t seed = 20; seed < 40; ++seed) {
    const Instance inst = random_instance(seed, seed % 2 == 0);
    Rng rng(seed);
    const auto p = oracle::random_params(inst.graph.n_nodes(), inst.C, inst.attrs.n_attrs(), rng);
    for (Mode m : {Mode::Both, Mode::LinksOnly, Mode::AttrsOnly}) {
      const double ll = log_likelihood(p, inst.graph, inst.attrs, m);
      const double ref = static_cast<double>(oracle::log_likelihood(p, inst.graph, inst.attrs, m));
      CHECK(std::abs(ll - ref) <= 1e-10 * (1 + std::abs(ref)));

      const auto resp = e_step(p, inst.graph, inst.attrs, m);
      const double lb = lower_bound(p, resp, inst.graph, inst.attrs, m);
      const double ref_lb =
          static_cast<double>(oracle::lower_bound(p, resp, inst.graph, inst.attrs, m));
      CHECK(std::abs(lb - ref_lb) <= 1e-10 * (1 + std::abs(ref_lb)));
      CHECK(std::abs(lb - ll) <= 1e-8 * (1 + std::abs(ll)));
    }
  }
}

TEST_CASE("perturbed responsibilities never exceed the likelihood") {
  Rng noise(77);
  for (std::uint64_t seed = 40; seed < 50; ++seed) {
    const Instance inst = random_instance(seed);
    Rng rng(seed);
    const auto p = oracle::random_params(inst.graph.n_nodes(), inst.C, inst.attrs.n_attrs(), rng);
    const double ll = log_likelihood(p, inst.graph, inst.attrs, Mode::Both);
    auto resp = e_step(p, inst.graph, inst.attrs, Mode::Both);
    for (auto* block : {&resp.edge, &resp.attr})
      for (std::size_t e = 0; e * inst.C < block->size(); ++e) {
        double sum = 0;
        for (std::size_t r = 0; r < inst.C; ++r) sum += (*block)[e * inst.C + r] += noise.uniform();
        for (std::size_t r = 0; r < inst.C; ++r) (*block)[e * inst.C + r] /= sum;
      }
    CHECK(lower_bound(p, resp, inst.graph, inst.attrs, Mode::Both) <= ll + 1e-9);
  }
}

TEST_CASE("lower bound rejects mismatched responsibilities") {
  Rng rng(9);
  const auto g = SparseGraph::build(3, {{0, 1}}, false);
  const auto p = init_params(3, 2, 0, 0.1, rng);
  Responsibilities resp;
  resp.n_communities = 2;
  resp.edge = {0.5, 0.5};
  CHECK_THROWS_AS(lower_bound(p, resp, g, AttributeMatrix(3, 0), Mode::Both), InputError);
}

TEST_CASE("m_step output is a stationary point of each Lagrangian") {
  for (std::uint64_t seed = 60; seed < 70; ++seed) {
    const Instance inst = random_instance(seed, seed % 2 == 1);
    Rng rng(seed);
    const auto prev = oracle::random_params(inst.graph.n_nodes(), inst.C, inst.attrs.n_attrs(), rng);
    for (Mode m : {Mode::Both, Mode::LinksOnly, Mode::AttrsOnly}) {
      if (m == Mode::AttrsOnly && inst.attrs.num_entries() == 0) continue;
      const auto resp = e_step(prev, inst.graph, inst.attrs, m);
      const auto next = m_step(resp, inst.graph, inst.attrs, m, prev);
      CHECK(is_row_stochastic(next.membership));
      CHECK(is_row_stochastic(next.behavior));
      CHECK(is_row_stochastic(next.profile));
      CHECK(oracle::max_stationarity_residual(next, resp, inst.graph, inst.attrs, m) < 1e-5);
    }
  }
}

TEST_CASE("M-step does not decrease the bound for fixed responsibilities") {
  for (std::uint64_t seed = 70; seed < 80; ++seed) {
    const Instance inst = random_instance(seed);
    Rng rng(seed);
    const auto prev = oracle::random_params(inst.graph.n_nodes(), inst.C, inst.attrs.n_attrs(), rng);
    const auto resp = e_step(prev, inst.graph, inst.attrs, Mode::Both);
    const auto next = m_step(resp, inst.graph, inst.attrs, Mode::Both, prev);
    CHECK(lower_bound(next, resp, inst.graph, inst.attrs, Mode::Both) >=
          lower_bound(prev, resp, inst.graph, inst.attrs, Mode::Both) - 1e-9);
  }
}

TEST_CASE("one community converges within two iterations") {
  for (std::uint64_t seed = 80; seed < 85; ++seed) {
    const Instance inst = random_instance(seed);
    Rng rng(seed);
    const auto init = init_params(inst.graph.n_nodes(), 1, inst.attrs.n_attrs(), 0.1, rng);
    const auto r = run_chain(inst.graph, inst.attrs, init, chain_config(1));
    CHECK(r.converged);
    CHECK(r.iterations_used <= 2);
  }
}

TEST_CASE("bound trace is non-decreasing") {
  for (std::uint64_t seed = 90; seed < 100; ++seed) {
    const Instance inst = random_instance(seed, seed % 3 == 0);
    Rng rng(seed);
    const auto init = init_params(inst.graph.n_nodes(), inst.C, inst.attrs.n_attrs(), 0.1, rng);
    const auto r = run_chain(inst.graph, inst.attrs, init, chain_config(inst.C));
    REQUIRE(r.bound_trace.size() == r.iterations_used + 1);
    for (std::size_t t = 1; t < r.bound_trace.size(); ++t)
      CHECK(r.bound_trace[t] >= r.bound_trace[t - 1] - 1e-9);
  }
}

TEST_CASE("chains are equivariant under community relabeling") {
  const Instance inst = random_instance(123);
  const std::size_t c = 3;
  Rng rng(1);
  const auto init = init_params(inst.graph.n_nodes(), c, inst.attrs.n_attrs(), 0.1, rng);
  const std::vector<std::size_t> perm{2, 0, 1};
  FitConfig cfg = chain_config(c);
  cfg.max_iters = 30;
  cfg.tolerance = 1e-300;
  const auto a = run_chain(inst.graph, inst.attrs, init, cfg);
  const auto b = run_chain(inst.graph, inst.attrs, permute_communities(init, perm), cfg);
  const auto pa = permute_communities(a.params, perm);
  CHECK(max_abs_diff(pa.membership, b.params.membership) < 1e-9);
  CHECK(max_abs_diff(pa.behavior, b.params.behavior) < 1e-9);
  CHECK(max_abs_diff(pa.profile, b.params.profile) < 1e-9);
  CHECK(a.final_bound() == doctest::Approx(b.final_bound()).epsilon(1e-12));
}

TEST_CASE("chains are equivariant under node relabeling") {
  const Instance inst = random_instance(124);
  const std::size_t n = inst.graph.n_nodes(), c = 2;
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());

  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const Entry& e : inst.graph.edges()) edges.emplace_back(perm[e.row], perm[e.col]);
  const auto g2 = SparseGraph::build(n, edges, true);
  std::vector<AttributeTriplet> t;
  for (std::size_t e = 0; e < inst.attrs.num_entries(); ++e)
    t.push_back({perm[inst.attrs.entries()[e].row], inst.attrs.entries()[e].col,
                 static_cast<std::uint32_t>(inst.attrs.values()[e])});
  const auto x2 = AttributeMatrix::build(n, inst.attrs.n_attrs(), t);

  Rng rng(2);
  const auto init = init_params(n, c, inst.attrs.n_attrs(), 0.1, rng);
  ModelParams init2 = init;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < c; ++r) {
      init2.membership(perm[i], r) = init.membership(i, r);
      init2.behavior(r, perm[i]) = init.behavior(r, i);
    }
  FitConfig cfg = chain_config(c);
  cfg.max_iters = 30;
  cfg.tolerance = 1e-300;
  const auto a = run_chain(inst.graph, inst.attrs, init, cfg);
  const auto b = run_chain(g2, x2, init2, cfg);
  double d = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < c; ++r) {
      d = std::max(d, std::abs(a.params.membership(i, r) - b.params.membership(perm[i], r)));
      d = std::max(d, std::abs(a.params.behavior(r, i) - b.params.behavior(r, perm[i])));
    }
  CHECK(d < 1e-9);
  CHECK(max_abs_diff(a.params.profile, b.params.profile) < 1e-9);
}

TEST_CASE("fit is deterministic and independent of the thread count") {
  const Instance inst = random_instance(321);
  FitConfig cfg = chain_config(3);
  cfg.n_restarts = 6;
  cfg.seed = 17;
  cfg.max_iters = 100;
  const auto a = fit(inst.graph, inst.attrs, cfg);
  cfg.threads = 4;
  const auto b = fit(inst.graph, inst.attrs, cfg);
  CHECK(a.params == b.params);
  CHECK(a.bound_trace == b.bound_trace);
  CHECK(a.restart_index == b.restart_index);

  const auto runs = fit_restarts(inst.graph, inst.attrs, cfg);
  REQUIRE(runs.size() == 6);
  CHECK(best_restart(runs) == a.restart_index);
  for (const auto& r : runs) CHECK(r.final_bound() <= a.final_bound());
}

TEST_CASE("restart r starts from the seeded init") {
  const Instance inst = random_instance(322);
  FitConfig cfg = chain_config(2);
  cfg.n_restarts = 3;
  cfg.seed = 5;
  cfg.max_iters = 40;
  const auto runs = fit_restarts(inst.graph, inst.attrs, cfg);
  Rng rng(derive_seed(cfg.seed, 2));
  const auto init = init_params(inst.graph.n_nodes(), 2, inst.attrs.n_attrs(), cfg.init_jitter, rng);
  const auto chain = run_chain(inst.graph, inst.attrs, init, cfg);
  CHECK(chain.params == runs[2].params);
}

TEST_CASE("best restart picks the lowest index on ties") {
  std::vector<FitResult> runs(3);
  runs[0].bound_trace = {-5.0};
  runs[1].bound_trace = {-2.0};
  runs[2].bound_trace = {-2.0};
  CHECK(best_restart(runs) == 1);
}

#if GNAN_HAVE_AVX2_KERNELS
TEST_CASE("scalar and avx2 backends give the same fit") {
  if (!kernels::backend_supported(kernels::Backend::Avx2)) return;
  const Instance inst = random_instance(555);
  FitConfig cfg = chain_config(3);
  cfg.n_restarts = 2;
  cfg.max_iters = 50;
  cfg.tolerance = 1e-300;
  const auto before = kernels::active().backend;
  kernels::set_backend(kernels::Backend::Scalar);
  const auto a = fit(inst.graph, inst.attrs, cfg);
  kernels::set_backend(kernels::Backend::Avx2);
  const auto b = fit(inst.graph, inst.attrs, cfg);
  kernels::set_backend(before);
  CHECK(max_abs_diff(a.params.membership, b.params.membership) < 1e-9);
  CHECK(a.final_bound() == doctest::Approx(b.final_bound()).epsilon(1e-12));
}
#endif
