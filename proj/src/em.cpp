#include "gnan/em.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>

#include "gnan/error.hpp"
#include "gnan/kernels.hpp"

namespace gnan {
namespace {

// Neumaier-compensated running sum. The bound is a sum of many terms of
// mixed sign and magnitude; compensation keeps the trace monotone well below
// the 1e-9 slack even for tens of thousands of entries.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Parameters with behavior and profile stored transposed (N x C, K x C) so
// that the factor rows the kernels touch per entry are contiguous.
struct Factors {
  DenseMatrix membership;
  DenseMatrix behavior_t;
  DenseMatrix profile_t;
};

Factors to_factors(const ModelParams& p) {
  return {p.membership, p.behavior.transposed(), p.profile.transposed()};
}

ModelParams to_params(const Factors& f) {
  return {f.membership, f.behavior_t.transposed(), f.profile_t.transposed()};
}

void check_dims(const ModelParams& p, const SparseGraph& graph, const AttributeMatrix& attrs) {
  const std::size_t n = graph.n_nodes();
  const std::size_t c = p.membership.cols();
  if (attrs.n_nodes() != n) throw InputError("graph and attribute matrix disagree on node count");
  if (c == 0) throw InputError("model needs at least one community");
  if (p.membership.rows() != n) throw InputError("membership rows must equal node count");
  if (p.behavior.rows() != c || p.behavior.cols() != n)
    throw InputError("behavior matrix must be C x N");
  if (p.profile.rows() != c || p.profile.cols() != attrs.n_attrs())
    throw InputError("profile matrix must be C x K");
}

std::vector<double> column_sums(const DenseMatrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += m(r, c);
  return out;
}

// sum_{i,j,r} tau_ir * theta_rj = sum_r (sum_i tau_ir)(sum_j theta_rj); with
// `other_t` holding theta (or phi) transposed.
double expected_total(const std::vector<double>& membership_mass, const DenseMatrix& other_t) {
  const std::vector<double> other_mass = column_sums(other_t);
  double total = 0.0;
  for (std::size_t r = 0; r < membership_mass.size(); ++r)
    total += membership_mass[r] * other_mass[r];
  return total;
}

[[noreturn]] void throw_zero_rate(const char* what, Entry e) {
  throw DegenerateError(std::string("zero expected rate for observed ") + what + " (" +
                        std::to_string(e.row) + ", " + std::to_string(e.col) + ")");
}

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

struct Workspace {
  Responsibilities resp;
  std::vector<double> edge_rates;
  std::vector<double> attr_rates;
  std::vector<double> edge_weights;
  DenseMatrix acc_edge_row, acc_edge_col, acc_attr_row, acc_attr_col;

  Workspace(const SparseGraph& g, const AttributeMatrix& x, std::size_t c, Mode mode) {
    resp.n_communities = c;
    if (uses_links(mode)) {
      resp.edge.resize(g.num_edges() * c);
      edge_rates.resize(g.num_edges());
      edge_weights = ones(g.num_edges());
    }
    if (uses_attrs(mode)) {
      resp.attr.resize(x.num_entries() * c);
      attr_rates.resize(x.num_entries());
    }
    acc_edge_row = DenseMatrix(g.n_nodes(), c);
    acc_edge_col = DenseMatrix(g.n_nodes(), c);
    acc_attr_row = DenseMatrix(g.n_nodes(), c);
    acc_attr_col = DenseMatrix(x.n_attrs(), c);
  }
};

// E-step into `ws.resp`; returns the log-likelihood at `f`, which is also the
// lower bound evaluated with the responsibilities just computed.
double estep_into(const Factors& f, const SparseGraph& graph, const AttributeMatrix& attrs,
                  Mode mode, Workspace& ws) {
  const auto& k = kernels::active();
  const std::size_t c = f.membership.cols();
  const std::vector<double> mass = column_sums(f.membership);
  CompensatedSum ll;
  if (uses_links(mode)) {
    const auto edges = graph.edges();
    const std::size_t bad = k.responsibilities(f.membership.data(), f.behavior_t.data(), edges, c,
                                               ws.resp.edge, ws.edge_rates);
    if (bad != edges.size()) throw_zero_rate("edge", edges[bad]);
    for (double rate : ws.edge_rates) ll.add(std::log(rate));
    ll.add(-expected_total(mass, f.behavior_t));
  }
  if (uses_attrs(mode)) {
    const auto entries = attrs.entries();
    const auto values = attrs.values();
    const std::size_t bad = k.responsibilities(f.membership.data(), f.profile_t.data(), entries,
                                               c, ws.resp.attr, ws.attr_rates);
    if (bad != entries.size()) throw_zero_rate("attribute entry", entries[bad]);
    for (std::size_t e = 0; e < entries.size(); ++e) ll.add(values[e] * std::log(ws.attr_rates[e]));
    ll.add(-expected_total(mass, f.profile_t));
  }
  return ll.value();
}

// Column-normalize `acc` (rows x C) into `out`; a column with no mass
// becomes uniform.
void normalize_columns_into(const DenseMatrix& acc, DenseMatrix& out) {
  const std::vector<double> totals = column_sums(acc);
  const double uniform = acc.rows() ? 1.0 / static_cast<double>(acc.rows()) : 0.0;
  for (std::size_t j = 0; j < acc.rows(); ++j)
    for (std::size_t r = 0; r < acc.cols(); ++r)
      out(j, r) = totals[r] > 0.0 ? acc(j, r) / totals[r] : uniform;
}

void mstep_into(const Responsibilities& resp, const SparseGraph& graph,
                const AttributeMatrix& attrs, Mode mode, Factors& f, Workspace& ws) {
  const std::size_t c = f.membership.cols();
  const bool links = uses_links(mode) && graph.num_edges() > 0;
  const bool attr_terms = uses_attrs(mode) && attrs.num_entries() > 0;
  if (!links && !attr_terms) throw InputError("no observed edges or attributes to fit");

  const auto& k = kernels::active();
  if (links) {
    ws.acc_edge_row.fill(0.0);
    ws.acc_edge_col.fill(0.0);
    if (ws.edge_weights.size() != graph.num_edges()) ws.edge_weights = ones(graph.num_edges());
    k.accumulate(resp.edge, graph.edges(), ws.edge_weights, c, ws.acc_edge_row.data(),
                 ws.acc_edge_col.data());
    normalize_columns_into(ws.acc_edge_col, f.behavior_t);
  } else if (uses_links(mode)) {
    f.behavior_t.fill(graph.n_nodes() ? 1.0 / static_cast<double>(graph.n_nodes()) : 0.0);
  }
  if (attr_terms) {
    ws.acc_attr_row.fill(0.0);
    ws.acc_attr_col.fill(0.0);
    k.accumulate(resp.attr, attrs.entries(), attrs.values(), c, ws.acc_attr_row.data(),
                 ws.acc_attr_col.data());
    normalize_columns_into(ws.acc_attr_col, f.profile_t);
  } else if (uses_attrs(mode) && attrs.n_attrs() > 0) {
    f.profile_t.fill(1.0 / static_cast<double>(attrs.n_attrs()));
  }

  const double uniform = 1.0 / static_cast<double>(c);
  for (std::size_t i = 0; i < f.membership.rows(); ++i) {
    auto row = f.membership.row(i);
    double total = 0.0;
    for (std::size_t r = 0; r < c; ++r) {
      double v = 0.0;
      if (links) v += ws.acc_edge_row(i, r);
      if (attr_terms) v += ws.acc_attr_row(i, r);
      row[r] = v;
      total += v;
    }
    if (total > 0.0)
      for (double& v : row) v /= total;
    else
      for (double& v : row) v = uniform;
  }
}

void smooth_rows(DenseMatrix& m, double delta) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    double total = 0.0;
    for (double& v : row) {
      v += delta;
      total += v;
    }
    for (double& v : row) v /= total;
  }
}

void smooth_columns(DenseMatrix& m, double delta) {
  if (m.rows() == 0) return;
  std::vector<double> totals(m.cols(), 0.0);
  for (std::size_t j = 0; j < m.rows(); ++j)
    for (std::size_t r = 0; r < m.cols(); ++r) totals[r] += (m(j, r) += delta);
  for (std::size_t j = 0; j < m.rows(); ++j)
    for (std::size_t r = 0; r < m.cols(); ++r) m(j, r) /= totals[r];
}

void smooth_factors(Factors& f, Mode mode, double delta) {
  smooth_rows(f.membership, delta);
  if (uses_links(mode)) smooth_columns(f.behavior_t, delta);
  if (uses_attrs(mode)) smooth_columns(f.profile_t, delta);
}

void validate_chain_config(const FitConfig& c) {
  if (c.n_communities < 1) throw InputError("need at least one community");
  if (c.max_iters < 1) throw InputError("max_iters must be at least 1");
  if (!(c.tolerance > 0.0)) throw InputError("tolerance must be positive");
}

}  // namespace

void FitConfig::validate() const {
  validate_chain_config(*this);
  if (!(init_jitter > 0.0 && init_jitter < 0.5)) throw InputError("jitter must lie in (0, 0.5)");
  if (n_restarts < 1) throw InputError("need at least one restart");
}

Mode parse_mode(std::string_view text) {
  if (text == "both" || text == "links+attrs") return Mode::Both;
  if (text == "links" || text == "links-only") return Mode::LinksOnly;
  if (text == "attrs" || text == "attrs-only") return Mode::AttrsOnly;
  throw InputError("unknown mode '" + std::string(text) + "' (expected both, links or attrs)");
}

std::string_view mode_name(Mode m) noexcept {
  switch (m) {
    case Mode::Both:
      return "both";
    case Mode::LinksOnly:
      return "links";
    case Mode::AttrsOnly:
      return "attrs";
  }
  return "both";
}

ModelParams init_params(std::size_t n_nodes, std::size_t n_communities, std::size_t n_attrs,
                        double jitter, Rng& rng) {
  if (n_communities < 1) throw InputError("need at least one community");
  if (n_nodes < 1) throw InputError("need at least one node");
  if (!(jitter >= 0.0 && jitter < 0.5)) throw InputError("jitter must lie in [0, 0.5)");
  const double lo = 0.5 - jitter;
  const double hi = 0.5 + jitter;
  auto draw = [&](std::size_t rows, std::size_t cols) {
    DenseMatrix m(rows, cols);
    for (double& v : m.data()) v = jitter == 0.0 ? 0.5 : rng.uniform(lo, hi);
    return normalize_rows(std::move(m));
  };
  ModelParams p;
  p.membership = draw(n_nodes, n_communities);
  p.behavior = draw(n_communities, n_nodes);
  p.profile = draw(n_communities, n_attrs);
  return p;
}

Responsibilities e_step(const ModelParams& params, const SparseGraph& graph,
                        const AttributeMatrix& attrs, Mode mode) {
  check_dims(params, graph, attrs);
  Workspace ws(graph, attrs, params.n_communities(), mode);
  estep_into(to_factors(params), graph, attrs, mode, ws);
  return std::move(ws.resp);
}

ModelParams m_step(const Responsibilities& resp, const SparseGraph& graph,
                   const AttributeMatrix& attrs, Mode mode, const ModelParams& previous) {
  check_dims(previous, graph, attrs);
  const std::size_t c = previous.n_communities();
  if (resp.n_communities != c) throw InputError("responsibilities have the wrong width");
  if (uses_links(mode) && resp.edge.size() != graph.num_edges() * c)
    throw InputError("edge responsibilities do not match the edge set");
  if (uses_attrs(mode) && resp.attr.size() != attrs.num_entries() * c)
    throw InputError("attribute responsibilities do not match the attribute entries");
  Workspace ws(graph, attrs, c, Mode::LinksOnly);
  Factors f = to_factors(previous);
  mstep_into(resp, graph, attrs, mode, f, ws);
  return to_params(f);
}

void smooth(ModelParams& params, Mode mode, double delta) {
  smooth_rows(params.membership, delta);
  if (uses_links(mode)) smooth_rows(params.behavior, delta);
  if (uses_attrs(mode)) smooth_rows(params.profile, delta);
}

double lower_bound(const ModelParams& params, const Responsibilities& resp,
                   const SparseGraph& graph, const AttributeMatrix& attrs, Mode mode) {
  check_dims(params, graph, attrs);
  const std::size_t c = params.n_communities();
  const auto& tau = params.membership;
  const std::vector<double> mass = column_sums(tau);
  CompensatedSum bound;
  auto add_terms = [&](std::span<const double> q, const DenseMatrix& other, Entry e, double w) {
    for (std::size_t r = 0; r < c; ++r) {
      if (q[r] == 0.0) continue;
      bound.add(w * q[r] * std::log(tau(e.row, r) * other(r, e.col) / q[r]));
    }
  };
  if (uses_links(mode)) {
    if (resp.edge.size() != graph.num_edges() * c)
      throw InputError("edge responsibilities do not match the edge set");
    const auto edges = graph.edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
      add_terms(resp.edge_row(e), params.behavior, edges[e], 1.0);
    bound.add(-expected_total(mass, params.behavior.transposed()));
  }
  if (uses_attrs(mode)) {
    if (resp.attr.size() != attrs.num_entries() * c)
      throw InputError("attribute responsibilities do not match the attribute entries");
    const auto entries = attrs.entries();
    const auto values = attrs.values();
    for (std::size_t e = 0; e < entries.size(); ++e)
      add_terms(resp.attr_row(e), params.profile, entries[e], values[e]);
    bound.add(-expected_total(mass, params.profile.transposed()));
  }
  return bound.value();
}

double log_likelihood(const ModelParams& params, const SparseGraph& graph,
                      const AttributeMatrix& attrs, Mode mode) {
  check_dims(params, graph, attrs);
  const Factors f = to_factors(params);
  const std::size_t c = params.n_communities();
  const auto& k = kernels::active();
  const std::vector<double> mass = column_sums(f.membership);
  CompensatedSum ll;
  if (uses_links(mode)) {
    std::vector<double> rates(graph.num_edges());
    k.rates(f.membership.data(), f.behavior_t.data(), graph.edges(), c, rates);
    for (std::size_t e = 0; e < rates.size(); ++e) {
      if (!(rates[e] > 0.0)) throw_zero_rate("edge", graph.edges()[e]);
      ll.add(std::log(rates[e]));
    }
    ll.add(-expected_total(mass, f.behavior_t));
  }
  if (uses_attrs(mode)) {
    std::vector<double> rates(attrs.num_entries());
    k.rates(f.membership.data(), f.profile_t.data(), attrs.entries(), c, rates);
    const auto values = attrs.values();
    for (std::size_t e = 0; e < rates.size(); ++e) {
      if (!(rates[e] > 0.0)) throw_zero_rate("attribute entry", attrs.entries()[e]);
      ll.add(values[e] * std::log(rates[e]));
    }
    ll.add(-expected_total(mass, f.profile_t));
  }
  return ll.value();
}

FitResult run_chain(const SparseGraph& graph, const AttributeMatrix& attrs, ModelParams init,
                    const FitConfig& config) {
  validate_chain_config(config);
  check_dims(init, graph, attrs);
  if (init.n_communities() != config.n_communities)
    throw InputError("initial parameters have the wrong community count");

  Factors f = to_factors(init);
  Workspace ws(graph, attrs, config.n_communities, config.mode);
  FitResult result;
  result.bound_trace.reserve(config.max_iters + 1);
  double previous = estep_into(f, graph, attrs, config.mode, ws);
  result.bound_trace.push_back(previous);
  for (std::size_t t = 1; t <= config.max_iters; ++t) {
    mstep_into(ws.resp, graph, attrs, config.mode, f, ws);
    smooth_factors(f, config.mode, kSmoothing);
    const double current = estep_into(f, graph, attrs, config.mode, ws);
    result.bound_trace.push_back(current);
    result.iterations_used = t;
    if (std::abs(current - previous) < config.tolerance) {
      result.converged = true;
      break;
    }
    previous = current;
  }
  result.params = to_params(f);
  return result;
}

std::vector<FitResult> fit_restarts(const SparseGraph& graph, const AttributeMatrix& attrs,
                                    const FitConfig& config) {
  config.validate();
  if (graph.n_nodes() != attrs.n_nodes())
    throw InputError("graph and attribute matrix disagree on node count");
  const std::size_t n_runs = config.n_restarts;
  std::vector<std::optional<FitResult>> slots(n_runs);
  std::vector<std::exception_ptr> errors(n_runs);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t r = next++; r < n_runs; r = next++) {
      try {
        Rng rng(derive_seed(config.seed, r));
        ModelParams init = init_params(graph.n_nodes(), config.n_communities, attrs.n_attrs(),
                                       config.init_jitter, rng);
        FitResult res = run_chain(graph, attrs, std::move(init), config);
        res.restart_index = r;
        slots[r] = std::move(res);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(config.threads, 1, n_runs);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<FitResult> out;
  out.reserve(n_runs);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::size_t best_restart(const std::vector<FitResult>& runs) {
  if (runs.empty()) throw InputError("no restarts to choose from");
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].final_bound() > runs[best].final_bound()) best = r;
  return best;
}

FitResult fit(const SparseGraph& graph, const AttributeMatrix& attrs, const FitConfig& config) {
  std::vector<FitResult> runs = fit_restarts(graph, attrs, config);
  return std::move(runs[best_restart(runs)]);
}

}  // namespace gnan
