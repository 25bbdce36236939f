#include "gnan/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

#include "gnan/error.hpp"

namespace gnan::io {
namespace {

// Line reader that strips '#' comments and blank lines and tracks line numbers.
class LineReader {
 public:
  explicit LineReader(const fs::path& path) : path_(path.string()), in_(path) {
    if (!in_) throw InputError("cannot open " + path_);
  }

  bool next(std::vector<std::string_view>& tokens) {
    while (std::getline(in_, line_)) {
      ++number_;
      if (auto hash = line_.find('#'); hash != std::string::npos) line_.resize(hash);
      tokens.clear();
      std::string_view rest(line_);
      while (!rest.empty()) {
        const auto start = rest.find_first_not_of(" \t\r");
        if (start == std::string_view::npos) break;
        rest.remove_prefix(start);
        const auto end = rest.find_first_of(" \t\r");
        tokens.push_back(rest.substr(0, end));
        if (end == std::string_view::npos) break;
        rest.remove_prefix(end);
      }
      if (!tokens.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(path_, number_, what); }

  std::uint64_t to_uint(std::string_view tok) const {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      fail("expected a nonnegative integer, got '" + std::string(tok) + "'");
    return v;
  }

  double to_double(std::string_view tok) const {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      fail("expected a number, got '" + std::string(tok) + "'");
    return v;
  }

  // Parses "key=value" tokens of a header line against the expected keys.
  std::map<std::string, std::uint64_t> header(const std::vector<std::string_view>& tokens,
                                              std::initializer_list<const char*> keys) const {
    std::map<std::string, std::uint64_t> out;
    for (auto tok : tokens) {
      const auto eq = tok.find('=');
      if (eq == std::string_view::npos) fail("malformed header token '" + std::string(tok) + "'");
      out[std::string(tok.substr(0, eq))] = to_uint(tok.substr(eq + 1));
    }
    for (const char* k : keys)
      if (!out.contains(k)) fail(std::string("header is missing '") + k + "='");
    if (out.size() != keys.size()) fail("unexpected key in header");
    return out;
  }

  std::size_t line_number() const noexcept { return number_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::string line_;
  std::size_t number_ = 0;
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void write_matrix_rows(std::ostream& out, const DenseMatrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << '\t';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

DenseMatrix read_matrix_rows(LineReader& in, std::size_t rows, std::size_t cols) {
  DenseMatrix m(rows, cols);
  std::vector<std::string_view> tok;
  for (std::size_t r = 0; r < rows; ++r) {
    if (cols == 0) continue;
    if (!in.next(tok)) in.fail("unexpected end of file in matrix block");
    if (tok.size() != cols) in.fail("expected " + std::to_string(cols) + " values");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = in.to_double(tok[c]);
  }
  return m;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, p);
}

SparseGraph load_edge_list(const fs::path& path) {
  LineReader in(path);
  std::vector<std::string_view> tok;
  if (!in.next(tok)) in.fail("missing header 'nodes=N directed=0|1'");
  const auto h = in.header(tok, {"nodes", "directed"});
  const std::size_t n = h.at("nodes");
  if (h.at("directed") > 1) in.fail("directed must be 0 or 1");
  std::vector<std::pair<NodeId, NodeId>> edges;
  while (in.next(tok)) {
    if (tok.size() != 2) in.fail("expected 'src<TAB>dst'");
    const auto s = in.to_uint(tok[0]);
    const auto t = in.to_uint(tok[1]);
    if (s >= n || t >= n) in.fail("node index out of range");
    edges.emplace_back(static_cast<NodeId>(s), static_cast<NodeId>(t));
  }
  return SparseGraph::build(n, edges, h.at("directed") == 1);
}

void save_edge_list(const SparseGraph& graph, const fs::path& path) {
  auto out = open_out(path);
  out << "nodes=" << graph.n_nodes() << " directed=" << (graph.directed() ? 1 : 0) << '\n';
  for (const Entry& e : graph.edges()) {
    if (!graph.directed() && e.row > e.col) continue;
    out << e.row << '\t' << e.col << '\n';
  }
}

AttributeMatrix load_attributes(const fs::path& path) {
  LineReader in(path);
  std::vector<std::string_view> tok;
  if (!in.next(tok)) in.fail("missing header 'nodes=N attrs=K'");
  const auto h = in.header(tok, {"nodes", "attrs"});
  const std::size_t n = h.at("nodes");
  const std::size_t k = h.at("attrs");
  std::vector<AttributeTriplet> triplets;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::size_t> seen;
  while (in.next(tok)) {
    if (tok.size() != 3) in.fail("expected 'node<TAB>attr<TAB>value'");
    const auto node = in.to_uint(tok[0]);
    const auto attr = in.to_uint(tok[1]);
    const auto value = in.to_uint(tok[2]);
    if (node >= n || attr >= k) in.fail("index out of range");
    if (value == 0) in.fail("zero value; zeros are implicit");
    if (value > UINT32_MAX) in.fail("value too large");
    if (auto [it, fresh] = seen.emplace(std::pair{node, attr}, in.line_number()); !fresh)
      in.fail("duplicate entry (first seen on line " + std::to_string(it->second) + ")");
    triplets.push_back({static_cast<NodeId>(node), static_cast<std::uint32_t>(attr),
                        static_cast<std::uint32_t>(value)});
  }
  return AttributeMatrix::build(n, k, triplets);
}

void save_attributes(const AttributeMatrix& attrs, const fs::path& path) {
  auto out = open_out(path);
  out << "nodes=" << attrs.n_nodes() << " attrs=" << attrs.n_attrs() << '\n';
  const auto entries = attrs.entries();
  const auto values = attrs.values();
  for (std::size_t e = 0; e < entries.size(); ++e)
    out << entries[e].row << '\t' << entries[e].col << '\t'
        << static_cast<std::uint32_t>(values[e]) << '\n';
}

Partition load_labels(const fs::path& path) {
  LineReader in(path);
  std::vector<std::string_view> tok;
  if (!in.next(tok)) in.fail("missing header 'nodes=N communities=C'");
  const auto h = in.header(tok, {"nodes", "communities"});
  const std::size_t n = h.at("nodes");
  const std::size_t c = h.at("communities");
  constexpr auto kUnset = UINT32_MAX;
  std::vector<std::uint32_t> labels(n, kUnset);
  std::size_t count = 0;
  while (in.next(tok)) {
    if (tok.size() != 2) in.fail("expected 'node<TAB>label'");
    const auto node = in.to_uint(tok[0]);
    const auto label = in.to_uint(tok[1]);
    if (node >= n) in.fail("node index out of range for header nodes=" + std::to_string(n));
    if (label >= c) in.fail("label out of range for header communities=" + std::to_string(c));
    if (labels[node] != kUnset) in.fail("node labelled twice");
    labels[node] = static_cast<std::uint32_t>(label);
    ++count;
  }
  if (count != n)
    in.fail("header declares " + std::to_string(n) + " nodes but " + std::to_string(count) +
            " were labelled");
  return Partition(std::move(labels), c);
}

void save_labels(const Partition& labels, const fs::path& path) {
  auto out = open_out(path);
  out << "nodes=" << labels.n_nodes() << " communities=" << labels.n_communities() << '\n';
  for (std::size_t i = 0; i < labels.n_nodes(); ++i) out << i << '\t' << labels[i] << '\n';
}

void save_fit(const FitResult& result, const fs::path& path) {
  const auto& p = result.params;
  auto out = open_out(path);
  out << "gnan-fit " << kFitFormatVersion << '\n'
      << "nodes " << p.n_nodes() << '\n'
      << "communities " << p.n_communities() << '\n'
      << "attrs " << p.n_attrs() << '\n'
      << "converged " << (result.converged ? 1 : 0) << '\n'
      << "iterations " << result.iterations_used << '\n'
      << "restart " << result.restart_index << '\n'
      << "trace " << result.bound_trace.size() << '\n';
  for (double v : result.bound_trace) out << format_double(v) << '\n';
  out << "membership\n";
  write_matrix_rows(out, p.membership);
  out << "behavior\n";
  write_matrix_rows(out, p.behavior);
  out << "profile\n";
  write_matrix_rows(out, p.profile);
}

FitResult load_fit(const fs::path& path) {
  LineReader in(path);
  std::vector<std::string_view> tok;
  auto expect_key = [&](const char* key) -> std::uint64_t {
    if (!in.next(tok) || tok.size() != 2 || tok[0] != key)
      in.fail(std::string("expected '") + key + " <value>'");
    return in.to_uint(tok[1]);
  };
  auto expect_section = [&](const char* name) {
    if (!in.next(tok) || tok.size() != 1 || tok[0] != name)
      in.fail(std::string("expected section '") + name + "'");
  };
  if (!in.next(tok) || tok.size() != 2 || tok[0] != "gnan-fit") in.fail("not a gnan fit file");
  if (in.to_uint(tok[1]) != kFitFormatVersion)
    in.fail("unsupported fit format version " + std::string(tok[1]));
  const std::size_t n = expect_key("nodes");
  const std::size_t c = expect_key("communities");
  const std::size_t k = expect_key("attrs");
  FitResult r;
  r.converged = expect_key("converged") != 0;
  r.iterations_used = expect_key("iterations");
  r.restart_index = expect_key("restart");
  const std::size_t trace_len = expect_key("trace");
  r.bound_trace.reserve(trace_len);
  for (std::size_t t = 0; t < trace_len; ++t) {
    if (!in.next(tok) || tok.size() != 1) in.fail("expected one trace value");
    r.bound_trace.push_back(in.to_double(tok[0]));
  }
  expect_section("membership");
  r.params.membership = read_matrix_rows(in, n, c);
  expect_section("behavior");
  r.params.behavior = read_matrix_rows(in, c, n);
  expect_section("profile");
  r.params.profile = read_matrix_rows(in, c, k);
  if (in.next(tok)) in.fail("trailing content after profile block");
  return r;
}

void save_matrix(const DenseMatrix& m, const fs::path& path) {
  auto out = open_out(path);
  out << "rows=" << m.rows() << " cols=" << m.cols() << '\n';
  write_matrix_rows(out, m);
}

DenseMatrix load_matrix(const fs::path& path) {
  LineReader in(path);
  std::vector<std::string_view> tok;
  if (!in.next(tok)) in.fail("missing header 'rows=R cols=C'");
  const auto h = in.header(tok, {"rows", "cols"});
  DenseMatrix m = read_matrix_rows(in, h.at("rows"), h.at("cols"));
  if (in.next(tok)) in.fail("trailing content after matrix");
  return m;
}

void emit_curve(const std::vector<CurvePoint>& records, const fs::path& path) {
  for (const auto& r : records)
    if (!std::isfinite(r.x) || !std::isfinite(r.mean) || !std::isfinite(r.stddev))
      throw InputError("curve record has a non-finite value");
  auto out = open_out(path);
  out << "x,mean,stddev\n";
  for (const auto& r : records)
    out << format_double(r.x) << ',' << format_double(r.mean) << ',' << format_double(r.stddev)
        << '\n';
}

std::vector<CurvePoint> load_curve(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  std::size_t number = 1;
  if (!std::getline(in, line) || line != "x,mean,stddev")
    throw FormatError(path.string(), number, "expected header 'x,mean,stddev'");
  std::vector<CurvePoint> out;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    double v[3];
    std::string_view rest(line);
    for (int f = 0; f < 3; ++f) {
      const auto comma = rest.find(',');
      if ((f < 2) != (comma != std::string_view::npos))
        throw FormatError(path.string(), number, "expected three comma-separated fields");
      const auto field = rest.substr(0, comma);
      const auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v[f]);
      if (ec != std::errc() || p != field.data() + field.size())
        throw FormatError(path.string(), number, "bad number '" + std::string(field) + "'");
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    out.push_back({v[0], v[1], v[2]});
  }
  return out;
}

void Dataset::validate() const {
  if (graph.n_nodes() != attrs.n_nodes())
    throw InputError("dataset '" + name + "': graph and attributes disagree on node count");
  if (labels && labels->n_nodes() != graph.n_nodes())
    throw InputError("dataset '" + name + "': labels and graph disagree on node count");
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("dataset directory not found: " + dir.string());
  Dataset d;
  d.name = dir.filename().string();
  if (d.name.empty()) d.name = dir.parent_path().filename().string();
  d.graph = load_edge_list(dir / kGraphFile);
  d.attrs = fs::exists(dir / kAttrsFile) ? load_attributes(dir / kAttrsFile)
                                         : AttributeMatrix(d.graph.n_nodes(), 0);
  if (fs::exists(dir / kLabelsFile)) d.labels = load_labels(dir / kLabelsFile);
  d.validate();
  return d;
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
  dataset.validate();
  fs::create_directories(dir);
  save_edge_list(dataset.graph, dir / kGraphFile);
  save_attributes(dataset.attrs, dir / kAttrsFile);
  if (dataset.labels) save_labels(*dataset.labels, dir / kLabelsFile);
}

}  // namespace gnan::io
