#pragma once

// Plain-text file formats. All writers emit canonical ordering (sorted keys),
// so save(load(f)) reproduces a canonical file byte for byte.
//
//   edge list    header "nodes=N directed=0|1", then "src<TAB>dst" per line.
//                Undirected graphs are written once per unordered pair.
//   attributes   header "nodes=N attrs=K", then "node<TAB>attr<TAB>value".
//   labels       header "nodes=N communities=C", then "node<TAB>label",
//                exactly one line per node.
//   fit          "gnan-fit 1" followed by key/value lines and dense
//                row-major blocks, 17 significant digits.
//   curve        CSV with header "x,mean,stddev".
//
// Input lines may carry '#' comments; blank lines are skipped. Parse errors
// throw FormatError with the line number.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gnan/em.hpp"
#include "gnan/graph.hpp"
#include "gnan/matrix.hpp"

namespace gnan::io {

namespace fs = std::filesystem;

SparseGraph load_edge_list(const fs::path& path);
void save_edge_list(const SparseGraph& graph, const fs::path& path);

AttributeMatrix load_attributes(const fs::path& path);
void save_attributes(const AttributeMatrix& attrs, const fs::path& path);

Partition load_labels(const fs::path& path);
void save_labels(const Partition& labels, const fs::path& path);

inline constexpr int kFitFormatVersion = 1;
FitResult load_fit(const fs::path& path);
void save_fit(const FitResult& result, const fs::path& path);

/// Dense matrix as tab-separated rows under a "rows=R cols=C" header. Used
/// for the planted block and dependency matrices written next to datasets.
DenseMatrix load_matrix(const fs::path& path);
void save_matrix(const DenseMatrix& m, const fs::path& path);

struct CurvePoint {
  double x;
  double mean;
  double stddev;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Throws InputError on a non-finite value.
void emit_curve(const std::vector<CurvePoint>& records, const fs::path& path);
std::vector<CurvePoint> load_curve(const fs::path& path);

/// A graph with attributes and optional reference labels, stored as a
/// directory holding graph.tsv, attrs.tsv (optional, K = 0 if absent) and
/// labels.tsv (optional).
struct Dataset {
  std::string name;
  SparseGraph graph;
  AttributeMatrix attrs;
  std::optional<Partition> labels;

  /// Throws InputError when the members disagree on N.
  void validate() const;
};

inline constexpr const char* kGraphFile = "graph.tsv";
inline constexpr const char* kAttrsFile = "attrs.tsv";
inline constexpr const char* kLabelsFile = "labels.tsv";

Dataset load_dataset(const fs::path& dir);
void save_dataset(const Dataset& dataset, const fs::path& dir);

/// `v` with 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

}  // namespace gnan::io
