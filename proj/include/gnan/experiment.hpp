#pragma once

// Declarative experiment specs and the generate/benchmark drivers behind the
// CLI. A spec is a key = value text file; lists are comma-separated.
//
//   regime            community | disassortative | mixture | core-periphery
//   sizes             block sizes, e.g. 80,100,120,200
//   omega             community: within-block probabilities (the sweep)
//   lambda            community/mixture: between-block probability
//   lambda1           disassortative: base probabilities (the sweep)
//   omega1..omega4    mixture: one list each, the i-th entries form network i
//   omega3, omega4    core-periphery: core density and coupling lists
//   attr_design       standard (default) | shared
//   p_strong          strong attribute probabilities, one curve each
//   p_noise           noise probability (0.1)
//   strong_per_block  strong attributes per community (10)
//   extra_noise       extra all-noise attribute columns (0)
//   communities       C for fitting (default: number of blocks)
//   repetitions       independent datasets per sweep point (1)
//   modes             subset of both,links,attrs (both)
//   max_iters, tol, jitter, restarts    fit settings (500, 1e-6, 0.1, 10)

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gnan/em.hpp"
#include "gnan/io.hpp"
#include "gnan/synthetic.hpp"

namespace gnan {

enum class Regime { Community, Disassortative, Mixture, CorePeriphery };

struct ExperimentSpec {
  std::string name;
  Regime regime = Regime::Community;
  std::vector<std::size_t> sizes;
  double lambda = 0.02;
  std::vector<double> omega;
  std::vector<double> lambda1;
  std::vector<double> omega1, omega2, omega3, omega4;
  bool shared_attr_design = false;
  std::vector<double> p_strong{0.9};
  double p_noise = 0.1;
  std::size_t strong_per_block = 10;
  std::size_t extra_noise = 0;
  std::size_t repetitions = 1;
  std::vector<Mode> modes{Mode::Both};
  FitConfig fit;

  /// Number of sweep points.
  std::size_t n_points() const;
  /// The x value plotted for sweep point `i`.
  double x_value(std::size_t i) const;
  BlockMatrix blocks(std::size_t i) const;
  /// Dependency matrix for strong-probability index `p` (ignored for the
  /// shared design).
  DependencyMatrix dependencies(std::size_t p) const;
  /// Number of attribute curves: p_strong.size(), or 1 for the shared design.
  std::size_t n_attr_settings() const;

  /// Throws InputError if any parameter is invalid for the regime.
  void validate() const;
};

ExperimentSpec parse_experiment(const std::string& text, const std::string& name);
ExperimentSpec load_experiment(const std::filesystem::path& path);

std::string_view regime_name(Regime r) noexcept;

struct GeneratedDataset {
  std::string id;
  std::size_t point = 0;
  std::size_t attr_setting = 0;
  std::size_t rep = 0;
  io::Dataset dataset;
  BlockMatrix blocks;
  DependencyMatrix deps;
};

/// Deterministic in `seed`. The graph depends only on (point, rep), so all
/// attribute settings at one point share their networks.
GeneratedDataset make_dataset(const ExperimentSpec& spec, std::size_t point,
                              std::size_t attr_setting, std::size_t rep, std::uint64_t seed);

/// Writes every dataset of the spec under out_dir/<id>/ together with
/// blocks.tsv and deps.tsv. Returns the dataset directories.
std::vector<std::filesystem::path> generate_all(const ExperimentSpec& spec, std::uint64_t seed,
                                                const std::filesystem::path& out_dir);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
};
Summary summarize(std::span<const double> values);

struct BenchmarkRun {
  std::size_t point = 0;
  std::size_t attr_setting = 0;
  std::size_t rep = 0;
  Mode mode = Mode::Both;
  double x = 0.0;
  double nmi_best = 0.0;        // NMI of the restart with the highest bound
  double nmi_restart_mean = 0.0;  // mean NMI over all restarts
  double bound = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

struct BenchmarkCurve {
  std::size_t attr_setting = 0;
  Mode mode = Mode::Both;
  std::vector<io::CurvePoint> points;
};

struct BenchmarkResult {
  std::vector<BenchmarkRun> runs;
  std::vector<BenchmarkCurve> curves;

  const BenchmarkCurve& curve(std::size_t attr_setting, Mode mode) const;
};

/// Generate, fit and score every (point, attribute setting, repetition, mode)
/// combination. Jobs may run on `threads` workers; results do not depend on
/// the worker count.
BenchmarkResult run_benchmark(const ExperimentSpec& spec, std::uint64_t seed,
                              std::size_t threads = 1);

/// Writes curve_<setting>_<mode>.csv per curve plus runs.csv.
void write_benchmark(const ExperimentSpec& spec, const BenchmarkResult& result,
                     const std::filesystem::path& out_dir);

/// File-name fragment for an attribute setting, e.g. "p0.9" or "shared".
std::string attr_setting_label(const ExperimentSpec& spec, std::size_t attr_setting);

}  // namespace gnan
