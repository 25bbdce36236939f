#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "gnan/error.hpp"
#include "gnan/evaluation.hpp"
#include "gnan/experiment.hpp"
#include "gnan/io.hpp"

namespace gnan::cli {
namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out_dir = ".";
};

struct FitOptions {
  std::string dataset;
  std::size_t communities = 0;
  std::size_t max_iters = 500;
  double tol = 1e-6;
  double jitter = 0.1;
  std::size_t restarts = 10;
  std::string mode = "both";
};

struct EvalOptions {
  std::string fit_path;
  std::string labels_path;
  std::string graph_path;
};

struct InspectOptions {
  std::string fit_path;
  std::string names_path;
  double threshold = 0.1;
  std::size_t top = 0;
};

std::string fmt(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

int cmd_generate(const std::string& spec_path, const GlobalOptions& g, std::ostream& out) {
  const ExperimentSpec spec = load_experiment(spec_path);
  const auto dirs = generate_all(spec, g.seed, fs::path(g.out_dir) / spec.name);
  for (const auto& d : dirs) out << d.string() << '\n';
  out << "generated " << dirs.size() << " datasets\n";
  return kExitOk;
}

int cmd_fit(const FitOptions& o, const GlobalOptions& g, std::ostream& out) {
  const io::Dataset data = io::load_dataset(o.dataset);
  FitConfig cfg;
  cfg.n_communities = o.communities;
  if (cfg.n_communities == 0) {
    if (!data.labels) throw InputError("--communities is required when the dataset has no labels");
    cfg.n_communities = data.labels->n_communities();
  }
  cfg.max_iters = o.max_iters;
  cfg.tolerance = o.tol;
  cfg.init_jitter = o.jitter;
  cfg.n_restarts = o.restarts;
  cfg.mode = parse_mode(o.mode);
  cfg.seed = g.seed;
  cfg.threads = g.threads;
  const FitResult result = fit(data.graph, data.attrs, cfg);
  const fs::path path = fs::path(g.out_dir) / (data.name + ".fit");
  io::save_fit(result, path);
  out << "bound=" << fmt(result.final_bound()) << " iterations=" << result.iterations_used
      << " converged=" << (result.converged ? 1 : 0) << " restart=" << result.restart_index
      << " fit=" << path.string() << '\n';
  return result.converged ? kExitOk : kExitNotConverged;
}

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  const Partition truth = io::load_labels(o.labels_path);
  std::optional<SparseGraph> graph;
  if (!o.graph_path.empty()) graph = io::load_edge_list(o.graph_path);

  std::vector<fs::path> fits;
  if (fs::is_directory(o.fit_path)) {
    for (const auto& entry : fs::directory_iterator(o.fit_path))
      if (entry.path().extension() == ".fit") fits.push_back(entry.path());
    std::sort(fits.begin(), fits.end());
    if (fits.empty()) throw InputError("no .fit files in " + o.fit_path);
  } else {
    fits.push_back(o.fit_path);
  }

  std::vector<double> scores;
  for (const auto& path : fits) {
    const FitResult r = io::load_fit(path);
    const Partition predicted = hard_assign(r.params.membership);
    const double score = nmi(truth, predicted);
    scores.push_back(score);
    if (fits.size() > 1) out << path.filename().string() << ' ';
    out << "nmi=" << fmt(score);
    if (graph) out << " modularity=" << fmt(modularity(*graph, predicted));
    out << '\n';
  }
  if (fits.size() > 1) {
    const Summary s = summarize(scores);
    out << "nmi_mean=" << fmt(s.mean) << " nmi_stddev=" << fmt(s.stddev) << " n=" << scores.size()
        << '\n';
  }
  return kExitOk;
}

int cmd_benchmark(const std::string& spec_path, const GlobalOptions& g, std::ostream& out) {
  const ExperimentSpec spec = load_experiment(spec_path);
  const BenchmarkResult result = run_benchmark(spec, g.seed, g.threads);
  const fs::path dir = fs::path(g.out_dir) / spec.name;
  write_benchmark(spec, result, dir);
  for (const auto& c : result.curves) {
    out << attr_setting_label(spec, c.attr_setting) << ' ' << mode_name(c.mode) << ':';
    for (const auto& p : c.points)
      out << ' ' << fmt(p.x) << '=' << std::fixed << std::setprecision(4) << p.mean << "+-"
          << p.stddev << std::defaultfloat;
    out << '\n';
  }
  out << "wrote " << dir.string() << '\n';
  return kExitOk;
}

std::vector<std::string> load_names(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    names.push_back(line);
  }
  return names;
}

int cmd_inspect(const InspectOptions& o, std::ostream& out) {
  const FitResult r = io::load_fit(o.fit_path);
  std::vector<std::string> names;
  if (!o.names_path.empty()) {
    names = load_names(o.names_path);
    if (names.size() < r.params.n_attrs())
      throw InputError("name map has fewer entries than attributes");
  }
  auto label = [&](std::uint32_t k) { return names.empty() ? std::to_string(k) : names[k]; };
  const AttributeReport report = top_attributes(r.params.profile, o.threshold);
  for (std::size_t c = 0; c < report.ranking.size(); ++c) {
    const auto bold = report.above_threshold(c);
    out << "community " << c << " (" << bold.size() << " above " << fmt(o.threshold) << "):";
    for (const auto& a : bold) out << ' ' << label(a.attr) << '=' << fmt(a.weight);
    out << '\n';
    const std::size_t limit =
        o.top == 0 ? report.ranking[c].size() : std::min(o.top, report.ranking[c].size());
    for (std::size_t i = 0; i < limit; ++i) {
      const auto& a = report.ranking[c][i];
      out << "  " << label(a.attr) << '\t' << fmt(a.weight) << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Community and generalized-structure detection in attributed networks"};
  app.require_subcommand(1);
  GlobalOptions global;
  app.add_option("--seed", global.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", global.threads, "Worker threads")->capture_default_str();
  app.add_option("--out", global.out_dir, "Output directory")->capture_default_str();

  std::string spec_path;
  auto* generate = app.add_subcommand("generate", "Write the synthetic datasets of a spec");
  generate->add_option("spec", spec_path, "Experiment spec file")->required();

  FitOptions fit_opts;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the model to a dataset directory");
  fit_cmd->add_option("dataset", fit_opts.dataset, "Dataset directory")->required();
  fit_cmd->add_option("--communities", fit_opts.communities, "Number of communities");
  fit_cmd->add_option("--max-iters", fit_opts.max_iters)->capture_default_str();
  fit_cmd->add_option("--tol", fit_opts.tol)->capture_default_str();
  fit_cmd->add_option("--jitter", fit_opts.jitter)->capture_default_str();
  fit_cmd->add_option("--restarts", fit_opts.restarts)->capture_default_str();
  fit_cmd->add_option("--mode", fit_opts.mode)
      ->check(CLI::IsMember({"both", "links", "attrs"}))
      ->capture_default_str();

  EvalOptions eval_opts;
  auto* eval = app.add_subcommand("eval", "Score a fit (or a directory of fits) against labels");
  eval->add_option("fit", eval_opts.fit_path, "Fit file or directory")->required();
  eval->add_option("labels", eval_opts.labels_path, "Reference labels file")->required();
  eval->add_option("--graph", eval_opts.graph_path, "Edge list for modularity");

  auto* bench = app.add_subcommand("benchmark", "Generate, fit and score a spec's sweep");
  bench->add_option("spec", spec_path, "Experiment spec file")->required();

  InspectOptions inspect_opts;
  auto* inspect = app.add_subcommand("inspect", "Rank attributes per community");
  inspect->add_option("fit", inspect_opts.fit_path, "Fit file")->required();
  inspect->add_option("--names", inspect_opts.names_path, "Attribute names, one per line");
  inspect->add_option("--threshold", inspect_opts.threshold)->capture_default_str();
  inspect->add_option("--top", inspect_opts.top, "Rows to list per community (0 = all)");

  for (auto* sub : {generate, fit_cmd, eval, bench, inspect}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (*generate) return cmd_generate(spec_path, global, out);
    if (*fit_cmd) return cmd_fit(fit_opts, global, out);
    if (*eval) return cmd_eval(eval_opts, out);
    if (*bench) return cmd_benchmark(spec_path, global, out);
    if (*inspect) return cmd_inspect(inspect_opts, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace gnan::cli
