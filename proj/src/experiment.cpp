#include "gnan/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "gnan/error.hpp"
#include "gnan/evaluation.hpp"

namespace gnan {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_real(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw InputError("spec key '" + key + "': bad number '" + s + "'");
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& s) {
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw InputError("spec key '" + key + "': bad count '" + s + "'");
  return v;
}

std::vector<double> parse_reals(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_real(key, item));
  return out;
}

std::string short_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::uint64_t graph_seed(std::uint64_t seed, std::size_t point, std::size_t rep) {
  return derive_seed(derive_seed(derive_seed(seed, 0x67), point), rep);
}

std::uint64_t attr_seed(std::uint64_t seed, std::size_t point, std::size_t setting,
                        std::size_t rep) {
  return derive_seed(derive_seed(derive_seed(derive_seed(seed, 0x61), point), setting), rep);
}

std::uint64_t fit_seed(std::uint64_t seed, std::size_t point, std::size_t setting,
                       std::size_t rep) {
  return derive_seed(derive_seed(derive_seed(derive_seed(seed, 0x66), point), setting), rep);
}

// Runs job(i) for i in [0, n) on up to `threads` workers, rethrowing the
// lowest-index failure.
template <class Job>
void parallel_for(std::size_t n, std::size_t threads, Job job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(threads, n));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::string_view regime_name(Regime r) noexcept {
  switch (r) {
    case Regime::Community:
      return "community";
    case Regime::Disassortative:
      return "disassortative";
    case Regime::Mixture:
      return "mixture";
    case Regime::CorePeriphery:
      return "core-periphery";
  }
  return "community";
}

std::size_t ExperimentSpec::n_points() const {
  switch (regime) {
    case Regime::Community:
      return omega.size();
    case Regime::Disassortative:
      return lambda1.size();
    case Regime::Mixture:
      return omega1.size();
    case Regime::CorePeriphery:
      return omega3.size();
  }
  return 0;
}

double ExperimentSpec::x_value(std::size_t i) const {
  switch (regime) {
    case Regime::Community:
      return omega.at(i);
    case Regime::Disassortative:
      return lambda1.at(i);
    case Regime::Mixture:
    case Regime::CorePeriphery:
      return static_cast<double>(i + 1);
  }
  return 0.0;
}

BlockMatrix ExperimentSpec::blocks(std::size_t i) const {
  switch (regime) {
    case Regime::Community:
      return planted_community(sizes.size(), omega.at(i), lambda);
    case Regime::Disassortative:
      return planted_disassortative(lambda1.at(i));
    case Regime::Mixture:
      return planted_mixture(omega1.at(i), omega2.at(i), omega3.at(i), omega4.at(i), lambda);
    case Regime::CorePeriphery:
      return planted_core_periphery(omega3.at(i), omega4.at(i));
  }
  throw InputError("unknown regime");
}

std::size_t ExperimentSpec::n_attr_settings() const {
  return shared_attr_design ? 1 : p_strong.size();
}

DependencyMatrix ExperimentSpec::dependencies(std::size_t p) const {
  if (shared_attr_design) {
    DependencyDesign d = shared_attribute_design();
    d.p_noise = p_noise;
    d.strong_per_block = strong_per_block;
    d.extra_noise_attrs = extra_noise;
    if (sizes.size() != d.n_blocks) throw InputError("shared attribute design needs 4 blocks");
    return dependency_design(d);
  }
  DependencyDesign d;
  d.n_blocks = sizes.size();
  d.strong_per_block = strong_per_block;
  d.p_strong = {p_strong.at(p)};
  d.p_noise = p_noise;
  d.extra_noise_attrs = extra_noise;
  return dependency_design(d);
}

void ExperimentSpec::validate() const {
  if (sizes.empty()) throw InputError("spec needs block sizes");
  for (std::size_t s : sizes)
    if (s == 0) throw InputError("block sizes must be positive");
  if (n_points() == 0) throw InputError("spec sweep is empty");
  if (regime == Regime::Mixture &&
      (omega2.size() != omega1.size() || omega3.size() != omega1.size() ||
       omega4.size() != omega1.size()))
    throw InputError("omega1..omega4 must have equal lengths");
  if (regime == Regime::CorePeriphery && omega4.size() != omega3.size())
    throw InputError("omega3 and omega4 must have equal lengths");
  if (repetitions == 0) throw InputError("repetitions must be positive");
  if (modes.empty()) throw InputError("spec needs at least one mode");
  if (n_attr_settings() == 0) throw InputError("spec needs at least one p_strong value");
  for (std::size_t i = 0; i < n_points(); ++i) {
    const BlockMatrix b = blocks(i);
    if (b.n_blocks() != sizes.size())
      throw InputError("regime " + std::string(regime_name(regime)) + " needs " +
                       std::to_string(b.n_blocks()) + " block sizes");
  }
  for (std::size_t p = 0; p < n_attr_settings(); ++p) dependencies(p);
  fit.validate();
}

ExperimentSpec parse_experiment(const std::string& text, const std::string& name) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError(name, number, "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (!kv.emplace(key, trim(std::string_view(line).substr(eq + 1))).second)
      throw FormatError(name, number, "duplicate key '" + key + "'");
  }

  ExperimentSpec s;
  s.name = name;
  std::set<std::string> used;
  auto take = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };

  const std::string* regime = take("regime");
  if (!regime) throw InputError("spec '" + name + "' needs a regime");
  if (*regime == "community")
    s.regime = Regime::Community;
  else if (*regime == "disassortative")
    s.regime = Regime::Disassortative;
  else if (*regime == "mixture")
    s.regime = Regime::Mixture;
  else if (*regime == "core-periphery")
    s.regime = Regime::CorePeriphery;
  else
    throw InputError("unknown regime '" + *regime + "'");

  if (auto v = take("sizes"))
    for (const auto& item : split_list(*v)) s.sizes.push_back(parse_count("sizes", item));
  if (auto v = take("lambda")) s.lambda = parse_real("lambda", *v);
  if (auto v = take("omega")) s.omega = parse_reals("omega", *v);
  if (auto v = take("lambda1")) s.lambda1 = parse_reals("lambda1", *v);
  if (auto v = take("omega1")) s.omega1 = parse_reals("omega1", *v);
  if (auto v = take("omega2")) s.omega2 = parse_reals("omega2", *v);
  if (auto v = take("omega3")) s.omega3 = parse_reals("omega3", *v);
  if (auto v = take("omega4")) s.omega4 = parse_reals("omega4", *v);
  if (auto v = take("attr_design")) {
    if (*v == "shared")
      s.shared_attr_design = true;
    else if (*v != "standard")
      throw InputError("attr_design must be 'standard' or 'shared'");
  }
  if (auto v = take("p_strong")) s.p_strong = parse_reals("p_strong", *v);
  if (auto v = take("p_noise")) s.p_noise = parse_real("p_noise", *v);
  if (auto v = take("strong_per_block")) s.strong_per_block = parse_count("strong_per_block", *v);
  if (auto v = take("extra_noise")) s.extra_noise = parse_count("extra_noise", *v);
  if (auto v = take("repetitions")) s.repetitions = parse_count("repetitions", *v);
  if (auto v = take("modes")) {
    s.modes.clear();
    for (const auto& item : split_list(*v)) s.modes.push_back(parse_mode(item));
  }
  s.fit.n_communities = s.sizes.size();
  if (auto v = take("communities")) s.fit.n_communities = parse_count("communities", *v);
  if (auto v = take("max_iters")) s.fit.max_iters = parse_count("max_iters", *v);
  if (auto v = take("tol")) s.fit.tolerance = parse_real("tol", *v);
  if (auto v = take("jitter")) s.fit.init_jitter = parse_real("jitter", *v);
  if (auto v = take("restarts")) s.fit.n_restarts = parse_count("restarts", *v);

  for (const auto& [key, value] : kv)
    if (!used.contains(key)) throw InputError("spec '" + name + "': unknown key '" + key + "'");
  s.validate();
  return s;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open spec " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str(), path.stem().string());
}

std::string attr_setting_label(const ExperimentSpec& spec, std::size_t attr_setting) {
  if (spec.shared_attr_design) return "shared";
  return "p" + short_double(spec.p_strong.at(attr_setting));
}

GeneratedDataset make_dataset(const ExperimentSpec& spec, std::size_t point,
                              std::size_t attr_setting, std::size_t rep, std::uint64_t seed) {
  GeneratedDataset g;
  g.point = point;
  g.attr_setting = attr_setting;
  g.rep = rep;
  g.blocks = spec.blocks(point);
  g.deps = spec.dependencies(attr_setting);
  g.id = std::string(regime_name(spec.regime)) + "_x" + short_double(spec.x_value(point)) + "_" +
         attr_setting_label(spec, attr_setting) + "_r" + std::to_string(rep);
  Rng graph_rng(graph_seed(seed, point, rep));
  auto [graph, truth] = sbm_sample(spec.sizes, g.blocks, graph_rng);
  Rng attr_rng(attr_seed(seed, point, attr_setting, rep));
  g.dataset.name = g.id;
  g.dataset.graph = std::move(graph);
  g.dataset.attrs = attr_sample(spec.sizes, g.deps, attr_rng);
  g.dataset.labels = std::move(truth);
  return g;
}

std::vector<std::filesystem::path> generate_all(const ExperimentSpec& spec, std::uint64_t seed,
                                                const std::filesystem::path& out_dir) {
  spec.validate();
  std::vector<std::filesystem::path> dirs;
  for (std::size_t point = 0; point < spec.n_points(); ++point)
    for (std::size_t a = 0; a < spec.n_attr_settings(); ++a)
      for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
        const GeneratedDataset g = make_dataset(spec, point, a, rep, seed);
        const auto dir = out_dir / g.id;
        io::save_dataset(g.dataset, dir);
        io::save_matrix(g.blocks.probs, dir / "blocks.tsv");
        io::save_matrix(g.deps.probs, dir / "deps.tsv");
        dirs.push_back(dir);
      }
  return dirs;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

const BenchmarkCurve& BenchmarkResult::curve(std::size_t attr_setting, Mode mode) const {
  for (const auto& c : curves)
    if (c.attr_setting == attr_setting && c.mode == mode) return c;
  throw InputError("no curve for that attribute setting and mode");
}

BenchmarkResult run_benchmark(const ExperimentSpec& spec, std::uint64_t seed,
                              std::size_t threads) {
  spec.validate();
  const std::size_t n_points = spec.n_points();
  const std::size_t n_attr = spec.n_attr_settings();
  const std::size_t n_modes = spec.modes.size();
  const std::size_t n_reps = spec.repetitions;
  const std::size_t n_jobs = n_points * n_attr * n_reps;

  // Slot layout: ((point * n_attr + attr) * n_reps + rep) * n_modes + mode.
  std::vector<BenchmarkRun> runs(n_jobs * n_modes);
  parallel_for(n_jobs, threads, [&](std::size_t job) {
    const std::size_t rep = job % n_reps;
    const std::size_t attr = (job / n_reps) % n_attr;
    const std::size_t point = job / (n_reps * n_attr);
    const GeneratedDataset g = make_dataset(spec, point, attr, rep, seed);
    const Partition& truth = *g.dataset.labels;
    for (std::size_t m = 0; m < n_modes; ++m) {
      FitConfig cfg = spec.fit;
      cfg.mode = spec.modes[m];
      cfg.seed = fit_seed(seed, point, attr, rep);
      cfg.threads = 1;
      const std::vector<FitResult> restarts = fit_restarts(g.dataset.graph, g.dataset.attrs, cfg);
      const std::size_t best = best_restart(restarts);
      double nmi_sum = 0.0;
      for (const auto& r : restarts) nmi_sum += nmi(truth, hard_assign(r.params.membership));
      BenchmarkRun& run = runs[job * n_modes + m];
      run.point = point;
      run.attr_setting = attr;
      run.rep = rep;
      run.mode = cfg.mode;
      run.x = spec.x_value(point);
      run.nmi_best = nmi(truth, hard_assign(restarts[best].params.membership));
      run.nmi_restart_mean = nmi_sum / static_cast<double>(restarts.size());
      run.bound = restarts[best].final_bound();
      run.converged = restarts[best].converged;
      run.iterations = restarts[best].iterations_used;
    }
  });

  BenchmarkResult result;
  result.runs = runs;
  for (std::size_t a = 0; a < n_attr; ++a)
    for (std::size_t m = 0; m < n_modes; ++m) {
      BenchmarkCurve curve;
      curve.attr_setting = a;
      curve.mode = spec.modes[m];
      for (std::size_t point = 0; point < n_points; ++point) {
        std::vector<double> values;
        for (std::size_t rep = 0; rep < n_reps; ++rep)
          values.push_back(runs[(((point * n_attr + a) * n_reps) + rep) * n_modes + m].nmi_best);
        const Summary s = summarize(values);
        curve.points.push_back({spec.x_value(point), s.mean, s.stddev});
      }
      result.curves.push_back(std::move(curve));
    }
  return result;
}

void write_benchmark(const ExperimentSpec& spec, const BenchmarkResult& result,
                     const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& c : result.curves)
    io::emit_curve(c.points, out_dir / ("curve_" + attr_setting_label(spec, c.attr_setting) + "_" +
                                        std::string(mode_name(c.mode)) + ".csv"));
  std::ofstream out(out_dir / "runs.csv", std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + (out_dir / "runs.csv").string());
  out << "x,attr_setting,mode,rep,nmi_best,nmi_restart_mean,bound,converged,iterations\n";
  for (const auto& r : result.runs)
    out << io::format_double(r.x) << ',' << attr_setting_label(spec, r.attr_setting) << ','
        << mode_name(r.mode) << ',' << r.rep << ',' << io::format_double(r.nmi_best) << ','
        << io::format_double(r.nmi_restart_mean) << ',' << io::format_double(r.bound) << ','
        << (r.converged ? 1 : 0) << ',' << r.iterations << '\n';
}

}  // namespace gnan
