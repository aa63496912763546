#include "goursat/cli.h"

#include "goursat/bridge.h"
#include "goursat/errors.h"
#include "goursat/harmonic.h"
#include "goursat/io.h"
#include "goursat/kernel.h"
#include "goursat/stats.h"
#include "goursat/suite.h"
#include "goursat/transform.h"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

namespace goursat {
namespace {

namespace fs = std::filesystem;


const std::map<std::string, std::vector<std::string>>& command_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"verify-kernel", {"kernel", "times", "horizon", "tol"}},
      {"transform", {"kernel", "paths", "seed", "store", "T", "delta", "eps0", "ratio"}},
      {"bridge", {"basis", "t1", "y", "paths", "seed", "store", "delta", "eps0", "ratio"}},
      {"sde-solve",
       {"kernel", "y", "paths", "seed", "store", "T", "delta", "eps0", "ratio", "tmax", "tail-ratio", "tolerance"}},
      {"harmonic", {"basis", "law", "t", "paths", "seed", "delta", "eps0", "ratio"}},
      {"report", {"suite", "seed"}}};
  return keys;
}

class Settings {
 public:
  explicit Settings(const std::map<std::string, std::string>& v) : v_(v) {}

  bool has(const std::string& key) const { return v_.count(key) > 0; }
  std::string text(const std::string& key) const {
    auto it = v_.find(key);
    if (it == v_.end() || it->second.empty()) throw ConfigError("missing required setting '" + key + "'");
    return it->second;
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }
  double positive(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const double v = parse_double(text(key));
    if (!(v > 0.0)) throw ConfigError("setting '" + key + "' must be positive");
    return v;
  }
  std::size_t count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const long long v = parse_integer(text(key));
    if (v < 0) throw ConfigError("setting '" + key + "' must not be negative");
    return static_cast<std::size_t>(v);
  }
  std::size_t paths() const {
    const auto n = count("paths", 0);
    if (n == 0) throw ConfigError("setting 'paths' must be a positive integer");
    return n;
  }
  std::uint64_t seed() const {
    const long long v = parse_integer(text("seed"));
    if (v < 0) throw ConfigError("seed must not be negative");
    return static_cast<std::uint64_t>(v);
  }

 private:
  const std::map<std::string, std::string>& v_;
};

GridParams grid_params(const Settings& s, double horizon) {
  GridParams p = GridParams::defaults(horizon);
  p.delta = s.positive("delta", p.delta);
  p.eps0 = s.positive("eps0", p.eps0);
  p.ratio = s.positive("ratio", p.ratio);
  p.validate();
  return p;
}

FunctionBasis basis_arg(const std::string& spec) {
  if (fs::is_regular_file(spec)) return load_basis_file(spec);
  std::string text = spec;
  for (char& c : text)
    if (c == ';') c = '\n';
  return parse_basis(text, fs::current_path().string());
}

Vector vector_arg(const std::string& text) {
  const auto xs = parse_double_list(text);
  return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

// Output directory with hashed artifacts, a summary and a manifest.
class Artifacts {
 public:
  Artifacts(const ExperimentConfig& config) : dir_(config.out_dir) {
    fs::create_directories(dir_);
    manifest_.set("command", config.command);
    for (const auto& [k, v] : config.values) manifest_.set("config." + k, v);
  }
  void write(const std::string& name, const std::string& content) {
    write_text_file((fs::path(dir_) / name).string(), content);
    hashes_.emplace_back(name, git_blob_hash(content));
  }
  Manifest& manifest() { return manifest_; }
  void check(const std::string& id, bool pass, const std::string& text) {
    lines_.push_back(id + " " + (pass ? "PASS" : "FAIL") + " " + text);
    all_pass_ = all_pass_ && pass;
  }
  int finish() {
    std::string summary;
    for (const auto& l : lines_) summary += l + "\n";
    write("summary.txt", summary);
    for (const auto& [name, hash] : hashes_) manifest_.set("file." + name, hash);
    write_text_file((fs::path(dir_) / "manifest.txt").string(), manifest_.str());
    std::cout << summary;
    return all_pass_ ? kExitPass : kExitCheckFailed;
  }

 private:
  std::string dir_;
  Manifest manifest_;
  std::vector<std::pair<std::string, std::string>> hashes_;
  std::vector<std::string> lines_;
  bool all_pass_ = true;
};

void record_grid(Manifest& m, const GridParams& p, const TimeGrid& g) {
  m.set("grid.T", p.horizon);
  m.set("grid.delta", p.delta);
  m.set("grid.eps0", p.eps0);
  m.set("grid.ratio", p.ratio);
  if (p.tail_end > 0.0) {
    m.set("grid.tail_end", p.tail_end);
    m.set("grid.tail_ratio", p.tail_ratio);
  }
  m.set("grid.nodes", std::to_string(g.size()));
}

std::string band_text(const BandSummary& s) {
  return "violations " + std::to_string(s.violations) + "/" + std::to_string(s.bands.size());
}

std::string covariance_csv(const BandSummary& s) {
  std::string out = "label,estimate,se,target,within\n";
  for (const auto& b : s.bands)
    out += b.label + "," + format_double(b.estimate) + "," + format_double(b.se) + "," + format_double(b.target) +
           "," + (b.within ? "1" : "0") + "\n";
  return out;
}

std::vector<double> quarter_times(double horizon) {
  return {0.25 * horizon, 0.5 * horizon, 0.75 * horizon, horizon};
}

// --- verify-kernel -------------------------------------------------------------

int verify_kernel(const ExperimentConfig& c) {
  const Settings s(c.values);
  const auto kernel = parse_kernel(s.text("kernel"), fs::current_path().string());
  auto times = parse_double_list(s.text("times", "0.25,0.5,1,2"));
  std::sort(times.begin(), times.end());
  for (double t : times)
    if (!(t > 0.0)) throw ConfigError("verify-kernel times must be positive");
  const double horizon = s.positive("horizon", 50.0);
  if (!(horizon > times.back())) throw ConfigError("horizon must exceed every time");
  const double tol = s.positive("tol", 1e-6);

  Artifacts a(c);
  a.manifest().set("kernel", kernel.describe());
  CsvTable residuals({"t", "s", "self_residual", "self_relative", "tail_residual", "tail_relative"});
  double self_worst = 0.0, tail_worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const auto self = check_self_reproduction(kernel, times[i], times[j]);
      const auto tail = check_tail_reproduction(kernel, times[i], times[j], horizon);
      residuals.add_row({times[i], times[j], self.value, self.relative, tail.value, tail.relative});
      self_worst = std::max(self_worst, self.relative);
      tail_worst = std::max(tail_worst, tail.relative);
    }
  a.write("residuals.csv", residuals.str());

  CsvTable alpha_csv({"t", "max_abs_residual"});
  double alpha_worst = 0.0;
  for (double t : times) {
    const auto rep = verify_alpha_identity(kernel.basis(), t, horizon);
    alpha_csv.add_row({t, rep.max_abs});
    alpha_worst = std::max(alpha_worst, rep.max_abs);
  }
  a.write("alpha_identity.csv", alpha_csv.str());

  const auto integ = check_integrability(kernel, times.back());
  CsvTable integ_csv({"t", "finite", "value", "panels"});
  integ_csv.add_row({times.back(), integ.finite ? 1.0 : 0.0, integ.value, static_cast<double>(integ.panels)});
  a.write("integrability.csv", integ_csv.str());

  a.check("AC1", alpha_worst <= tol, "alpha identity max residual " + format_double(alpha_worst));
  a.check("AC1", tail_worst <= tol, "tail reproduction max relative residual " + format_double(tail_worst));
  a.check("AC2", self_worst <= tol, "self-reproduction max relative residual " + format_double(self_worst));
  if (kernel.form() == KernelForm::muntz) {
    std::vector<double> lambdas;
    for (const auto& f : kernel.basis().functions()) lambdas.push_back(f.kind() == BasisKind::power ? f.parameter() : 0.0);
    const auto audit = audit_muntz_formula(lambdas);
    const double gap = (kernel.coefficients() - audit.oracle).cwiseAbs().maxCoeff();
    a.check("AC3", gap <= 1e-9 * std::max(1.0, audit.oracle.cwiseAbs().maxCoeff()),
            std::string("coefficients match the Gramian oracle; product formula with prod(lambda_i - lambda_j) ") +
                (audit.printed_matches ? "agrees" : "differs by the sign (-1)^(n-1)"));
  }
  return a.finish();
}

// --- transform -----------------------------------------------------------------

int transform(const ExperimentConfig& c) {
  const Settings s(c.values);
  const auto kernel = parse_kernel(s.text("kernel"), fs::current_path().string());
  const auto n = s.paths();
  const RngSpec rng{s.seed()};
  const auto store = s.count("store", 3);
  const double horizon = s.positive("T", 1.0);
  const auto params = grid_params(s, horizon);
  const auto grid = TimeGrid::build(params);
  const VolterraTransform tr(kernel, grid);
  const auto cov_times = quarter_times(horizon);
  const auto ind_times = independence_times(horizon);
  std::vector<std::size_t> ci, ii;
  for (double t : cov_times) ci.push_back(grid->index_of(t));
  for (double t : ind_times) ii.push_back(grid->index_of(t));
  const auto kt = static_cast<Eigen::Index>(grid->horizon_index());

  struct Out {
    std::vector<double> cov, ind;
    Vector ito;
    double convergence = 0.0, eps0 = 0.0;
  };
  Artifacts a(c);
  const auto outs = parallel_map<Out>(n, [&](std::size_t p) {
    const auto b = sample_brownian(grid, rng, p);
    const auto rep = tr.apply(b);
    Out o;
    for (auto k : ci) o.cov.push_back(rep.output.values[k]);
    for (auto k : ii) o.ind.push_back(rep.output.values[k]);
    o.ito = ito_integral(tr.weights(), b).col(kt);
    o.convergence = rep.convergence_estimate;
    o.eps0 = rep.eps0_contribution;
    return o;
  });
  for (std::size_t p = 0; p < std::min(store, n); ++p) {
    const auto b = sample_brownian(grid, rng, p);
    const auto out = tr.apply(b).output;
    a.write("path_" + std::to_string(p) + ".csv", paths_csv({"input", "output"}, {&b, &out}));
  }
  double conv = 0.0, eps0 = 0.0;
  std::vector<std::vector<double>> cov, ind;
  std::vector<Vector> ito;
  for (const auto& o : outs) {
    conv = std::max(conv, o.convergence);
    eps0 = std::max(eps0, std::abs(o.eps0));
    cov.push_back(o.cov);
    ind.push_back(o.ind);
    ito.push_back(o.ito);
  }
  a.manifest().set("kernel", kernel.describe());
  a.manifest().set("seed", std::to_string(rng.seed));
  record_grid(a.manifest(), params, *grid);
  a.manifest().set("diagnostic.max_convergence_estimate", conv);
  a.manifest().set("diagnostic.max_abs_eps0_contribution", eps0);

  const auto bands = brownian_covariance_bands(cov, cov_times);
  a.write("covariance.csv", covariance_csv(bands));
  const auto indep = independence_from_samples(ito, ind, ind_times);
  CsvTable ic({"component", "time", "correlation", "se"});
  for (Eigen::Index i = 0; i < indep.correlation.rows(); ++i)
    for (Eigen::Index j = 0; j < indep.correlation.cols(); ++j)
      ic.add_row({static_cast<double>(i), ind_times[static_cast<std::size_t>(j)], indep.correlation(i, j), indep.se(i, j)});
  a.write("independence.csv", ic.str());
  a.check("AC4", bands.violations == 0, "cov(Sigma(B)_s, Sigma(B)_t) = s^t within 4 SE, " + band_text(bands));
  a.check("AC5", indep.pass,
          "corr(I_T, Sigma(B)) within 4 SE, violations " + std::to_string(indep.violations) + " (allowed " +
              std::to_string(indep.allowed) + ")");
  return a.finish();
}

// --- bridge --------------------------------------------------------------------

int bridge(const ExperimentConfig& c) {
  const Settings s(c.values);
  const auto basis = basis_arg(s.text("basis"));
  const double t1 = s.positive("t1", 1.0);
  const Vector y = vector_arg(s.text("y"));
  const auto n = s.paths();
  const RngSpec rng{s.seed()};
  const auto store = s.count("store", 3);
  const auto params = grid_params(s, t1);
  const auto grid = TimeGrid::build(params);
  const GeneralizedBridge br(BridgeSpec{basis, t1, y}, grid);
  const VolterraTransform tr(GoursatKernel::generic(basis), grid);
  const auto last = static_cast<Eigen::Index>(grid->size() - 1);

  Artifacts a(c);
  struct Out {
    double endpoint, sigma_gap;
    std::vector<double> quarter;
  };
  std::vector<std::size_t> qi;
  const auto qt = quarter_times(t1);
  for (std::size_t j = 0; j < 3; ++j) qi.push_back(grid->index_of(qt[j]));
  const auto outs = parallel_map<Out>(n, [&](std::size_t p) {
    const auto b = sample_brownian(grid, rng, p);
    const auto by = br.apply(b);
    const auto sb = tr.apply(b).output;
    const auto sby = tr.apply(by).output;
    Out o;
    o.endpoint = (ito_integral(tr.weights(), by).col(last) - y).cwiseAbs().maxCoeff();
    o.sigma_gap = 0.0;
    for (std::size_t k = 0; k < sb.values.size(); ++k)
      o.sigma_gap = std::max(o.sigma_gap, std::abs(sb.values[k] - sby.values[k]));
    for (auto k : qi) o.quarter.push_back(by.values[k]);
    return o;
  });
  for (std::size_t p = 0; p < std::min(store, n); ++p) {
    const auto b = sample_brownian(grid, rng, p);
    const auto by = br.apply(b);
    a.write("path_" + std::to_string(p) + ".csv", paths_csv({"brownian", "bridge"}, {&b, &by}));
  }
  CsvTable per({"path", "endpoint_error", "sigma_gap"});
  double endpoint = 0.0, gap = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    per.add_row({static_cast<double>(p), outs[p].endpoint, outs[p].sigma_gap});
    endpoint = std::max(endpoint, outs[p].endpoint);
    gap = std::max(gap, outs[p].sigma_gap);
  }
  a.write("endpoints.csv", per.str());
  if (n >= 100) {
    const Matrix m = gramian(basis, t1);
    CsvTable var({"u", "variance", "se", "target"});
    for (std::size_t j = 0; j < 3; ++j) {
      std::vector<double> xs;
      for (const auto& o : outs) xs.push_back(o.quarter[j]);
      const Vector ps = psi(basis, qt[j], t1);
      const auto e = covariance_estimate(xs, xs);
      var.add_row({qt[j], e.mean, e.se, qt[j] - ps.dot(m * ps)});
    }
    a.write("variance.csv", var.str());
  }
  a.manifest().set("basis", basis.describe());
  a.manifest().set("seed", std::to_string(rng.seed));
  record_grid(a.manifest(), params, *grid);
  a.check("AC6", endpoint <= 5e-3, "max |I_t1(B^y) - y| " + format_double(endpoint) + " <= 5e-3");
  a.check("AC6", gap <= 5e-3, "max sup|Sigma(B^y) - Sigma(B)| " + format_double(gap) + " <= 5e-3");
  return a.finish();
}

// --- sde-solve -----------------------------------------------------------------

int sde_solve(const ExperimentConfig& c) {
  const Settings s(c.values);
  const auto kernel = parse_kernel(s.text("kernel"), fs::current_path().string());
  const auto n = s.paths();
  const RngSpec rng{s.seed()};
  const auto store = s.count("store", 3);
  const double horizon = s.positive("T", 1.0);
  auto params = grid_params(s, horizon);
  params.tail_end = s.positive("tmax", 10.0 * horizon);
  params.tail_ratio = s.positive("tail-ratio", 1.01);
  const double tolerance = s.positive("tolerance", 1e-4);
  const auto grid = TimeGrid::build(params);
  const std::string ytext = s.text("y");
  SolutionSpec spec{kernel, FixedY{}, std::nullopt, tolerance};
  const bool gaussian = ytext == "gaussian";
  if (gaussian) {
    spec.y = GaussianAlphaInfinityY{};
    spec.alpha_infinity = kernel.alpha_infinity();
  } else {
    spec.y = FixedY{vector_arg(ytext)};
  }
  const SdeSolver solver(spec, grid, horizon);
  const YRecovery recovery(kernel.basis(), solver.output_grid(), horizon);
  const auto qt = quarter_times(horizon);
  std::vector<std::size_t> qi;
  for (double t : qt) qi.push_back(solver.output_grid()->index_of(t));

  struct Out {
    Vector y;
    std::vector<double> values;
  };
  const auto outs = parallel_map<Out>(n, [&](std::size_t p) {
    const auto sol = solver.solve(sample_brownian(grid, rng, p), rng, p);
    Out o{recovery.apply(sol.path).value, {}};
    for (auto k : qi) o.values.push_back(sol.path.values[k]);
    return o;
  });
  Artifacts a(c);
  for (std::size_t p = 0; p < std::min(store, n); ++p) {
    const auto w = sample_brownian(grid, rng, p);
    const auto sol = solver.solve(w, rng, p);
    SamplePath head{sol.path.grid, std::vector<double>(w.values.begin(), w.values.begin() + sol.path.values.size()),
                    PathRole::brownian};
    a.write("path_" + std::to_string(p) + ".csv", paths_csv({"driver", "solution"}, {&head, &sol.path}));
  }
  a.manifest().set("kernel", kernel.describe());
  a.manifest().set("seed", std::to_string(rng.seed));
  record_grid(a.manifest(), params, *grid);
  a.manifest().set("diagnostic.truncation_bound", solver.truncation_bound());
  CsvTable rec({"component", "mean", "se", "target"});
  const auto dim = static_cast<Eigen::Index>(kernel.order());
  if (!gaussian) {
    const Vector target = std::get<FixedY>(spec.y).value;
    std::vector<Band> bands;
    for (Eigen::Index i = 0; i < dim; ++i) {
      std::vector<double> xs;
      for (const auto& o : outs) xs.push_back(o.y(i));
      const auto e = mean_estimate(xs);
      rec.add_row({static_cast<double>(i), e.mean, e.se, target(i)});
      bands.push_back(band("Y" + std::to_string(i + 1), e, target(i)));
    }
    a.write("recovered_y.csv", rec.str());
    const auto sum = summarize(bands);
    a.check("AC7", sum.violations == 0, "recover_y returns the planted Y within 4 SE, " + band_text(sum));
  } else {
    std::vector<std::vector<double>> cov;
    for (const auto& o : outs) cov.push_back(o.values);
    const auto bands = brownian_covariance_bands(cov, qt);
    a.write("covariance.csv", covariance_csv(bands));
    a.check("AC7", bands.violations == 0, "cov(X_s, X_t) = s^t within 4 SE, " + band_text(bands));
  }
  return a.finish();
}

// --- harmonic ------------------------------------------------------------------

int harmonic(const ExperimentConfig& c) {
  const Settings s(c.values);
  const auto basis = basis_arg(s.text("basis"));
  const auto law = parse_law(s.text("law"), fs::current_path().string());
  const double t = s.positive("t", 1.0);
  const auto n = s.paths();
  const RngSpec rng{s.seed()};
  const auto params = grid_params(s, t);
  const auto e = martingale_check(basis, law, t, n, rng, params);
  Artifacts a(c);
  CsvTable csv({"t", "estimate", "se", "n"});
  csv.add_row({t, e.mean, e.se, static_cast<double>(e.n)});
  a.write("estimate.csv", csv.str());
  a.manifest().set("basis", basis.describe());
  a.manifest().set("seed", std::to_string(rng.seed));
  record_grid(a.manifest(), params, *TimeGrid::build(params));
  const auto b = band("h", e, 1.0);
  a.check("AC11", b.within, "E[h(t, I_t)] = " + format_double(e.mean) + " +- " + format_double(e.se) + " vs 1");
  return a.finish();
}

// --- report --------------------------------------------------------------------

std::string csv_field(const std::string& v) {
  std::string out = "\"";
  for (char ch : v) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

int report(const ExperimentConfig& c) {
  const Settings s(c.values);
  SuiteOptions opt;
  opt.seed = s.seed();
  opt.scratch_dir = (fs::path(c.out_dir) / "scratch").string();
  const std::string which = s.text("suite", "all");
  std::vector<std::string> ids;
  if (which == "all") {
    ids = criterion_ids();
  } else {
    std::istringstream in(which);
    std::string id;
    while (std::getline(in, id, ','))
      if (!id.empty()) ids.push_back(id);
    const auto known = criterion_ids();
    for (const auto& i : ids)
      if (std::find(known.begin(), known.end(), i) == known.end()) throw ConfigError("unknown criterion " + i);
  }
  const auto results = run_suite(ids, opt);
  fs::remove_all(opt.scratch_dir);
  Artifacts a(c);
  std::string csv = "id,pass,description,measured,threshold\n";
  for (const auto& r : results) {
    csv += r.id + "," + (r.pass ? "1" : "0") + "," + csv_field(r.description) + "," + csv_field(r.measured) + "," +
           csv_field(r.threshold) + "\n";
    a.check(r.id, r.pass, r.description + " | measured: " + r.measured + " | threshold: " + r.threshold);
  }
  a.write("criteria.csv", csv);
  a.manifest().set("seed", std::to_string(opt.seed));
  return a.finish();
}

}  // namespace

ExperimentConfig resolve_config(const std::string& command, const std::map<std::string, std::string>& file_values,
                                const std::map<std::string, std::string>& flag_values) {
  const auto it = command_keys().find(command);
  if (it == command_keys().end()) throw ConfigError("unknown command '" + command + "'");
  const std::set<std::string> allowed(it->second.begin(), it->second.end());
  ExperimentConfig c;
  c.command = command;
  std::string out, threads;
  auto absorb = [&](const std::map<std::string, std::string>& src, const char* origin) {
    for (const auto& [k, v] : src) {
      if (k == "out") {
        out = v;
      } else if (k == "threads") {
        threads = v;
      } else if (allowed.count(k)) {
        c.values[k] = v;
      } else {
        throw ConfigError(std::string("unknown ") + origin + " key '" + k + "' for " + command);
      }
    }
  };
  absorb(file_values, "config");
  const char* env = std::getenv(kOutputDirEnv);
  if (env && *env) out = env;
  absorb(flag_values, "flag");
  c.out_dir = out.empty() ? (fs::path("goursat-out") / command).string() : out;
  if (!threads.empty()) {
    const long long t = parse_integer(threads);
    if (t < 1) throw ConfigError("threads must be at least 1");
    c.threads = static_cast<unsigned>(t);
  } else {
    c.threads = thread_count();
  }
  return c;
}

int run(const ExperimentConfig& config) {
  set_thread_count(config.threads);
  if (config.command == "verify-kernel") return verify_kernel(config);
  if (config.command == "transform") return transform(config);
  if (config.command == "bridge") return bridge(config);
  if (config.command == "sde-solve") return sde_solve(config);
  if (config.command == "harmonic") return harmonic(config);
  if (config.command == "report") return report(config);
  throw ConfigError("unknown command '" + config.command + "'");
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Goursat kernel experiments"};
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, std::string> config_files;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [command, keys] : command_keys()) {
    auto* sub = app.add_subcommand(command);
    subs[command] = sub;
    auto& f = flags[command];
    std::vector<std::string> all = keys;
    all.insert(all.end(), {"out", "threads"});
    for (const auto& k : all) sub->add_option_function<std::string>("--" + k, [&f, k](const std::string& v) { f[k] = v; });
    sub->add_option("--config", config_files[command], "key=value config file");
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfigError;
  }
  try {
    for (const auto& [command, sub] : subs) {
      if (!sub->parsed()) continue;
      std::map<std::string, std::string> file_values;
      if (!config_files[command].empty()) file_values = parse_key_values(read_text_file(config_files[command]));
      return run(resolve_config(command, file_values, flags[command]));
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace goursat
