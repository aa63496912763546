#include "goursat/paths.h"

#include "goursat/errors.h"
#include "goursat/io.h"
#include "goursat/quadrature.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace goursat {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void require_increasing(const std::vector<double>& t) {
  if (t.empty()) throw ConfigError("time grid is empty");
  if (!(t.front() > 0.0)) throw ConfigError("time grid must start after 0");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw ConfigError("time grid must be strictly increasing");
}

std::atomic<unsigned> g_threads{std::max(1u, std::thread::hardware_concurrency())};

}  // namespace

GridParams GridParams::defaults(double horizon) {
  GridParams p;
  p.horizon = horizon;
  p.eps0 = 1e-4 * horizon;
  p.delta = horizon / 2000.0;
  return p;
}

void GridParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("grid parameter ") + name + " must be positive");
  };
  positive(horizon, "T");
  positive(eps0, "eps0");
  positive(delta, "delta");
  if (!(ratio > 1.0)) throw ConfigError("grid ratio must exceed 1");
  if (!(eps0 < horizon)) throw ConfigError("eps0 must be below T");
  if (!(delta <= horizon)) throw ConfigError("delta must not exceed T");
  if (tail_end != 0.0 && !(tail_end > horizon)) throw ConfigError("grid tail must end beyond T");
  if (!(tail_ratio >= 1.0)) throw ConfigError("grid tail ratio must be at least 1");
}

TimeGrid::TimeGrid(std::vector<double> t, double horizon) : t_(std::move(t)), horizon_(horizon) {}

std::shared_ptr<const TimeGrid> TimeGrid::build(const GridParams& p) {
  p.validate();
  std::vector<double> t;
  // First uniform node: where the geometric step would reach delta.
  const double k_u = std::max(1.0, std::ceil(1.0 / (p.ratio - 1.0) - 1e-9));
  double t_u = k_u * p.delta;
  while (t_u <= p.eps0 * (1.0 + 1e-12)) t_u += p.delta;
  const double geometric_end = std::min(t_u, p.horizon);
  for (double x = p.eps0; x < geometric_end * (1.0 - 1e-12); x *= p.ratio) t.push_back(x);
  if (t.size() > 1) {
    const double last = t.back();
    if (geometric_end - last < 0.5 * (last - last / p.ratio)) t.pop_back();
  }
  if (t_u < p.horizon) {
    const auto first = static_cast<long long>(std::llround(t_u / p.delta));
    for (long long k = first;; ++k) {
      const double x = static_cast<double>(k) * p.delta;
      if (x > p.horizon * (1.0 + 1e-12)) break;
      t.push_back(x);
    }
  }
  const double tol = 1e-9 * p.horizon;
  if (std::abs(t.back() - p.horizon) <= tol)
    t.back() = p.horizon;
  else if (p.horizon - t.back() < 1e-6 * p.delta)
    t.back() = p.horizon;
  else
    t.push_back(p.horizon);

  if (p.tail_end > 0.0) {
    double h = p.delta;
    double x = p.horizon;
    for (;;) {
      h *= p.tail_ratio;
      if (x + h >= p.tail_end - 0.25 * h) {
        t.push_back(p.tail_end);
        break;
      }
      x += h;
      t.push_back(x);
    }
  }
  return std::shared_ptr<const TimeGrid>(new TimeGrid(std::move(t), p.horizon));
}

std::shared_ptr<const TimeGrid> TimeGrid::from_points(std::vector<double> times, double horizon) {
  require_increasing(times);
  auto g = std::shared_ptr<const TimeGrid>(new TimeGrid(std::move(times), horizon));
  g->index_of(horizon);
  return g;
}

std::size_t TimeGrid::index_of(double t) const {
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  auto it = std::lower_bound(t_.begin(), t_.end(), t - tol);
  if (it == t_.end() || std::abs(*it - t) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "time " << t << " is not a grid node";
    throw ConfigError(os.str());
  }
  return static_cast<std::size_t>(it - t_.begin());
}

std::shared_ptr<const TimeGrid> TimeGrid::refined(bool keep_origin) const {
  std::vector<double> t;
  t.reserve(2 * t_.size());
  if (!keep_origin) t.push_back(0.5 * t_[0]);
  for (std::size_t i = 0; i < t_.size(); ++i) {
    t.push_back(t_[i]);
    if (i + 1 < t_.size()) t.push_back(0.5 * (t_[i] + t_[i + 1]));
  }
  return std::shared_ptr<const TimeGrid>(new TimeGrid(std::move(t), horizon_));
}

std::shared_ptr<const TimeGrid> TimeGrid::prefix(double t) const {
  const auto k = index_of(t);
  return std::shared_ptr<const TimeGrid>(
      new TimeGrid(std::vector<double>(t_.begin(), t_.begin() + static_cast<std::ptrdiff_t>(k) + 1), t_[k]));
}

std::string to_string(PathRole role) {
  switch (role) {
    case PathRole::brownian: return "brownian";
    case PathRole::transformed: return "transformed";
    case PathRole::bridge: return "bridge";
    case PathRole::sde_solution: return "sde-solution";
  }
  return "unknown";
}

void SamplePath::validate() const {
  if (!grid) throw ConfigError("path has no grid");
  if (values.size() != grid->size()) throw ConfigError("path length does not match its grid");
  for (double v : values)
    if (!std::isfinite(v)) throw NumericalError("path contains a non-finite value");
}

std::mt19937_64 RngSpec::stream(std::uint64_t index, std::uint64_t tag) const {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(index));
  return std::mt19937_64(splitmix64(b ^ splitmix64(tag + 0xA5A5A5A5ULL)));
}

SamplePath sample_brownian(const GridPtr& grid, const RngSpec& rng, std::uint64_t path_index) {
  auto gen = rng.stream(path_index, stream_tag::brownian);
  std::normal_distribution<double> z;
  SamplePath p{grid, std::vector<double>(grid->size()), PathRole::brownian};
  const auto& t = grid->times();
  double x = std::sqrt(t[0]) * z(gen);
  p.values[0] = x;
  for (std::size_t i = 1; i < t.size(); ++i) {
    x += std::sqrt(t[i] - t[i - 1]) * z(gen);
    p.values[i] = x;
  }
  return p;
}

SamplePath refine_path(const SamplePath& path, const RngSpec& rng, std::uint64_t path_index, unsigned level,
                       bool keep_origin) {
  path.validate();
  auto fine = path.grid->refined(keep_origin);
  auto gen = rng.stream(path_index, stream_tag::refinement + level);
  std::normal_distribution<double> z;
  const auto& t = path.grid->times();
  const auto& x = path.values;
  SamplePath out{fine, {}, path.role};
  out.values.reserve(fine->size());
  if (!keep_origin) out.values.push_back(0.5 * x[0] + 0.5 * std::sqrt(t[0]) * z(gen));
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.values.push_back(x[i]);
    if (i + 1 < t.size())
      out.values.push_back(0.5 * (x[i] + x[i + 1]) + 0.5 * std::sqrt(t[i + 1] - t[i]) * z(gen));
  }
  return out;
}

Vector basis_integral(const FunctionBasis& basis, double u) {
  if (!(u >= 0.0)) throw ConfigError("basis_integral needs u >= 0");
  Vector out(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& f = basis[i];
    double v;
    switch (f.kind()) {
      case BasisKind::constant: v = u; break;
      case BasisKind::power: v = std::pow(u, f.parameter() + 1.0) / (f.parameter() + 1.0); break;
      case BasisKind::exponential: v = -std::expm1(-f.parameter() * u) / f.parameter(); break;
      default: {
        if (u == 0.0) {
          v = 0.0;
          break;
        }
        QuadratureOptions opt;
        opt.abs_tol = 1e-15;
        if (const double p = f.exponent_at_zero(); p != 0.0) opt.lower_singularity = p;
        double a = 0.0;
        v = 0.0;
        for (double k : f.breakpoints()) {
          if (k <= a || k >= u) continue;
          v += quad([&](double s) { return f(s); }, a, k, a == 0.0 ? opt : QuadratureOptions{});
          a = k;
        }
        v += quad([&](double s) { return f(s); }, a, u, a == 0.0 ? opt : QuadratureOptions{});
      }
    }
    out(static_cast<Eigen::Index>(i)) = v;
  }
  return out;
}

Matrix increment_weights(const FunctionBasis& basis, const TimeGrid& grid) {
  const auto& t = grid.times();
  Matrix w(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(t.size()));
  w.col(0) = basis.values(0.5 * t[0]);
  for (std::size_t k = 1; k < t.size(); ++k)
    w.col(static_cast<Eigen::Index>(k)) = basis.values(0.5 * (t[k - 1] + t[k]));
  return w;
}

Matrix ito_integral(const Matrix& weights, const SamplePath& path) {
  path.validate();
  const auto m = static_cast<Eigen::Index>(path.values.size());
  if (weights.cols() != m) throw ConfigError("ito_integral: weights do not match the path grid");
  Matrix out(weights.rows(), m);
  out.col(0) = weights.col(0) * path.values[0];
  for (Eigen::Index k = 1; k < m; ++k)
    out.col(k) = out.col(k - 1) +
                 weights.col(k) * (path.values[static_cast<std::size_t>(k)] - path.values[static_cast<std::size_t>(k - 1)]);
  return out;
}

Matrix ito_integral(const FunctionBasis& basis, const SamplePath& path) {
  return ito_integral(increment_weights(basis, *path.grid), path);
}

std::string path_csv(const SamplePath& path) {
  CsvTable csv({"time", "value"});
  csv.add_row({0.0, 0.0});
  for (std::size_t i = 0; i < path.values.size(); ++i) csv.add_row({(*path.grid)[i], path.values[i]});
  return csv.str();
}

std::string paths_csv(const std::vector<std::string>& names, const std::vector<const SamplePath*>& paths) {
  if (names.size() != paths.size() || paths.empty()) throw ConfigError("paths_csv: one name per path");
  std::vector<std::string> header{"time"};
  header.insert(header.end(), names.begin(), names.end());
  CsvTable csv(header);
  const auto& grid = *paths.front()->grid;
  for (const auto* p : paths)
    if (p->values.size() != grid.size()) throw ConfigError("paths_csv: paths must share a grid");
  std::vector<double> row(paths.size() + 1, 0.0);
  csv.add_row(row);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    row[0] = grid[i];
    for (std::size_t j = 0; j < paths.size(); ++j) row[j + 1] = paths[j]->values[i];
    csv.add_row(row);
  }
  return csv.str();
}

void set_thread_count(unsigned n) { g_threads = std::max(1u, n); }
unsigned thread_count() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(g_threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace goursat
