#pragma once

#include "goursat/basis.h"

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace goursat {

struct GridParams {
  double horizon = 1.0;     // T
  double eps0 = 1e-4;       // first node
  double ratio = 1.2;       // geometric growth near 0
  double delta = 5e-4;      // uniform body step
  double tail_end = 0.0;    // optional extension beyond T, 0 for none
  double tail_ratio = 1.01;  // step growth on the extension

  // eps0 = 1e-4 T, ratio 1.2, delta = T / 2000.
  static GridParams defaults(double horizon);
  void validate() const;
};

// t_0 = eps0 < t_1 < ... ; 0 is implicit with path value 0. Nodes t_i = eps0 r^i
// up to the first uniform node, then multiples of delta up to T, then an optional
// geometric tail out to tail_end.
class TimeGrid {
 public:
  static std::shared_ptr<const TimeGrid> build(const GridParams& params);
  static std::shared_ptr<const TimeGrid> from_points(std::vector<double> times, double horizon);

  const std::vector<double>& times() const { return t_; }
  std::size_t size() const { return t_.size(); }
  double operator[](std::size_t i) const { return t_[i]; }
  double eps0() const { return t_.front(); }
  double horizon() const { return horizon_; }
  double end() const { return t_.back(); }
  std::size_t horizon_index() const { return index_of(horizon_); }
  // Node equal to t up to 1e-9 relative; throws ConfigError otherwise.
  std::size_t index_of(double t) const;
  // Midpoints inserted everywhere; eps0 / 2 prepended unless keep_origin.
  std::shared_ptr<const TimeGrid> refined(bool keep_origin = false) const;
  // Nodes up to and including t (which must be a node).
  std::shared_ptr<const TimeGrid> prefix(double t) const;

 private:
  TimeGrid(std::vector<double> t, double horizon);
  std::vector<double> t_;
  double horizon_;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

enum class PathRole { brownian, transformed, bridge, sde_solution };
std::string to_string(PathRole role);

struct SamplePath {
  GridPtr grid;
  std::vector<double> values;
  PathRole role = PathRole::brownian;

  double at(double t) const { return values[grid->index_of(t)]; }
  // Nodes with x = 0 at the implicit origin; throws on non-finite values.
  void validate() const;
};

// Substream k of seed s is an mt19937_64 seeded from splitmix64 of (s, k, tag).
struct RngSpec {
  std::uint64_t seed = 0;
  std::mt19937_64 stream(std::uint64_t index, std::uint64_t tag = 0) const;
};

namespace stream_tag {
constexpr std::uint64_t brownian = 0;
constexpr std::uint64_t endpoint = 1;  // Y and law draws
constexpr std::uint64_t refinement = 16;  // + level
}  // namespace stream_tag

SamplePath sample_brownian(const GridPtr& grid, const RngSpec& rng, std::uint64_t path_index);
// Brownian-bridge fill of grid->refined(keep_origin); level selects an independent substream.
SamplePath refine_path(const SamplePath& path, const RngSpec& rng, std::uint64_t path_index,
                       unsigned level = 1, bool keep_origin = false);

// int_0^u f(s) ds, closed form for constant/power/exponential functions.
Vector basis_integral(const FunctionBasis& basis, double u);

// f evaluated where each increment is weighted: column 0 at eps0 / 2 (for the step
// from the origin), column k + 1 at the midpoint of [t_k, t_{k+1}].
Matrix increment_weights(const FunctionBasis& basis, const TimeGrid& grid);

// Running I_{t_k} = sum over increments up to t_k of f(s_i) (x_{i+1} - x_i), one
// column per node, using increment_weights.
Matrix ito_integral(const FunctionBasis& basis, const SamplePath& path);
Matrix ito_integral(const Matrix& weights, const SamplePath& path);

std::string path_csv(const SamplePath& path);
std::string paths_csv(const std::vector<std::string>& names, const std::vector<const SamplePath*>& paths);

// Worker threads used by ensemble loops; results never depend on it.
void set_thread_count(unsigned n);
unsigned thread_count();
// Calls fn(i) for i in [0, n) on the worker pool. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace goursat
