#include "goursat/harmonic.h"

#include "goursat/bridge.h"
#include "goursat/errors.h"
#include "goursat/io.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <sstream>

namespace goursat {
namespace {

std::vector<double> numbers_in(std::string line) {
  for (char& c : line)
    if (c == ',') c = ' ';
  std::istringstream in(line);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok));
  return out;
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  std::filesystem::path p = path;
  if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
  return p.string();
}

}  // namespace

EndpointLaw EndpointLaw::point_mass(Vector y) { return discrete({std::move(y)}, {1.0}); }

EndpointLaw EndpointLaw::discrete(std::vector<Vector> points, std::vector<double> weights) {
  EndpointLaw law;
  law.kind = Kind::discrete;
  law.points = std::move(points);
  law.weights = std::move(weights);
  law.validate();
  return law;
}

EndpointLaw EndpointLaw::gaussian(Vector mean, Matrix cov) {
  EndpointLaw law;
  law.kind = Kind::gaussian;
  law.mean = std::move(mean);
  law.cov = std::move(cov);
  law.validate();
  return law;
}

std::size_t EndpointLaw::dim() const {
  return static_cast<std::size_t>(kind == Kind::discrete ? points.front().size() : mean.size());
}

void EndpointLaw::validate() const {
  if (kind == Kind::discrete) {
    if (points.empty() || points.size() != weights.size())
      throw ConfigError("discrete law needs one positive weight per support point");
    double total = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (!(weights[k] > 0.0)) throw ConfigError("discrete law weights must be positive");
      if (points[k].size() != points.front().size() || !points[k].allFinite())
        throw ConfigError("discrete law support points must be finite and of equal size");
      total += weights[k];
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("discrete law weights must sum to 1");
  } else {
    if (mean.size() == 0 || cov.rows() != mean.size() || cov.cols() != mean.size())
      throw ConfigError("Gaussian law needs a mean and a matching square covariance");
    if (!mean.allFinite() || !cov.allFinite()) throw ConfigError("Gaussian law parameters must be finite");
    psd_factor(cov);
  }
}

Vector EndpointLaw::sample(std::mt19937_64& gen) const {
  if (kind == Kind::discrete) {
    if (points.size() == 1) return points.front();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double r = u(gen), acc = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      acc += weights[k];
      if (r < acc) return points[k];
    }
    return points.back();
  }
  std::normal_distribution<double> z;
  Vector w(mean.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = z(gen);
  return mean + psd_factor(cov) * w;
}

EndpointLaw parse_law(const std::string& spec, const std::string& base_dir) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("law must look like point:<y>, discrete:<file> or gauss:<file>");
  const std::string kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
  if (kind == "point") {
    const auto ys = parse_double_list(arg);
    return EndpointLaw::point_mass(Eigen::Map<const Vector>(ys.data(), static_cast<Eigen::Index>(ys.size())));
  }
  if (kind != "discrete" && kind != "gauss") throw ConfigError("unknown law kind '" + kind + "'");
  std::istringstream in(read_text_file(resolve(arg, base_dir)));
  std::string line;
  std::vector<std::vector<double>> rows;
  std::vector<double> mean;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream head(line);
    std::string first;
    head >> first;
    if (kind == "gauss" && first == "mean") {
      mean = numbers_in(line.substr(line.find("mean") + 4));
      continue;
    }
    rows.push_back(numbers_in(line));
  }
  if (rows.empty()) throw ConfigError("law file " + arg + " has no rows");
  if (kind == "discrete") {
    std::vector<Vector> points;
    std::vector<double> weights;
    for (const auto& r : rows) {
      if (r.size() < 2) throw ConfigError("discrete law rows need a weight and a point");
      weights.push_back(r[0]);
      points.emplace_back(Eigen::Map<const Vector>(r.data() + 1, static_cast<Eigen::Index>(r.size() - 1)));
    }
    return EndpointLaw::discrete(std::move(points), std::move(weights));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw ConfigError("Gaussian covariance must be square");
    for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  Vector mu = Vector::Zero(n);
  if (!mean.empty()) {
    if (static_cast<Eigen::Index>(mean.size()) != n) throw ConfigError("Gaussian mean has the wrong size");
    mu = Eigen::Map<const Vector>(mean.data(), n);
  }
  return EndpointLaw::gaussian(mu, cov);
}

double log_harmonic_h(const Matrix& m, const EndpointLaw& law, const Vector& x) {
  const auto n = static_cast<Eigen::Index>(law.dim());
  if (m.rows() != n || x.size() != n) throw ConfigError("law dimension does not match the basis");
  if (law.kind == EndpointLaw::Kind::discrete) {
    std::vector<double> terms;
    for (std::size_t k = 0; k < law.points.size(); ++k) {
      const Vector& y = law.points[k];
      terms.push_back(std::log(law.weights[k]) + y.dot(x) - 0.5 * y.dot(m * y));
    }
    const double top = *std::max_element(terms.begin(), terms.end());
    double s = 0.0;
    for (double v : terms) s += std::exp(v - top);
    return top + std::log(s);
  }
  const Vector shifted = x - m * law.mean;
  const Matrix a = Matrix::Identity(n, n) + m * law.cov;
  const Eigen::PartialPivLU<Matrix> lu(a);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(std::abs(lu.matrixLU()(i, i)));
  const Vector solved = lu.solve(shifted);
  return law.mean.dot(x) - 0.5 * law.mean.dot(m * law.mean) - 0.5 * log_det + 0.5 * shifted.dot(law.cov * solved);
}

double harmonic_h(const FunctionBasis& basis, const EndpointLaw& law, double t, const Vector& x) {
  if (!(t > 0.0)) throw ConfigError("harmonic_h needs t > 0");
  return std::exp(log_harmonic_h(gramian(basis, t), law, x));
}

McEstimate harmonic_h_over_law(const FunctionBasis& basis, const EndpointLaw& law, double t, const Vector& x,
                               std::size_t draws, const RngSpec& rng) {
  const Matrix m = gramian(basis, t);
  const auto values = parallel_map<double>(draws, [&](std::size_t i) {
    auto gen = rng.stream(i, stream_tag::endpoint);
    const Vector y = law.sample(gen);
    return std::exp(y.dot(x) - 0.5 * y.dot(m * y));
  });
  return mean_estimate(values);
}

McEstimate martingale_check(const FunctionBasis& basis, const EndpointLaw& law, double t, std::size_t paths,
                            const RngSpec& rng, const GridParams& params) {
  if (law.dim() != basis.size()) throw ConfigError("law dimension does not match the basis");
  if (alpha_infinity(basis).value.cwiseAbs().maxCoeff() != 0.0)
    throw ConfigError("martingale_check requires alpha_inf == 0 for the basis");
  if (std::abs(params.horizon - t) > 1e-12 * t) throw ConfigError("martingale_check grid must end at t");
  const auto grid = TimeGrid::build(params);
  const Matrix w = increment_weights(basis, *grid);
  const Matrix m = gramian(basis, t);
  const auto k = static_cast<Eigen::Index>(grid->size() - 1);
  const auto values = parallel_map<double>(paths, [&](std::size_t i) {
    const auto b = sample_brownian(grid, rng, i);
    return std::exp(log_harmonic_h(m, law, ito_integral(w, b).col(k)));
  });
  return mean_estimate(values);
}

McEstimate martingale_check(const FunctionBasis& basis, const EndpointLaw& law, double t, std::size_t paths,
                            const RngSpec& rng) {
  return martingale_check(basis, law, t, paths, rng, GridParams::defaults(t));
}

TiltedSampler::TiltedSampler(const FunctionBasis& basis, EndpointLaw law, GridPtr grid)
    : law_(std::move(law)), grid_(std::move(grid)) {
  if (law_.dim() != basis.size()) throw ConfigError("law dimension does not match the basis");
  cumulative_.resize(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(grid_->size()));
  for (std::size_t k = 0; k < grid_->size(); ++k)
    cumulative_.col(static_cast<Eigen::Index>(k)) = basis_integral(basis, (*grid_)[k]);
}

TiltedPath TiltedSampler::sample(const RngSpec& rng, std::uint64_t index) const {
  TiltedPath out{sample_brownian(grid_, rng, index), {}};
  auto gen = rng.stream(index, stream_tag::endpoint);
  out.y = law_.sample(gen);
  out.path.role = PathRole::sde_solution;
  for (std::size_t k = 0; k < out.path.values.size(); ++k)
    out.path.values[k] += cumulative_.col(static_cast<Eigen::Index>(k)).dot(out.y);
  return out;
}

TiltedPath tilted_sampler(const FunctionBasis& basis, const EndpointLaw& law, const GridPtr& grid,
                          const RngSpec& rng, std::uint64_t index) {
  return TiltedSampler(basis, law, grid).sample(rng, index);
}

}  // namespace goursat
