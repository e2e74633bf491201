#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsmfg/model.hpp"
#include "rsmfg/riccati.hpp"

namespace rsmfg {

/// Flat run configuration. Keys in files use the dotted names shown.
struct ScenarioConfig {
  std::string name;          // scenario.name
  double x_min = -6.0;       // grid.x_min
  double x_max = 6.0;        // grid.x_max
  std::size_t nx = 121;      // grid.nx
  double T = 1.0;            // time.T
  std::size_t nt = 1001;     // time.nt
  double q = 1.0;            // model.q
  double Q = 0.0;            // model.Q
  double delta = 1e5;        // model.delta
  double sigma = 1.0;        // model.sigma
  double epsilon = 1.0;      // model.epsilon
  double beta = 0.0;         // model.beta
  double theta = 0.5;        // fixedpoint.theta
  double tol = 1e-6;         // fixedpoint.tol
  std::size_t max_iter = 50; // fixedpoint.max_iter
  std::size_t n = 1000;      // particles.n
  std::size_t paths = 10000; // particles.paths
  std::size_t replicas = 20; // particles.replicas
  std::uint64_t seed = 1;    // particles.seed
  std::string output_dir = "out";  // output.dir

  bool operator==(const ScenarioConfig&) const = default;
};

/// Preset names: affine-lq, mckean-vlasov, kuramoto, ou-benchmark.
const std::vector<std::string>& preset_names();

/// Throws std::invalid_argument for an unknown name.
ScenarioConfig preset(const std::string& name);

/// Parses key = value lines (dotted keys or [section] blocks). scenario.name is
/// required and selects the preset the remaining keys override. Unknown keys,
/// bad values and unknown scenario names throw ConfigError.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ScenarioConfig parse_config(std::istream& is);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Sorted key=value text of every field; the basis of config_hash.
std::string canonical_text(const ScenarioConfig& cfg);
/// 64-bit FNV-1a of canonical_text.
std::uint64_t config_hash(const ScenarioConfig& cfg);

Grid1D make_grid(const ScenarioConfig& cfg);
TimeGrid make_times(const ScenarioConfig& cfg);

/// Model for the named scenario:
///   affine-lq      f = beta M + u,  c = (q - M) x^2 + u^2,  g = Q x^2,  m0 = N(1, 1)
///   mckean-vlasov  f = beta M + u,  c = q x^2 + u^2,        g = Q x^2,  m0 = N(1, 1)
///   ou-benchmark   f = -x,          c = q x^2 + u^2,        g = Q x^2,  m0 = N(0, 1)
///   kuramoto       f = u + beta (S cos x - C sin x), c = q (1 - cos x) + u^2, g = 0, m0 uniform
ModelSpec make_model(const ScenarioConfig& cfg);

/// Scalar LQ data of the affine-lq and mckean-vlasov scenarios.
LQSpec make_lq(const ScenarioConfig& cfg);

/// Mean of the scenario's initial density.
double initial_mean(const ScenarioConfig& cfg);

/// Natural frequencies of the kuramoto preset: Q * xi_j with xi_j standard normal.
std::vector<double> kuramoto_frequencies(const ScenarioConfig& cfg, std::size_t n);

}  // namespace rsmfg
