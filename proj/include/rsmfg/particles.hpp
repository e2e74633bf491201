#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rsmfg/model.hpp"
#include "rsmfg/random.hpp"

namespace rsmfg {

/// Feedback u(t, x) for particle `id`.
using Feedback = std::function<double(double t, double x, std::size_t id)>;

Feedback zero_feedback();
/// Bilinear interpolation of a control field; the field is copied.
Feedback feedback_from_field(ControlField field);
/// u_j = values[id], independent of state and time.
Feedback per_particle_feedback(std::vector<double> values);

/// n particles, identified by stable ids that key their noise streams.
struct ParticleEnsemble {
  std::vector<double> states;
  std::vector<std::uint64_t> ids;
  std::uint64_t rng_seed = 0;
  double time = 0.0;
  std::uint64_t step_index = 0;

  /// Ids default to 0..n-1. Throws std::invalid_argument on empty or non-finite states.
  static ParticleEnsemble create(std::vector<double> states, std::uint64_t seed,
                                 std::vector<std::uint64_t> ids = {});

  std::size_t size() const { return states.size(); }
  bool operator==(const ParticleEnsemble&) const = default;
};

/// Mean and circular moments of the empirical measure, summed in id order so
/// the result does not depend on storage order. density_at_x is left at zero.
CouplingFeatures ensemble_features(const ParticleEnsemble& e);

/// Sample mean and (population) variance of the states.
Moments ensemble_moments(const ParticleEnsemble& e);

/// One Euler-Maruyama step
///   x_j <- x_j + f(t, x_j, u_j, m^n) dt + sqrt(eps dt) sigma(t, x_j) xi_j
/// with xi_j drawn from the counter stream (seed, id_j, step_index).
/// Throws SimulationFault on a non-finite state.
ParticleEnsemble step_particles(const ParticleEnsemble& e, const ModelSpec& model, const Feedback& feedback,
                                double dt);

/// Runs `steps` steps; `observer` (if set) sees the initial and every later ensemble.
ParticleEnsemble simulate_particles(ParticleEnsemble e, const ModelSpec& model, const Feedback& feedback,
                                    double dt, std::size_t steps,
                                    const std::function<void(const ParticleEnsemble&)>& observer = {});

/// Exact 1-D Wasserstein-1 distance between two empirical measures, by the
/// monotone (quantile) coupling. Throws std::invalid_argument on empty input.
double wasserstein1(std::vector<double> a, std::vector<double> b);

/// Inverse CDF of a density row treated as piecewise constant on cells
/// [x_i - dx/2, x_i + dx/2].
class CellQuantile {
 public:
  CellQuantile(const Grid1D& grid, std::span<const double> density);
  double operator()(double u) const;

 private:
  Grid1D grid_;
  std::vector<double> cdf_;  ///< cdf_[i] = mass of cells 0..i-1
};

/// Initial states drawn from the model's initial density by inverse CDF.
std::vector<double> sample_initial_states(const ModelSpec& model, const Grid1D& grid, std::size_t n,
                                          std::uint64_t seed);

struct ConvergenceOptions {
  std::vector<std::size_t> n_values;
  double horizon = 1.0;
  double dt = 1e-3;
  std::size_t replicas = 20;
  std::uint64_t seed = 1;
  std::size_t reference_draws = 100000;
  /// Grid of the reference FPK solve (and of the initial-density sampling).
  Grid1D grid{-6.0, 6.0, 601};
  /// When set, every particle starts here instead of sampling the initial density.
  std::optional<double> fixed_start;
};

struct ConvergenceReport {
  std::vector<std::size_t> n_values;
  std::vector<double> w1_errors;  ///< replica mean per n
  std::vector<double> w1_stderr;
  double fitted_exponent = 0.0;
  double exponent_stderr = 0.0;
  std::vector<double> replica_exponents;
  bool deterministic_regime = false;
  std::size_t reference_steps = 0;  ///< FPK time steps used for the reference law
};

/// W1 between the n-particle empirical law at T and the FPK law at T under the
/// same feedback, averaged over replicas, with the least-squares slope of
/// log W1 against log n.
ConvergenceReport convergence_study(const ModelSpec& model, const Feedback& feedback, const ConvergenceOptions& opts);

struct CostEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  double mean_cost = 0.0;      ///< sample mean of the accumulated cost C
  double cost_variance = 0.0;  ///< unbiased sample variance of C
  std::size_t paths = 0;
  std::vector<double> costs;
};

/// Monte Carlo estimate of delta * log E exp(C / delta), C = g(x_T) + sum c dt,
/// along `paths` Euler paths from x0 on the mean field's time grid. The mean
/// field is held fixed. epsilon = 0 is accepted and gives a deterministic path.
CostEstimate estimate_risk_sensitive_cost(const ModelSpec& model, const Feedback& feedback, double x0,
                                          const DensityTrajectory& mean_field, std::size_t paths,
                                          std::uint64_t seed);

}  // namespace rsmfg
