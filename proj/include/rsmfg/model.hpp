#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsmfg {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class for numerical faults raised by the solvers.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time step exceeds the monotonicity bound dt <= dx^2 / (eps*sigma^2 + |f|*dx).
class CflViolation : public SolverError {
 public:
  CflViolation(double dt, double limit);
  double dt() const { return dt_; }
  double limit() const { return limit_; }

 private:
  double dt_;
  double limit_;
};

class NonFiniteValue : public SolverError {
 public:
  using SolverError::SolverError;
};

class MassDrift : public SolverError {
 public:
  using SolverError::SolverError;
};

class FiniteTimeBlowup : public SolverError {
 public:
  FiniteTimeBlowup(double t, double z);
  double time() const { return t_; }

 private:
  double t_;
};

class SimulationFault : public SolverError {
 public:
  SimulationFault(std::size_t step, const std::string& what);
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Arrays defined on different grids were combined.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

/// Uniform 1-D state grid with nodes x_i = x_min + i*dx.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t nx);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return nx_; }
  double dx() const { return dx_; }
  double x(std::size_t i) const { return x_min_ + static_cast<double>(i) * dx_; }
  std::vector<double> nodes() const;

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t nx_;
  double dx_;
};

/// Uniform time grid on [0, T] with nt samples; t_s = s*dt.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t nt);

  double horizon() const { return horizon_; }
  std::size_t size() const { return nt_; }
  double dt() const { return dt_; }
  double t(std::size_t s) const {
    return s + 1 == nt_ ? horizon_ : static_cast<double>(s) * dt_;
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double horizon_;
  std::size_t nt_;
  double dt_;
};

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// Population statistics a player's drift and cost may depend on.
struct CouplingFeatures {
  double mean = 0.0;          ///< M(t) = integral of x m_t(dx)
  double density_at_x = 0.0;  ///< m_t evaluated at the query point
  double mean_cos = 0.0;      ///< circular moments, used by the phase-oscillator preset
  double mean_sin = 0.0;
};

using DriftFn = std::function<double(double t, double x, double u, const CouplingFeatures&)>;
using DiffusionFn = std::function<double(double t, double x)>;
using RunningCostFn = std::function<double(double t, double x, double u, const CouplingFeatures&)>;
using ScalarFn = std::function<double(double x)>;

/// One game instance: dynamics dx = f dt + sqrt(eps) sigma dB, running cost c,
/// terminal cost g, risk index delta and initial population density m0.
struct ModelSpec {
  DriftFn drift;
  DiffusionFn diffusion;
  RunningCostFn running_cost;
  ScalarFn terminal_cost;
  double delta = 1.0;
  double epsilon = 1.0;
  double u_min = -1.0;
  double u_max = 1.0;
  ScalarFn initial_density;
  /// Set when f = fbar + b*u and c = cbar + u^2; enables the closed-form
  /// feedback -b/2 * dv/dx as a cross-check.
  std::optional<double> control_gain;

  /// rho^2 = delta / (2 eps), the disturbance penalty of the equivalent robust game.
  double rho_sq() const { return delta / (2.0 * epsilon); }
};

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

/// nt x nx row-major array of samples on a (TimeGrid, Grid1D) pair.
class Field {
 public:
  Field(Grid1D grid, TimeGrid times, double fill = 0.0);
  Field(Grid1D grid, TimeGrid times, std::vector<double> values);

  const Grid1D& grid() const { return grid_; }
  const TimeGrid& times() const { return times_; }
  std::size_t rows() const { return times_.size(); }
  std::size_t cols() const { return grid_.size(); }

  std::span<double> row(std::size_t s);
  std::span<const double> row(std::size_t s) const;
  double& at(std::size_t s, std::size_t i) { return values_[s * cols() + i]; }
  double at(std::size_t s, std::size_t i) const { return values_[s * cols() + i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Bilinear interpolation; x is clamped to the grid, t to [0, T].
  double interpolate(double t, double x) const;

  bool same_support(const Field& other) const {
    return grid_ == other.grid_ && times_ == other.times_;
  }

 private:
  Grid1D grid_;
  TimeGrid times_;
  std::vector<double> values_;
};

/// Feedback control u(t, x) sampled on the grids.
using ControlField = Field;

/// Population densities m_t (pointwise density values, mass = dx * sum).
struct DensityTrajectory {
  Field values;

  const Grid1D& grid() const { return values.grid(); }
  const TimeGrid& times() const { return values.times(); }
  std::span<const double> row(std::size_t s) const { return values.row(s); }
};

/// Value function v(t, x) together with the minimizing feedback control.
struct ValueTrajectory {
  Field values;
  ControlField control;

  const Grid1D& grid() const { return values.grid(); }
  const TimeGrid& times() const { return values.times(); }
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of one density row by the left-point rule.
Moments density_moments(const DensityTrajectory& d, std::size_t row);
Moments density_moments(const Grid1D& grid, std::span<const double> density);

/// dx * sum(m).
double density_mass(const Grid1D& grid, std::span<const double> density);

/// Population features of a density row, with density_at_x left at zero.
CouplingFeatures population_features(const Grid1D& grid, std::span<const double> density);

/// Samples m0 at the nodes and rescales to unit mass. Throws std::invalid_argument
/// on negative, non-finite or zero-mass input.
std::vector<double> sample_initial_density(const ModelSpec& model, const Grid1D& grid);

/// Initial density frozen over every time row.
DensityTrajectory frozen_density(const ModelSpec& model, const Grid1D& grid, const TimeGrid& times);

/// Explicit-scheme stability bound dx^2 / (eps*sigma_max^2 + |f|_max*dx).
double cfl_limit(double epsilon, double sigma_max, double drift_max, double dx);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> findings;
  double sigma_max = 0.0;
  double drift_max = 0.0;
  double cfl_limit = 0.0;
  double dt = 0.0;

  bool operator==(const ValidationReport&) const = default;
};

/// Samples the model on a coarse (t, x, u) lattice and reports NaNs, negative
/// diffusion or costs, bad parameters and CFL violations.
ValidationReport validate_model(const ModelSpec& model, const Grid1D& grid, const TimeGrid& times);

// ---------------------------------------------------------------------------
// Scalar control minimization
// ---------------------------------------------------------------------------

struct ScalarMinimum {
  double argmin = 0.0;
  double value = 0.0;
};

/// Minimizes fn over [lo, hi]: `resolution` equispaced samples, then a
/// golden-section refinement on the bracket around the best sample.
template <class F>
ScalarMinimum minimize_on_interval(F&& fn, double lo, double hi, std::size_t resolution) {
  if (resolution < 3 || !(lo < hi)) {
    throw std::invalid_argument("minimize_on_interval: need resolution >= 3 and lo < hi");
  }
  const double h = (hi - lo) / static_cast<double>(resolution - 1);
  std::size_t best = 0;
  double best_value = fn(lo);
  for (std::size_t k = 1; k < resolution; ++k) {
    const double u = k + 1 == resolution ? hi : lo + static_cast<double>(k) * h;
    const double value = fn(u);
    if (value < best_value) {
      best_value = value;
      best = k;
    }
  }
  const double u_best = best + 1 == resolution ? hi : lo + static_cast<double>(best) * h;
  double a = best == 0 ? lo : u_best - h;
  double b = best + 1 == resolution ? hi : u_best + h;

  constexpr double kInvPhi = 0.6180339887498949;
  const double tol = 1e-10 * (hi - lo);
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  ScalarMinimum result{u_best, best_value};
  if (fc < result.value) result = {c, fc};
  if (fd < result.value) result = {d, fd};
  return result;
}

inline constexpr std::size_t kDefaultControlResolution = 129;

}  // namespace rsmfg
