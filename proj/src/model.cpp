#include "rsmfg/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rsmfg {

namespace {

std::string format_cfl(double dt, double limit) {
  std::ostringstream os;
  os.precision(6);
  os << "CFL violation: dt = " << dt << " exceeds the explicit-scheme limit " << limit;
  return os.str();
}

std::string format_blowup(double t, double z) {
  std::ostringstream os;
  os << "Riccati solution escaped (|z| = " << std::abs(z) << ") at t = " << t;
  return os.str();
}

std::string format_fault(std::size_t step, const std::string& what) {
  std::ostringstream os;
  os << "simulation fault at step " << step << ": " << what;
  return os.str();
}

}  // namespace

CflViolation::CflViolation(double dt, double limit)
    : SolverError(format_cfl(dt, limit)), dt_(dt), limit_(limit) {}

FiniteTimeBlowup::FiniteTimeBlowup(double t, double z) : SolverError(format_blowup(t, z)), t_(t) {}

SimulationFault::SimulationFault(std::size_t step, const std::string& what)
    : SolverError(format_fault(step, what)), step_(step) {}

Grid1D::Grid1D(double x_min, double x_max, std::size_t nx) : x_min_(x_min), x_max_(x_max), nx_(nx) {
  if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw std::invalid_argument("Grid1D: require finite x_min < x_max");
  }
  if (nx < 3) throw std::invalid_argument("Grid1D: require nx >= 3");
  dx_ = (x_max - x_min) / static_cast<double>(nx - 1);
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> out(nx_);
  for (std::size_t i = 0; i < nx_; ++i) out[i] = x(i);
  return out;
}

TimeGrid::TimeGrid(double horizon, std::size_t nt) : horizon_(horizon), nt_(nt) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("TimeGrid: require T > 0");
  if (nt < 2) throw std::invalid_argument("TimeGrid: require nt >= 2");
  dt_ = horizon / static_cast<double>(nt - 1);
}

Field::Field(Grid1D grid, TimeGrid times, double fill)
    : grid_(grid), times_(times), values_(grid.size() * times.size(), fill) {}

Field::Field(Grid1D grid, TimeGrid times, std::vector<double> values)
    : grid_(grid), times_(times), values_(std::move(values)) {
  if (values_.size() != grid_.size() * times_.size()) {
    throw DimensionError("Field: value count does not match nt * nx");
  }
}

std::span<double> Field::row(std::size_t s) {
  if (s >= rows()) throw std::out_of_range("Field::row: time index out of range");
  return {values_.data() + s * cols(), cols()};
}

std::span<const double> Field::row(std::size_t s) const {
  if (s >= rows()) throw std::out_of_range("Field::row: time index out of range");
  return {values_.data() + s * cols(), cols()};
}

double Field::interpolate(double t, double x) const {
  const double ts = std::clamp(t / times_.dt(), 0.0, static_cast<double>(rows() - 1));
  const double xs = std::clamp((x - grid_.x_min()) / grid_.dx(), 0.0, static_cast<double>(cols() - 1));
  const auto s0 = std::min(static_cast<std::size_t>(ts), rows() - 2);
  const auto i0 = std::min(static_cast<std::size_t>(xs), cols() - 2);
  const double wt = ts - static_cast<double>(s0);
  const double wx = xs - static_cast<double>(i0);
  const double lo = (1.0 - wx) * at(s0, i0) + wx * at(s0, i0 + 1);
  const double hi = (1.0 - wx) * at(s0 + 1, i0) + wx * at(s0 + 1, i0 + 1);
  return (1.0 - wt) * lo + wt * hi;
}

double density_mass(const Grid1D& grid, std::span<const double> density) {
  double sum = 0.0;
  for (double m : density) sum += m;
  return grid.dx() * sum;
}

Moments density_moments(const Grid1D& grid, std::span<const double> density) {
  if (density.size() != grid.size()) throw DimensionError("density_moments: row size mismatch");
  double mean = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) mean += grid.x(i) * density[i];
  mean *= grid.dx();
  double var = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double d = grid.x(i) - mean;
    var += d * d * density[i];
  }
  return {mean, std::max(0.0, var * grid.dx())};
}

Moments density_moments(const DensityTrajectory& d, std::size_t row) {
  if (row >= d.times().size()) throw std::out_of_range("density_moments: row out of range");
  return density_moments(d.grid(), d.row(row));
}

CouplingFeatures population_features(const Grid1D& grid, std::span<const double> density) {
  CouplingFeatures cf;
  double c = 0.0;
  double s = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double x = grid.x(i);
    mean += x * density[i];
    c += std::cos(x) * density[i];
    s += std::sin(x) * density[i];
  }
  cf.mean = mean * grid.dx();
  cf.mean_cos = c * grid.dx();
  cf.mean_sin = s * grid.dx();
  return cf;
}

std::vector<double> sample_initial_density(const ModelSpec& model, const Grid1D& grid) {
  if (!model.initial_density) throw std::invalid_argument("initial density is not set");
  std::vector<double> m(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    m[i] = model.initial_density(grid.x(i));
    if (!std::isfinite(m[i]) || m[i] < 0.0) {
      throw std::invalid_argument("initial density must be finite and nonnegative");
    }
  }
  const double mass = density_mass(grid, m);
  if (!(mass > 0.0)) throw std::invalid_argument("initial density has zero mass on the grid");
  for (double& v : m) v /= mass;
  return m;
}

DensityTrajectory frozen_density(const ModelSpec& model, const Grid1D& grid, const TimeGrid& times) {
  const auto m0 = sample_initial_density(model, grid);
  Field f(grid, times);
  for (std::size_t s = 0; s < times.size(); ++s) std::copy(m0.begin(), m0.end(), f.row(s).begin());
  return {std::move(f)};
}

double cfl_limit(double epsilon, double sigma_max, double drift_max, double dx) {
  const double denom = epsilon * sigma_max * sigma_max + drift_max * dx;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return dx * dx / denom;
}

ValidationReport validate_model(const ModelSpec& model, const Grid1D& grid, const TimeGrid& times) {
  ValidationReport report;
  report.dt = times.dt();
  auto flag = [&report](std::string msg) {
    report.ok = false;
    report.findings.push_back(std::move(msg));
  };

  if (!(model.delta > 0.0)) flag("risk index delta must be positive");
  if (!(model.epsilon > 0.0)) flag("noise scale epsilon must be positive");
  if (!(model.u_min < model.u_max)) flag("control bounds require u_min < u_max");
  if (!model.drift || !model.diffusion || !model.running_cost || !model.terminal_cost ||
      !model.initial_density) {
    flag("model callable missing");
    return report;
  }

  std::vector<double> m0;
  try {
    m0 = sample_initial_density(model, grid);
  } catch (const std::invalid_argument& e) {
    flag(std::string("initial density: ") + e.what());
  }

  CouplingFeatures coupling;
  if (!m0.empty()) coupling = population_features(grid, m0);

  constexpr std::size_t kTimeSamples = 5;
  constexpr std::size_t kStateSamples = 21;
  constexpr std::size_t kControlSamples = 9;
  const std::size_t nx_samples = std::min(kStateSamples, grid.size());
  bool bad_diffusion = false;
  bool bad_drift = false;
  bool bad_cost = false;
  bool bad_terminal = false;

  for (std::size_t a = 0; a < kTimeSamples; ++a) {
    const double t = times.horizon() * static_cast<double>(a) / static_cast<double>(kTimeSamples - 1);
    for (std::size_t b = 0; b < nx_samples; ++b) {
      const auto i = (grid.size() - 1) * b / (nx_samples - 1);
      const double x = grid.x(i);
      CouplingFeatures cf = coupling;
      cf.density_at_x = m0.empty() ? 0.0 : m0[i];

      const double sigma = model.diffusion(t, x);
      if (!std::isfinite(sigma) || sigma <= 0.0) {
        bad_diffusion = true;
      } else {
        report.sigma_max = std::max(report.sigma_max, std::abs(sigma));
      }
      if (a == 0) {
        const double g = model.terminal_cost(x);
        if (!std::isfinite(g) || g < 0.0) bad_terminal = true;
      }
      for (std::size_t k = 0; k < kControlSamples; ++k) {
        const double u = model.u_min + (model.u_max - model.u_min) * static_cast<double>(k) /
                                           static_cast<double>(kControlSamples - 1);
        const double f = model.drift(t, x, u, cf);
        if (!std::isfinite(f)) {
          bad_drift = true;
        } else {
          report.drift_max = std::max(report.drift_max, std::abs(f));
        }
        const double c = model.running_cost(t, x, u, cf);
        if (!std::isfinite(c) || c < 0.0) bad_cost = true;
      }
    }
  }
  if (bad_diffusion) flag("non-positive or non-finite diffusion");
  if (bad_drift) flag("non-finite drift");
  if (bad_cost) flag("non-finite or negative running cost");
  if (bad_terminal) flag("non-finite or negative terminal cost");

  report.cfl_limit = cfl_limit(model.epsilon, report.sigma_max, report.drift_max, grid.dx());
  if (times.dt() > report.cfl_limit) {
    flag(format_cfl(times.dt(), report.cfl_limit));
  }
  return report;
}

}  // namespace rsmfg
