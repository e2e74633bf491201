#include "rsmfg/fpk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

namespace rsmfg {

namespace {

struct FluxStep {
  std::vector<double> rhs;  // -(F_{i+1/2} - F_{i-1/2}) / dx
  double drift_max = 0.0;
  double sigma_max = 0.0;
};

FluxStep flux_divergence(const ModelSpec& model, const ControlField& control, const Field* disturbance,
                         std::span<const double> m, std::size_t s) {
  const Grid1D& grid = control.grid();
  const std::size_t nx = grid.size();
  const double t = control.times().t(s);
  const double dx = grid.dx();
  const auto u = control.row(s);
  const CouplingFeatures base = population_features(grid, m);

  std::vector<double> f(nx);
  std::vector<double> d(nx);
  FluxStep out{std::vector<double>(nx, 0.0), 0.0, 0.0};
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = grid.x(i);
    CouplingFeatures cf = base;
    cf.density_at_x = m[i];
    const double sigma = model.diffusion(t, x);
    f[i] = model.drift(t, x, u[i], cf);
    if (disturbance) f[i] += sigma * disturbance->at(s, i);
    d[i] = 0.5 * model.epsilon * sigma * sigma;
    out.drift_max = std::max(out.drift_max, std::abs(f[i]));
    out.sigma_max = std::max(out.sigma_max, std::abs(sigma));
  }

  double left_flux = 0.0;
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    const double a = 0.5 * (f[i] + f[i + 1]);
    const double advective = std::max(a, 0.0) * m[i] + std::min(a, 0.0) * m[i + 1];
    const double diffusive = -(d[i + 1] * m[i + 1] - d[i] * m[i]) / dx;
    const double right_flux = advective + diffusive;
    out.rhs[i] = -(right_flux - left_flux) / dx;
    left_flux = right_flux;
  }
  out.rhs[nx - 1] = left_flux / dx;
  return out;
}

void check_support(const ControlField& control, const Grid1D& grid, const TimeGrid& times, const FpkOptions& opts) {
  if (!(control.grid() == grid) || !(control.times() == times)) {
    throw DimensionError("solve_fpk: control field is not on the solver grids");
  }
  if (opts.disturbance && !opts.disturbance->same_support(control)) {
    throw DimensionError("solve_fpk: disturbance field is not on the solver grids");
  }
}

}  // namespace

FpkResult solve_fpk_report(const ModelSpec& model, const ControlField& control, const Grid1D& grid,
                           const TimeGrid& times, const FpkOptions& opts) {
  check_support(control, grid, times, opts);
  const std::size_t nt = times.size();
  const std::size_t nx = grid.size();
  const double dt = times.dt();

  Field density(grid, times);
  const auto m0 = sample_initial_density(model, grid);
  std::copy(m0.begin(), m0.end(), density.row(0).begin());

  FpkDiagnostics diag;
  for (std::size_t s = 0; s + 1 < nt; ++s) {
    const auto current = std::as_const(density).row(s);
    const FluxStep step = flux_divergence(model, control, opts.disturbance, current, s);
    const double limit = cfl_limit(model.epsilon, step.sigma_max, step.drift_max, grid.dx());
    if (dt > limit * (1.0 + 1e-12)) throw CflViolation(dt, limit);

    auto next = density.row(s + 1);
    double peak = 0.0;
    double trough = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      next[i] = current[i] + dt * step.rhs[i];
      if (!std::isfinite(next[i])) throw NonFiniteValue("solve_fpk: density became non-finite");
      peak = std::max(peak, next[i]);
      trough = std::min(trough, next[i]);
    }

    const double before = density_mass(grid, current);
    const double after = density_mass(grid, next);
    const double drift = std::abs(after - before);
    diag.max_mass_error = std::max(diag.max_mass_error, drift);
    if (drift > kMassTolerance) {
      std::ostringstream os;
      os << "solve_fpk: mass changed by " << drift << " at step " << s;
      throw MassDrift(os.str());
    }

    if (trough < 0.0) {
      if (peak > 0.0) diag.max_relative_undershoot = std::max(diag.max_relative_undershoot, -trough / peak);
      for (double& v : next) {
        if (v < 0.0) {
          v = 0.0;
          ++diag.clipped_nodes;
        }
      }
      const double mass = density_mass(grid, next);
      for (double& v : next) v /= mass;
    }
  }
  return {DensityTrajectory{std::move(density)}, diag};
}

DensityTrajectory solve_fpk(const ModelSpec& model, const ControlField& control, const Grid1D& grid,
                            const TimeGrid& times, const FpkOptions& opts) {
  return solve_fpk_report(model, control, grid, times, opts).density;
}

double stationarity_residual(const ModelSpec& model, const ControlField& control, std::span<const double> density,
                             std::size_t s) {
  if (density.size() != control.grid().size()) throw DimensionError("stationarity_residual: row size mismatch");
  if (s >= control.times().size()) throw std::out_of_range("stationarity_residual: time index out of range");
  const FluxStep step = flux_divergence(model, control, nullptr, density, s);
  double worst = 0.0;
  for (double r : step.rhs) worst = std::max(worst, std::abs(r));
  return worst;
}

}  // namespace rsmfg
