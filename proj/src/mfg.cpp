#include "rsmfg/mfg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsmfg {

double relax_density(DensityTrajectory& current, const DensityTrajectory& proposal, double theta) {
  if (!(theta > 0.0) || theta > 1.0) throw std::invalid_argument("relax_density: theta must lie in (0, 1]");
  if (!current.values.same_support(proposal.values)) {
    throw DimensionError("relax_density: trajectories live on different grids");
  }
  const Grid1D& grid = current.grid();
  double change = 0.0;
  for (std::size_t s = 0; s < current.times().size(); ++s) {
    auto row = current.values.row(s);
    const auto next = proposal.row(s);
    std::vector<double> mixed(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) mixed[i] = (1.0 - theta) * row[i] + theta * next[i];
    const double mass = density_mass(grid, mixed);
    if (!(mass > 0.0)) throw NonFiniteValue("relax_density: relaxed row has no mass");
    for (std::size_t i = 0; i < row.size(); ++i) {
      mixed[i] /= mass;
      change = std::max(change, std::abs(mixed[i] - row[i]));
      row[i] = mixed[i];
    }
  }
  return change;
}

MfgSolution solve_mfg(const ModelSpec& model, const Grid1D& grid, const TimeGrid& times, const MfgOptions& opts) {
  if (!(opts.theta > 0.0) || opts.theta > 1.0) throw std::invalid_argument("solve_mfg: theta must lie in (0, 1]");
  if (opts.max_iter == 0) throw std::invalid_argument("solve_mfg: max_iter must be positive");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_mfg: tol must be positive");

  DensityTrajectory density = frozen_density(model, grid, times);
  FixedPointReport report;
  report.tolerance = opts.tol;
  ValueTrajectory value{Field(grid, times), ControlField(grid, times)};

  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    value = solve_hjb(model, density, grid, times, opts.hjb);
    const FpkResult pushed = solve_fpk_report(model, value.control, grid, times);
    report.clipped_nodes += pushed.diagnostics.clipped_nodes;
    const double change = relax_density(density, pushed.density, opts.theta);
    report.residual_history.push_back(change);
    report.iterations = it + 1;
    report.final_gap = change;
    if (change <= opts.tol) {
      report.converged = true;
      break;
    }
  }
  return {std::move(value), std::move(density), std::move(report)};
}

VerificationReport verify_equilibrium(const ValueTrajectory& v, const DensityTrajectory& m, const ModelSpec& model,
                                      const VerifyOptions& opts) {
  if (!v.values.same_support(m.values) || !v.values.same_support(v.control)) {
    throw DimensionError("verify_equilibrium: value, control and density grids differ");
  }
  const Grid1D& grid = v.grid();
  const TimeGrid& times = v.times();
  const std::size_t nt = times.size();
  const std::size_t nx = grid.size();
  const double dx = grid.dx();
  const double dt = times.dt();

  VerificationReport rep;
  rep.threshold = opts.constant * (dx + dt);

  auto quadratic = [&](double sigma, double p) {
    if (opts.mode == HjbMode::risk_neutral) return 0.0;
    return model.epsilon / (2.0 * model.delta) * sigma * sigma * p * p;
  };

  // HJB residual: (v[s+1] - v[s]) / dt + H(v[s+1]) with central differences.
  double hjb_worst = 0.0;
  for (std::size_t s = 0; s + 1 < nt; ++s) {
    const double t = times.t(s + 1);
    const auto row = v.values.row(s + 1);
    const auto prev = v.values.row(s);
    const auto density = m.row(s + 1);
    const CouplingFeatures base = population_features(grid, density);
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const double x = grid.x(i);
      CouplingFeatures cf = base;
      cf.density_at_x = density[i];
      const Stencil st = stencil_at(row, i, dx);
      const double u = v.control.at(s + 1, i);
      const double sigma = model.diffusion(t, x);
      const double advect = model.drift(t, x, u, cf) * st.central;
      const double cost = model.running_cost(t, x, u, cf);
      const double diffuse = 0.5 * model.epsilon * sigma * sigma * st.second;
      const double quad = quadratic(sigma, st.central);
      const double r = std::abs((row[i] - prev[i]) / dt + advect + cost + diffuse + quad);
      rep.hjb_scale = std::max(rep.hjb_scale, std::abs(advect) + std::abs(cost) + std::abs(diffuse) + std::abs(quad));
      if (r > hjb_worst) {
        hjb_worst = r;
        rep.hjb_worst = {s, i};
      }
    }
  }
  rep.hjb_residual = rep.hjb_scale > 0.0 ? hjb_worst / rep.hjb_scale : hjb_worst;

  double g_scale = 1.0;
  for (std::size_t i = 0; i < nx; ++i) {
    const double g = model.terminal_cost(grid.x(i));
    g_scale = std::max(g_scale, std::abs(g));
    rep.terminal_mismatch = std::max(rep.terminal_mismatch, std::abs(v.values.at(nt - 1, i) - g));
  }
  rep.hjb_ok = rep.hjb_residual <= rep.threshold && rep.terminal_mismatch <= 1e-12 * g_scale;

  // Argmin of f * dv/dx + c at every interior node.
  const double cell = (model.u_max - model.u_min) / static_cast<double>(opts.control_resolution - 1);
  for (std::size_t s = 0; s < nt; ++s) {
    const double t = times.t(s);
    const auto row = v.values.row(s);
    const auto density = m.row(s);
    const CouplingFeatures base = population_features(grid, density);
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const double x = grid.x(i);
      CouplingFeatures cf = base;
      cf.density_at_x = density[i];
      const Stencil st = stencil_at(row, i, dx);
      auto h = [&](double u) {
        return control_hamiltonian(model.drift(t, x, u, cf), model.running_cost(t, x, u, cf), st);
      };
      const ScalarMinimum best = minimize_on_interval(h, model.u_min, model.u_max, opts.control_resolution);
      const double u = v.control.at(s, i);
      const double excess = h(u) - best.value;
      if (excess <= 1e-9 * (1.0 + std::abs(best.value))) continue;
      const double gap = std::abs(u - best.argmin) / cell;
      if (gap > rep.control_gap) {
        rep.control_gap = gap;
        rep.control_excess = excess;
        rep.control_worst = {s, i};
      }
    }
  }
  rep.control_ok = rep.control_gap <= 1.0;

  // FPK residual with centered fluxes under the stored control.
  double fpk_worst = 0.0;
  for (std::size_t s = 0; s + 1 < nt; ++s) {
    const double t = times.t(s);
    const auto row = m.row(s);
    const auto next = m.row(s + 1);
    const CouplingFeatures base = population_features(grid, row);
    std::vector<double> flux(nx);
    std::vector<double> diff(nx);
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = grid.x(i);
      CouplingFeatures cf = base;
      cf.density_at_x = row[i];
      const double sigma = model.diffusion(t, x);
      flux[i] = model.drift(t, x, v.control.at(s, i), cf) * row[i];
      diff[i] = 0.5 * model.epsilon * sigma * sigma * row[i];
    }
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const double ddt = (next[i] - row[i]) / dt;
      const double advect = (flux[i + 1] - flux[i - 1]) / (2.0 * dx);
      const double diffuse = (diff[i + 1] - 2.0 * diff[i] + diff[i - 1]) / (dx * dx);
      const double r = std::abs(ddt + advect - diffuse);
      rep.fpk_scale = std::max(rep.fpk_scale, std::abs(ddt) + std::abs(advect) + std::abs(diffuse));
      if (r > fpk_worst) {
        fpk_worst = r;
        rep.fpk_worst = {s, i};
      }
    }
  }
  rep.fpk_residual = rep.fpk_scale > 0.0 ? fpk_worst / rep.fpk_scale : fpk_worst;
  rep.fpk_ok = rep.fpk_residual <= rep.threshold;

  rep.pass = rep.hjb_ok && rep.control_ok && rep.fpk_ok;
  return rep;
}

double BvpResult::m(double t) const {
  const double sign = orientation == BvpOrientation::mdot_equals_v ? 1.0 : -1.0;
  return m0 * std::cos(t) + sign * v0 * std::sin(t);
}

double BvpResult::v(double t) const {
  const double sign = orientation == BvpOrientation::mdot_equals_v ? -1.0 : 1.0;
  return v0 * std::cos(t) + sign * m0 * std::sin(t);
}

BvpResult detect_bvp_solvability(double m0, double horizon, BvpOrientation orientation) {
  if (!(horizon > 0.0)) throw std::invalid_argument("detect_bvp_solvability: require T > 0");
  const double c = std::cos(horizon);
  const double s = std::sin(horizon);
  BvpResult r;
  r.orientation = orientation;
  r.m0 = m0;
  if (orientation == BvpOrientation::mdot_equals_v) {
    r.alpha = c + s;
    r.beta = s - c;
  } else {
    r.alpha = c - s;
    r.beta = -(s + c);
  }
  if (std::abs(r.alpha) > kBvpSingularTolerance) {
    r.classification = BvpSolvability::Unique;
    r.v0 = r.beta * m0 / r.alpha;
  } else {
    r.classification = r.beta * m0 == 0.0 ? BvpSolvability::InfinitelyMany : BvpSolvability::NoSolution;
  }
  return r;
}

const char* to_string(BvpSolvability s) {
  switch (s) {
    case BvpSolvability::Unique:
      return "Unique";
    case BvpSolvability::NoSolution:
      return "NoSolution";
    case BvpSolvability::InfinitelyMany:
      return "InfinitelyMany";
  }
  return "Unknown";
}

}  // namespace rsmfg
