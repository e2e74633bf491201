#include "rsmfg/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rsmfg {

Stencil stencil_at(std::span<const double> row, std::size_t i, double dx) {
  const std::size_t n = row.size();
  Stencil st;
  if (i == 0) {
    st.forward = (row[1] - row[0]) / dx;
    st.backward = st.forward;
    st.central = st.forward;
    st.second = (row[0] - 2.0 * row[1] + row[2]) / (dx * dx);
  } else if (i + 1 == n) {
    st.backward = (row[n - 1] - row[n - 2]) / dx;
    st.forward = st.backward;
    st.central = st.backward;
    st.second = (row[n - 3] - 2.0 * row[n - 2] + row[n - 1]) / (dx * dx);
  } else {
    st.forward = (row[i + 1] - row[i]) / dx;
    st.backward = (row[i] - row[i - 1]) / dx;
    st.central = 0.5 * (row[i + 1] - row[i - 1]) / dx;
    st.second = (row[i + 1] - 2.0 * row[i] + row[i - 1]) / (dx * dx);
  }
  return st;
}

namespace {

void check_inputs(const ModelSpec& model, const DensityTrajectory& coupling, const Grid1D& grid,
                  const TimeGrid& times, const HJBSolveOptions& opts) {
  if (!(coupling.grid() == grid) || !(coupling.times() == times)) {
    throw DimensionError("solve_hjb: coupling trajectory is not on the solver grids");
  }
  if (opts.control_resolution < 3) throw std::invalid_argument("control_resolution must be >= 3");
  if (!(model.u_min < model.u_max)) throw std::invalid_argument("control bounds require u_min < u_max");
  if (!(model.delta > 0.0) || !(model.epsilon > 0.0)) {
    throw std::invalid_argument("delta and epsilon must be positive");
  }
}

// Hamiltonian, argmin control and CFL inputs for one value row at time index s.
struct RowSweep {
  const ModelSpec& model;
  const DensityTrajectory& coupling;
  const Grid1D& grid;
  const TimeGrid& times;
  const HJBSolveOptions& opts;

  struct Result {
    std::vector<double> rate;     // Hamiltonian value, dv/dt = -rate
    std::vector<double> control;  // argmin u
    std::vector<double> zeta;     // argmax disturbance (robust mode)
    double drift_max = 0.0;
    double sigma_max = 0.0;
  };

  Result operator()(std::span<const double> v, std::size_t s) const {
    const std::size_t nx = grid.size();
    const double t = times.t(s);
    const double dx = grid.dx();
    const auto density = coupling.row(s);
    const CouplingFeatures base = population_features(grid, density);

    Result out{std::vector<double>(nx), std::vector<double>(nx), std::vector<double>(nx, 0.0), 0.0, 0.0};

    std::vector<Stencil> st(nx);
    std::vector<double> sigma(nx);
    double gradient_max = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      st[i] = stencil_at(v, i, dx);
      sigma[i] = model.diffusion(t, grid.x(i));
      out.sigma_max = std::max(out.sigma_max, std::abs(sigma[i]));
      gradient_max = std::max(gradient_max, std::abs(sigma[i] * st[i].central));
    }

    const double rho_sq = model.rho_sq();
    const double zeta_max = 10.0 * gradient_max / (2.0 * rho_sq);

    for (std::size_t i = 0; i < nx; ++i) {
      const double x = grid.x(i);
      CouplingFeatures cf = base;
      cf.density_at_x = density[i];
      double drift_max = 0.0;
      auto h = [&](double u) {
        const double f = model.drift(t, x, u, cf);
        drift_max = std::max(drift_max, std::abs(f));
        return control_hamiltonian(f, model.running_cost(t, x, u, cf), st[i]);
      };
      const ScalarMinimum best = minimize_on_interval(h, model.u_min, model.u_max, opts.control_resolution);

      double quadratic = 0.0;
      switch (opts.mode) {
        case HjbMode::risk_sensitive:
          quadratic = model.epsilon / (2.0 * model.delta) * sigma[i] * sigma[i] * st[i].central * st[i].central;
          break;
        case HjbMode::risk_neutral:
          break;
        case HjbMode::robust:
          if (zeta_max > 0.0) {
            auto neg_payoff = [&](double zeta) {
              const double push = sigma[i] * zeta;
              return -(push * (push > 0.0 ? st[i].forward : st[i].backward) - rho_sq * zeta * zeta);
            };
            const ScalarMinimum worst =
                minimize_on_interval(neg_payoff, -zeta_max, zeta_max, opts.control_resolution);
            quadratic = -worst.value;
            out.zeta[i] = worst.argmin;
            drift_max += std::abs(sigma[i] * worst.argmin);
          }
          break;
      }

      out.rate[i] = best.value + 0.5 * model.epsilon * sigma[i] * sigma[i] * st[i].second + quadratic;
      out.control[i] = std::clamp(best.argmin, model.u_min, model.u_max);
      out.drift_max = std::max(out.drift_max, drift_max);
    }
    return out;
  }
};

RobustValueTrajectory backward_solve(const ModelSpec& model, const DensityTrajectory& coupling,
                                     const Grid1D& grid, const TimeGrid& times, const HJBSolveOptions& opts) {
  check_inputs(model, coupling, grid, times, opts);
  const std::size_t nt = times.size();
  const std::size_t nx = grid.size();
  const double dt = times.dt();

  Field values(grid, times);
  ControlField control(grid, times);
  Field disturbance(grid, times);

  auto terminal = values.row(nt - 1);
  for (std::size_t i = 0; i < nx; ++i) terminal[i] = model.terminal_cost(grid.x(i));

  const RowSweep sweep{model, coupling, grid, times, opts};
  for (std::size_t s = nt - 1;; --s) {
    const auto current = values.row(s);
    const auto result = sweep(current, s);
    std::copy(result.control.begin(), result.control.end(), control.row(s).begin());
    std::copy(result.zeta.begin(), result.zeta.end(), disturbance.row(s).begin());
    if (s == 0) break;

    const double limit = cfl_limit(model.epsilon, result.sigma_max, result.drift_max, grid.dx());
    if (dt > limit * (1.0 + 1e-12)) throw CflViolation(dt, limit);

    auto next = values.row(s - 1);
    for (std::size_t i = 0; i < nx; ++i) {
      next[i] = current[i] + dt * result.rate[i];
      if (!std::isfinite(next[i])) {
        throw NonFiniteValue("solve_hjb: value became non-finite at t = " + std::to_string(times.t(s - 1)));
      }
    }
  }
  return {ValueTrajectory{std::move(values), std::move(control)}, std::move(disturbance)};
}

}  // namespace

ValueTrajectory solve_hjb(const ModelSpec& model, const DensityTrajectory& coupling, const Grid1D& grid,
                          const TimeGrid& times, const HJBSolveOptions& opts) {
  return backward_solve(model, coupling, grid, times, opts).value;
}

RobustValueTrajectory solve_hji_robust(const ModelSpec& model, const DensityTrajectory& coupling,
                                       const Grid1D& grid, const TimeGrid& times, const HJBSolveOptions& opts) {
  HJBSolveOptions robust = opts;
  robust.mode = HjbMode::robust;
  return backward_solve(model, coupling, grid, times, robust);
}

FeedbackFields extract_feedback(const ValueTrajectory& v, std::optional<double> control_gain) {
  FeedbackFields out{v.control, std::nullopt};
  if (control_gain) {
    ControlField analytic(v.grid(), v.times());
    const double dx = v.grid().dx();
    for (std::size_t s = 0; s < v.times().size(); ++s) {
      const auto row = v.values.row(s);
      for (std::size_t i = 0; i < v.grid().size(); ++i) {
        analytic.at(s, i) = -0.5 * *control_gain * stencil_at(row, i, dx).central;
      }
    }
    out.analytic = std::move(analytic);
  }
  return out;
}

}  // namespace rsmfg
