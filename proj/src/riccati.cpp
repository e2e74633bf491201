#include "rsmfg/riccati.hpp"

#include <algorithm>
#include <cmath>

namespace rsmfg {

namespace {

// Cubic (four-point) interpolation of samples at the midpoint between s and s+1.
double midpoint(const std::vector<double>& v, std::size_t s) {
  const std::size_t n = v.size();
  if (s >= 1 && s + 2 < n) return (-v[s - 1] + 9.0 * v[s] + 9.0 * v[s + 1] - v[s + 2]) / 16.0;
  if (s + 2 < n) return (3.0 * v[s] + 6.0 * v[s + 1] - v[s + 2]) / 8.0;
  if (s >= 1) return (-v[s - 1] + 6.0 * v[s] + 3.0 * v[s + 1]) / 8.0;
  return 0.5 * (v[s] + v[s + 1]);
}

}  // namespace

RiccatiSolution solve_riccati_scalar(const LQSpec& spec, const TimeGrid& times) {
  if (!(spec.rho_sq > 0.0) || !(spec.sigma > 0.0)) {
    throw std::invalid_argument("LQSpec: require rho_sq > 0 and sigma > 0");
  }
  const std::size_t nt = times.size();
  const double h = times.dt();
  const double gain = spec.quadratic_gain();
  auto rhs = [&](double t, double z) {
    return -spec.q(t) + spec.lambda_shift(t, spec.coupling_mean(t)) - 2.0 * spec.a * z + gain * z * z;
  };

  RiccatiSolution sol{times, std::vector<double>(nt), std::vector<double>(nt, 0.0)};
  sol.z[nt - 1] = spec.q_terminal;
  for (std::size_t s = nt - 1; s > 0; --s) {
    const double t = times.t(s);
    const double z = sol.z[s];
    const double k1 = rhs(t, z);
    const double k2 = rhs(t - 0.5 * h, z - 0.5 * h * k1);
    const double k3 = rhs(t - 0.5 * h, z - 0.5 * h * k2);
    const double k4 = rhs(t - h, z - h * k3);
    const double next = z - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(next) || std::abs(next) > kRiccatiBlowupThreshold) {
      throw FiniteTimeBlowup(times.t(s - 1), next);
    }
    sol.z[s - 1] = next;
  }
  return sol;
}

RiccatiSolution solve_offset_ode(const LQSpec& spec, const RiccatiSolution& z, const TimeGrid& times) {
  if (!(z.times == times) || z.z.size() != times.size()) {
    throw DimensionError("solve_offset_ode: z is not sampled on the requested time grid");
  }
  const std::size_t nt = times.size();
  const double h = times.dt();
  const double gain = spec.quadratic_gain();
  auto rhs = [&](double t, double zt, double k) {
    return gain * zt * k - spec.a * k - spec.beta * zt * spec.coupling_mean(t);
  };

  RiccatiSolution sol = z;
  sol.k.assign(nt, 0.0);
  for (std::size_t s = nt - 1; s > 0; --s) {
    const double t = times.t(s);
    const double z_hi = z.z[s];
    const double z_mid = midpoint(z.z, s - 1);
    const double z_lo = z.z[s - 1];
    const double k = sol.k[s];
    const double k1 = rhs(t, z_hi, k);
    const double k2 = rhs(t - 0.5 * h, z_mid, k - 0.5 * h * k1);
    const double k3 = rhs(t - 0.5 * h, z_mid, k - 0.5 * h * k2);
    const double k4 = rhs(t - h, z_lo, k - h * k3);
    const double next = k - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(next)) throw NonFiniteValue("solve_offset_ode: offset became non-finite");
    sol.k[s - 1] = next;
  }
  return sol;
}

double lq_value(const LQSpec& spec, const RiccatiSolution& z, double x, std::size_t t_index) {
  if (t_index >= z.z.size()) throw std::out_of_range("lq_value: time index out of range");
  const double h = z.times.dt();
  double integral = 0.0;
  for (std::size_t s = t_index; s + 1 < z.z.size(); ++s) integral += 0.5 * h * (z.z[s] + z.z[s + 1]);
  return z.z[t_index] * x * x + spec.epsilon * spec.sigma * spec.sigma * integral;
}

double lq_feedback(const LQSpec& spec, const RiccatiSolution& z, double x, std::size_t t_index) {
  if (t_index >= z.z.size()) throw std::out_of_range("lq_feedback: time index out of range");
  const double k = t_index < z.k.size() ? z.k[t_index] : 0.0;
  return std::clamp(-spec.b * (z.z[t_index] * x + k), spec.u_min, spec.u_max);
}

ControlField lq_feedback_field(const LQSpec& spec, const RiccatiSolution& z, const Grid1D& grid) {
  ControlField u(grid, z.times);
  for (std::size_t s = 0; s < z.times.size(); ++s) {
    for (std::size_t i = 0; i < grid.size(); ++i) u.at(s, i) = lq_feedback(spec, z, grid.x(i), s);
  }
  return u;
}

ReducedMeanField solve_reduced_mean_field(const LQSpec& spec, double initial_mean, const TimeGrid& times,
                                          double theta, double tol, std::size_t max_iter) {
  if (!(theta > 0.0) || theta > 1.0) throw std::invalid_argument("solve_reduced_mean_field: theta in (0, 1]");
  const std::size_t nt = times.size();
  const double h = times.dt();
  const double b2 = spec.b * spec.b;

  ReducedMeanField out;
  out.mean.assign(nt, initial_mean);
  for (std::size_t it = 0; it < max_iter; ++it) {
    LQSpec frozen = spec;
    const std::vector<double> path = out.mean;
    frozen.coupling_mean = [&path, &times](double t) {
      const double pos = std::clamp(t / times.dt(), 0.0, static_cast<double>(path.size() - 1));
      const auto s = std::min(static_cast<std::size_t>(pos), path.size() - 2);
      const double w = pos - static_cast<double>(s);
      return (1.0 - w) * path[s] + w * path[s + 1];
    };
    const RiccatiSolution z = solve_riccati_scalar(frozen, times);
    out.riccati = solve_offset_ode(frozen, z, times);

    const auto& zz = out.riccati.z;
    const auto& kk = out.riccati.k;
    auto rhs = [&](double zt, double kt, double m) { return (spec.a + spec.beta - b2 * zt) * m - b2 * kt; };
    std::vector<double> next(nt);
    next[0] = initial_mean;
    for (std::size_t s = 0; s + 1 < nt; ++s) {
      const double zm = midpoint(zz, s);
      const double km = midpoint(kk, s);
      const double m = next[s];
      const double k1 = rhs(zz[s], kk[s], m);
      const double k2 = rhs(zm, km, m + 0.5 * h * k1);
      const double k3 = rhs(zm, km, m + 0.5 * h * k2);
      const double k4 = rhs(zz[s + 1], kk[s + 1], m + h * k3);
      next[s + 1] = m + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    double gap = 0.0;
    for (std::size_t s = 0; s < nt; ++s) {
      const double relaxed = (1.0 - theta) * out.mean[s] + theta * next[s];
      gap = std::max(gap, std::abs(relaxed - out.mean[s]));
      out.mean[s] = relaxed;
    }
    out.iterations = it + 1;
    out.final_gap = gap;
    if (gap <= tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace rsmfg
