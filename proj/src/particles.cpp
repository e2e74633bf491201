#include "rsmfg/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "rsmfg/fpk.hpp"

namespace rsmfg {

Feedback zero_feedback() {
  return [](double, double, std::size_t) { return 0.0; };
}

Feedback feedback_from_field(ControlField field) {
  return [f = std::move(field)](double t, double x, std::size_t) { return f.interpolate(t, x); };
}

Feedback per_particle_feedback(std::vector<double> values) {
  return [v = std::move(values)](double, double, std::size_t id) {
    if (id >= v.size()) throw std::out_of_range("per_particle_feedback: no value for particle id");
    return v[id];
  };
}

ParticleEnsemble ParticleEnsemble::create(std::vector<double> states, std::uint64_t seed,
                                          std::vector<std::uint64_t> ids) {
  if (states.empty()) throw std::invalid_argument("ParticleEnsemble: need at least one particle");
  for (double x : states) {
    if (!std::isfinite(x)) throw std::invalid_argument("ParticleEnsemble: states must be finite");
  }
  if (ids.empty()) {
    ids.resize(states.size());
    std::iota(ids.begin(), ids.end(), std::uint64_t{0});
  }
  if (ids.size() != states.size()) throw DimensionError("ParticleEnsemble: one id per state required");
  ParticleEnsemble e;
  e.states = std::move(states);
  e.ids = std::move(ids);
  e.rng_seed = seed;
  return e;
}

namespace {

std::vector<std::size_t> id_order(const ParticleEnsemble& e) {
  std::vector<std::size_t> order(e.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!std::is_sorted(e.ids.begin(), e.ids.end())) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return e.ids[a] < e.ids[b]; });
  }
  return order;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

CouplingFeatures ensemble_features(const ParticleEnsemble& e) {
  CouplingFeatures cf;
  for (std::size_t k : id_order(e)) {
    const double x = e.states[k];
    cf.mean += x;
    cf.mean_cos += std::cos(x);
    cf.mean_sin += std::sin(x);
  }
  const double n = static_cast<double>(e.size());
  cf.mean /= n;
  cf.mean_cos /= n;
  cf.mean_sin /= n;
  return cf;
}

Moments ensemble_moments(const ParticleEnsemble& e) {
  const auto order = id_order(e);
  double mean = 0.0;
  for (std::size_t k : order) mean += e.states[k];
  mean /= static_cast<double>(e.size());
  double var = 0.0;
  for (std::size_t k : order) var += (e.states[k] - mean) * (e.states[k] - mean);
  return {mean, var / static_cast<double>(e.size())};
}

ParticleEnsemble step_particles(const ParticleEnsemble& e, const ModelSpec& model, const Feedback& feedback,
                                double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_particles: dt must be positive");
  if (e.states.empty() || e.ids.size() != e.states.size()) {
    throw DimensionError("step_particles: ensemble needs one id per state");
  }
  const CouplingFeatures cf = ensemble_features(e);
  const CounterRng rng(e.rng_seed);
  const double noise_scale = std::sqrt(model.epsilon * dt);

  ParticleEnsemble out = e;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double x = e.states[k];
    const std::uint64_t id = e.ids[k];
    const double u = feedback(e.time, x, static_cast<std::size_t>(id));
    double next = x + model.drift(e.time, x, u, cf) * dt;
    const double sigma = model.diffusion(e.time, x);
    if (sigma != 0.0 && noise_scale != 0.0) {
      next += noise_scale * sigma * rng.normal(Stream::diffusion, id, e.step_index);
    }
    if (!std::isfinite(next)) throw SimulationFault(e.step_index, "non-finite particle state");
    out.states[k] = next;
  }
  out.step_index = e.step_index + 1;
  out.time = e.time + dt;
  return out;
}

ParticleEnsemble simulate_particles(ParticleEnsemble e, const ModelSpec& model, const Feedback& feedback, double dt,
                                    std::size_t steps, const std::function<void(const ParticleEnsemble&)>& observer) {
  if (observer) observer(e);
  for (std::size_t s = 0; s < steps; ++s) {
    e = step_particles(e, model, feedback, dt);
    if (observer) observer(e);
  }
  return e;
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1: sample sets must be nonempty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
  }
  // Quantile levels are k/na and l/nb; compare them exactly as k*nb vs l*na.
  const std::uint64_t na = a.size();
  const std::uint64_t nb = b.size();
  std::size_t i = 0;
  std::size_t j = 0;
  std::uint64_t pos = 0;
  long double sum = 0.0L;
  while (i < na && j < nb) {
    const std::uint64_t end_a = (i + 1) * nb;
    const std::uint64_t end_b = (j + 1) * na;
    const std::uint64_t end = std::min(end_a, end_b);
    sum += static_cast<long double>(end - pos) * std::abs(static_cast<long double>(a[i]) - b[j]);
    pos = end;
    if (end_a == end) ++i;
    if (end_b == end) ++j;
  }
  return static_cast<double>(sum / static_cast<long double>(na * nb));
}

CellQuantile::CellQuantile(const Grid1D& grid, std::span<const double> density) : grid_(grid) {
  if (density.size() != grid.size()) throw DimensionError("CellQuantile: row size mismatch");
  cdf_.assign(grid.size() + 1, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) cdf_[i + 1] = cdf_[i] + std::max(density[i], 0.0) * grid.dx();
  if (!(cdf_.back() > 0.0)) throw std::invalid_argument("CellQuantile: density has no mass");
  for (double& c : cdf_) c /= cdf_.back();
}

double CellQuantile::operator()(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t cell = it == cdf_.begin() ? 0 : static_cast<std::size_t>(it - cdf_.begin()) - 1;
  cell = std::min(cell, grid_.size() - 1);
  const double width = cdf_[cell + 1] - cdf_[cell];
  const double frac = width > 0.0 ? std::clamp((u - cdf_[cell]) / width, 0.0, 1.0) : 0.5;
  return grid_.x(cell) - 0.5 * grid_.dx() + frac * grid_.dx();
}

std::vector<double> sample_initial_states(const ModelSpec& model, const Grid1D& grid, std::size_t n,
                                          std::uint64_t seed) {
  const auto m0 = sample_initial_density(model, grid);
  const CellQuantile quantile(grid, m0);
  const CounterRng rng(seed);
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = quantile(rng.uniform(Stream::initial_state, j, 0));
  return x;
}

namespace {

// FPK law at T under the sampled feedback; refines the time grid until CFL holds.
std::pair<std::vector<double>, std::size_t> reference_density(const ModelSpec& model, const Feedback& feedback,
                                                              const ConvergenceOptions& opts) {
  const Grid1D& grid = opts.grid;
  auto nt = static_cast<std::size_t>(std::ceil(opts.horizon / opts.dt - 1e-9)) + 1;
  for (int attempt = 0; attempt < 4; ++attempt) {
    const TimeGrid times(opts.horizon, std::max<std::size_t>(nt, 2));
    ControlField control(grid, times);
    for (std::size_t s = 0; s < times.size(); ++s) {
      for (std::size_t i = 0; i < grid.size(); ++i) control.at(s, i) = feedback(times.t(s), grid.x(i), 0);
    }
    try {
      const DensityTrajectory d = solve_fpk(model, control, grid, times);
      const auto last = d.row(times.size() - 1);
      return {std::vector<double>(last.begin(), last.end()), times.size() - 1};
    } catch (const CflViolation& e) {
      nt = static_cast<std::size_t>(std::ceil(opts.horizon / (0.9 * e.limit()))) + 1;
    }
  }
  throw CflViolation(opts.horizon / static_cast<double>(nt - 1), opts.horizon / static_cast<double>(nt));
}

}  // namespace

ConvergenceReport convergence_study(const ModelSpec& model, const Feedback& feedback, const ConvergenceOptions& opts) {
  if (opts.n_values.size() < 3) throw std::invalid_argument("convergence_study: need at least three n values");
  if (opts.replicas < 2) throw std::invalid_argument("convergence_study: need at least two replicas");
  if (!(opts.dt > 0.0) || !(opts.horizon > 0.0)) throw std::invalid_argument("convergence_study: dt, T > 0");
  if (opts.reference_draws == 0) throw std::invalid_argument("convergence_study: reference_draws must be positive");
  for (std::size_t n : opts.n_values) {
    if (n == 0) throw std::invalid_argument("convergence_study: n values must be positive");
  }

  ConvergenceReport report;
  report.n_values = opts.n_values;

  bool noisy = false;
  if (model.epsilon > 0.0) {
    for (std::size_t i = 0; i < opts.grid.size() && !noisy; ++i) noisy = model.diffusion(0.0, opts.grid.x(i)) != 0.0;
  }
  report.deterministic_regime = !noisy;

  const auto [law, fpk_steps] = reference_density(model, feedback, opts);
  report.reference_steps = fpk_steps;
  const CellQuantile reference_quantile(opts.grid, law);
  std::vector<double> reference(opts.reference_draws);
  for (std::size_t k = 0; k < reference.size(); ++k) {
    reference[k] = reference_quantile((static_cast<double>(k) + 0.5) / static_cast<double>(reference.size()));
  }

  const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts.horizon / opts.dt)));
  const double dt = opts.horizon / static_cast<double>(steps);
  const auto m0 = sample_initial_density(model, opts.grid);
  const CellQuantile initial_quantile(opts.grid, m0);

  const std::size_t R = opts.replicas;
  std::vector<std::vector<double>> w1(opts.n_values.size(), std::vector<double>(R));
  for (std::size_t a = 0; a < opts.n_values.size(); ++a) {
    const std::size_t n = opts.n_values[a];
    for (std::size_t r = 0; r < R; ++r) {
      const std::uint64_t seed = mix_seed(opts.seed, n, r);
      const CounterRng rng(seed);
      std::vector<double> x0(n);
      for (std::size_t j = 0; j < n; ++j) {
        x0[j] = opts.fixed_start ? *opts.fixed_start : initial_quantile(rng.uniform(Stream::initial_state, j, 0));
      }
      const ParticleEnsemble end =
          simulate_particles(ParticleEnsemble::create(std::move(x0), seed), model, feedback, dt, steps);
      w1[a][r] = wasserstein1(end.states, reference);
    }
    const double mean = std::accumulate(w1[a].begin(), w1[a].end(), 0.0) / static_cast<double>(R);
    double var = 0.0;
    for (double w : w1[a]) var += (w - mean) * (w - mean);
    var /= static_cast<double>(R - 1);
    report.w1_errors.push_back(mean);
    report.w1_stderr.push_back(std::sqrt(var / static_cast<double>(R)));
  }

  constexpr double kFloor = 1e-300;
  std::vector<double> log_n;
  std::vector<double> log_w;
  for (std::size_t a = 0; a < opts.n_values.size(); ++a) {
    log_n.push_back(std::log(static_cast<double>(opts.n_values[a])));
    log_w.push_back(std::log(std::max(report.w1_errors[a], kFloor)));
  }
  report.fitted_exponent = least_squares_slope(log_n, log_w);

  for (std::size_t r = 0; r < R; ++r) {
    std::vector<double> y;
    for (std::size_t a = 0; a < opts.n_values.size(); ++a) y.push_back(std::log(std::max(w1[a][r], kFloor)));
    report.replica_exponents.push_back(least_squares_slope(log_n, y));
  }
  const double mean_slope =
      std::accumulate(report.replica_exponents.begin(), report.replica_exponents.end(), 0.0) / static_cast<double>(R);
  double slope_var = 0.0;
  for (double s : report.replica_exponents) slope_var += (s - mean_slope) * (s - mean_slope);
  slope_var /= static_cast<double>(R - 1);
  report.exponent_stderr = std::sqrt(slope_var / static_cast<double>(R));
  return report;
}

CostEstimate estimate_risk_sensitive_cost(const ModelSpec& model, const Feedback& feedback, double x0,
                                          const DensityTrajectory& mean_field, std::size_t paths,
                                          std::uint64_t seed) {
  if (paths == 0) throw std::invalid_argument("estimate_risk_sensitive_cost: paths must be positive");
  if (!(model.delta > 0.0) || model.epsilon < 0.0) {
    throw std::invalid_argument("estimate_risk_sensitive_cost: need delta > 0 and epsilon >= 0");
  }
  const Grid1D& grid = mean_field.grid();
  const TimeGrid& times = mean_field.times();
  const std::size_t nt = times.size();
  const double dt = times.dt();
  const double noise_scale = std::sqrt(model.epsilon * dt);

  std::vector<CouplingFeatures> features(nt);
  for (std::size_t s = 0; s < nt; ++s) features[s] = population_features(grid, mean_field.row(s));

  const CounterRng rng(seed);
  CostEstimate out;
  out.paths = paths;
  out.costs.resize(paths);
  for (std::size_t p = 0; p < paths; ++p) {
    double x = x0;
    double cost = 0.0;
    for (std::size_t s = 0; s + 1 < nt; ++s) {
      const double t = times.t(s);
      CouplingFeatures cf = features[s];
      cf.density_at_x = mean_field.values.interpolate(t, x);
      const double u = feedback(t, x, p);
      cost += model.running_cost(t, x, u, cf) * dt;
      double next = x + model.drift(t, x, u, cf) * dt;
      const double sigma = model.diffusion(t, x);
      if (sigma != 0.0 && noise_scale != 0.0) next += noise_scale * sigma * rng.normal(Stream::cost_paths, p, s);
      x = next;
      if (!std::isfinite(x) || !std::isfinite(cost)) throw SimulationFault(s, "non-finite cost path");
    }
    cost += model.terminal_cost(x);
    if (!std::isfinite(cost)) throw SimulationFault(nt - 1, "non-finite terminal cost");
    out.costs[p] = cost;
  }

  const double P = static_cast<double>(paths);
  double s_max = -std::numeric_limits<double>::infinity();
  for (double c : out.costs) s_max = std::max(s_max, c / model.delta);
  double w_sum = 0.0;
  for (double c : out.costs) w_sum += std::exp(c / model.delta - s_max);
  const double w_mean = w_sum / P;
  out.estimate = model.delta * (s_max + std::log(w_mean));

  out.mean_cost = std::accumulate(out.costs.begin(), out.costs.end(), 0.0) / P;
  if (paths > 1) {
    double w_var = 0.0;
    double c_var = 0.0;
    for (double c : out.costs) {
      const double w = std::exp(c / model.delta - s_max);
      w_var += (w - w_mean) * (w - w_mean);
      c_var += (c - out.mean_cost) * (c - out.mean_cost);
    }
    w_var /= P - 1.0;
    out.cost_variance = c_var / (P - 1.0);
    out.standard_error = model.delta * std::sqrt(w_var) / (std::sqrt(P) * w_mean);
  }
  return out;
}

}  // namespace rsmfg
