#pragma once

#include <cmath>
#include <numbers>

#include "rsmfg/model.hpp"
#include "rsmfg/riccati.hpp"

namespace fixture {

inline double gaussian(double x, double mean, double var) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

/// Scalar LQ player with a frozen population: f = u, c = a x^2 + u^2, g = Q x^2.
inline rsmfg::ModelSpec lq_model(double a, double Q, double sigma, double epsilon, double delta,
                                 double u_bound = 10.0) {
  rsmfg::ModelSpec m;
  m.drift = [](double, double, double u, const rsmfg::CouplingFeatures&) { return u; };
  m.diffusion = [sigma](double, double) { return sigma; };
  m.running_cost = [a](double, double x, double u, const rsmfg::CouplingFeatures&) { return a * x * x + u * u; };
  m.terminal_cost = [Q](double x) { return Q * x * x; };
  m.delta = delta;
  m.epsilon = epsilon;
  m.u_min = -u_bound;
  m.u_max = u_bound;
  m.initial_density = [](double x) { return gaussian(x, 1.0, 1.0); };
  m.control_gain = 1.0;
  return m;
}

inline rsmfg::LQSpec lq_spec(double a, double Q, double sigma, double epsilon, double delta) {
  rsmfg::LQSpec s;
  s.q = [a](double) { return a; };
  s.q_terminal = Q;
  s.b = 1.0;
  s.sigma = sigma;
  s.epsilon = epsilon;
  s.rho_sq = delta / (2.0 * epsilon);
  return s;
}

/// Affine example with the population mean frozen at M = 1:
/// q = 1.2, Q = 0.1, sigma = 2, eps = 5, delta = 1e5, T = 5.
struct FrozenAffine {
  double a = 0.2;
  double Q = 0.1;
  double sigma = 2.0;
  double epsilon = 5.0;
  double delta = 1e5;
  rsmfg::Grid1D grid{-19.0, 21.0, 201};
  rsmfg::TimeGrid times{5.0, 3001};

  rsmfg::ModelSpec model() const { return lq_model(a, Q, sigma, epsilon, delta); }
  rsmfg::LQSpec lq() const { return lq_spec(a, Q, sigma, epsilon, delta); }
};

/// Small LQ instance for fast unit tests.
struct SmallLq {
  double a = 1.0;
  double Q = 0.5;
  double sigma = 1.0;
  double epsilon = 1.0;
  double delta = 2.0;
  rsmfg::Grid1D grid{-4.0, 4.0, 81};
  rsmfg::TimeGrid times{0.5, 201};

  rsmfg::ModelSpec model() const { return lq_model(a, Q, sigma, epsilon, delta, 5.0); }
  rsmfg::LQSpec lq() const { return lq_spec(a, Q, sigma, epsilon, delta); }
};

}  // namespace fixture
