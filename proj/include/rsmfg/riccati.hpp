#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "rsmfg/model.hpp"

namespace rsmfg {

/// Scalar linear-quadratic instance: dx = (a x + beta M(t) + b u) dt + sqrt(eps) sigma dB,
/// running cost (q(t) - Lambda(t, M(t))) x^2 + u^2, terminal cost q_terminal x^2.
struct LQSpec {
  std::function<double(double t)> q = [](double) { return 0.0; };
  double q_terminal = 0.0;
  double b = 1.0;
  double a = 0.0;
  double sigma = 1.0;
  double epsilon = 1.0;
  double rho_sq = 1.0;
  std::function<double(double t, double mean)> lambda_shift = [](double, double) { return 0.0; };
  std::function<double(double t)> coupling_mean = [](double) { return 0.0; };
  double beta = 0.0;
  double u_min = -std::numeric_limits<double>::infinity();
  double u_max = std::numeric_limits<double>::infinity();

  /// Coefficient of z^2 in the Riccati equation, b^2 - sigma^2/rho^2.
  double quadratic_gain() const { return b * b - sigma * sigma / rho_sq; }
};

/// Samples of z(t) and the offset k(t) on a time grid.
struct RiccatiSolution {
  TimeGrid times;
  std::vector<double> z;
  std::vector<double> k;
};

inline constexpr double kRiccatiBlowupThreshold = 1e9;

/// RK4 backward from z(T) = q_terminal for
///   dz/dt = -q(t) + Lambda(t, M(t)) - 2 a z + (b^2 - sigma^2/rho^2) z^2.
/// Throws FiniteTimeBlowup when |z| exceeds 1e9 before t = 0.
RiccatiSolution solve_riccati_scalar(const LQSpec& spec, const TimeGrid& times);

/// RK4 backward from k(T) = 0 for
///   dk/dt = (b^2 - sigma^2/rho^2) z k - a k - beta z M(t),
/// the linear-coefficient equation obtained with v = z x^2 + 2 k x + c.
/// z is interpolated to half steps with a four-point cubic.
RiccatiSolution solve_offset_ode(const LQSpec& spec, const RiccatiSolution& z, const TimeGrid& times);

/// z(t) x^2 + eps sigma^2 * integral_t^T z(s) ds (trapezoid rule on the stored samples).
double lq_value(const LQSpec& spec, const RiccatiSolution& z, double x, std::size_t t_index);

/// Optimal feedback -b (z(t) x + k(t)) clipped to [u_min, u_max].
double lq_feedback(const LQSpec& spec, const RiccatiSolution& z, double x, std::size_t t_index);

/// Feedback sampled on a grid pair, for the FPK and particle solvers.
ControlField lq_feedback_field(const LQSpec& spec, const RiccatiSolution& z, const Grid1D& grid);

/// Riccati pair coupled to its own population mean
///   dM/dt = (a + beta - b^2 z) M - b^2 k,  M(0) = initial_mean,
/// by damped iteration on the mean path. spec.coupling_mean is ignored.
struct ReducedMeanField {
  RiccatiSolution riccati{TimeGrid(1.0, 2), {}, {}};
  std::vector<double> mean;
  std::size_t iterations = 0;
  bool converged = false;
  double final_gap = 0.0;
};

ReducedMeanField solve_reduced_mean_field(const LQSpec& spec, double initial_mean, const TimeGrid& times,
                                          double theta = 0.5, double tol = 1e-10, std::size_t max_iter = 200);

}  // namespace rsmfg
