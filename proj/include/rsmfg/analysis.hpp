#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rsmfg {

/// Hamiltonian H(x, p, z) with the risk-sensitive augmentation coefficient
/// kappa = eps sigma^2 / (2 delta).
struct HamiltonianSpec {
  std::function<double(double x, double p, double z)> H;
  double epsilon = 1.0;
  double delta = 1.0;
  double sigma = 1.0;
  double fd_step = 1e-3;  ///< relative finite-difference step

  double augmentation() const { return epsilon * sigma * sigma / (2.0 * delta); }
};

struct LatticePoint {
  double x = 0.0;
  double p = 0.0;
  double z = 1.0;
};

/// Cartesian product xs * ps * zs, x slowest.
std::vector<LatticePoint> make_lattice(std::span<const double> xs, std::span<const double> ps,
                                       std::span<const double> zs);

struct HamiltonianDerivatives {
  double Hz = 0.0;
  double Hpp = 0.0;
  double Hpz = 0.0;
};

/// Central differences with one Richardson step (h and h/2).
HamiltonianDerivatives hamiltonian_derivatives(const HamiltonianSpec& h, const LatticePoint& pt);

struct PointVerdict {
  LatticePoint point;
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;
  double det = 0.0;
  double appendix_det = 0.0;  ///< risk-sensitive checker only: a11 a22 - (Hpz/2 - kappa p/z)^2
  bool pass = false;
};

struct MonotonicityReport {
  std::size_t points_checked = 0;
  std::size_t points_passed = 0;
  double min_determinant = 0.0;
  double min_diagonal = 0.0;
  LatticePoint worst_point;
  std::vector<PointVerdict> points;
};

/// Positive definiteness of [[Hpp, Hpz/2], [Hpz/2, -Hz/z]] at every lattice
/// point. Throws std::invalid_argument if some z <= 0.
MonotonicityReport check_uniqueness_risk_neutral(const HamiltonianSpec& h, std::span<const LatticePoint> lattice);

/// Pointwise Hpp > 0, Hz < 0 and (-Hz/z) Hpp > (Hpz - kappa p/z)^2.
/// Reports a12 = Hpz - kappa p/z and det = a11 a22 - a12^2.
MonotonicityReport check_uniqueness_risk_sensitive(const HamiltonianSpec& h, std::span<const LatticePoint> lattice);

struct MeanVarianceCheck {
  double exact = 0.0;     ///< (1/lambda) log mean exp(lambda C)
  double two_term = 0.0;  ///< mean + (lambda/2) variance
  double gap = 0.0;
};

/// Throws std::invalid_argument on empty samples or lambda == 0 and
/// NonFiniteValue on non-finite input or overflow.
MeanVarianceCheck mean_variance_expansion_check(std::span<const double> costs, double lambda);

}  // namespace rsmfg
