#include "rsmfg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rsmfg/model.hpp"

namespace rsmfg {

std::vector<LatticePoint> make_lattice(std::span<const double> xs, std::span<const double> ps,
                                       std::span<const double> zs) {
  std::vector<LatticePoint> out;
  out.reserve(xs.size() * ps.size() * zs.size());
  for (double x : xs) {
    for (double p : ps) {
      for (double z : zs) out.push_back({x, p, z});
    }
  }
  return out;
}

HamiltonianDerivatives hamiltonian_derivatives(const HamiltonianSpec& h, const LatticePoint& pt) {
  if (!(h.fd_step > 0.0)) throw std::invalid_argument("HamiltonianSpec: fd_step must be positive");
  if (!(pt.z > 0.0)) throw std::invalid_argument("lattice point needs z > 0");
  const double hp = h.fd_step * std::max(1.0, std::abs(pt.p));
  const double hz = h.fd_step * pt.z;
  const auto& H = h.H;
  const double x = pt.x;
  const double p = pt.p;
  const double z = pt.z;

  auto d_z = [&](double k) { return (H(x, p, z + k) - H(x, p, z - k)) / (2.0 * k); };
  auto d_pp = [&](double e) { return (H(x, p + e, z) - 2.0 * H(x, p, z) + H(x, p - e, z)) / (e * e); };
  auto d_pz = [&](double e, double k) {
    return (H(x, p + e, z + k) - H(x, p + e, z - k) - H(x, p - e, z + k) + H(x, p - e, z - k)) / (4.0 * e * k);
  };
  auto richardson = [](double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; };

  HamiltonianDerivatives d;
  d.Hz = richardson(d_z(hz), d_z(0.5 * hz));
  d.Hpp = richardson(d_pp(hp), d_pp(0.5 * hp));
  d.Hpz = richardson(d_pz(hp, hz), d_pz(0.5 * hp, 0.5 * hz));
  return d;
}

namespace {

constexpr double kStrictness = 1e-10;

void check_lattice(std::span<const LatticePoint> lattice) {
  for (const auto& pt : lattice) {
    if (!(pt.z > 0.0)) throw std::invalid_argument("uniqueness check: every lattice point needs z > 0");
  }
}

void accumulate(MonotonicityReport& rep, const PointVerdict& v) {
  const bool first = rep.points_checked == 0;
  ++rep.points_checked;
  if (v.pass) ++rep.points_passed;
  const double diag = std::min(v.a11, v.a22);
  if (first || v.det < rep.min_determinant) {
    rep.min_determinant = v.det;
    rep.worst_point = v.point;
  }
  if (first || diag < rep.min_diagonal) rep.min_diagonal = diag;
  rep.points.push_back(v);
}

}  // namespace

MonotonicityReport check_uniqueness_risk_neutral(const HamiltonianSpec& h, std::span<const LatticePoint> lattice) {
  check_lattice(lattice);
  MonotonicityReport rep;
  for (const auto& pt : lattice) {
    const auto d = hamiltonian_derivatives(h, pt);
    PointVerdict v;
    v.point = pt;
    v.a11 = d.Hpp;
    v.a12 = 0.5 * d.Hpz;
    v.a22 = -d.Hz / pt.z;
    v.det = v.a11 * v.a22 - v.a12 * v.a12;
    v.appendix_det = v.det;
    const double scale = std::max({std::abs(v.a11), std::abs(v.a12), std::abs(v.a22)});
    const double thr = kStrictness * scale;
    v.pass = v.a11 > thr && v.det > thr * scale;
    accumulate(rep, v);
  }
  return rep;
}

MonotonicityReport check_uniqueness_risk_sensitive(const HamiltonianSpec& h, std::span<const LatticePoint> lattice) {
  check_lattice(lattice);
  const double kappa = h.augmentation();
  MonotonicityReport rep;
  for (const auto& pt : lattice) {
    const auto d = hamiltonian_derivatives(h, pt);
    const double shift = kappa * pt.p / pt.z;
    PointVerdict v;
    v.point = pt;
    v.a11 = d.Hpp;
    v.a12 = d.Hpz - shift;
    v.a22 = -d.Hz / pt.z;
    v.det = v.a11 * v.a22 - v.a12 * v.a12;
    const double half = 0.5 * d.Hpz - shift;
    v.appendix_det = v.a11 * v.a22 - half * half;
    const double scale = std::max({std::abs(v.a11), std::abs(v.a12), std::abs(v.a22)});
    const double thr = kStrictness * scale;
    v.pass = v.a11 > thr && d.Hz < -thr * pt.z && v.det > thr * scale;
    accumulate(rep, v);
  }
  return rep;
}

MeanVarianceCheck mean_variance_expansion_check(std::span<const double> costs, double lambda) {
  if (costs.empty()) throw std::invalid_argument("mean_variance_expansion_check: no samples");
  if (lambda == 0.0 || !std::isfinite(lambda)) {
    throw std::invalid_argument("mean_variance_expansion_check: lambda must be finite and nonzero");
  }
  const double n = static_cast<double>(costs.size());
  double mean = 0.0;
  double top = -std::numeric_limits<double>::infinity();
  for (double c : costs) {
    if (!std::isfinite(c)) throw NonFiniteValue("mean_variance_expansion_check: non-finite cost sample");
    mean += c;
    top = std::max(top, lambda * c);
  }
  mean /= n;
  double var = 0.0;
  double sum = 0.0;
  for (double c : costs) {
    var += (c - mean) * (c - mean);
    sum += std::exp(lambda * c - top);
  }
  var /= n;

  MeanVarianceCheck out;
  out.exact = (top + std::log(sum) - std::log(n)) / lambda;
  out.two_term = mean + 0.5 * lambda * var;
  if (!std::isfinite(out.exact) || !std::isfinite(out.two_term)) {
    throw NonFiniteValue("mean_variance_expansion_check: overflow");
  }
  out.gap = std::abs(out.exact - out.two_term);
  return out;
}

}  // namespace rsmfg
