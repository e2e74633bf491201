#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rsmfg/analysis.hpp"
#include "rsmfg/model.hpp"

using namespace rsmfg;

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return out;
}

std::vector<LatticePoint> standard_lattice() {
  const auto xs = linspace(-1.0, 1.0, 10);
  const auto ps = linspace(-2.0, 2.0, 21);
  const auto zs = linspace(0.2, 2.0, 10);
  return make_lattice(xs, ps, zs);
}

HamiltonianSpec with_kappa(std::function<double(double, double, double)> H, double kappa) {
  // kappa = eps sigma^2 / (2 delta) with eps = sigma = 1.
  HamiltonianSpec h;
  h.H = std::move(H);
  h.epsilon = 1.0;
  h.sigma = 1.0;
  h.delta = kappa > 0.0 ? 1.0 / (2.0 * kappa) : 1e300;
  return h;
}

const auto kLogFamily = [](double, double p, double z) { return 0.5 * p * p - std::log(z); };
const auto kIncreasing = [](double, double p, double z) { return 0.5 * p * p + z; };
const auto kZeroFree = [](double x, double p, double) { return 0.5 * p * p + x * p; };

}  // namespace

TEST_CASE("lattice is the cartesian product with x slowest") {
  const std::vector<double> xs{0, 1}, ps{2, 3, 4}, zs{5};
  const auto l = make_lattice(xs, ps, zs);
  REQUIRE(l.size() == 6);
  CHECK(l[1].p == 3);
  CHECK(l[3].x == 1);
}

TEST_CASE("finite differences match analytic derivatives to 1e-6 relative") {
  const auto H = [](double x, double p, double z) {
    return 0.7 * p * p + 0.2 * p * p * p - 1.3 * std::log(z) + 0.4 * p * std::log(z) + x * p;
  };
  HamiltonianSpec h;
  h.H = H;
  for (const auto& pt : standard_lattice()) {
    const auto d = hamiltonian_derivatives(h, pt);
    const double Hpp = 1.4 + 1.2 * pt.p;
    const double Hz = (-1.3 + 0.4 * pt.p) / pt.z;
    const double Hpz = 0.4 / pt.z;
    CHECK(std::abs(d.Hpp - Hpp) <= 1e-6 * std::max(1.0, std::abs(Hpp)));
    CHECK(std::abs(d.Hz - Hz) <= 1e-6 * std::max(1.0, std::abs(Hz)));
    CHECK(std::abs(d.Hpz - Hpz) <= 1e-6 * std::max(1.0, std::abs(Hpz)));
  }
  h.fd_step = 0.0;
  CHECK_THROWS_AS(hamiltonian_derivatives(h, {0, 0, 1}), std::invalid_argument);
}

TEST_CASE("risk-neutral patterns of the three families") {
  const auto lattice = standard_lattice();
  HamiltonianSpec h;
  h.H = kLogFamily;
  auto r = check_uniqueness_risk_neutral(h, lattice);
  CHECK(r.points_checked == 2100);
  CHECK(r.points_passed == 2100);
  CHECK(r.min_determinant > 0.0);
  h.H = kIncreasing;
  r = check_uniqueness_risk_neutral(h, lattice);
  CHECK(r.points_passed == 0);
  CHECK(r.min_diagonal < 0.0);
  h.H = kZeroFree;
  r = check_uniqueness_risk_neutral(h, lattice);
  CHECK(r.points_passed == 0);
  CHECK(r.points_passed <= r.points_checked);
}

TEST_CASE("risk-sensitive spot checks with kappa = 0.5") {
  const auto h = with_kappa(kLogFamily, 0.5);
  CHECK(h.augmentation() == doctest::Approx(0.5));
  const std::vector<LatticePoint> pts{{0.0, 0.0, 1.0}, {0.0, 3.0, 1.0}};
  const auto r = check_uniqueness_risk_sensitive(h, pts);
  CHECK(r.points[0].pass);
  CHECK(r.points[0].det == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_FALSE(r.points[1].pass);
  CHECK(r.points[1].a12 == doctest::Approx(-1.5).epsilon(1e-8));
  CHECK(r.points[1].det == doctest::Approx(1.0 - 2.25).epsilon(1e-8));
  CHECK(r.points[1].appendix_det == doctest::Approx(1.0 - 2.25).epsilon(1e-8));
}

TEST_CASE("vanishing augmentation reproduces the risk-neutral verdicts") {
  const auto lattice = standard_lattice();
  const auto h = with_kappa(kLogFamily, 0.0);
  const auto rn = check_uniqueness_risk_neutral(h, lattice);
  const auto rs = check_uniqueness_risk_sensitive(h, lattice);
  for (std::size_t k = 0; k < lattice.size(); ++k) CHECK(rn.points[k].pass == rs.points[k].pass);
}

TEST_CASE("risk-sensitive pass set shrinks as the augmentation grows") {
  const auto lattice = standard_lattice();
  std::vector<bool> previous(lattice.size(), true);
  std::size_t previous_count = lattice.size();
  for (double kappa : {0.0, 0.05, 0.15, 0.35, 0.55, 0.9, 1.7}) {
    const auto r = check_uniqueness_risk_sensitive(with_kappa(kLogFamily, kappa), lattice);
    for (std::size_t k = 0; k < lattice.size(); ++k) {
      if (r.points[k].pass) CHECK(previous[k]);
      previous[k] = r.points[k].pass;
    }
    CHECK(r.points_passed <= previous_count);
    previous_count = r.points_passed;
  }
  CHECK(previous_count < lattice.size());
}

TEST_CASE("scaling H and kappa together keeps every verdict") {
  const auto lattice = standard_lattice();
  for (double kappa : {0.1, 0.4, 0.9}) {
    const auto base = check_uniqueness_risk_sensitive(with_kappa(kLogFamily, kappa), lattice);
    const auto base_rn = check_uniqueness_risk_neutral(with_kappa(kLogFamily, kappa), lattice);
    for (double c : {0.01, 3.0, 250.0}) {
      auto scaled_H = [c](double x, double p, double z) { return c * kLogFamily(x, p, z); };
      const auto r = check_uniqueness_risk_sensitive(with_kappa(scaled_H, c * kappa), lattice);
      const auto rn = check_uniqueness_risk_neutral(with_kappa(scaled_H, c * kappa), lattice);
      for (std::size_t k = 0; k < lattice.size(); ++k) {
        CHECK(r.points[k].pass == base.points[k].pass);
        CHECK(rn.points[k].pass == base_rn.points[k].pass);
      }
    }
  }
}

TEST_CASE("non-positive z is rejected") {
  HamiltonianSpec h;
  h.H = kLogFamily;
  const std::vector<LatticePoint> bad{{0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}};
  CHECK_THROWS_AS(check_uniqueness_risk_neutral(h, bad), std::invalid_argument);
  CHECK_THROWS_AS(check_uniqueness_risk_sensitive(h, bad), std::invalid_argument);
}

TEST_CASE("mean-variance expansion: degenerate costs") {
  const std::vector<double> c(50, 2.5);
  for (double lambda : {-1.0, 0.01, 3.0}) {
    const auto r = mean_variance_expansion_check(c, lambda);
    CHECK(r.exact == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(r.two_term == 2.5);
    CHECK(r.gap <= 1e-14);
  }
}

TEST_CASE("mean-variance expansion: Gaussian costs") {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> c(1000000);
  for (double& v : c) v = nd(gen);
  for (double lambda : {0.2, 0.1, 0.05}) {
    const auto r = mean_variance_expansion_check(c, lambda);
    CHECK(std::abs(r.exact - oracle::gaussian_certainty_equivalent(0.0, 1.0, lambda)) <= 5e-3);
    CHECK(r.gap / (lambda * lambda) <= 0.1);
  }
}

TEST_CASE("mean-variance expansion: two-point costs") {
  const std::vector<double> c{0.0, 1.0};
  const auto r = mean_variance_expansion_check(c, 0.1);
  CHECK(r.exact == doctest::Approx(10.0 * std::log((1.0 + std::exp(0.1)) / 2.0)).epsilon(1e-14));
  CHECK(r.gap < 5e-4);
}

TEST_CASE("mean-variance expansion: argument and overflow errors") {
  const std::vector<double> c{0.0, 1.0};
  CHECK_THROWS_AS(mean_variance_expansion_check(c, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mean_variance_expansion_check(std::vector<double>{}, 1.0), std::invalid_argument);
  const std::vector<double> huge{1e308, -1e308};
  CHECK_THROWS_AS(mean_variance_expansion_check(huge, 10.0), NonFiniteValue);
}
