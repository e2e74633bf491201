#pragma once

#include <cstddef>
#include <vector>

#include "rsmfg/fpk.hpp"
#include "rsmfg/hjb.hpp"

namespace rsmfg {

struct MfgOptions {
  double theta = 0.5;  ///< damping, in (0, 1]
  double tol = 1e-6;
  std::size_t max_iter = 50;
  HJBSolveOptions hjb;
};

struct FixedPointReport {
  std::size_t iterations = 0;
  std::vector<double> residual_history;  ///< sup-norm density change per iteration
  bool converged = false;
  double final_gap = 0.0;
  double tolerance = 0.0;
  std::size_t clipped_nodes = 0;  ///< FPK clip count summed over iterations
};

struct MfgSolution {
  ValueTrajectory value;
  DensityTrajectory density;
  FixedPointReport report;
};

/// Damped Picard iteration between the backward HJB and forward FPK solvers,
/// starting from the initial density frozen in time. Each iterate's rows are
/// renormalized to unit mass. A run that hits max_iter returns its last iterate
/// with converged = false; solver errors propagate.
MfgSolution solve_mfg(const ModelSpec& model, const Grid1D& grid, const TimeGrid& times,
                      const MfgOptions& opts = {});

/// One relaxation step m <- (1 - theta) m + theta m_tilde with row
/// renormalization. Returns the sup-norm change.
double relax_density(DensityTrajectory& current, const DensityTrajectory& proposal, double theta);

struct VerifyOptions {
  double constant = 10.0;  ///< threshold is constant * (dx + dt)
  std::size_t control_resolution = kDefaultControlResolution;
  HjbMode mode = HjbMode::risk_sensitive;
};

struct NodeIndex {
  std::size_t s = 0;
  std::size_t i = 0;
};

struct VerificationReport {
  double threshold = 0.0;
  double hjb_residual = 0.0;  ///< relative to hjb_scale
  double hjb_scale = 0.0;
  NodeIndex hjb_worst;
  double terminal_mismatch = 0.0;
  double control_gap = 0.0;  ///< worst distance to the Hamiltonian argmin, in control cells
  double control_excess = 0.0;  ///< Hamiltonian excess at that node
  NodeIndex control_worst;
  double fpk_residual = 0.0;  ///< relative to fpk_scale
  double fpk_scale = 0.0;
  NodeIndex fpk_worst;
  bool hjb_ok = false;
  bool control_ok = false;
  bool fpk_ok = false;
  bool pass = false;
};

/// Checks a candidate pair at interior nodes: the HJB residual under the stored
/// control with central differences, that the stored control minimizes the
/// Hamiltonian within one control cell (or to value tolerance), and the FPK
/// residual of the density under that control.
VerificationReport verify_equilibrium(const ValueTrajectory& v, const DensityTrajectory& m, const ModelSpec& model,
                                      const VerifyOptions& opts = {});

// ---------------------------------------------------------------------------
// Linear backward-forward boundary value problem
// ---------------------------------------------------------------------------

enum class BvpSolvability { Unique, NoSolution, InfinitelyMany };

enum class BvpOrientation {
  mdot_equals_v,  ///< dm/dt = v, dv/dt = -m; singular horizons k*pi + 3*pi/4
  vdot_equals_m,  ///< dv/dt = m, dm/dt = -v; singular horizons k*pi + pi/4
};

inline constexpr double kBvpSingularTolerance = 1e-9;

/// Shooting on the oscillator with m(0) = m0 and v(T) = -m(T), parameterized
/// by a = v(0): alpha(T) a = beta(T) m0.
struct BvpResult {
  BvpSolvability classification = BvpSolvability::Unique;
  BvpOrientation orientation = BvpOrientation::mdot_equals_v;
  double alpha = 0.0;
  double beta = 0.0;
  double m0 = 0.0;
  double v0 = 0.0;  ///< shooting parameter; meaningful when Unique (0 otherwise)

  double m(double t) const;
  double v(double t) const;
};

BvpResult detect_bvp_solvability(double m0, double horizon,
                                 BvpOrientation orientation = BvpOrientation::mdot_equals_v);

const char* to_string(BvpSolvability s);

}  // namespace rsmfg
