#pragma once

#include <optional>
#include <span>

#include "rsmfg/model.hpp"

namespace rsmfg {

enum class HjbMode {
  risk_sensitive,  ///< includes (eps / 2 delta) |sigma dv/dx|^2
  robust,          ///< inf_u sup_zeta with penalty rho^2 zeta^2
  risk_neutral,    ///< drops the quadratic gradient term
};

struct HJBSolveOptions {
  std::size_t control_resolution = kDefaultControlResolution;
  HjbMode mode = HjbMode::risk_sensitive;
};

/// Finite differences of one value row at node i. Boundary nodes reuse the
/// adjacent interior differences.
struct Stencil {
  double forward = 0.0;
  double backward = 0.0;
  double central = 0.0;
  double second = 0.0;
};

Stencil stencil_at(std::span<const double> row, std::size_t i, double dx);

/// f * dv/dx (upwinded by the sign of f) + c, the part of the Hamiltonian that
/// depends on the control.
inline double control_hamiltonian(double drift, double cost, const Stencil& st) {
  return drift * (drift > 0.0 ? st.forward : st.backward) + cost;
}

/// Backward explicit upwind solve of
///   dv/dt + inf_u { f dv/dx + (eps/2) sigma^2 d2v/dx2 + (eps/2delta) sigma^2 (dv/dx)^2 + c } = 0,
/// v(T) = g, against a given population trajectory. Throws CflViolation or
/// NonFiniteValue. With mode == robust this forwards to solve_hji_robust.
ValueTrajectory solve_hjb(const ModelSpec& model, const DensityTrajectory& coupling, const Grid1D& grid,
                          const TimeGrid& times, const HJBSolveOptions& opts = {});

struct RobustValueTrajectory {
  ValueTrajectory value;
  Field disturbance;  ///< maximizing zeta*(t, x)
};

/// Upper value of the robust game: inf_u sup_zeta { (f + sigma zeta) dv/dx + c
/// - rho^2 zeta^2 + (eps/2) sigma^2 d2v/dx2 }. The disturbance is maximized
/// numerically on its own grid over |zeta| <= 10 max|sigma dv/dx| / (2 rho^2).
RobustValueTrajectory solve_hji_robust(const ModelSpec& model, const DensityTrajectory& coupling,
                                       const Grid1D& grid, const TimeGrid& times,
                                       const HJBSolveOptions& opts = {});

struct FeedbackFields {
  ControlField grid_argmin;
  /// -(b/2) dv/dx by central differences; present when a control gain is given.
  std::optional<ControlField> analytic;
};

FeedbackFields extract_feedback(const ValueTrajectory& v, std::optional<double> control_gain = std::nullopt);

}  // namespace rsmfg
