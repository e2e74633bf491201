#pragma once

#include <span>

#include "rsmfg/model.hpp"

namespace rsmfg {

inline constexpr double kMassTolerance = 1e-10;

struct FpkOptions {
  /// Optional extra drift sigma(t, x) * zeta(t, x), e.g. the disturbance field
  /// of a robust solve. Must live on the solver grids.
  const Field* disturbance = nullptr;
};

struct FpkDiagnostics {
  std::size_t clipped_nodes = 0;   ///< negative values set to zero over the run
  double max_mass_error = 0.0;     ///< worst per-step |mass_after - mass_before|
  double max_relative_undershoot = 0.0;  ///< worst pre-clip -min(m) / max(m)
};

struct FpkResult {
  DensityTrajectory density;
  FpkDiagnostics diagnostics;
};

/// Forward finite-volume solve of dm/dt + d/dx(f m) = (eps/2) d2/dx2(sigma^2 m)
/// with zero flux at both ends. Interface velocities are node averages of f,
/// upwinded by sign. The coupling features are recomputed from the current row
/// before each step. Throws CflViolation, MassDrift or NonFiniteValue.
FpkResult solve_fpk_report(const ModelSpec& model, const ControlField& control, const Grid1D& grid,
                           const TimeGrid& times, const FpkOptions& opts = {});

DensityTrajectory solve_fpk(const ModelSpec& model, const ControlField& control, const Grid1D& grid,
                            const TimeGrid& times, const FpkOptions& opts = {});

/// Max-norm of the discrete FPK right-hand side for one density row, with the
/// control taken from row s of the field.
double stationarity_residual(const ModelSpec& model, const ControlField& control, std::span<const double> density,
                             std::size_t s = 0);

}  // namespace rsmfg
