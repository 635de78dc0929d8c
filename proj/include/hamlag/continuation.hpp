#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hamlag/variational.hpp"

namespace hamlag {

struct NewtonOptions {
  double tol = 1e-10;            // residual sup-norm target
  int max_iters = 8;
  double multiplier_tol = 1e-8;  // converged multipliers should sit below this
  double singular_tol = 1e-10;   // relative smallest singular value of the bordered matrix
};

/// Step caps; continuation runs must respect these.
inline constexpr double kMaxTimeStep = 0.05;
inline constexpr double kMaxLeafStep = 0.02;

/// A converged (or in-flight) point of the tracked family.
struct ContinuationState {
  double t = 0.0;
  LagrangianRep rep;              // harmonic part = leaf label; h = potential
  Eigen::VectorXd multipliers;    // one per active constraint
  double residual_sup = 0.0;
  double volume = 0.0;
  int newton_iters = 0;
  double kernel_gap = 0.0;
  std::optional<NondegeneracyVerdict> verdict;

  const Eigen::VectorXd& eta() const { return rep.harmonic; }
};

ContinuationState makeState(LagrangianRep rep, double t = 0.0);

enum class Termination { Completed, DegeneracyDetected, ChartExit, NoConvergence };
const char* terminationName(Termination t);

struct PathResult {
  std::vector<ContinuationState> steps;
  Termination termination = Termination::Completed;
  std::string message;
  bool degenerate_start = false;  // frozen-gauge fallback was active
};

/// Bordered Newton corrector: solves [Jac K; K^T 0] [dh; lambda] =
/// [-residual; -K^T h] with K the independent moment-map candidates at the
/// current rep (recomputed every iteration).  Throws DegeneracyError when
/// the bordered matrix is singular beyond the constraints.
ContinuationState newtonSolve(const ContinuationState& state, const NewtonOptions& opts = {});

/// Same corrector with a caller-supplied, frozen constraint basis
/// (coefficient-space columns); used by the degenerate-start fallback.
ContinuationState newtonSolveConstrained(const ContinuationState& state,
                                         const Eigen::MatrixXd& constraints,
                                         const NewtonOptions& opts = {});

/// Track the stationary Lagrangian along the metric family from state.t to
/// t_max in uniform steps (secant predictor, Newton corrector), re-checking
/// the nondegeneracy verdict at every step.  Degenerate starts proceed
/// under the frozen-gauge fallback and stamp every record.
PathResult continueInT(const ContinuationState& state0, double t_max, int steps,
                       const NewtonOptions& opts = {});

/// Step the harmonic part from its current value to eta_target at fixed t,
/// correcting inside each leaf.
PathResult continueInLeaf(const ContinuationState& state0, const Eigen::VectorXd& eta_target,
                          int steps, const NewtonOptions& opts = {});

/// Independent 1-D check for rotationally symmetric metrics on S^2: the
/// latitude circle with prescribed geodesic curvature, found by bisection
/// on z.  Curvature comes from a finite-difference of the metric evaluator,
/// not from the spectral pipeline.
struct ShootingResult {
  double z_star = 0.0;
  double kappa_g = 0.0;
  Eigen::ArrayXd curve_z;    // constant samples (one per grid angle)
  Eigen::ArrayXd curve_phi;
};

double latitudeGeodesicCurvature(const AmbientModel& model, double t, double z);
ShootingResult shootingOracleS2(const AmbientModel& model, double t, double kappa_target,
                                int samples = 128);

}  // namespace hamlag
