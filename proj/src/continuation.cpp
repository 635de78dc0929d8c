#include "hamlag/continuation.hpp"

#include <cmath>
#include <functional>

#include "hamlag/errors.hpp"

namespace hamlag {

namespace {

struct CorrectorResult {
  ContinuationState state;
};

// One bordered-Newton run.  `fixed_constraints` freezes the gauge basis;
// otherwise the moment-map candidates are recomputed every iteration.
ContinuationState correct(const ContinuationState& input,
                          const std::optional<Eigen::MatrixXd>& fixed_constraints,
                          const NewtonOptions& opts) {
  ContinuationState state = input;
  const int d = state.rep.chartDim();
  const int size = SpectralField::realBasisSize(d, state.rep.cutoff());
  Eigen::VectorXd x = state.rep.h.toRealCoeffs();

  int iter = 0;
  Eigen::VectorXd multipliers;
  while (true) {
    const ElResidual res = elResidual(state.rep, state.t);
    Eigen::MatrixXd K;
    if (fixed_constraints) {
      K = *fixed_constraints;
    } else {
      K = kernelCandidates(state.rep).independent;
    }
    const int k = static_cast<int>(K.cols());
    const double gauge = k > 0 ? (K.transpose() * x).cwiseAbs().maxCoeff() : 0.0;

    if (res.sup_norm < opts.tol && gauge < opts.tol) {
      state.residual_sup = res.sup_norm;
      state.newton_iters = iter;
      state.multipliers = multipliers.size() > 0 ? multipliers : Eigen::VectorXd::Zero(k);
      return state;
    }
    if (iter >= opts.max_iters) {
      throw NumericError("newtonSolve: no convergence after " + std::to_string(iter) +
                         " iterations (residual " + std::to_string(res.sup_norm) + ")");
    }

    const JacobiAssembler assembler(state.rep, state.t, JacobiForm::Full);
    const JacobiOperator jac = assembler.assemble(/*with_spectrum=*/false);

    Eigen::MatrixXd bordered = Eigen::MatrixXd::Zero(size + k, size + k);
    bordered.topLeftCorner(size, size) = jac.op;
    if (k > 0) {
      bordered.topRightCorner(size, k) = K;
      bordered.bottomLeftCorner(k, size) = K.transpose();
    }
    Eigen::VectorXd rhs(size + k);
    rhs.head(size) = -res.field.toRealCoeffs();
    if (k > 0) rhs.tail(k) = -K.transpose() * x;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(bordered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()[0];
    const double smin = svd.singularValues()[svd.singularValues().size() - 1];
    if (!(smin > opts.singular_tol * smax)) {
      throw DegeneracyError(
          "newtonSolve: bordered system singular beyond the constraints "
          "(Jacobi kernel exceeds the candidate span)");
    }
    const Eigen::VectorXd sol = svd.solve(rhs);
    x += sol.head(size);
    multipliers = sol.tail(k);
    state.rep = state.rep.withPotential(SpectralField::fromRealCoeffs(d, state.rep.cutoff(), x));
    ++iter;
  }
}

void addDiagnostics(ContinuationState& state) {
  state.volume = volume(state.rep, state.t);
  const JacobiOperator op = jacobiFull(state.rep, state.t);
  const KernelCandidates cand = kernelCandidates(state.rep);
  NondegeneracyVerdict v = nondegeneracy(op, cand);
  state.kernel_gap = v.kernel_gap;
  state.verdict = std::move(v);
}

Eigen::MatrixXd frozenKernelBasis(const ContinuationState& state) {
  const JacobiOperator op = jacobiFull(state.rep, state.t);
  std::vector<int> kernel_idx;
  const double scale = op.eigenvalues.cwiseAbs().maxCoeff();
  for (int i = 0; i < op.eigenvalues.size(); ++i) {
    if (std::abs(op.eigenvalues[i]) < kKernelTol * scale) kernel_idx.push_back(i);
  }
  Eigen::MatrixXd K(op.eigenvectors.rows(), kernel_idx.size());
  for (std::size_t i = 0; i < kernel_idx.size(); ++i) {
    K.col(static_cast<int>(i)) = op.eigenvectors.col(kernel_idx[i]);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(K);
  return Eigen::MatrixXd(qr.householderQ()).leftCols(static_cast<int>(kernel_idx.size()));
}

using StepFunction = std::function<ContinuationState(int step, const ContinuationState& pred)>;

PathResult runPath(const ContinuationState& start, int steps, const NewtonOptions& opts,
                   const std::function<ContinuationState(int)>& predictor_base,
                   const StepFunction& do_step) {
  PathResult run;
  run.steps.push_back(start);
  for (int step = 1; step <= steps; ++step) {
    ContinuationState pred = predictor_base(step);
    // Secant predictor in h once two converged states exist.
    if (run.steps.size() >= 2) {
      const SpectralField& hk = run.steps.back().rep.h;
      const SpectralField& hk1 = run.steps[run.steps.size() - 2].rep.h;
      pred.rep = pred.rep.withPotential(hk + (hk - hk1));
    } else {
      pred.rep = pred.rep.withPotential(run.steps.back().rep.h);
    }
    try {
      ContinuationState next = do_step(step, pred);
      addDiagnostics(next);
      run.steps.push_back(std::move(next));
    } catch (const ChartRangeError& e) {
      run.termination = Termination::ChartExit;
      run.message = e.what();
      return run;
    } catch (const DegeneracyError& e) {
      run.termination = Termination::DegeneracyDetected;
      run.message = e.what();
      return run;
    } catch (const NumericError& e) {
      run.termination = Termination::NoConvergence;
      run.message = e.what();
      return run;
    }
  }
  run.termination = Termination::Completed;
  return run;
}

}  // namespace

ContinuationState makeState(LagrangianRep rep, double t) {
  ContinuationState s;
  s.t = t;
  s.rep = std::move(rep);
  return s;
}

ContinuationState newtonSolve(const ContinuationState& state, const NewtonOptions& opts) {
  return correct(state, std::nullopt, opts);
}

ContinuationState newtonSolveConstrained(const ContinuationState& state,
                                         const Eigen::MatrixXd& constraints,
                                         const NewtonOptions& opts) {
  return correct(state, constraints, opts);
}

const char* terminationName(Termination t) {
  switch (t) {
    case Termination::Completed:
      return "completed";
    case Termination::DegeneracyDetected:
      return "degeneracy_detected";
    case Termination::ChartExit:
      return "chart_exit";
    case Termination::NoConvergence:
      return "no_convergence";
  }
  return "no_convergence";
}

PathResult continueInT(const ContinuationState& state0, double t_max, int steps,
                       const NewtonOptions& opts) {
  if (steps < 1) throw PreconditionError("continueInT: steps must be >= 1");
  const double dt = (t_max - state0.t) / steps;
  if (std::abs(dt) > kMaxTimeStep + 1e-12) {
    throw PreconditionError("continueInT: |dt| exceeds the step cap; use more steps");
  }

  // Converge and classify the start.
  ContinuationState start = newtonSolve(state0, opts);
  addDiagnostics(start);
  const bool degenerate_start = start.verdict->verdict != Verdict::GNondegenerate;
  std::optional<Eigen::MatrixXd> frozen;
  if (degenerate_start) frozen = frozenKernelBasis(start);

  const double t0 = state0.t;
  PathResult run = runPath(
      start, steps, opts,
      [&](int step) {
        ContinuationState pred = start;
        pred.t = t0 + dt * step;
        return pred;
      },
      [&](int, const ContinuationState& pred) {
        return frozen ? newtonSolveConstrained(pred, *frozen, opts) : newtonSolve(pred, opts);
      });
  run.degenerate_start = degenerate_start;
  return run;
}

PathResult continueInLeaf(const ContinuationState& state0, const Eigen::VectorXd& eta_target,
                          int steps, const NewtonOptions& opts) {
  if (steps < 1) throw PreconditionError("continueInLeaf: steps must be >= 1");
  const Eigen::VectorXd eta0 = state0.rep.harmonic;
  if (eta_target.size() != eta0.size()) {
    throw PreconditionError("continueInLeaf: eta_target dimension mismatch");
  }
  const Eigen::VectorXd deta = (eta_target - eta0) / steps;
  if (deta.cwiseAbs().maxCoeff() > kMaxLeafStep + 1e-12) {
    throw PreconditionError("continueInLeaf: |deta| exceeds the step cap; use more steps");
  }

  ContinuationState start = newtonSolve(state0, opts);
  addDiagnostics(start);
  const bool degenerate_start = start.verdict->verdict != Verdict::GNondegenerate;
  std::optional<Eigen::MatrixXd> frozen;
  if (degenerate_start) frozen = frozenKernelBasis(start);

  PathResult run = runPath(
      start, steps, opts,
      [&](int step) {
        ContinuationState pred = start;
        pred.rep = pred.rep.withHarmonic(eta0 + deta * step);
        return pred;
      },
      [&](int, const ContinuationState& pred) {
        return frozen ? newtonSolveConstrained(pred, *frozen, opts) : newtonSolve(pred, opts);
      });
  run.degenerate_start = degenerate_start;
  return run;
}

double latitudeGeodesicCurvature(const AmbientModel& model, double t, double z) {
  if (model.kind() != AmbientKind::SphereS2) {
    throw PreconditionError("latitudeGeodesicCurvature: model must be S^2");
  }
  auto metric_at = [&](double zz) {
    Eigen::VectorXd p(2);
    p << zz, 0.0;
    return model.metric(p, t);
  };
  double h = 1e-4;
  h = std::min(h, (1.0 - kChartGuard - std::abs(z)) / 4.0);
  if (h <= 0.0) throw ChartRangeError("latitudeGeodesicCurvature: z too close to a pole");
  const double A = metric_at(z)(0, 0);
  const double B = metric_at(z)(1, 1);
  const double Bp = (-metric_at(z + 2 * h)(1, 1) + 8.0 * metric_at(z + h)(1, 1) -
                     8.0 * metric_at(z - h)(1, 1) + metric_at(z - 2 * h)(1, 1)) /
                    (12.0 * h);
  // kappa_g of {z = const} with normal pointing to +z.
  return -Bp / (2.0 * B * std::sqrt(A));
}

ShootingResult shootingOracleS2(const AmbientModel& model, double t, double kappa_target,
                                int samples) {
  const double zlim = 1.0 - kChartGuard - 1e-6;
  const int scan = 2001;
  double lo = std::nan(""), hi = std::nan("");
  double prev_z = -zlim;
  double prev_v = latitudeGeodesicCurvature(model, t, prev_z) - kappa_target;
  for (int i = 1; i < scan; ++i) {
    const double z = -zlim + 2.0 * zlim * i / (scan - 1);
    const double v = latitudeGeodesicCurvature(model, t, z) - kappa_target;
    if (prev_v == 0.0 || prev_v * v < 0.0) {
      lo = prev_z;
      hi = z;
      break;
    }
    prev_z = z;
    prev_v = v;
  }
  if (!std::isfinite(lo)) {
    throw NumericError("shootingOracleS2: no latitude with the requested curvature");
  }
  double flo = latitudeGeodesicCurvature(model, t, lo) - kappa_target;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = latitudeGeodesicCurvature(model, t, mid) - kappa_target;
    if (flo * fm <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fm;
    }
  }

  ShootingResult out;
  out.z_star = 0.5 * (lo + hi);
  out.kappa_g = latitudeGeodesicCurvature(model, t, out.z_star);
  out.curve_z = Eigen::ArrayXd::Constant(samples, out.z_star);
  out.curve_phi = Eigen::ArrayXd::LinSpaced(samples, 0.0, 2.0 * M_PI * (samples - 1) / samples);
  return out;
}

}  // namespace hamlag
