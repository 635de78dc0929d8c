#pragma once

#include <optional>
#include <vector>

#include "hamlag/hodge.hpp"
#include "hamlag/lagrangian.hpp"

namespace hamlag {

/// Relative threshold below which eigenvalues count as kernel.
inline constexpr double kKernelTol = 1e-7;
/// Max principal angle (radians) for a nondegenerate verdict.
inline constexpr double kAngleTol = 1e-6;
/// Relative SVD threshold for the rank of the candidate span.
inline constexpr double kCandidateRankTol = 1e-8;
/// Residual sup-norm below which a rep counts as stationary.
inline constexpr double kStationaryTol = 1e-8;

/// delta sigma_H at (rep, t); stationarity <=> field ~ 0.
struct ElResidual {
  SpectralField field;  // mean-zero, rep cutoff
  double sup_norm;      // sup over the dealiased grid
};

ElResidual elResidual(const LagrangianRep& rep, double t);

enum class JacobiForm { Full, KeMinimal };

/// Second variation on mean-zero potentials, assembled columnwise on the
/// real Fourier basis.
struct JacobiOperator {
  JacobiForm form = JacobiForm::Full;
  double t = 0.0;
  double kappa = 0.0;  // KeMinimal only
  int dim = 1;
  int cutoff = 0;
  int basis_size = 0;
  bool stationary = true;     // warning flag: assembled away from a solution
  double residual_sup = 0.0;  // EL residual at assembly time

  Eigen::MatrixXd op;           // operator matrix (plain coefficient basis)
  Eigen::MatrixXd form_matrix;  // S_ij = int b_i Jac(b_j) dvol
  Eigen::MatrixXd mass;         // M_ij = int b_i b_j dvol
  double symmetry_defect = 0.0; // ||S - S^T||_max / ||S||_max

  Eigen::VectorXd eigenvalues;   // of (sym(S), M), ascending
  Eigen::MatrixXd eigenvectors;  // M-orthonormal columns
};

/// Applies the pointwise-precomputed Jacobi operator without assembling a
/// matrix; also the assembly backend.
class JacobiAssembler {
 public:
  JacobiAssembler(const LagrangianRep& rep, double t, JacobiForm form, double kappa = 0.0);

  SpectralField apply(const SpectralField& h) const;
  JacobiOperator assemble(bool with_spectrum = true) const;

  /// int h Jac(h) dvol, evaluated by direct application.
  double quadraticForm(const SpectralField& h) const;

  const InducedGeometry& geometry() const { return geo_; }
  const HodgeOps& hodge() const { return hodge_; }
  double residualSup() const { return residual_sup_; }

 private:
  Eigen::ArrayXd applySamples(const std::vector<Eigen::ArrayXd>& dh) const;

  JacobiForm form_;
  double t_;
  double kappa_;
  InducedGeometry geo_;
  HodgeOps hodge_;
  double residual_sup_ = 0.0;
  // pointwise multipliers, indexed a*d+b over grid nodes
  std::vector<Eigen::ArrayXd> m2_;   // sigma_{Ric^perp(J grad h)}
  std::vector<Eigen::ArrayXd> m3_;   // sigma_{B(JH, grad h)}
  std::vector<Eigen::ArrayXd> tau_;  // JH tangent coefficients
};

JacobiOperator jacobiFull(const LagrangianRep& rep, double t);

/// Delta(Delta - kappa) for minimal reps in Einstein ambients; refuses
/// when sup |H| exceeds the minimality threshold.
JacobiOperator jacobiKeMinimal(const LagrangianRep& rep, double kappa, double t = 0.0);

/// Moment-map restrictions <mu, X_i>|_Sigma, mean subtracted, as columns in
/// the coefficient basis, plus an orthonormal basis of their span.
struct KernelCandidates {
  Eigen::MatrixXd fields;       // one column per generator
  Eigen::MatrixXd independent;  // orthonormal span basis (rank columns)
  int rank = 0;
};

KernelCandidates kernelCandidates(const LagrangianRep& rep);

enum class Verdict { GNondegenerate, GDegenerate, Inconclusive };

const char* verdictName(Verdict v);

struct NondegeneracyVerdict {
  int kernel_dim = 0;
  int candidate_dim = 0;
  Verdict verdict = Verdict::Inconclusive;
  Eigen::VectorXd principal_angles;  // radians, one per candidate direction
  double kernel_gap = 0.0;           // smallest nonkernel |eigenvalue|
  double kernel_tol_abs = 0.0;
};

NondegeneracyVerdict nondegeneracy(const JacobiOperator& op, const KernelCandidates& cand,
                                   double kernel_tol = kKernelTol,
                                   double angle_tol = kAngleTol);

/// Hamiltonian stability of a minimal Lagrangian in an Einstein ambient:
/// stable iff lambda_1 >= kappa (up to round-off slack).
bool stabilityCriterion(double lambda1, double kappa);

/// Smallest positive eigenvalue of the Laplacian of the induced metric.
double laplaceLambda1(const LagrangianRep& rep, double t);

/// Dense symmetric (generalized) eigensolver used across the library.
struct SymEigResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};
SymEigResult symEig(Eigen::MatrixXd a);
SymEigResult symEigGeneralized(Eigen::MatrixXd a, Eigen::MatrixXd m);

}  // namespace hamlag
