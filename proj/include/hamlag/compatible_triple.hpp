#pragma once

#include <Eigen/Dense>

namespace hamlag {

/// Default tolerance for the structural checks in this module.
inline constexpr double kStructureTol = 1e-10;

/// Pointwise symplectic form: an antisymmetric nonsingular matrix.
struct SymplecticForm {
  Eigen::MatrixXd matrix;

  explicit SymplecticForm(Eigen::MatrixXd m);
  int dim() const { return static_cast<int>(matrix.rows()); }

  /// Standard Darboux form on R^{2n} in the (q_1..q_n, p_1..p_n) splitting:
  /// omega(q_j, p_j) = 1.
  static SymplecticForm standard(int dim);
};

/// Pointwise Riemannian metric: a symmetric positive-definite matrix.
struct MetricForm {
  Eigen::MatrixXd matrix;

  explicit MetricForm(Eigen::MatrixXd m);
  int dim() const { return static_cast<int>(matrix.rows()); }

  static MetricForm euclidean(int dim);
};

/// (omega, J, g) with omega(.,.) = g(J.,.).
struct CompatibleTriple {
  SymplecticForm omega;
  Eigen::MatrixXd J;
  MetricForm g;
};

/// Factors of the g-polar decomposition of the tensor A_g.
struct PolarFactors {
  Eigen::MatrixXd A;  // omega(u,v) = g(A u, v)
  Eigen::MatrixXd P;  // positive factor, P J = J P = A
  Eigen::MatrixXd J;  // g-orthogonal, J^2 = -I
};

/// Violations of the compatible-triple laws; all entries are max-norms.
struct TripleReport {
  double j_squared;        // |J^2 + I|
  double compatibility;    // |omega - g(J.,.)|
  double j_isometry;       // |g(J.,J.) - g|
  double omega_antisym;    // |omega + omega^T|
  double g_asym;           // |g - g^T|
  double g_min_eigenvalue; // smallest eigenvalue of g

  double maxViolation() const;
  bool ok(double tol = kStructureTol) const;
};

/// The unique tensor A with omega(u,v) = g(A u, v); A is g-skew.
Eigen::MatrixXd tensorA(const SymplecticForm& omega, const MetricForm& g);

/// g-polar decomposition of A_g and the retracted omega-compatible metric
/// r(g) = omega(., J_g .).  The returned triple (omega, J_g, r(g)) is
/// compatible, and r(g) = g whenever g was already compatible.
std::pair<PolarFactors, MetricForm> polarRetraction(const SymplecticForm& omega,
                                                    const MetricForm& g);

TripleReport checkTriple(const CompatibleTriple& t);

/// Symmetric positive (semi)definite square root via eigendecomposition.
Eigen::MatrixXd symmetricSqrt(const Eigen::MatrixXd& m);

}  // namespace hamlag
