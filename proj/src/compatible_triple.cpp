#include "hamlag/compatible_triple.hpp"

#include <utility>

#include "hamlag/errors.hpp"

namespace hamlag {

namespace {

void requireSquare(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw PreconditionError(std::string(what) + ": matrix must be square and nonempty");
  }
}

}  // namespace

SymplecticForm::SymplecticForm(Eigen::MatrixXd m) : matrix(std::move(m)) {
  requireSquare(matrix, "SymplecticForm");
  if (matrix.rows() % 2 != 0) {
    throw PreconditionError("SymplecticForm: dimension must be even");
  }
  if ((matrix + matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw PreconditionError("SymplecticForm: matrix not antisymmetric");
  }
  if (std::abs(matrix.determinant()) <= 1e-12) {
    throw PreconditionError("SymplecticForm: matrix is singular");
  }
}

SymplecticForm SymplecticForm::standard(int dim) {
  if (dim < 2 || dim % 2 != 0) {
    throw PreconditionError("SymplecticForm::standard: dimension must be even and >= 2");
  }
  const int n = dim / 2;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  m.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  m.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return SymplecticForm(m);
}

MetricForm::MetricForm(Eigen::MatrixXd m) : matrix(std::move(m)) {
  requireSquare(matrix, "MetricForm");
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw PreconditionError("MetricForm: matrix not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw PreconditionError("MetricForm: matrix not positive-definite");
  }
}

MetricForm MetricForm::euclidean(int dim) {
  return MetricForm(Eigen::MatrixXd::Identity(dim, dim));
}

Eigen::MatrixXd symmetricSqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw NumericError("symmetricSqrt: eigendecomposition failed");
  }
  Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd tensorA(const SymplecticForm& omega, const MetricForm& g) {
  if (omega.dim() != g.dim()) {
    throw PreconditionError("tensorA: dimension mismatch");
  }
  // omega(u,v) = g(Au,v)  <=>  Omega = A^T G  <=>  A = -G^{-1} Omega.
  return -g.matrix.llt().solve(omega.matrix);
}

std::pair<PolarFactors, MetricForm> polarRetraction(const SymplecticForm& omega,
                                                    const MetricForm& g) {
  const Eigen::MatrixXd A = tensorA(omega, g);

  // Work in a g-orthonormal frame so the g-adjoint becomes the transpose.
  Eigen::LLT<Eigen::MatrixXd> llt(g.matrix);
  if (llt.info() != Eigen::Success) {
    throw NumericError("polarRetraction: Cholesky of g failed");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::MatrixXd At = L.transpose() * A * L.transpose().triangularView<Eigen::Upper>().solve(
                                 Eigen::MatrixXd::Identity(g.dim(), g.dim()));

  // At is skew, so At At^T = -At^2 is symmetric positive-definite.
  const Eigen::MatrixXd Pt = symmetricSqrt(At * At.transpose());
  Eigen::PartialPivLU<Eigen::MatrixXd> plu(Pt);
  const Eigen::MatrixXd Jt = plu.solve(At);
  if (!Jt.allFinite()) {
    throw NumericError("polarRetraction: polar factor is singular");
  }

  // Undo the frame change: T = L^T conjugation.
  const Eigen::MatrixXd Linv_t = L.transpose().triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(g.dim(), g.dim()));
  PolarFactors f;
  f.A = A;
  f.J = Linv_t * Jt * L.transpose();
  f.P = Linv_t * Pt * L.transpose();

  // r(g) = omega(., J_g .); symmetrize to kill round-off drift.
  Eigen::MatrixXd r = omega.matrix * f.J;
  r = 0.5 * (r + r.transpose());
  return {std::move(f), MetricForm(std::move(r))};
}

TripleReport checkTriple(const CompatibleTriple& t) {
  const int n = t.omega.dim();
  const Eigen::MatrixXd& G = t.g.matrix;
  const Eigen::MatrixXd& Om = t.omega.matrix;
  TripleReport r;
  r.j_squared = (t.J * t.J + Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  r.compatibility = (Om - t.J.transpose() * G).cwiseAbs().maxCoeff();
  r.j_isometry = (t.J.transpose() * G * t.J - G).cwiseAbs().maxCoeff();
  r.omega_antisym = (Om + Om.transpose()).cwiseAbs().maxCoeff();
  r.g_asym = (G - G.transpose()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  r.g_min_eigenvalue = es.eigenvalues().minCoeff();
  return r;
}

double TripleReport::maxViolation() const {
  return std::max({j_squared, compatibility, j_isometry, omega_antisym, g_asym});
}

bool TripleReport::ok(double tol) const {
  return maxViolation() < tol && g_min_eigenvalue > 0.0;
}

}  // namespace hamlag
