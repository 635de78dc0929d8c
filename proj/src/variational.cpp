#include "hamlag/variational.hpp"

#include <cmath>

#include <lapacke.h>

#include "hamlag/errors.hpp"

namespace hamlag {

SymEigResult symEig(Eigen::MatrixXd a) {
  const int n = static_cast<int>(a.rows());
  SymEigResult r;
  r.values.resize(n);
  const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, r.values.data());
  if (info != 0) throw NumericError("symEig: dsyevd failed");
  r.vectors = std::move(a);
  return r;
}

SymEigResult symEigGeneralized(Eigen::MatrixXd a, Eigen::MatrixXd m) {
  const int n = static_cast<int>(a.rows());
  SymEigResult r;
  r.values.resize(n);
  const int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'V', 'L', n, a.data(), n, m.data(), n,
                                  r.values.data());
  if (info != 0) throw NumericError("symEigGeneralized: dsygvd failed");
  r.vectors = std::move(a);
  return r;
}

ElResidual elResidual(const LagrangianRep& rep, double t) {
  const InducedGeometry geo = inducedGeometry(rep, t, GeometryDetail::Residual);
  const HodgeOps hodge(geo);
  SpectralField res = hodge.codifferentialFromSamples(geo.sigma_h);
  res.setMeanValue(0.0);
  // Sup-norm on the dealiased grid (smooth representative of the field).
  const double sup = res.supNorm(geo.grid_n);
  return {std::move(res), sup};
}

JacobiAssembler::JacobiAssembler(const LagrangianRep& rep, double t, JacobiForm form,
                                 double kappa)
    : form_(form),
      t_(t),
      kappa_(kappa),
      geo_(inducedGeometry(rep, t,
                           form == JacobiForm::Full ? GeometryDetail::Curvature
                                                    : GeometryDetail::Residual)),
      hodge_(geo_) {
  const int d = geo_.dim;
  const int n = 2 * d;
  const int total = static_cast<int>(geo_.volume_density.size());

  {
    SpectralField res = hodge_.codifferentialFromSamples(geo_.sigma_h);
    res.setMeanValue(0.0);
    residual_sup_ = res.supNorm(geo_.grid_n);
  }

  if (form_ == JacobiForm::KeMinimal) {
    if (geo_.sup_mean_curv > 1e-8) {
      throw PreconditionError("jacobiKeMinimal: rep is not minimal (|H| = " +
                              std::to_string(geo_.sup_mean_curv) + ")");
    }
    return;
  }

  m2_.assign(d * d, Eigen::ArrayXd(total));
  m3_.assign(d * d, Eigen::ArrayXd(total));
  tau_.assign(d, Eigen::ArrayXd(total));

  const Eigen::MatrixXd& Om = geo_.model->omega();
  Eigen::MatrixXd e(n, d), G(n, n), J(n, n), Ric(n, n);
  Eigen::MatrixXd ghat_inv(d, d);
  Eigen::VectorXd H(n);

  for (int node = 0; node < total; ++node) {
    for (int a = 0; a < d; ++a) {
      for (int u = 0; u < n; ++u) e(u, a) = geo_.tangent[a * n + u][node];
    }
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) {
        G(u, v) = geo_.ambient_metric[u * n + v][node];
        J(u, v) = geo_.ambient_j[u * n + v][node];
        Ric(u, v) = geo_.ambient_ricci[u * n + v][node];
      }
    }
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) ghat_inv(a, b) = geo_.metric_inv[a * d + b][node];
    }
    for (int u = 0; u < n; ++u) H[u] = geo_.mean_curv[u][node];

    // grad h = sum_b W_b d_b h with W_b = ghat^{cb} e_c.
    const Eigen::MatrixXd W = e * ghat_inv;  // columns W_b

    // Normal space basis: Euclidean complement of range(G e).
    const Eigen::MatrixXd Ge = G * e;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Ge);
    const Eigen::MatrixXd Qfull = qr.householderQ();
    const Eigen::MatrixXd N = Qfull.rightCols(n - d);
    const Eigen::MatrixXd gramN = N.transpose() * G * N;
    const Eigen::MatrixXd gramN_inv = gramN.inverse();
    // Tangential projector (w.r.t. g_t).
    const Eigen::MatrixXd Ptan = e * ghat_inv * e.transpose() * G;

    // JH in the tangent frame.
    const Eigen::VectorXd JH = J * H;
    const Eigen::VectorXd tau = ghat_inv * (e.transpose() * G * JH);
    for (int a = 0; a < d; ++a) tau_[a][node] = tau[a];

    for (int b = 0; b < d; ++b) {
      // Term 2 multiplier: sigma_{Ric^perp(J grad h)}.
      const Eigen::VectorXd X = J * W.col(b);
      const Eigen::VectorXd Xn = X - Ptan * X;
      const Eigen::VectorXd R = N * (gramN_inv * (N.transpose() * (Ric * Xn)));
      const Eigen::VectorXd omR = Om.transpose() * R;
      // Term 3 multiplier: sigma_{B(JH, grad h)}.
      Eigen::VectorXd BJW = Eigen::VectorXd::Zero(n);
      for (int c = 0; c < d; ++c) {
        for (int ee = 0; ee < d; ++ee) {
          const double w = tau[c] * ghat_inv(ee, b);
          if (w == 0.0) continue;
          for (int u = 0; u < n; ++u) {
            BJW[u] += w * geo_.second_fund[(c * d + ee) * n + u][node];
          }
        }
      }
      const Eigen::VectorXd omB = Om.transpose() * BJW;
      for (int a = 0; a < d; ++a) {
        m2_[a * d + b][node] = omR.dot(e.col(a));
        m3_[a * d + b][node] = omB.dot(e.col(a));
      }
    }
  }
}

Eigen::ArrayXd JacobiAssembler::applySamples(const std::vector<Eigen::ArrayXd>& dh) const {
  const int d = geo_.dim;
  const int total = static_cast<int>(geo_.volume_density.size());
  const Eigen::ArrayXd& rho = geo_.volume_density;

  auto codiffSamples = [&](const std::vector<Eigen::ArrayXd>& alpha) {
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(total);
    for (int a = 0; a < d; ++a) {
      Eigen::ArrayXd sharp = Eigen::ArrayXd::Zero(total);
      for (int b = 0; b < d; ++b) sharp += geo_.metric_inv[a * d + b] * alpha[b];
      acc += hodge_.sampleDerivative(rho * sharp, a);
    }
    return Eigen::ArrayXd(-acc / rho);
  };

  const Eigen::ArrayXd lap = codiffSamples(dh);
  std::vector<Eigen::ArrayXd> dlap(d);
  for (int a = 0; a < d; ++a) dlap[a] = hodge_.sampleDerivative(lap, a);
  const Eigen::ArrayXd bilap = codiffSamples(dlap);

  std::vector<Eigen::ArrayXd> sigma2(d), sigma3(d);
  for (int a = 0; a < d; ++a) {
    sigma2[a] = Eigen::ArrayXd::Zero(total);
    sigma3[a] = Eigen::ArrayXd::Zero(total);
    for (int b = 0; b < d; ++b) {
      sigma2[a] += m2_[a * d + b] * dh[b];
      sigma3[a] += m3_[a * d + b] * dh[b];
    }
  }
  const Eigen::ArrayXd term2 = codiffSamples(sigma2);
  const Eigen::ArrayXd term3 = codiffSamples(sigma3);

  Eigen::ArrayXd u = Eigen::ArrayXd::Zero(total);
  for (int a = 0; a < d; ++a) u += tau_[a] * dh[a];
  Eigen::ArrayXd jhjh = Eigen::ArrayXd::Zero(total);
  for (int a = 0; a < d; ++a) jhjh += tau_[a] * hodge_.sampleDerivative(u, a);

  return bilap + term2 - 2.0 * term3 - jhjh;
}

SpectralField JacobiAssembler::apply(const SpectralField& h) const {
  const int d = geo_.dim;
  const int m = geo_.grid_n;
  std::vector<Eigen::ArrayXd> dh(d);
  for (int a = 0; a < d; ++a) dh[a] = h.derivative(a).sample(m);

  Eigen::ArrayXd out_samples;
  if (form_ == JacobiForm::KeMinimal) {
    auto codiffSamples = [&](const std::vector<Eigen::ArrayXd>& alpha) {
      Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(geo_.volume_density.size());
      for (int a = 0; a < d; ++a) {
        Eigen::ArrayXd sharp = Eigen::ArrayXd::Zero(geo_.volume_density.size());
        for (int b = 0; b < d; ++b) sharp += geo_.metric_inv[a * d + b] * alpha[b];
        acc += hodge_.sampleDerivative(geo_.volume_density * sharp, a);
      }
      return Eigen::ArrayXd(-acc / geo_.volume_density);
    };
    const Eigen::ArrayXd lap = codiffSamples(dh);
    const Eigen::ArrayXd v = lap - kappa_ * h.sample(m);
    std::vector<Eigen::ArrayXd> dv(d);
    for (int a = 0; a < d; ++a) dv[a] = hodge_.sampleDerivative(v, a);
    out_samples = codiffSamples(dv);
  } else {
    out_samples = applySamples(dh);
  }

  SpectralField out = SpectralField::fromGrid(d, h.cutoff(), out_samples, m);
  out.setMeanValue(0.0);
  return out;
}

double JacobiAssembler::quadraticForm(const SpectralField& h) const {
  const SpectralField jh = apply(h);
  return gridIntegral(h.sample(geo_.grid_n) * jh.sample(geo_.grid_n) * geo_.volume_density,
                      geo_.dim, geo_.grid_n);
}

JacobiOperator JacobiAssembler::assemble(bool with_spectrum) const {
  const int d = geo_.dim;
  const int N = geo_.cutoff;
  const int size = SpectralField::realBasisSize(d, N);
  const double pair_scale = 0.5 * std::pow(2.0 * M_PI, d);

  JacobiOperator op;
  op.form = form_;
  op.t = t_;
  op.kappa = kappa_;
  op.dim = d;
  op.cutoff = N;
  op.basis_size = size;
  op.residual_sup = residual_sup_;
  op.stationary = residual_sup_ < kStationaryTol;
  op.op.resize(size, size);
  op.form_matrix.resize(size, size);
  op.mass.resize(size, size);

  const int m = geo_.grid_n;
  for (int j = 0; j < size; ++j) {
    const SpectralField bj = SpectralField::realBasisFunction(d, N, j);
    const SpectralField jac_bj = apply(bj);
    op.op.col(j) = jac_bj.toRealCoeffs();
    // Galerkin pairings against the basis through one projection each.
    const Eigen::ArrayXd jac_samples = jac_bj.sample(m) * geo_.volume_density;
    op.form_matrix.col(j) =
        pair_scale * SpectralField::fromGrid(d, N, jac_samples, m).toRealCoeffs();
    const Eigen::ArrayXd mass_samples = bj.sample(m) * geo_.volume_density;
    op.mass.col(j) = pair_scale * SpectralField::fromGrid(d, N, mass_samples, m).toRealCoeffs();
  }

  const double snorm = op.form_matrix.cwiseAbs().maxCoeff();
  op.symmetry_defect =
      snorm > 0.0 ? (op.form_matrix - op.form_matrix.transpose()).cwiseAbs().maxCoeff() / snorm
                  : 0.0;

  if (with_spectrum) {
    const Eigen::MatrixXd s_sym = 0.5 * (op.form_matrix + op.form_matrix.transpose());
    const Eigen::MatrixXd m_sym = 0.5 * (op.mass + op.mass.transpose());
    SymEigResult eig = symEigGeneralized(s_sym, m_sym);
    op.eigenvalues = std::move(eig.values);
    op.eigenvectors = std::move(eig.vectors);
  }
  return op;
}

JacobiOperator jacobiFull(const LagrangianRep& rep, double t) {
  return JacobiAssembler(rep, t, JacobiForm::Full).assemble();
}

JacobiOperator jacobiKeMinimal(const LagrangianRep& rep, double kappa, double t) {
  return JacobiAssembler(rep, t, JacobiForm::KeMinimal, kappa).assemble();
}

KernelCandidates kernelCandidates(const LagrangianRep& rep) {
  const InducedGeometry geo = inducedGeometry(rep, 0.0, GeometryDetail::Residual);
  const AmbientModel& model = *rep.model;
  const int d = geo.dim;
  const int total = static_cast<int>(geo.volume_density.size());
  const int k = model.action().group_dim;
  const int size = SpectralField::realBasisSize(d, geo.cutoff);

  std::vector<Eigen::ArrayXd> mu(k, Eigen::ArrayXd(total));
  for (int node = 0; node < total; ++node) {
    Eigen::VectorXd p(2 * d);
    for (int u = 0; u < 2 * d; ++u) p[u] = geo.points[u][node];
    const Eigen::VectorXd m = model.moment(p);
    for (int i = 0; i < k; ++i) mu[i][node] = m[i];
  }

  KernelCandidates out;
  out.fields.resize(size, k);
  for (int i = 0; i < k; ++i) {
    SpectralField f = SpectralField::fromGrid(d, geo.cutoff, mu[i], geo.grid_n);
    f.setMeanValue(0.0);
    out.fields.col(i) = f.toRealCoeffs();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.fields, Eigen::ComputeThinU);
  const double smax = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()[i] > kCandidateRankTol * std::max(smax, 1e-300)) ++rank;
  }
  // Constant moment restrictions vanish after mean subtraction.
  if (smax <= 1e-12) rank = 0;
  out.rank = rank;
  out.independent = svd.matrixU().leftCols(rank);
  return out;
}

const char* verdictName(Verdict v) {
  switch (v) {
    case Verdict::GNondegenerate:
      return "G-nondegenerate";
    case Verdict::GDegenerate:
      return "G-degenerate";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

NondegeneracyVerdict nondegeneracy(const JacobiOperator& op, const KernelCandidates& cand,
                                   double kernel_tol, double angle_tol) {
  if (op.eigenvalues.size() == 0) {
    throw PreconditionError("nondegeneracy: operator has no spectrum");
  }
  NondegeneracyVerdict v;
  const double scale = op.eigenvalues.cwiseAbs().maxCoeff();
  v.kernel_tol_abs = kernel_tol * std::max(scale, 1e-300);

  std::vector<int> kernel_idx;
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < op.eigenvalues.size(); ++i) {
    const double a = std::abs(op.eigenvalues[i]);
    if (a < v.kernel_tol_abs) {
      kernel_idx.push_back(i);
    } else {
      gap = std::min(gap, a);
    }
  }
  v.kernel_dim = static_cast<int>(kernel_idx.size());
  v.candidate_dim = cand.rank;
  v.kernel_gap = std::isfinite(gap) ? gap : 0.0;

  // Principal angles between the numeric kernel and the candidate span.
  if (v.kernel_dim > 0 && v.candidate_dim > 0) {
    Eigen::MatrixXd K(op.eigenvectors.rows(), v.kernel_dim);
    for (int i = 0; i < v.kernel_dim; ++i) K.col(i) = op.eigenvectors.col(kernel_idx[i]);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(K);
    const Eigen::MatrixXd Korth =
        Eigen::MatrixXd(qr.householderQ()).leftCols(v.kernel_dim);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Korth.transpose() * cand.independent);
    v.principal_angles.resize(svd.singularValues().size());
    for (int i = 0; i < svd.singularValues().size(); ++i) {
      v.principal_angles[i] = std::acos(std::min(1.0, std::max(-1.0, svd.singularValues()[i])));
    }
  } else {
    v.principal_angles.resize(0);
  }

  const double max_angle =
      v.principal_angles.size() > 0 ? v.principal_angles.maxCoeff() : 0.0;
  if (v.kernel_dim == v.candidate_dim && max_angle < angle_tol) {
    v.verdict = Verdict::GNondegenerate;
  } else if (v.kernel_dim > v.candidate_dim) {
    v.verdict = Verdict::GDegenerate;
  } else {
    v.verdict = Verdict::Inconclusive;
  }
  return v;
}

bool stabilityCriterion(double lambda1, double kappa) {
  if (!(lambda1 > 0.0)) {
    throw PreconditionError("stabilityCriterion: lambda1 must be positive");
  }
  return lambda1 >= kappa - 1e-9 * std::max(1.0, std::abs(kappa));
}

double laplaceLambda1(const LagrangianRep& rep, double t) {
  const InducedGeometry geo = inducedGeometry(rep, t, GeometryDetail::Residual);
  const HodgeOps hodge(geo);
  const int d = geo.dim;
  const int N = geo.cutoff;
  const int size = SpectralField::realBasisSize(d, N);
  const double pair_scale = 0.5 * std::pow(2.0 * M_PI, d);
  const int m = geo.grid_n;

  Eigen::MatrixXd S(size, size), M(size, size);
  for (int j = 0; j < size; ++j) {
    const SpectralField bj = SpectralField::realBasisFunction(d, N, j);
    const SpectralField lap = hodge.laplacian(bj);
    S.col(j) = pair_scale *
               SpectralField::fromGrid(d, N, lap.sample(m) * geo.volume_density, m).toRealCoeffs();
    M.col(j) = pair_scale *
               SpectralField::fromGrid(d, N, bj.sample(m) * geo.volume_density, m).toRealCoeffs();
  }
  SymEigResult eig = symEigGeneralized(0.5 * (S + S.transpose()), 0.5 * (M + M.transpose()));
  return eig.values.minCoeff();
}

}  // namespace hamlag
