#include "hamlag/ambient.hpp"

#include <cmath>

#include "hamlag/errors.hpp"

namespace hamlag {

namespace {

Eigen::MatrixXd darboux(int d) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  m.topRightCorner(d, d) = Eigen::MatrixXd::Identity(d, d);
  m.bottomLeftCorner(d, d) = -Eigen::MatrixXd::Identity(d, d);
  return m;
}

// 5-point fourth-order first derivative of a matrix-valued map.
template <typename F>
Eigen::MatrixXd stencilDerivative(const F& eval, double h) {
  return (-eval(2.0 * h) + 8.0 * eval(h) - 8.0 * eval(-h) + eval(-2.0 * h)) / (12.0 * h);
}

constexpr double kChristoffelStep = 1e-4;
constexpr double kRicciStep = 1e-2;

}  // namespace

AmbientModel makeFlatCn(int n, const MetricFamily& family, const GroupActionData& action) {
  if (n < 1 || n > 2) throw PreconditionError("makeFlatCn: n must be 1 or 2");
  if (family.kind == MetricFamilyKind::WarpedS2) {
    throw PreconditionError("makeFlatCn: warped families live on S^2");
  }
  AmbientModel m;
  m.kind_ = AmbientKind::FlatCn;
  m.d_ = n;
  m.family_ = family;
  m.action_ = action;
  m.action_.kind = ActionKind::Torus;
  m.action_.group_dim = n;
  if (m.action_.Q.size() == 0) m.action_.Q = Eigen::MatrixXd::Identity(n, n);
  if (m.action_.Q.rows() != n || m.action_.Q.cols() != n) {
    throw PreconditionError("makeFlatCn: Q must be group_dim x group_dim");
  }
  m.omega_ = darboux(n);
  return m;
}

AmbientModel makeSphere(const MetricFamily& family, const GroupActionData& action) {
  AmbientModel m;
  m.kind_ = AmbientKind::SphereS2;
  m.d_ = 1;
  m.family_ = family;
  m.action_ = action;
  if (m.action_.kind == ActionKind::Torus) m.action_.kind = ActionKind::SO2;
  m.action_.group_dim = m.action_.kind == ActionKind::SO3 ? 3 : 1;
  const int k = m.action_.group_dim;
  if (m.action_.Q.size() == 0) m.action_.Q = Eigen::MatrixXd::Identity(k, k);
  if (m.action_.Q.rows() != k || m.action_.Q.cols() != k) {
    throw PreconditionError("makeSphere: Q must be group_dim x group_dim");
  }
  if (family.kind == MetricFamilyKind::WarpedS2 && 1.0 + family.warp_coeff * family.t_max < 0.0) {
    throw PreconditionError("makeSphere: warp profile not positive on the chart");
  }
  m.omega_ = darboux(1);
  return m;
}

bool AmbientModel::chartContains(const Eigen::VectorXd& p, double guard) const {
  if (p.size() != ambientDim()) return false;
  if (kind_ == AmbientKind::FlatCn) {
    for (int j = 0; j < d_; ++j) {
      if (!(p[j] > guard)) return false;
    }
    return true;
  }
  return std::abs(p[0]) < 1.0 - guard;
}

void AmbientModel::requireInChart(const Eigen::VectorXd& p) const {
  if (!chartContains(p)) {
    throw ChartRangeError("point outside the valid chart range");
  }
}

double AmbientModel::warpProfile(double z, double t, int deriv) const {
  if (kind_ != AmbientKind::SphereS2) {
    throw PreconditionError("warpProfile: only defined on S^2");
  }
  const double s = std::sqrt(1.0 - z * z);
  const double s1 = -z / s;              // s'
  const double s2 = -1.0 / (s * s * s);  // s''
  if (family_.kind == MetricFamilyKind::WarpedS2) {
    const double c = family_.warp_coeff * t;
    const double q = 1.0 + c * z * z;
    if (deriv == 0) return s * q;
    if (deriv == 1) return s1 * q + s * 2.0 * c * z;
    return s2 * q + 2.0 * s1 * 2.0 * c * z + s * 2.0 * c;
  }
  if (family_.kind == MetricFamilyKind::Cheeger) {
    throw PreconditionError("warpProfile: Cheeger family has no closed-form profile");
  }
  // Round profile; the Homothety family reuses it since the quantities this
  // profile feeds (Christoffel symbols) are invariant under constant scaling.
  if (deriv == 0) return s;
  if (deriv == 1) return s1;
  return s2;
}

Eigen::MatrixXd AmbientModel::baseMetric(const Eigen::VectorXd& p) const {
  requireInChart(p);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * d_, 2 * d_);
  if (kind_ == AmbientKind::FlatCn) {
    for (int j = 0; j < d_; ++j) {
      g(j, j) = 1.0 / (2.0 * p[j]);
      g(d_ + j, d_ + j) = 2.0 * p[j];
    }
  } else {
    const double a = 1.0 - p[0] * p[0];
    g(0, 0) = 1.0 / a;
    g(1, 1) = a;
  }
  return g;
}

Eigen::MatrixXd AmbientModel::metric(const Eigen::VectorXd& p, double t) const {
  switch (family_.kind) {
    case MetricFamilyKind::Constant:
      return baseMetric(p);
    case MetricFamilyKind::Homothety: {
      const double c = 1.0 - 2.0 * family_.kappa * t;
      if (c <= 1e-9) throw NumericError("metric: homothety factor collapsed");
      return c * baseMetric(p);
    }
    case MetricFamilyKind::WarpedS2: {
      requireInChart(p);
      const double f = warpProfile(p[0], t);
      if (f <= 0.0) throw NumericError("metric: warp profile nonpositive");
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
      g(0, 0) = 1.0 / (f * f);
      g(1, 1) = f * f;
      return g;
    }
    case MetricFamilyKind::Cheeger:
      return cheegerMetric(*this, t, p).matrix;
  }
  throw NumericError("metric: unknown family");
}

Eigen::MatrixXd AmbientModel::generators(const Eigen::VectorXd& p) const {
  requireInChart(p);
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(2 * d_, action_.group_dim);
  if (kind_ == AmbientKind::FlatCn) {
    // Rotation of each factor; the sign makes d<mu, X> = omega(X*, .) hold
    // with mu_j = I_j.
    for (int j = 0; j < d_; ++j) gen(d_ + j, j) = -1.0;
    return gen;
  }
  const double z = p[0];
  const double phi = p[1];
  const double s = std::sqrt(1.0 - z * z);
  if (action_.kind == ActionKind::SO2) {
    gen(1, 0) = -1.0;
    return gen;
  }
  // so(3) triple with moments (x, y, z).
  gen(0, 0) = -s * std::sin(phi);
  gen(1, 0) = z * std::cos(phi) / s;
  gen(0, 1) = s * std::cos(phi);
  gen(1, 1) = z * std::sin(phi) / s;
  gen(1, 2) = -1.0;
  return gen;
}

Eigen::VectorXd AmbientModel::moment(const Eigen::VectorXd& p) const {
  requireInChart(p);
  if (kind_ == AmbientKind::FlatCn) {
    return p.head(d_);
  }
  const double z = p[0];
  const double phi = p[1];
  if (action_.kind == ActionKind::SO2) {
    Eigen::VectorXd mu(1);
    mu[0] = z;
    return mu;
  }
  const double s = std::sqrt(1.0 - z * z);
  Eigen::VectorXd mu(3);
  mu[0] = s * std::cos(phi);
  mu[1] = s * std::sin(phi);
  mu[2] = z;
  return mu;
}

MetricForm cheegerMetric(const AmbientModel& model, double t, const Eigen::VectorXd& p) {
  if (t < 0.0) throw PreconditionError("cheegerMetric: t must be >= 0");
  const Eigen::MatrixXd g0 = model.baseMetric(p);
  const Eigen::MatrixXd gen = model.generators(p);
  const Eigen::MatrixXd gram = gen.transpose() * g0 * gen;

  Eigen::LLT<Eigen::MatrixXd> qllt(model.action().Q);
  if (qllt.info() != Eigen::Success) {
    throw PreconditionError("cheegerMetric: degenerate Q");
  }
  const Eigen::MatrixXd L = qllt.matrixL();
  const int k = model.action().group_dim;
  const Eigen::MatrixXd B = L.triangularView<Eigen::Lower>().solve(
      L.triangularView<Eigen::Lower>().solve(gram).transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (B + B.transpose()));
  if (es.info() != Eigen::Success) throw NumericError("cheegerMetric: eigensolve failed");

  Eigen::MatrixXd g = g0;
  const double lambda_max = es.eigenvalues().cwiseAbs().maxCoeff();
  const double tol = 1e-12 * std::max(1.0, lambda_max);
  for (int i = 0; i < k; ++i) {
    const double lambda = es.eigenvalues()[i];
    if (lambda <= tol) continue;
    // Vertical direction with g0-norm^2 = lambda; scaled by 1/(1+t*lambda).
    const Eigen::VectorXd w =
        gen * L.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors().col(i));
    const Eigen::VectorXd v = w / std::sqrt(lambda);
    const Eigen::VectorXd gv = g0 * v;
    g += (1.0 / (1.0 + t * lambda) - 1.0) * gv * gv.transpose();
  }
  return MetricForm(0.5 * (g + g.transpose()));
}

std::vector<Eigen::MatrixXd> AmbientModel::christoffelFiniteDifference(const Eigen::VectorXd& p,
                                                                       double t) const {
  const int n = ambientDim();
  requireInChart(p);

  // Keep the stencil inside the chart.
  double h = kChristoffelStep;
  if (kind_ == AmbientKind::FlatCn) {
    for (int j = 0; j < d_; ++j) h = std::min(h, (p[j] - kChartGuard) / 4.0);
  } else {
    h = std::min(h, (1.0 - kChartGuard - std::abs(p[0])) / 4.0);
  }
  if (h <= 0.0) throw ChartRangeError("christoffel: too close to the chart boundary");

  std::vector<Eigen::MatrixXd> dg(n);
  for (int i = 0; i < n; ++i) {
    dg[i] = stencilDerivative(
        [&](double s) {
          Eigen::VectorXd q = p;
          q[i] += s;
          return metric(q, t);
        },
        h);
  }
  const Eigen::MatrixXd ginv = metric(p, t).inverse();
  std::vector<Eigen::MatrixXd> gamma(n, Eigen::MatrixXd::Zero(n, n));
  for (int kidx = 0; kidx < n; ++kidx) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) {
          acc += ginv(kidx, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        }
        gamma[kidx](i, j) = 0.5 * acc;
      }
    }
  }
  return gamma;
}

std::vector<Eigen::MatrixXd> AmbientModel::christoffel(const Eigen::VectorXd& p, double t) const {
  requireInChart(p);
  const int n = ambientDim();
  std::vector<Eigen::MatrixXd> gamma(n, Eigen::MatrixXd::Zero(n, n));
  switch (family_.kind) {
    case MetricFamilyKind::Constant:
    case MetricFamilyKind::Homothety:
      // Scaling the metric by a constant leaves the symbols unchanged.
      if (kind_ == AmbientKind::FlatCn) {
        for (int j = 0; j < d_; ++j) {
          const double I = p[j];
          gamma[j](j, j) = -1.0 / (2.0 * I);
          gamma[j](d_ + j, d_ + j) = -2.0 * I;
          gamma[d_ + j](j, d_ + j) = 1.0 / (2.0 * I);
          gamma[d_ + j](d_ + j, j) = 1.0 / (2.0 * I);
        }
        return gamma;
      }
      [[fallthrough]];
    case MetricFamilyKind::WarpedS2: {
      if (kind_ != AmbientKind::SphereS2) break;
      const double z = p[0];
      const double f = warpProfile(z, t);
      const double fz = warpProfile(z, t, 1);
      gamma[0](0, 0) = -fz / f;
      gamma[0](1, 1) = -f * f * f * fz;
      gamma[1](0, 1) = fz / f;
      gamma[1](1, 0) = fz / f;
      return gamma;
    }
    case MetricFamilyKind::Cheeger:
      return christoffelFiniteDifference(p, t);
  }
  return christoffelFiniteDifference(p, t);
}

Eigen::MatrixXd AmbientModel::ricciFiniteDifference(const Eigen::VectorXd& p, double t) const {
  const int n = ambientDim();
  requireInChart(p);
  // With analytic symbols the only error source is the outer stencil, so a
  // small step wins; the Cheeger path differentiates FD symbols whose noise
  // grows as the step shrinks.
  double h = family_.kind == MetricFamilyKind::Cheeger ? kRicciStep : 3e-4;
  if (kind_ == AmbientKind::FlatCn) {
    for (int j = 0; j < d_; ++j) h = std::min(h, (p[j] - kChartGuard) / 8.0);
  } else {
    h = std::min(h, (1.0 - kChartGuard - std::abs(p[0])) / 8.0);
  }
  if (h <= 0.0) throw ChartRangeError("ricci: too close to the chart boundary");

  // dGamma[i][k](a,b) = d_i Gamma^k_{ab}
  std::vector<std::vector<Eigen::MatrixXd>> dgamma(n);
  for (int i = 0; i < n; ++i) {
    dgamma[i].assign(n, Eigen::MatrixXd::Zero(n, n));
    for (int kidx = 0; kidx < n; ++kidx) {
      dgamma[i][kidx] = stencilDerivative(
          [&](double s) {
            Eigen::VectorXd q = p;
            q[i] += s;
            return christoffel(q, t)[kidx];
          },
          h);
    }
  }
  const std::vector<Eigen::MatrixXd> gamma = christoffel(p, t);
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int kidx = 0; kidx < n; ++kidx) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += dgamma[i][i](j, kidx) - dgamma[j][i](i, kidx);
        for (int m = 0; m < n; ++m) {
          acc += gamma[i](i, m) * gamma[m](j, kidx) - gamma[i](j, m) * gamma[m](i, kidx);
        }
      }
      ric(j, kidx) = acc;
    }
  }
  return 0.5 * (ric + ric.transpose());
}

Eigen::MatrixXd AmbientModel::ricci(const Eigen::VectorXd& p, double t) const {
  requireInChart(p);
  const int n = ambientDim();
  switch (family_.kind) {
    case MetricFamilyKind::Constant:
    case MetricFamilyKind::Homothety:
      if (kind_ == AmbientKind::FlatCn) return Eigen::MatrixXd::Zero(n, n);
      // Ric of the round metric equals g_0 and is scale invariant.
      return baseMetric(p);
    case MetricFamilyKind::WarpedS2: {
      const double z = p[0];
      const double f = warpProfile(z, t);
      const double fz = warpProfile(z, t, 1);
      const double fzz = warpProfile(z, t, 2);
      const double K = -(f * fzz + fz * fz);  // Gauss curvature
      return K * metric(p, t);
    }
    case MetricFamilyKind::Cheeger:
      return ricciFiniteDifference(p, t);
  }
  throw NumericError("ricci: unknown family");
}

std::pair<PolarFactors, MetricForm> AmbientModel::compatibleStructure(const Eigen::VectorXd& p,
                                                                      double t) const {
  return polarRetraction(SymplecticForm(omega_), MetricForm(metric(p, t)));
}

Eigen::MatrixXd ricciTensor(const AmbientModel& model, double t, const Eigen::VectorXd& p) {
  return model.ricci(p, t);
}

}  // namespace hamlag
