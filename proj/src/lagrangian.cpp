#include "hamlag/lagrangian.hpp"

#include <cmath>
#include <map>

#include "hamlag/errors.hpp"

namespace hamlag {

int defaultCutoff(int dim) { return dim == 1 ? 32 : 16; }

Eigen::VectorXd LagrangianRep::anchor() const {
  const int d = chartDim();
  Eigen::VectorXd c(d);
  if (model->kind() == AmbientKind::FlatCn) {
    for (int j = 0; j < d; ++j) c[j] = 0.5 * base_point[j] * base_point[j];
  } else {
    c[0] = base_point[0];
  }
  return c;
}

LagrangianRep LagrangianRep::withPotential(SpectralField new_h) const {
  LagrangianRep r = *this;
  new_h.setMeanValue(0.0);
  r.h = std::move(new_h);
  return r;
}

LagrangianRep LagrangianRep::withHarmonic(Eigen::VectorXd new_harmonic) const {
  LagrangianRep r = *this;
  r.harmonic = std::move(new_harmonic);
  return r;
}

LagrangianRep makeRep(std::shared_ptr<const AmbientModel> model, Eigen::VectorXd base_point,
                      Eigen::VectorXd harmonic, SpectralField h) {
  const int d = model->chartDim();
  if (base_point.size() != d || harmonic.size() != d) {
    throw PreconditionError("makeRep: base_point and harmonic must have length d");
  }
  if (h.dim() != d) throw PreconditionError("makeRep: potential dimension mismatch");
  h.setMeanValue(0.0);
  LagrangianRep rep{std::move(model), std::move(base_point), std::move(harmonic), std::move(h)};
  return rep;
}

LagrangianRep makeZeroRep(std::shared_ptr<const AmbientModel> model, Eigen::VectorXd base_point,
                          int cutoff) {
  const int d = model->chartDim();
  if (cutoff <= 0) cutoff = defaultCutoff(d);
  return makeRep(std::move(model), std::move(base_point), Eigen::VectorXd::Zero(d),
                 SpectralField::zero(d, cutoff));
}

namespace {

int gridTotal(int dim, int m) { return dim == 1 ? m : m * m; }

}  // namespace

Eigen::VectorXd RealizedGraph::chartPoint(int node) const {
  Eigen::VectorXd p(2 * dim);
  for (int j = 0; j < dim; ++j) p[j] = transverse[j][node];
  for (int a = 0; a < dim; ++a) p[dim + a] = angle(a, node);
  return p;
}

double RealizedGraph::angle(int axis, int node) const {
  const double step = 2.0 * M_PI / grid_n;
  if (dim == 1) return step * node;
  return axis == 0 ? step * (node / grid_n) : step * (node % grid_n);
}

RealizedGraph realize(const LagrangianRep& rep, int grid_n) {
  const int d = rep.chartDim();
  const int m = grid_n > 0 ? grid_n : dealiasGridSize(rep.cutoff());
  RealizedGraph g;
  g.dim = d;
  g.grid_n = m;
  const Eigen::VectorXd c = rep.anchor();

  std::vector<SpectralField> dh(d);
  for (int j = 0; j < d; ++j) dh[j] = rep.h.derivative(j);

  g.transverse.resize(d);
  g.dtrans.resize(d * d);
  g.d2trans.resize(d * d * d);
  for (int j = 0; j < d; ++j) {
    g.transverse[j] = dh[j].sample(m) + (c[j] + rep.harmonic[j]);
    for (int a = 0; a < d; ++a) {
      g.dtrans[a * d + j] = dh[j].derivative(a).sample(m);
      for (int b = 0; b < d; ++b) {
        g.d2trans[(a * d + b) * d + j] = dh[j].derivative(a).derivative(b).sample(m);
      }
    }
  }

  // Chart-range check.
  const AmbientModel& model = *rep.model;
  if (model.kind() == AmbientKind::FlatCn) {
    for (int j = 0; j < d; ++j) {
      if (!(g.transverse[j].minCoeff() > kChartGuard)) {
        throw ChartRangeError("realize: graph reaches I <= chart guard");
      }
    }
  } else {
    if (!(g.transverse[0].abs().maxCoeff() < 1.0 - kChartGuard)) {
      throw ChartRangeError("realize: graph reaches |z| >= 1 - chart guard");
    }
  }
  return g;
}

double lagrangianExactness(const RealizedGraph& graph) {
  if (graph.dim == 1) return 0.0;  // any curve is Lagrangian
  const int d = graph.dim;
  double worst = 0.0;
  // x*omega coefficient on dtheta_a ^ dtheta_b is d_a I_b - d_b I_a.
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      worst = std::max(worst,
                       (graph.dtrans[a * d + b] - graph.dtrans[b * d + a]).abs().maxCoeff());
    }
  }
  return worst;
}

namespace {

struct AmbientPointData {
  Eigen::MatrixXd G;
  std::vector<Eigen::MatrixXd> gamma;
  Eigen::MatrixXd J;    // Full detail
  Eigen::MatrixXd ric;  // Curvature detail
};

// Ambient data on our charts depends only on the transverse coordinates
// (every supported family is invariant under the angle translations), so
// evaluations are cached per transverse tuple.  Exact graphs with constant
// transverse part then cost a single evaluation.
class AmbientCache {
 public:
  AmbientCache(const AmbientModel& model, double t, GeometryDetail detail)
      : model_(model), t_(t), detail_(detail) {}

  const AmbientPointData& at(const Eigen::VectorXd& p) {
    std::vector<double> key(p.data(), p.data() + model_.chartDim());
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    AmbientPointData data;
    data.G = model_.metric(p, t_);
    data.gamma = model_.christoffel(p, t_);
    if (detail_ != GeometryDetail::Residual) {
      data.J = model_.compatibleStructure(p, t_).first.J;
    }
    if (detail_ == GeometryDetail::Curvature) {
      data.ric = model_.ricci(p, t_);
    }
    return cache_.emplace(std::move(key), std::move(data)).first->second;
  }

 private:
  const AmbientModel& model_;
  double t_;
  GeometryDetail detail_;
  std::map<std::vector<double>, AmbientPointData> cache_;
};

}  // namespace

InducedGeometry inducedGeometry(const LagrangianRep& rep, double t, GeometryDetail detail,
                                int grid_n) {
  const int d = rep.chartDim();
  const int n = 2 * d;
  const RealizedGraph graph = realize(rep, grid_n);
  const int m = graph.grid_n;
  const int total = gridTotal(d, m);

  InducedGeometry geo;
  geo.model = rep.model.get();
  geo.dim = d;
  geo.grid_n = m;
  geo.cutoff = rep.cutoff();
  geo.t = t;
  geo.points.assign(n, Eigen::ArrayXd(total));
  geo.tangent.assign(d * n, Eigen::ArrayXd(total));
  geo.metric.assign(d * d, Eigen::ArrayXd(total));
  geo.metric_inv.assign(d * d, Eigen::ArrayXd(total));
  geo.volume_density.resize(total);
  geo.second_fund.assign(d * d * n, Eigen::ArrayXd(total));
  geo.mean_curv.assign(n, Eigen::ArrayXd(total));
  geo.sigma_h.assign(d, Eigen::ArrayXd(total));
  geo.ambient_metric.assign(n * n, Eigen::ArrayXd(total));
  if (detail != GeometryDetail::Residual) {
    geo.ambient_j.assign(n * n, Eigen::ArrayXd(total));
    geo.s_tensor.assign(d * d * d, Eigen::ArrayXd(total));
  }
  if (detail == GeometryDetail::Curvature) {
    geo.ambient_ricci.assign(n * n, Eigen::ArrayXd(total));
  }

  AmbientCache cache(*rep.model, t, detail);
  const Eigen::MatrixXd& Om = rep.model->omega();

  double worst_cond = 1.0;
  double sup_h = 0.0;

  for (int node = 0; node < total; ++node) {
    const Eigen::VectorXd p = graph.chartPoint(node);
    const AmbientPointData& amb = cache.at(p);

    for (int u = 0; u < n; ++u) geo.points[u][node] = p[u];
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) geo.ambient_metric[u * n + v][node] = amb.G(u, v);
    }

    // Tangent frame e_a = dx/dtheta_a.
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, d);
    for (int a = 0; a < d; ++a) {
      for (int j = 0; j < d; ++j) e(j, a) = graph.dtrans[a * d + j][node];
      e(d + a, a) = 1.0;
    }
    for (int a = 0; a < d; ++a) {
      for (int u = 0; u < n; ++u) geo.tangent[a * n + u][node] = e(u, a);
    }

    const Eigen::MatrixXd ghat = e.transpose() * amb.G * e;
    Eigen::MatrixXd ghat_inv;
    double det;
    if (d == 1) {
      det = ghat(0, 0);
      ghat_inv = Eigen::MatrixXd::Constant(1, 1, 1.0 / det);
      worst_cond = std::max(worst_cond, 1.0);
    } else {
      det = ghat.determinant();
      ghat_inv = ghat.inverse();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ghat, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      const double hi = es.eigenvalues().maxCoeff();
      if (lo <= 0.0) throw NumericError("inducedGeometry: induced metric not positive");
      worst_cond = std::max(worst_cond, hi / lo);
    }
    if (!(det > 0.0)) throw NumericError("inducedGeometry: degenerate induced metric");
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        geo.metric[a * d + b][node] = ghat(a, b);
        geo.metric_inv[a * d + b][node] = ghat_inv(a, b);
      }
    }
    geo.volume_density[node] = std::sqrt(det);

    // Second fundamental form: normal part of the ambient acceleration.
    Eigen::VectorXd H = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
        for (int j = 0; j < d; ++j) acc[j] = graph.d2trans[(a * d + b) * d + j][node];
        for (int kk = 0; kk < n; ++kk) {
          acc[kk] += e.col(a).dot(amb.gamma[kk] * e.col(b));
        }
        // Tangential coefficients: ghat c = e^T G acc.
        const Eigen::VectorXd rhs = e.transpose() * amb.G * acc;
        const Eigen::VectorXd coef = ghat_inv * rhs;
        const Eigen::VectorXd Bab = acc - e * coef;
        for (int u = 0; u < n; ++u) geo.second_fund[(a * d + b) * n + u][node] = Bab[u];
        H += ghat_inv(a, b) * Bab;
      }
    }
    for (int u = 0; u < n; ++u) geo.mean_curv[u][node] = H(u);
    sup_h = std::max(sup_h, std::sqrt(std::max(0.0, (H.transpose() * amb.G * H)(0, 0))));

    const Eigen::VectorXd omH = Om.transpose() * H;  // omega(H, .) as a covector
    for (int a = 0; a < d; ++a) geo.sigma_h[a][node] = omH.dot(e.col(a));

    if (detail != GeometryDetail::Residual) {
      for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) geo.ambient_j[u * n + v][node] = amb.J(u, v);
      }
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
          Eigen::VectorXd Bab(n);
          for (int u = 0; u < n; ++u) Bab[u] = geo.second_fund[(a * d + b) * n + u][node];
          const Eigen::VectorXd JB = amb.J * Bab;
          for (int c = 0; c < d; ++c) {
            geo.s_tensor[(a * d + b) * d + c][node] = JB.dot(amb.G * e.col(c));
          }
        }
      }
    }
    if (detail == GeometryDetail::Curvature) {
      for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) geo.ambient_ricci[u * n + v][node] = amb.ric(u, v);
      }
    }
  }

  geo.metric_condition = worst_cond;
  geo.sup_mean_curv = sup_h;
  if (worst_cond > 1e8) throw NumericError("inducedGeometry: induced metric ill-conditioned");
  return geo;
}

std::vector<SpectralField> sigmaForm(const InducedGeometry& geo,
                                     const std::vector<Eigen::ArrayXd>& ambient_field) {
  const int d = geo.dim;
  const int n = 2 * d;
  if (static_cast<int>(ambient_field.size()) != n) {
    throw PreconditionError("sigmaForm: field must have 2d ambient components");
  }
  const Eigen::MatrixXd& Om = geo.model->omega();
  std::vector<SpectralField> out(d);
  for (int a = 0; a < d; ++a) {
    Eigen::ArrayXd comp = Eigen::ArrayXd::Zero(geo.volume_density.size());
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) {
        if (Om(u, v) == 0.0) continue;
        comp += Om(u, v) * ambient_field[u] * geo.tangent[a * n + v];
      }
    }
    out[a] = SpectralField::fromGrid(d, geo.cutoff, comp, geo.grid_n);
  }
  return out;
}

std::vector<SpectralField> sigmaOfMeanCurvature(const InducedGeometry& geo) {
  std::vector<SpectralField> out(geo.dim);
  for (int a = 0; a < geo.dim; ++a) {
    out[a] = SpectralField::fromGrid(geo.dim, geo.cutoff, geo.sigma_h[a], geo.grid_n);
  }
  return out;
}

double volume(const InducedGeometry& geo) {
  return gridIntegral(geo.volume_density, geo.dim, geo.grid_n);
}

double volume(const LagrangianRep& rep, double t) {
  return volume(inducedGeometry(rep, t, GeometryDetail::Residual));
}

}  // namespace hamlag
