#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "hamlag/errors.hpp"
#include "hamlag/lagrangian.hpp"

using namespace hamlag;

namespace {

std::shared_ptr<const AmbientModel> flatModel(int n, MetricFamily fam = {}) {
  return std::make_shared<AmbientModel>(makeFlatCn(n, fam));
}

std::shared_ptr<const AmbientModel> sphereModel(MetricFamily fam = {},
                                                GroupActionData action = {ActionKind::SO2, 1, {}}) {
  return std::make_shared<AmbientModel>(makeSphere(fam, action));
}

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// Smooth random field: spectrally decaying coefficients, rescaled to the
// requested sup-norm.
SpectralField randomMeanZero(int dim, int cutoff, std::mt19937_64& rng, double sup,
                             int max_mode = 0) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd c(SpectralField::realBasisSize(dim, cutoff));
  for (int i = 0; i < c.size(); ++i) {
    int k1, k2;
    bool is_sin;
    SpectralField::realBasisWavenumber(dim, cutoff, i, k1, k2, is_sin);
    const int total = std::abs(k1) + std::abs(k2);
    if (max_mode > 0 && total > max_mode) {
      c[i] = 0.0;
      continue;
    }
    c[i] = dist(rng) * std::exp(-0.7 * total);
  }
  SpectralField f = SpectralField::fromRealCoeffs(dim, cutoff, c);
  const double scale = f.supNorm();
  return f * (scale > 0 ? sup / scale : 0.0);
}

double meanCurvNorm(const InducedGeometry& geo, int node) {
  const int n = 2 * geo.dim;
  Eigen::VectorXd H(n);
  for (int u = 0; u < n; ++u) H[u] = geo.mean_curv[u][node];
  Eigen::MatrixXd G(n, n);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) G(u, v) = geo.ambient_metric[u * n + v][node];
  }
  return std::sqrt(std::max(0.0, H.dot(G * H)));
}

}  // namespace

TEST_CASE("realize: zero section of the unit circle") {
  const LagrangianRep rep = makeZeroRep(flatModel(1), vec1(1.0), 8);
  const RealizedGraph g = realize(rep);
  CHECK((g.transverse[0] - 0.5).abs().maxCoeff() < 1e-15);
  CHECK(lagrangianExactness(g) == 0.0);
}

TEST_CASE("realize: harmonic shift moves the circle radius") {
  const double a = 0.2;
  const LagrangianRep rep =
      makeZeroRep(flatModel(1), vec1(1.0), 8).withHarmonic(vec1(a));
  const RealizedGraph g = realize(rep);
  CHECK((g.transverse[0] - (0.5 + a)).abs().maxCoeff() < 1e-15);
  // Circle of radius sqrt(2(1/2 + a)).
  CHECK(volume(rep, 0.0) ==
        doctest::Approx(2.0 * M_PI * std::sqrt(2.0 * (0.5 + a))).epsilon(1e-12));
}

TEST_CASE("realize: equator of the sphere") {
  const LagrangianRep rep = makeZeroRep(sphereModel(), vec1(0.0), 8);
  const RealizedGraph g = realize(rep);
  CHECK(g.transverse[0].abs().maxCoeff() < 1e-15);
}

TEST_CASE("realize: chart range violations throw") {
  CHECK_THROWS_AS(realize(makeZeroRep(flatModel(1), vec1(1.0), 8).withHarmonic(vec1(-0.5))),
                  ChartRangeError);
  CHECK_THROWS_AS(realize(makeZeroRep(sphereModel(), vec1(0.9)).withHarmonic(vec1(0.2))),
                  ChartRangeError);
}

TEST_CASE("circle curvature and volume") {
  for (double r : {1.0, 1.7}) {
    const LagrangianRep rep = makeZeroRep(flatModel(1), vec1(r), 16);
    const InducedGeometry geo = inducedGeometry(rep, 0.0);
    const int total = static_cast<int>(geo.volume_density.size());
    for (int node = 0; node < total; node += 7) {
      CHECK(meanCurvNorm(geo, node) == doctest::Approx(1.0 / r).epsilon(1e-10));
    }
    CHECK(volume(rep, 0.0) == doctest::Approx(2.0 * M_PI * r).epsilon(1e-12));
  }
}

TEST_CASE("equator is minimal; latitude circle has |H| = kappa_g") {
  const LagrangianRep equator = makeZeroRep(sphereModel(), vec1(0.0), 16);
  const InducedGeometry geo = inducedGeometry(equator, 0.0);
  CHECK(geo.sup_mean_curv < 1e-13);
  CHECK(volume(equator, 0.0) == doctest::Approx(2.0 * M_PI).epsilon(1e-12));

  const double z0 = 0.5;
  const LagrangianRep lat = makeZeroRep(sphereModel(), vec1(z0), 16);
  const InducedGeometry lgeo = inducedGeometry(lat, 0.0);
  const double expected = z0 / std::sqrt(1.0 - z0 * z0);
  for (int node = 0; node < lgeo.grid_n; node += 5) {
    CHECK(meanCurvNorm(lgeo, node) == doctest::Approx(expected).epsilon(1e-10));
  }
  CHECK(volume(lat, 0.0) == doctest::Approx(M_PI * std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("product torus: volume and per-factor curvature magnitudes") {
  const LagrangianRep rep = makeZeroRep(flatModel(2), vec2(1.0, 2.0), 8);
  const InducedGeometry geo = inducedGeometry(rep, 0.0);
  CHECK(volume(rep, 0.0) == doctest::Approx(8.0 * M_PI * M_PI).epsilon(1e-12));
  // H = -(dI_1 + dI_2) direction; per-factor g-norms 1/r_j.
  const int n = 4;
  for (int node = 0; node < 40; ++node) {
    Eigen::VectorXd H(n);
    for (int u = 0; u < n; ++u) H[u] = geo.mean_curv[u][node];
    CHECK(H[0] == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(H[1] == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(std::abs(H[2]) < 1e-12);
    CHECK(std::abs(H[3]) < 1e-12);
    // factor norms: |H_j|_g = sqrt(g_II) = 1/r_j
    CHECK(std::sqrt(geo.ambient_metric[0][node]) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::sqrt(geo.ambient_metric[5][node]) == doctest::Approx(0.5).epsilon(1e-10));
  }
}

TEST_CASE("H equals the metric trace of B") {
  std::mt19937_64 rng(31);
  const LagrangianRep rep = makeZeroRep(sphereModel(), vec1(0.3), 16)
                                .withPotential(randomMeanZero(1, 16, rng, 0.02));
  const InducedGeometry geo = inducedGeometry(rep, 0.0);
  const int d = geo.dim, n = 2 * d;
  for (int node = 0; node < geo.grid_n; node += 3) {
    Eigen::VectorXd trace = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        for (int u = 0; u < n; ++u) {
          trace[u] += geo.metric_inv[a * d + b][node] * geo.second_fund[(a * d + b) * n + u][node];
        }
      }
    }
    for (int u = 0; u < n; ++u) {
      CHECK(std::abs(trace[u] - geo.mean_curv[u][node]) < 1e-10);
    }
  }
}

TEST_CASE("lagrangian exactness for perturbed 2-tori") {
  std::mt19937_64 rng(32);
  const LagrangianRep rep = makeZeroRep(flatModel(2), vec2(1.0, 1.4), 8)
                                .withPotential(randomMeanZero(2, 8, rng, 0.01));
  CHECK(lagrangianExactness(realize(rep)) < 1e-13);
}

TEST_CASE("sigma of the mean curvature has constant coefficients on tori") {
  const LagrangianRep rep = makeZeroRep(flatModel(2), vec2(1.0, 2.0), 8);
  const InducedGeometry geo = inducedGeometry(rep, 0.0);
  for (int a = 0; a < 2; ++a) {
    const Eigen::ArrayXd& comp = geo.sigma_h[a];
    CHECK((comp - comp[0]).abs().maxCoeff() < 1e-12);
    CHECK(comp[0] == doctest::Approx(-1.0).epsilon(1e-12));
  }
}

TEST_CASE("sigma of a torus-tangent rotation field vanishes") {
  const LagrangianRep rep = makeZeroRep(flatModel(2), vec2(1.0, 2.0), 8);
  const InducedGeometry geo = inducedGeometry(rep, 0.0);
  const int total = static_cast<int>(geo.volume_density.size());
  std::vector<Eigen::ArrayXd> X(4, Eigen::ArrayXd::Zero(total));
  X[2] = Eigen::ArrayXd::Ones(total);  // d/dtheta_1
  const auto sigma = sigmaForm(geo, X);
  for (const auto& comp : sigma) CHECK(comp.supNorm() < 1e-13);
}

TEST_CASE("sigma_{J grad h} = -dh") {
  std::mt19937_64 rng(33);
  auto checkIdentity = [&](const LagrangianRep& rep) {
    const InducedGeometry geo = inducedGeometry(rep, 0.0, GeometryDetail::Full);
    const int d = geo.dim, n = 2 * d;
    const int total = static_cast<int>(geo.volume_density.size());
    std::vector<Eigen::ArrayXd> dh(d);
    for (int a = 0; a < d; ++a) dh[a] = rep.h.derivative(a).sample(geo.grid_n);

    std::vector<Eigen::ArrayXd> jgrad(n, Eigen::ArrayXd::Zero(total));
    for (int node = 0; node < total; ++node) {
      Eigen::MatrixXd e(n, d), J(n, n), ginv(d, d);
      for (int a = 0; a < d; ++a) {
        for (int u = 0; u < n; ++u) e(u, a) = geo.tangent[a * n + u][node];
      }
      for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) J(u, v) = geo.ambient_j[u * n + v][node];
      }
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) ginv(a, b) = geo.metric_inv[a * d + b][node];
      }
      Eigen::VectorXd dh_node(d);
      for (int a = 0; a < d; ++a) dh_node[a] = dh[a][node];
      const Eigen::VectorXd grad = e * (ginv * dh_node);
      const Eigen::VectorXd jg = J * grad;
      for (int u = 0; u < n; ++u) jgrad[u][node] = jg[u];
    }
    const auto sigma = sigmaForm(geo, jgrad);
    for (int a = 0; a < d; ++a) {
      const SpectralField expected = rep.h.derivative(a) * (-1.0);
      CHECK((sigma[a] - expected).supNorm() < 1e-10);
    }
  };

  checkIdentity(makeZeroRep(flatModel(2), vec2(1.0, 1.5), 8)
                    .withPotential(randomMeanZero(2, 8, rng, 0.01)));
  checkIdentity(makeZeroRep(sphereModel(), vec1(0.2), 16)
                    .withPotential(randomMeanZero(1, 16, rng, 0.02)));
}

TEST_CASE("first variation matches finite differences of the volume") {
  // dVol/ds along the graph perturbation h + s dh equals -int g(H, X) dvol
  // with X the realized variation field (transverse components d_a(dh)).
  std::mt19937_64 rng(34);
  auto firstVariationPair = [&](const LagrangianRep& rep, double t, const SpectralField& dh) {
    const double s = 1e-4;
    const double vplus = volume(rep.withPotential(rep.h + dh * s), t);
    const double vminus = volume(rep.withPotential(rep.h - dh * s), t);
    const double fd = (vplus - vminus) / (2.0 * s);

    const InducedGeometry geo = inducedGeometry(rep, t, GeometryDetail::Residual);
    const int d = geo.dim, n = 2 * d;
    const int total = static_cast<int>(geo.volume_density.size());
    Eigen::ArrayXd integrand = Eigen::ArrayXd::Zero(total);
    std::vector<Eigen::ArrayXd> ddh(d);
    for (int a = 0; a < d; ++a) ddh[a] = dh.derivative(a).sample(geo.grid_n);
    for (int node = 0; node < total; ++node) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) {
        // X = (d_1 dh, ..., d_d dh, 0, ..., 0) in chart coordinates.
        for (int u = 0; u < n; ++u) {
          acc += geo.mean_curv[u][node] * geo.ambient_metric[u * n + j][node] * ddh[j][node];
        }
      }
      integrand[node] = acc * geo.volume_density[node];
    }
    return std::pair<double, double>(fd, -gridIntegral(integrand, d, geo.grid_n));
  };

  // Non-stationary bases: both sides are order one and must agree to 1e-6.
  for (int trial = 0; trial < 3; ++trial) {
    const LagrangianRep torus = makeZeroRep(flatModel(2), vec2(1.0, 2.0), 8)
                                    .withPotential(randomMeanZero(2, 8, rng, 0.05, 3));
    const SpectralField dh2 = randomMeanZero(2, 8, rng, 1.0, 3);
    const auto [fd_t, an_t] = firstVariationPair(torus, 0.0, dh2);
    REQUIRE(std::abs(an_t) > 1e-4);
    CHECK(fd_t == doctest::Approx(an_t).epsilon(1e-6));

    const LagrangianRep lat = makeZeroRep(sphereModel(), vec1(0.4), 16)
                                  .withPotential(randomMeanZero(1, 16, rng, 0.05, 3));
    const SpectralField dh1 = randomMeanZero(1, 16, rng, 1.0, 3);
    const auto [fd_l, an_l] = firstVariationPair(lat, 0.0, dh1);
    REQUIRE(std::abs(an_l) > 1e-4);
    CHECK(fd_l == doctest::Approx(an_l).epsilon(1e-6));
  }

  // Stationary bases: both sides vanish.
  const auto [fd0, an0] =
      firstVariationPair(makeZeroRep(flatModel(2), vec2(1.0, 2.0), 8), 0.0,
                         randomMeanZero(2, 8, rng, 1.0, 3));
  CHECK(std::abs(an0) < 1e-12);
  CHECK(std::abs(fd0) < 1e-6);
}

TEST_CASE("spectral convergence of the mean curvature on a perturbed latitude") {
  // Fixed analytic perturbation; the truncation error of |H| should drop by
  // orders of magnitude per doubling until round-off.
  auto perturbed = [&](int N) {
    SpectralField h(1, N);
    h.mode(2) = {0.005, 0.0};
    h.mode(-2) = {0.005, 0.0};
    h.mode(3) = {0.0, -0.002};
    h.mode(-3) = {0.0, 0.002};
    return makeZeroRep(sphereModel(), vec1(0.4), N).withPotential(h);
  };
  auto curvAt = [&](const LagrangianRep& rep, double phi) {
    const InducedGeometry geo = inducedGeometry(rep, 0.0, GeometryDetail::Residual);
    Eigen::ArrayXd norm(geo.volume_density.size());
    for (int node = 0; node < norm.size(); ++node) norm[node] = meanCurvNorm(geo, node);
    const SpectralField f =
        SpectralField::fromGrid(1, (geo.grid_n - 1) / 2, norm, geo.grid_n);
    Eigen::VectorXd p(1);
    p << phi;
    return f.evaluate(p);
  };
  const LagrangianRep ref = perturbed(48);
  const std::vector<double> probes = {0.3, 1.4, 2.9, 4.4, 5.6};
  auto errAt = [&](int N) {
    const LagrangianRep rep = perturbed(N);
    double worst = 0.0;
    for (double phi : probes) worst = std::max(worst, std::abs(curvAt(rep, phi) - curvAt(ref, phi)));
    return worst;
  };
  const double e4 = errAt(4);
  const double e8 = errAt(8);
  const double e16 = errAt(16);
  MESSAGE("H truncation errors: ", e4, " ", e8, " ", e16);
  CHECK(e4 > 0.0);
  CHECK(e8 < e4);
  CHECK(e16 <= std::max(1e-4 * e8, 5e-13));
}

TEST_CASE("volume under the homothety family scales by sqrt(1-2t)") {
  MetricFamily fam;
  fam.kind = MetricFamilyKind::Homothety;
  fam.kappa = 1.0;
  const LagrangianRep rep = makeZeroRep(sphereModel(fam), vec1(0.0), 16);
  const double t = 0.2;
  CHECK(volume(rep, t) == doctest::Approx(std::sqrt(1.0 - 2.0 * t) * 2.0 * M_PI).epsilon(1e-12));
}
