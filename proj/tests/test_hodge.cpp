#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "hamlag/hodge.hpp"

using namespace hamlag;

namespace {

SpectralField smoothRandom(int dim, int cutoff, std::mt19937_64& rng, double sup) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd c(SpectralField::realBasisSize(dim, cutoff));
  for (int i = 0; i < c.size(); ++i) {
    int k1, k2;
    bool is_sin;
    SpectralField::realBasisWavenumber(dim, cutoff, i, k1, k2, is_sin);
    c[i] = dist(rng) * std::exp(-0.7 * (std::abs(k1) + std::abs(k2)));
  }
  SpectralField f = SpectralField::fromRealCoeffs(dim, cutoff, c);
  const double scale = f.supNorm();
  return f * (scale > 0 ? sup / scale : 0.0);
}

InducedGeometry perturbedLatitude(std::mt19937_64& rng) {
  auto model = std::make_shared<AmbientModel>(makeSphere());
  Eigen::VectorXd z0(1);
  z0 << 0.3;
  const LagrangianRep rep =
      makeZeroRep(model, z0, 16).withPotential(smoothRandom(1, 16, rng, 0.05));
  return inducedGeometry(rep, 0.0, GeometryDetail::Residual);
}

InducedGeometry perturbedTorus(std::mt19937_64& rng) {
  auto model = std::make_shared<AmbientModel>(makeFlatCn(2));
  Eigen::VectorXd r(2);
  r << 1.0, 1.6;
  const LagrangianRep rep =
      makeZeroRep(model, r, 8).withPotential(smoothRandom(2, 8, rng, 0.03));
  return inducedGeometry(rep, 0.0, GeometryDetail::Residual);
}

}  // namespace

TEST_CASE("codifferential is the formal adjoint of d") {
  std::mt19937_64 rng(41);
  for (int variant = 0; variant < 2; ++variant) {
    const InducedGeometry geo = variant == 0 ? perturbedLatitude(rng) : perturbedTorus(rng);
    const HodgeOps hodge(geo, (geo.grid_n - 1) / 2);
    const int d = geo.dim;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<SpectralField> alpha(d);
      for (int a = 0; a < d; ++a) {
        alpha[a] = smoothRandom(d, geo.cutoff, rng, 1.0).withCutoff((geo.grid_n - 1) / 2);
      }
      const SpectralField f =
          smoothRandom(d, geo.cutoff, rng, 1.0).withCutoff((geo.grid_n - 1) / 2);

      // <delta alpha, f>_{L2(dvol)}
      const double lhs = hodge.inner(hodge.codifferential(alpha), f);
      // <alpha, df>_{ghat} integrated against dvol
      Eigen::ArrayXd integrand = Eigen::ArrayXd::Zero(geo.volume_density.size());
      for (int a = 0; a < d; ++a) {
        Eigen::ArrayXd sharp = Eigen::ArrayXd::Zero(geo.volume_density.size());
        for (int b = 0; b < d; ++b) {
          sharp += geo.metric_inv[a * d + b] * alpha[b].sample(geo.grid_n);
        }
        integrand += sharp * f.derivative(a).sample(geo.grid_n);
      }
      const double rhs = gridIntegral(integrand * geo.volume_density, d, geo.grid_n);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("laplacian equals delta d on functions") {
  std::mt19937_64 rng(42);
  const InducedGeometry geo = perturbedLatitude(rng);
  const HodgeOps hodge(geo);
  const SpectralField f = smoothRandom(1, geo.cutoff, rng, 1.0);
  std::vector<SpectralField> df(geo.dim);
  for (int a = 0; a < geo.dim; ++a) df[a] = f.derivative(a);
  const SpectralField lhs = hodge.laplacian(f);
  const SpectralField rhs = hodge.codifferential(df);
  CHECK((lhs - rhs).supNorm() < 1e-10 * std::max(1.0, lhs.supNorm()));
}

TEST_CASE("laplacian is nonnegative") {
  std::mt19937_64 rng(43);
  for (int variant = 0; variant < 2; ++variant) {
    const InducedGeometry geo = variant == 0 ? perturbedLatitude(rng) : perturbedTorus(rng);
    const HodgeOps hodge(geo);
    for (int trial = 0; trial < 10; ++trial) {
      const SpectralField f = smoothRandom(geo.dim, geo.cutoff, rng, 1.0);
      CHECK(hodge.inner(hodge.laplacian(f), f) > -1e-10);
    }
  }
}

TEST_CASE("laplacian eigenvalues on round circles") {
  // Unit circle in C: Delta = -d^2/dtheta^2; latitude circle: scaled by
  // 1/(1-z0^2).
  auto model_flat = std::make_shared<AmbientModel>(makeFlatCn(1));
  Eigen::VectorXd r(1);
  r << 1.0;
  const InducedGeometry flat_geo = inducedGeometry(makeZeroRep(model_flat, r, 16), 0.0,
                                                   GeometryDetail::Residual);
  const HodgeOps flat_hodge(flat_geo);
  for (int k : {1, 2, 5}) {
    SpectralField f(1, 16);
    f.mode(k) = {0.5, 0.0};
    f.mode(-k) = {0.5, 0.0};
    const SpectralField lap = flat_hodge.laplacian(f);
    CHECK((lap - f * double(k * k)).supNorm() < 1e-10);
  }

  auto model_sphere = std::make_shared<AmbientModel>(makeSphere());
  Eigen::VectorXd z0(1);
  z0 << 0.5;
  const InducedGeometry lat_geo = inducedGeometry(makeZeroRep(model_sphere, z0, 16), 0.0,
                                                  GeometryDetail::Residual);
  const HodgeOps lat_hodge(lat_geo);
  SpectralField f(1, 16);
  f.mode(2) = {0.0, -0.5};
  f.mode(-2) = {0.0, 0.5};
  const SpectralField lap = lat_hodge.laplacian(f);
  CHECK((lap - f * (4.0 / 0.75)).supNorm() < 1e-10);
}

TEST_CASE("codifferential is minus the divergence of the sharp") {
  std::mt19937_64 rng(44);
  const InducedGeometry geo = perturbedTorus(rng);
  const HodgeOps hodge(geo, (geo.grid_n - 1) / 2);
  const int d = geo.dim;
  const int work = (geo.grid_n - 1) / 2;
  std::vector<SpectralField> alpha(d);
  for (int a = 0; a < d; ++a) {
    alpha[a] = smoothRandom(d, geo.cutoff, rng, 1.0).withCutoff(work);
  }
  // sharp: v^a = ghat^{ab} alpha_b, sampled and projected.
  std::vector<SpectralField> sharp(d);
  for (int a = 0; a < d; ++a) {
    Eigen::ArrayXd comp = Eigen::ArrayXd::Zero(geo.volume_density.size());
    for (int b = 0; b < d; ++b) comp += geo.metric_inv[a * d + b] * alpha[b].sample(geo.grid_n);
    sharp[a] = SpectralField::fromGrid(d, work, comp, geo.grid_n);
  }
  const SpectralField delta = hodge.codifferential(alpha);
  const SpectralField div = hodge.divergence(sharp);
  // Equality holds up to the dealiasing of the double projection.
  CHECK((delta + div).supNorm() < 1e-8 * std::max(1.0, delta.supNorm()));
}

TEST_CASE("gradient of a linear-in-theta potential on the unit circle") {
  auto model = std::make_shared<AmbientModel>(makeFlatCn(1));
  Eigen::VectorXd r(1);
  r << 1.0;
  const InducedGeometry geo =
      inducedGeometry(makeZeroRep(model, r, 8), 0.0, GeometryDetail::Residual);
  const HodgeOps hodge(geo);
  SpectralField f(1, 8);
  f.mode(1) = {0.5, 0.0};
  f.mode(-1) = {0.5, 0.0};  // cos(theta)
  const auto grad = hodge.grad(f);
  // ghat = r^2 = 1, so grad f = f'.
  CHECK((grad[0] - f.derivative(0)).supNorm() < 1e-12);
}
