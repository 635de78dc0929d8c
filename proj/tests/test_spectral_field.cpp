#include <doctest.h>

#include <cmath>
#include <random>

#include "hamlag/errors.hpp"
#include "hamlag/spectral_field.hpp"

using namespace hamlag;

namespace {

SpectralField randomField(int dim, int cutoff, std::mt19937_64& rng, double amp = 1.0) {
  std::normal_distribution<double> dist(0.0, amp);
  Eigen::VectorXd coeffs(SpectralField::realBasisSize(dim, cutoff));
  for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = dist(rng);
  return SpectralField::fromRealCoeffs(dim, cutoff, coeffs);
}

}  // namespace

TEST_CASE("grid round trip is exact for band-limited fields") {
  std::mt19937_64 rng(1);
  for (int dim : {1, 2}) {
    const int N = dim == 1 ? 16 : 6;
    const SpectralField f = randomField(dim, N, rng);
    for (int m : {2 * N + 1, 3 * N + 4}) {
      if (m % 2 == 0) ++m;
      const Eigen::ArrayXd samples = f.sample(m);
      const SpectralField g = SpectralField::fromGrid(dim, N, samples, m);
      CHECK((g - f).norm() < 1e-12 * std::max(1.0, f.norm()));
    }
  }
}

TEST_CASE("real-valuedness: samples match direct evaluation") {
  std::mt19937_64 rng(2);
  const SpectralField f = randomField(2, 4, rng);
  const int m = 11;
  const Eigen::ArrayXd samples = f.sample(m);
  for (int i1 = 0; i1 < m; i1 += 3) {
    for (int i2 = 0; i2 < m; i2 += 4) {
      Eigen::VectorXd theta(2);
      theta << 2.0 * M_PI * i1 / m, 2.0 * M_PI * i2 / m;
      CHECK(samples[i1 * m + i2] == doctest::Approx(f.evaluate(theta)).epsilon(1e-12));
    }
  }
}

TEST_CASE("derivative is the exact Fourier multiplier") {
  SpectralField f(1, 8);
  f.mode(3) = {0.0, -0.5};  // sin(3 theta)
  f.mode(-3) = {0.0, 0.5};
  const SpectralField df = f.derivative(0);
  const int m = 33;
  const Eigen::ArrayXd samples = df.sample(m);
  for (int i = 0; i < m; ++i) {
    const double theta = 2.0 * M_PI * i / m;
    CHECK(samples[i] == doctest::Approx(3.0 * std::cos(3.0 * theta)).epsilon(1e-12));
  }
}

TEST_CASE("real coefficient round trip") {
  std::mt19937_64 rng(3);
  for (int dim : {1, 2}) {
    const int N = dim == 1 ? 12 : 5;
    const SpectralField f = randomField(dim, N, rng);
    const Eigen::VectorXd c = f.toRealCoeffs();
    const SpectralField g = SpectralField::fromRealCoeffs(dim, N, c);
    CHECK((g - f).norm() < 1e-13 * std::max(1.0, f.norm()));
    CHECK(c.size() == SpectralField::realBasisSize(dim, N));
  }
}

TEST_CASE("basis functions are the expected trigonometric monomials") {
  // d=1, index 0 -> cos(theta), index 1 -> sin(theta).
  const SpectralField c1 = SpectralField::realBasisFunction(1, 4, 0);
  const SpectralField s1 = SpectralField::realBasisFunction(1, 4, 1);
  Eigen::VectorXd theta(1);
  theta << 0.7;
  CHECK(c1.evaluate(theta) == doctest::Approx(std::cos(0.7)).epsilon(1e-13));
  CHECK(s1.evaluate(theta) == doctest::Approx(std::sin(0.7)).epsilon(1e-13));

  // d=2: the first pairs run over (0, k2).
  const SpectralField c01 = SpectralField::realBasisFunction(2, 3, 0);
  Eigen::VectorXd th2(2);
  th2 << 0.3, 1.1;
  CHECK(c01.evaluate(th2) == doctest::Approx(std::cos(1.1)).epsilon(1e-13));
}

TEST_CASE("parseval inner product matches quadrature") {
  std::mt19937_64 rng(4);
  const SpectralField f = randomField(1, 10, rng);
  const SpectralField g = randomField(1, 10, rng);
  const int m = 64 + 1;
  const double quad = gridIntegral(f.sample(m) * g.sample(m), 1, m);
  CHECK(f.dot(g) == doctest::Approx(quad).epsilon(1e-12));
}

TEST_CASE("quadrature integrates the volume of simple densities") {
  SpectralField f(1, 4);
  f.setMeanValue(2.5);
  CHECK(gridIntegral(f.sample(9), 1, 9) == doctest::Approx(5.0 * M_PI).epsilon(1e-14));
}

TEST_CASE("dealias grid is odd and large enough") {
  for (int N : {4, 8, 16, 32}) {
    const int m = dealiasGridSize(N);
    CHECK(m % 2 == 1);
    CHECK(m >= 3 * N + 1);
  }
}

TEST_CASE("shape errors are rejected") {
  CHECK_THROWS_AS(SpectralField(3, 4), PreconditionError);
  CHECK_THROWS_AS(SpectralField(1, 0), PreconditionError);
  SpectralField f(1, 4);
  CHECK_THROWS_AS(f.sample(7), PreconditionError);
  CHECK_THROWS_AS((void)f.mode(5), PreconditionError);
}

TEST_CASE("dealiased product of band-limited fields is exact up to cutoff") {
  std::mt19937_64 rng(8);
  const int N = 8;
  const SpectralField f = randomField(1, N, rng);
  const SpectralField g = randomField(1, N, rng);
  const int m = dealiasGridSize(N);
  // Product sampled on the dealiased grid, truncated to N: compare with a
  // much finer grid (no aliasing at all).
  const SpectralField p1 = SpectralField::fromGrid(1, N, f.sample(m) * g.sample(m), m);
  const int big = 4 * N + 5;
  const SpectralField p2 = SpectralField::fromGrid(1, N, f.sample(big) * g.sample(big), big);
  CHECK((p1 - p2).norm() < 1e-12 * std::max(1.0, p2.norm()));
}
