#include <doctest.h>

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "hamlag/compatible_triple.hpp"
#include "hamlag/errors.hpp"

using namespace hamlag;

namespace {

Eigen::MatrixXd randomSpd(int n, std::mt19937_64& rng, double spread = 1.0) {
  std::normal_distribution<double> dist(0.0, spread);
  Eigen::MatrixXd r(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) r(i, j) = dist(rng);
  }
  return r * r.transpose() + 0.3 * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("tensor A for the standard structure on R^2") {
  const auto omega = SymplecticForm::standard(2);
  const auto A = tensorA(omega, MetricForm::euclidean(2));
  Eigen::MatrixXd expected(2, 2);
  expected << 0, -1, 1, 0;
  CHECK((A - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("tensor A scales inversely with the metric") {
  const auto omega = SymplecticForm::standard(2);
  const double c = 4.0;
  const auto A = tensorA(omega, MetricForm(c * Eigen::MatrixXd::Identity(2, 2)));
  Eigen::MatrixXd expected(2, 2);
  expected << 0, -1.0 / c, 1.0 / c, 0;
  CHECK((A - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("tensor A is block diagonal for a block metric on R^4") {
  const auto omega = SymplecticForm::standard(4);  // dx1^dx2 pairing in (e1,e3),(e2,e4)?
  // Use the splitting omega = dx1^dx2 + dx3^dx4 directly.
  Eigen::MatrixXd om = Eigen::MatrixXd::Zero(4, 4);
  om(0, 1) = 1;
  om(1, 0) = -1;
  om(2, 3) = 1;
  om(3, 2) = -1;
  Eigen::VectorXd diag(4);
  diag << 1, 1, 4, 4;
  const auto A = tensorA(SymplecticForm(om), MetricForm(diag.asDiagonal()));
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
  expected(0, 1) = -1;
  expected(1, 0) = 1;
  expected(2, 3) = -0.25;
  expected(3, 2) = 0.25;
  CHECK((A - expected).cwiseAbs().maxCoeff() < 1e-14);
  // g-skewness on random vectors.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd G = diag.asDiagonal();
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd u(4), v(4);
    for (int i = 0; i < 4; ++i) {
      u[i] = dist(rng);
      v[i] = dist(rng);
    }
    CHECK(std::abs((A * u).dot(G * v) + u.dot(G * (A * v))) < 1e-12);
  }
}

TEST_CASE("polar retraction fixes compatible metrics") {
  const auto omega = SymplecticForm::standard(2);
  const auto [factors, r] = polarRetraction(omega, MetricForm::euclidean(2));
  Eigen::MatrixXd j_expected(2, 2);
  j_expected << 0, -1, 1, 0;
  CHECK((factors.J - j_expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r.matrix - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("polar retraction of a scaled metric recovers the Euclidean one") {
  const auto omega = SymplecticForm::standard(2);
  const auto [factors, r] = polarRetraction(omega, MetricForm(4.0 * Eigen::MatrixXd::Identity(2, 2)));
  Eigen::MatrixXd j_expected(2, 2);
  j_expected << 0, -1, 1, 0;
  CHECK((factors.J - j_expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r.matrix - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("retraction suite: structure, idempotence, compatibility") {
  std::mt19937_64 rng(2024);
  for (int dim : {2, 4, 6}) {
    const auto omega = SymplecticForm::standard(dim);
    for (int trial = 0; trial < 100; ++trial) {
      const MetricForm g(randomSpd(dim, rng));
      const auto [factors, r] = polarRetraction(omega, g);

      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
      CHECK((factors.J * factors.J + I).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((factors.P * factors.J - factors.A).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((factors.J * factors.P - factors.A).cwiseAbs().maxCoeff() < 1e-10);
      // J is g-orthogonal.
      CHECK((factors.J.transpose() * g.matrix * factors.J - g.matrix).cwiseAbs().maxCoeff() <
            1e-9);

      const CompatibleTriple triple{omega, factors.J, r};
      CHECK(checkTriple(triple).ok(1e-10));

      // Idempotence.
      const auto [factors2, r2] = polarRetraction(omega, r);
      CHECK((r2.matrix - r.matrix).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((factors2.J - factors.J).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("retracted metric is positive on random vectors") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist;
  const auto omega = SymplecticForm::standard(4);
  for (int trial = 0; trial < 20; ++trial) {
    const MetricForm g(randomSpd(4, rng));
    const auto [factors, r] = polarRetraction(omega, g);
    for (int i = 0; i < 10; ++i) {
      Eigen::VectorXd u(4);
      for (int k = 0; k < 4; ++k) u[k] = dist(rng);
      if (u.norm() < 1e-8) continue;
      CHECK(u.dot(r.matrix * u) > 0.0);
    }
  }
}

TEST_CASE("naturality: omega- and g-preserving maps commute with J_g") {
  // Generators of the intersection algebra solve Z^T G + G Z = 0 and
  // Z^T Om + Om Z = 0; exponentials give group elements.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist;
  for (int dim : {2, 4}) {
    const auto omega = SymplecticForm::standard(dim);
    const MetricForm g(randomSpd(dim, rng));
    const auto [factors, r] = polarRetraction(omega, g);

    // Solve the linear constraints via SVD of the stacked system acting on
    // vec(Z).
    const int n2 = dim * dim;
    Eigen::MatrixXd constraints(2 * n2, n2);
    auto entry = [&](int i, int j) { return j * dim + i; };  // column-major vec
    constraints.setZero();
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        for (int k = 0; k < dim; ++k) {
          // (Z^T G + G Z)(i,j) = Z(k,i) G(k,j) + G(i,k) Z(k,j)
          constraints(entry(i, j), entry(k, i)) += g.matrix(k, j);
          constraints(entry(i, j), entry(k, j)) += g.matrix(i, k);
          // (Z^T Om + Om Z)(i,j)
          constraints(n2 + entry(i, j), entry(k, i)) += omega.matrix(k, j);
          constraints(n2 + entry(i, j), entry(k, j)) += omega.matrix(i, k);
        }
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
    int nullity = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()[i] < 1e-9 * svd.singularValues()[0]) ++nullity;
    }
    REQUIRE(nullity > 0);  // the intersection contains at least a circle
    for (int pick = 0; pick < nullity; ++pick) {
      const Eigen::VectorXd z = svd.matrixV().col(n2 - 1 - pick);
      Eigen::MatrixXd Z(dim, dim);
      for (int j = 0; j < dim; ++j) Z.col(j) = z.segment(j * dim, dim);
      const Eigen::MatrixXd T = (0.7 * Z).exp();
      // T preserves both structures...
      CHECK((T.transpose() * g.matrix * T - g.matrix).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((T.transpose() * omega.matrix * T - omega.matrix).cwiseAbs().maxCoeff() < 1e-9);
      // ...hence commutes with J_g.
      CHECK((T * factors.J - factors.J * T).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("check triple reports the sign flip") {
  const int n = 2;
  const auto omega = SymplecticForm::standard(n);
  const auto [factors, r] = polarRetraction(omega, MetricForm::euclidean(n));
  CompatibleTriple good{omega, factors.J, r};
  CHECK(checkTriple(good).maxViolation() < 1e-14);

  CompatibleTriple flipped{omega, -factors.J, r};
  const auto report = checkTriple(flipped);
  CHECK(report.compatibility == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(report.ok());
}

TEST_CASE("constructors validate their inputs") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0, 1, 1, 0;  // symmetric, not antisymmetric
  CHECK_THROWS_AS(SymplecticForm{bad}, PreconditionError);
  Eigen::MatrixXd sing = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(SymplecticForm{sing}, PreconditionError);
  Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(MetricForm{neg}, PreconditionError);
  CHECK_THROWS_AS(tensorA(SymplecticForm::standard(2), MetricForm::euclidean(4)),
                  PreconditionError);
}
