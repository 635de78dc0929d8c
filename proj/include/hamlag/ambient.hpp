#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hamlag/compatible_triple.hpp"

namespace hamlag {

/// Points closer than this to a chart boundary (poles of S^2, coordinate
/// axes of C^n) are rejected.
inline constexpr double kChartGuard = 1e-3;

enum class AmbientKind { FlatCn, SphereS2 };
enum class MetricFamilyKind { Constant, Cheeger, Homothety, WarpedS2 };
enum class ActionKind { Torus, SO2, SO3 };

/// One-parameter family of invariant metrics, evaluated pointwise.
struct MetricFamily {
  MetricFamilyKind kind = MetricFamilyKind::Constant;
  double kappa = 0.0;       // Homothety: g_t = (1 - 2*kappa*t) g_0
  double warp_coeff = 0.0;  // WarpedS2: f(z;t) = sqrt(1-z^2) (1 + warp_coeff*t*z^2)
  double t_min = 0.0;
  double t_max = 1.0;
};

/// Isometric Hamiltonian action in chart coordinates: generator fields,
/// their Hamiltonian potentials (the moment map), and a bi-invariant inner
/// product Q on the Lie algebra.
struct GroupActionData {
  ActionKind kind = ActionKind::Torus;
  int group_dim = 1;
  Eigen::MatrixXd Q;  // group_dim x group_dim, SPD
};

/// Chart-based ambient manifold: Darboux chart, metric family, action data,
/// and curvature evaluators.  FlatCn uses action-angle coordinates
/// (I_1..I_n, theta_1..theta_n) with I_j = |z_j|^2 / 2; SphereS2 uses the
/// cylindrical chart (z, phi) on the unit sphere.
class AmbientModel {
 public:
  AmbientKind kind() const { return kind_; }
  int chartDim() const { return d_; }
  int ambientDim() const { return 2 * d_; }
  const MetricFamily& family() const { return family_; }
  const GroupActionData& action() const { return action_; }

  /// Constant Darboux matrix of omega in chart coordinates.
  const Eigen::MatrixXd& omega() const { return omega_; }

  bool chartContains(const Eigen::VectorXd& p, double guard = kChartGuard) const;
  void requireInChart(const Eigen::VectorXd& p) const;

  Eigen::MatrixXd baseMetric(const Eigen::VectorXd& p) const;
  Eigen::MatrixXd metric(const Eigen::VectorXd& p, double t) const;

  /// Gamma[k](i,j) = Gamma^k_{ij} of g_t; analytic for Constant, Homothety
  /// and WarpedS2 families, finite differences of the metric for Cheeger.
  std::vector<Eigen::MatrixXd> christoffel(const Eigen::VectorXd& p, double t) const;

  /// Force the finite-difference path regardless of family (cross-checks).
  std::vector<Eigen::MatrixXd> christoffelFiniteDifference(const Eigen::VectorXd& p,
                                                           double t) const;

  Eigen::MatrixXd ricci(const Eigen::VectorXd& p, double t) const;
  Eigen::MatrixXd ricciFiniteDifference(const Eigen::VectorXd& p, double t) const;

  /// Action fields as columns of a 2d x group_dim matrix.
  Eigen::MatrixXd generators(const Eigen::VectorXd& p) const;
  /// <mu(p), X_i> for the generator basis.
  Eigen::VectorXd moment(const Eigen::VectorXd& p) const;

  /// omega-compatible structure at (p, t): J_{g_t} and the retracted
  /// metric r(g_t) from the pointwise polar decomposition.
  std::pair<PolarFactors, MetricForm> compatibleStructure(const Eigen::VectorXd& p,
                                                          double t) const;

  /// Warp profile f(z; t) of the rotationally symmetric families on S^2,
  /// with analytic z-derivatives (order <= 2).
  double warpProfile(double z, double t, int deriv = 0) const;

  friend AmbientModel makeFlatCn(int n, const MetricFamily& family, const GroupActionData& action);
  friend AmbientModel makeSphere(const MetricFamily& family, const GroupActionData& action);

 private:
  AmbientKind kind_ = AmbientKind::FlatCn;
  int d_ = 1;
  MetricFamily family_;
  GroupActionData action_;
  Eigen::MatrixXd omega_;
};

/// Flat C^n (1 <= n <= 2) in action-angle coordinates with the T^n
/// rotation action (moments mu_j = I_j).
AmbientModel makeFlatCn(int n, const MetricFamily& family = {},
                        const GroupActionData& action = {});

/// Unit S^2 in the cylindrical chart, omega = dz ^ dphi, with the SO(2)
/// rotation action (moment z) or the full so(3) triple (moments x, y, z).
AmbientModel makeSphere(const MetricFamily& family = {},
                        const GroupActionData& action = {ActionKind::SO2, 1, {}});

/// Cheeger deformation of the base metric at (p, t): shrinks the metric by
/// 1/(1 + t*lambda_i) along the orbit directions and fixes the horizontal
/// complement, with lambda_i the eigenvalues of P_0 = Q^{-1} Gram.
MetricForm cheegerMetric(const AmbientModel& model, double t, const Eigen::VectorXd& p);

/// Convenience named per the module surface.
Eigen::MatrixXd ricciTensor(const AmbientModel& model, double t, const Eigen::VectorXd& p);

}  // namespace hamlag
