#pragma once

#include <vector>

#include "hamlag/lagrangian.hpp"
#include "hamlag/spectral_field.hpp"

namespace hamlag {

/// Pseudospectral Hodge operators with respect to an induced metric with
/// variable coefficients.  Intermediate products are formed on the
/// geometry's dealiased grid; results are truncated back to the cutoff.
/// Sign conventions: laplacian = delta d is nonnegative; the
/// codifferential is the formal adjoint of d in L2(dvol).
class HodgeOps {
 public:
  /// cutoff_override > 0 changes the output truncation (e.g. the full
  /// grid-resolvable band (grid_n-1)/2 for adjointness checks).
  explicit HodgeOps(const InducedGeometry& geo, int cutoff_override = 0);

  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }
  int gridSize() const { return grid_n_; }

  /// Contravariant gradient components ghat^{ab} d_b f.
  std::vector<SpectralField> grad(const SpectralField& f) const;

  /// (1/rho) d_a (rho v^a) of a contravariant vector field.
  SpectralField divergence(const std::vector<SpectralField>& v) const;

  /// delta(alpha) = -(1/rho) d_a (rho ghat^{ab} alpha_b) on 1-forms.
  SpectralField codifferential(const std::vector<SpectralField>& alpha) const;

  /// delta d f.
  SpectralField laplacian(const SpectralField& f) const;

  /// L2(dvol) inner product of scalar fields.
  double inner(const SpectralField& f, const SpectralField& g) const;

  // Grid-sample workhorses shared with the operator assembler.
  Eigen::ArrayXd sampleDerivative(const Eigen::ArrayXd& values, int axis) const;
  SpectralField codifferentialFromSamples(const std::vector<Eigen::ArrayXd>& alpha) const;
  const Eigen::ArrayXd& metricInv(int a, int b) const { return metric_inv_[a * dim_ + b]; }
  const Eigen::ArrayXd& density() const { return rho_; }

 private:
  int dim_;
  int cutoff_;
  int grid_n_;
  int work_cutoff_;  // largest cutoff the grid resolves
  std::vector<Eigen::ArrayXd> metric_inv_;
  Eigen::ArrayXd rho_;
};

}  // namespace hamlag
