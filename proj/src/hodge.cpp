#include "hamlag/hodge.hpp"

#include "hamlag/errors.hpp"

namespace hamlag {

HodgeOps::HodgeOps(const InducedGeometry& geo, int cutoff_override)
    : dim_(geo.dim),
      cutoff_(cutoff_override > 0 ? cutoff_override : geo.cutoff),
      grid_n_(geo.grid_n),
      work_cutoff_((geo.grid_n - 1) / 2),
      metric_inv_(geo.metric_inv),
      rho_(geo.volume_density) {
  if (cutoff_ > work_cutoff_) {
    throw PreconditionError("HodgeOps: cutoff exceeds what the grid resolves");
  }
}

Eigen::ArrayXd HodgeOps::sampleDerivative(const Eigen::ArrayXd& values, int axis) const {
  return SpectralField::fromGrid(dim_, work_cutoff_, values, grid_n_)
      .derivative(axis)
      .sample(grid_n_);
}

std::vector<SpectralField> HodgeOps::grad(const SpectralField& f) const {
  std::vector<Eigen::ArrayXd> df(dim_);
  for (int a = 0; a < dim_; ++a) df[a] = f.derivative(a).sample(grid_n_);
  std::vector<SpectralField> out(dim_);
  for (int a = 0; a < dim_; ++a) {
    Eigen::ArrayXd comp = Eigen::ArrayXd::Zero(rho_.size());
    for (int b = 0; b < dim_; ++b) comp += metric_inv_[a * dim_ + b] * df[b];
    out[a] = SpectralField::fromGrid(dim_, cutoff_, comp, grid_n_);
  }
  return out;
}

SpectralField HodgeOps::divergence(const std::vector<SpectralField>& v) const {
  if (static_cast<int>(v.size()) != dim_) {
    throw PreconditionError("HodgeOps::divergence: component count mismatch");
  }
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(rho_.size());
  for (int a = 0; a < dim_; ++a) {
    acc += sampleDerivative(rho_ * v[a].sample(grid_n_), a);
  }
  return SpectralField::fromGrid(dim_, cutoff_, acc / rho_, grid_n_);
}

SpectralField HodgeOps::codifferentialFromSamples(const std::vector<Eigen::ArrayXd>& alpha) const {
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(rho_.size());
  for (int a = 0; a < dim_; ++a) {
    Eigen::ArrayXd sharp = Eigen::ArrayXd::Zero(rho_.size());
    for (int b = 0; b < dim_; ++b) sharp += metric_inv_[a * dim_ + b] * alpha[b];
    acc += sampleDerivative(rho_ * sharp, a);
  }
  return SpectralField::fromGrid(dim_, cutoff_, -acc / rho_, grid_n_);
}

SpectralField HodgeOps::codifferential(const std::vector<SpectralField>& alpha) const {
  if (static_cast<int>(alpha.size()) != dim_) {
    throw PreconditionError("HodgeOps::codifferential: component count mismatch");
  }
  std::vector<Eigen::ArrayXd> samples(dim_);
  for (int a = 0; a < dim_; ++a) samples[a] = alpha[a].sample(grid_n_);
  return codifferentialFromSamples(samples);
}

SpectralField HodgeOps::laplacian(const SpectralField& f) const {
  std::vector<Eigen::ArrayXd> df(dim_);
  for (int a = 0; a < dim_; ++a) df[a] = f.derivative(a).sample(grid_n_);
  return codifferentialFromSamples(df);
}

double HodgeOps::inner(const SpectralField& f, const SpectralField& g) const {
  return gridIntegral(f.sample(grid_n_) * g.sample(grid_n_) * rho_, dim_, grid_n_);
}

}  // namespace hamlag
