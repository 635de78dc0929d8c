#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace hamlag {

/// Truncated Fourier series on T^d, d in {1,2}.  Modes run over
/// k in [-N, N]^d; real-valuedness is kept as conjugate symmetry of the
/// coefficients.  Values live on uniform collocation grids
/// theta_i = 2*pi*i/m with m >= 2N+1 points per axis.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(int dim, int cutoff);

  static SpectralField zero(int dim, int cutoff) { return SpectralField(dim, cutoff); }

  /// Forward transform of real samples on an m^d grid, truncated to the
  /// cutoff.  Requires m >= 2*cutoff+1.
  static SpectralField fromGrid(int dim, int cutoff, const Eigen::ArrayXd& values, int grid_n);

  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }
  int modeCount() const { return static_cast<int>(modes_.size()); }

  std::complex<double>& mode(int k1, int k2 = 0) { return modes_[modeIndex(k1, k2)]; }
  const std::complex<double>& mode(int k1, int k2 = 0) const { return modes_[modeIndex(k1, k2)]; }

  double meanValue() const { return modes_[modeIndex(0, 0)].real(); }
  void setMeanValue(double v) { modes_[modeIndex(0, 0)] = v; }

  /// d/dtheta_axis as a new field (exact Fourier multiplier).
  SpectralField derivative(int axis) const;

  /// Real samples on the m^d uniform grid (row-major over axes).
  Eigen::ArrayXd sample(int grid_n) const;

  /// Point evaluation by direct mode summation.
  double evaluate(const Eigen::VectorXd& theta) const;

  /// Plain L2(T^d, dtheta) inner product and norm (Parseval).
  double dot(const SpectralField& other) const;
  double norm() const;
  double supNorm(int grid_n = 0) const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  SpectralField operator+(const SpectralField& o) const;
  SpectralField operator-(const SpectralField& o) const;
  SpectralField operator*(double s) const;

  /// Coordinates in the real mean-zero basis {cos(k.theta), sin(k.theta)}
  /// over representative wavenumbers; size (2N+1)^d - 1.
  Eigen::VectorXd toRealCoeffs() const;
  static SpectralField fromRealCoeffs(int dim, int cutoff, const Eigen::VectorXd& coeffs);
  static int realBasisSize(int dim, int cutoff);

  /// The real basis function for a coefficient index, as a field.
  static SpectralField realBasisFunction(int dim, int cutoff, int index);

  /// Wavenumber of the representative pair holding coefficient `index`
  /// (cos for even offset, sin for odd).
  static void realBasisWavenumber(int dim, int cutoff, int index, int& k1, int& k2, bool& is_sin);

  /// Enforce exact conjugate symmetry (projects onto real fields).
  void symmetrize();

  /// Truncate or zero-extend to a new cutoff.
  SpectralField withCutoff(int new_cutoff) const;

 private:
  int modeIndex(int k1, int k2) const;
  int dim_ = 1;
  int cutoff_ = 0;
  std::vector<std::complex<double>> modes_;
};

/// Smallest odd grid size that dealiases quadratic products at this cutoff.
int dealiasGridSize(int cutoff);

/// Mean of samples times (2*pi)^d: the exact integral over T^d for
/// band-limited integrands.
double gridIntegral(const Eigen::ArrayXd& values, int dim, int grid_n);

}  // namespace hamlag
