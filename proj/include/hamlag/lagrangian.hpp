#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "hamlag/ambient.hpp"
#include "hamlag/spectral_field.hpp"

namespace hamlag {

/// Default spectral cutoffs per base dimension.
int defaultCutoff(int dim);

/// A Lagrangian torus/circle as the graph of a closed 1-form in the exact
/// chart: transverse coordinate = anchor + harmonic part + d(h).  The
/// harmonic coefficients label the leaf and are never touched by solvers;
/// h is the mean-zero potential.
struct LagrangianRep {
  std::shared_ptr<const AmbientModel> model;
  Eigen::VectorXd base_point;  // radii r_j on C^n, latitude z0 on S^2
  Eigen::VectorXd harmonic;    // coefficients of dtheta_a
  SpectralField h;

  int chartDim() const { return model->chartDim(); }
  int cutoff() const { return h.cutoff(); }

  /// Transverse chart anchor: I_j = r_j^2 / 2 on C^n, z0 on S^2.
  Eigen::VectorXd anchor() const;

  /// Same leaf and base, different potential.
  LagrangianRep withPotential(SpectralField new_h) const;
  /// Same base, shifted leaf label.
  LagrangianRep withHarmonic(Eigen::VectorXd new_harmonic) const;
};

LagrangianRep makeRep(std::shared_ptr<const AmbientModel> model, Eigen::VectorXd base_point,
                      Eigen::VectorXd harmonic, SpectralField h);
LagrangianRep makeZeroRep(std::shared_ptr<const AmbientModel> model, Eigen::VectorXd base_point,
                          int cutoff = 0);

/// Chart samples of the realized graph on a uniform collocation grid.
struct RealizedGraph {
  int dim = 1;
  int grid_n = 0;
  // transverse[j]: I_j (or z) samples; dtrans[a*d+j] = d(I_j)/d(theta_a);
  // d2trans[(a*d+b)*d+j] = second theta-derivatives of I_j.
  std::vector<Eigen::ArrayXd> transverse;
  std::vector<Eigen::ArrayXd> dtrans;
  std::vector<Eigen::ArrayXd> d2trans;

  Eigen::VectorXd chartPoint(int node) const;
  double angle(int axis, int node) const;
};

/// Realize the rep on a grid (default: the dealiased grid for its cutoff).
/// Throws ChartRangeError if the graph leaves the chart.
RealizedGraph realize(const LagrangianRep& rep, int grid_n = 0);

/// Maximum |x* omega| over the grid; zero up to round-off by construction.
double lagrangianExactness(const RealizedGraph& graph);

enum class GeometryDetail {
  Residual,   // induced metric, B, H, sigma_H
  Full,       // + J samples and the S tensor
  Curvature,  // + ambient Ricci samples
};

/// Pointwise induced geometry of the realized submanifold under g_t.
/// All arrays run over grid nodes (row-major over axes).
struct InducedGeometry {
  const AmbientModel* model = nullptr;
  int dim = 1;
  int grid_n = 0;
  int cutoff = 0;
  double t = 0.0;

  std::vector<Eigen::ArrayXd> points;      // 2d chart coordinates
  std::vector<Eigen::ArrayXd> tangent;     // e_a components: index a*2d + c
  std::vector<Eigen::ArrayXd> metric;      // ghat_{ab}: index a*d + b
  std::vector<Eigen::ArrayXd> metric_inv;  // ghat^{ab}
  Eigen::ArrayXd volume_density;           // sqrt(det ghat)
  std::vector<Eigen::ArrayXd> second_fund; // B_{ab} ambient comps: (a*d+b)*2d + c
  std::vector<Eigen::ArrayXd> mean_curv;   // H ambient components
  std::vector<Eigen::ArrayXd> sigma_h;     // (sigma_H)_a
  std::vector<Eigen::ArrayXd> ambient_metric;  // g_t: index u*2d + v
  std::vector<Eigen::ArrayXd> ambient_j;       // J_{g_t} (Full detail)
  std::vector<Eigen::ArrayXd> s_tensor;        // S(e_a,e_b,e_c): (a*d+b)*d + c (Full)
  std::vector<Eigen::ArrayXd> ambient_ricci;   // Ric(g_t) (Curvature detail)

  double metric_condition = 1.0;
  double sup_mean_curv = 0.0;  // max_g |H|_{g_t} over the grid
};

InducedGeometry inducedGeometry(const LagrangianRep& rep, double t,
                                GeometryDetail detail = GeometryDetail::Full, int grid_n = 0);

/// Pullback x*(omega(X, .)) of an ambient field sampled on the geometry
/// grid; components in the dtheta_a basis, truncated to the rep cutoff.
std::vector<SpectralField> sigmaForm(const InducedGeometry& geo,
                                     const std::vector<Eigen::ArrayXd>& ambient_field);

/// sigma_H as spectral 1-form components.
std::vector<SpectralField> sigmaOfMeanCurvature(const InducedGeometry& geo);

/// Spectral quadrature of the volume density.
double volume(const LagrangianRep& rep, double t);
double volume(const InducedGeometry& geo);

}  // namespace hamlag
