#pragma once

// Symmetric reduction of transverse Kähler geometry on U(1)-invariant model
// Sasaki 3-manifolds. Everything is written in the background moment
// coordinate y in [-1, 1]; a transverse metric is the density D relative to the
// background profile phi0, and S-integrals use dm = D dy with Vol = 2.

#include "srf/spectral1d.hpp"

#include <memory>

namespace srf {

struct GeometryConfig {
  double p_minus = 2.0;  // pole slope at y = -1
  double p_plus = 2.0;   // pole slope at y = +1
  int n = Grid::kDefaultSize;

  /// Orbifold weights (a, b): p_minus = 2/b, p_plus = 2/a.
  static GeometryConfig from_weights(double a, double b, int n = Grid::kDefaultSize);

  double kappa() const { return (p_minus + p_plus) / 4.0; }
  void validate() const;
};

inline constexpr double kVolume = 2.0;
inline constexpr int kComplexDim = 1;

class BackgroundGeometry {
 public:
  GridPtr grid;
  double p_minus = 2.0, p_plus = 2.0, kappa = 1.0;
  Field phi0;   // profile, vanishing at both poles
  Field dphi0;  // exact derivative of the profile
  Field q;      // phi0 / (1 - y^2), positive on [-1, 1]
  Field R0;     // background scalar curvature -phi0''/2
  Field F;      // background Ricci potential: H0[F] = R0 - kappa, int e^{-F} dy = 2
  /// Nodal matrix of H0[f] = (phi0 f')' / 2 in product-rule form.
  Eigen::MatrixXd H;

  Field H0(const Field& f) const;
  /// Closed-form Futaki invariant (p_plus - p_minus) / 2.
  double futaki_closed_form() const { return (p_plus - p_minus) / 2.0; }
};
using BackgroundPtr = std::shared_ptr<const BackgroundGeometry>;

BackgroundPtr make_background(const GeometryConfig& config);

/// Transverse metric determined by a potential, with its curvature data.
struct MetricState {
  BackgroundPtr bg;
  Field phi;          // potential as given
  Field D;            // density 1 + H0[phi]
  Field D_minus_one;  // H0[phi], kept separately for log1p/expm1 accuracy
  Field log_D;
  Field u;            // Ricci potential, int e^{-u} dm = Vol
  Field R;            // scalar curvature (complex trace)
  Field h;            // moment map of the evolving metric, h' = D, h(+-1) = +-1
  double t = 0.0;

  const Grid& grid() const { return *bg->grid; }
  const GridPtr& grid_ptr() const { return bg->grid; }
};

inline constexpr double kDefaultPositivityFloor = 1e-8;

/// D = 1 + H0[phi]. Admissibility is the caller's business.
Field density(const Field& phi, const BackgroundGeometry& bg);

/// Fully populated state or InadmissibleError when min D <= eps_pos.
MetricState validate_state(const Field& phi, const BackgroundPtr& bg,
                           double eps_pos = kDefaultPositivityFloor, double t = 0.0);

/// u = kappa phi + log D - F + c with int e^{-u} dm = Vol.
Field ricci_potential(const Field& phi, const BackgroundPtr& bg);

/// |d f|^2_g = phi0 f'^2 / (2 D).
Field grad_norm_sq(const Field& f, const MetricState& state);
/// Complex Laplacian H0[f] / D.
Field laplacian(const Field& f, const MetricState& state);
/// Pure (holomorphic) Hessian norm |grad grad f|^2 = (phi0^2 / 4) ((f'/D)')^2.
Field hessian_norm_sq(const Field& f, const MetricState& state);
/// int f dm.
double integrate_dm(const Field& f, const MetricState& state);

/// Pole-to-pole meridian length int sqrt(D / phi0) dy.
double transverse_diameter(const MetricState& state);
double transverse_diameter(const Field& D, const BackgroundGeometry& bg);

/// Scale data of (g, eta, xi) under D-homothetic transformations.
struct SasakiScalars {
  double kappa = 1.0;  // transverse Einstein constant, complex (Kähler) convention
  double metric_scale = 1.0;
  double eta_scale = 1.0;
  double xi_scale = 1.0;

  /// Einstein constant of the Riemannian transverse metric, 2 kappa for n = 1.
  double riemannian_einstein_constant() const { return 2.0 * kappa; }
};

SasakiScalars dhomothety(const SasakiScalars& s, double a);
/// Homothety factor a = c / (2n) that brings a transverse Einstein constant c
/// to the Sasaki-Einstein normalization 2n + 2.
double einstein_normalizing_factor(double c);

enum class CurvaturePlane { TransverseTransverse, TransverseReeb };

/// Sectional curvature of the ambient Sasaki metric at a node, after a
/// D-homothety with factor `homothety` (1 = the structure as given).
double reconstruct_sasaki_curvature(const MetricState& state, int node, CurvaturePlane plane,
                                    double homothety = 1.0);
double reconstruct_sasaki_curvature(double scalar_curvature, CurvaturePlane plane,
                                    double homothety = 1.0);

}  // namespace srf
