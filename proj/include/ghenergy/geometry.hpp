#pragma once

#include "ghenergy/common.hpp"

#include <memory>
#include <optional>

namespace ghenergy {

/// Region of a coordinate chart from which points may be drawn.
struct ChartDomain {
  enum class Kind { Box, Ball };
  Kind kind = Kind::Box;
  Vec lo, hi;           // Box bounds
  double radius = 0.0;  // Ball radius (centered at the origin)
  int dim = 0;

  // Region used when drawing random test points; defaults to the full
  // domain. Unbounded charts (stereographic) restrict sampling to a
  // moderate ball so random points stay well conditioned.
  Vec sample_lo, sample_hi;
  double sample_radius = 0.0;

  bool contains(const Vec& p) const;
  Vec sample(std::mt19937_64& rng) const;

  static ChartDomain box(const Vec& lo, const Vec& hi);
  static ChartDomain ball(int dim, double radius);
};

/// Scalar field with analytic first and second derivatives, used for
/// conformal factors.
struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;
};

/// A Riemannian manifold presented through a single coordinate chart.
///
/// The metric is a matrix field over the chart; first and second derivative
/// fields are analytic for all built-in geometries, with a 4th-order finite
/// difference fallback for custom metrics.
class ChartGeometry {
 public:
  using MetricFn = std::function<Mat(const Vec&)>;
  using DMetricFn = std::function<std::vector<Mat>(const Vec&)>;
  using D2MetricFn = std::function<std::vector<std::vector<Mat>>(const Vec&)>;

  int dim = 0;
  std::string label;
  ChartDomain domain;
  MetricFn metric_fn;
  DMetricFn dmetric_fn;    // optional analytic d_k g
  D2MetricFn d2metric_fn;  // optional analytic d_k d_l g

  // Extra chart data for the built-in manifolds (sphere radius etc.).
  double radius = 1.0;

  Mat metric(const Vec& p) const;
  /// d_k g as a list of matrices; analytic when available unless forced.
  std::vector<Mat> metric_d1(const Vec& p, bool force_numeric = false) const;
  std::vector<std::vector<Mat>> metric_d2(const Vec& p, bool force_numeric = false) const;

  /// Orthonormal frame at p: columns F.col(a) satisfy g(F_a, F_b) = delta.
  /// Gram-Schmidt over the coordinate basis in fixed index order.
  Mat frame(const Vec& p) const;

  void require_inside(const Vec& p) const;

  bool has_analytic_derivatives() const { return static_cast<bool>(dmetric_fn); }
};

/// Curvature quantities at a point, expressed in the orthonormal frame.
///
/// Index convention: riemann(i,j,k,l) = g(R(f_i,f_j) f_l, f_k) with
/// R(X,Y)Z = [nabla_X, nabla_Y]Z - nabla_[X,Y] Z, so the unit round sphere
/// has riemann = (g ^ g)/2 (Kulkarni-Nomizu) and scalar m(m-1).
struct CurvatureData {
  int dim = 0;
  Tensor4 riemann;
  Mat ricci;
  double scalar = 0.0;
  Tensor4 weyl;
  /// Curvature operator on Lambda^2 in the lexicographic e_i^e_j (i<j)
  /// orthonormal basis; the unit sphere maps to the identity.
  Mat curvature_operator;
  Mat frame;
};

std::vector<Mat> christoffel(const ChartGeometry& geom, const Vec& p);
CurvatureData curvature(const ChartGeometry& geom, const Vec& p);

/// Scalar curvature only (no frame work); same conventions as curvature().
double scalar_curvature(const ChartGeometry& geom, const Vec& p);

/// Conformal (Weyl) part of the curvature: riemann minus the Kulkarni-Nomizu
/// combination of Ricci and scalar. Rejects dim < 4.
Tensor4 weyl_tensor(const CurvatureData& curv, int dim);

/// Norms of the self-dual / anti-self-dual halves of the Weyl operator for
/// the given orientation. Only defined for dim = 4.
std::pair<double, double> self_dual_parts(const CurvatureData& curv, int orientation);

struct GateResult {
  bool pass = false;
  double max_weyl = 0.0;  // max over samples of |W| / max(1, |R|)
  double tol = 0.0;
};

/// Checks conformal flatness over a set of sample points. In dimension 4 an
/// orientation may be supplied to test only the self-dual half.
GateResult conformal_flatness_gate(const ChartGeometry& geom, const std::vector<Vec>& points,
                                   double tol, std::optional<int> orientation = std::nullopt);

/// Rescales the metric to lambda * g. The conformal factor must be positive
/// on the chart domain and carry analytic derivatives.
ChartGeometry conformal_rescale(const ChartGeometry& geom, const ScalarField& lambda);

// Built-in geometries ------------------------------------------------------

ChartGeometry make_flat_torus(int dim);
/// Flat torus rescaled by lambda = 1 + amplitude * sin(x_1).
ChartGeometry make_conformal_torus(int dim, double amplitude);
/// Torus with a seeded trigonometric perturbation of the flat metric;
/// generically not conformally flat.
ChartGeometry make_bump_torus(int dim, std::uint64_t seed, double amplitude);
/// Round m-sphere of the given radius in a single stereographic chart.
ChartGeometry make_sphere(int m, double radius = 1.0);
/// Poincare ball with curvature -1, dimension m.
ChartGeometry make_hyperbolic_ball(int m);
/// Product S^{2n-1} x S^1 (unit sphere, circle of length 2 pi); chart is a
/// stereographic chart of the sphere factor times the angle coordinate.
ChartGeometry make_hopf_cylinder(int n);

ScalarField sin_conformal_factor(double amplitude);

// Stereographic chart helpers (radius-r sphere, projection from the last
// ambient axis).
namespace stereo {
Vec to_sphere(const Vec& x, double r);
Vec from_sphere(const Vec& q, double r);
/// Differential of to_sphere: an (m+1) x m matrix of full rank with
/// J^T J = conformal_factor * I.
Mat jacobian(const Vec& x, double r);
double conformal_factor(const Vec& x, double r);
}  // namespace stereo

}  // namespace ghenergy
