#pragma once

#include "ghenergy/geometry.hpp"

namespace ghenergy {

// Octonion arithmetic on the imaginary units e1..e7, used by the standard
// almost-complex structure of the 6-sphere. The multiplication table follows
// the cyclic convention e_a e_{a+1} = e_{a+3} (indices mod 7), i.e. the seven
// oriented triples (1,2,4), (2,3,5), (3,4,6), (4,5,7), (5,6,1), (6,7,2),
// (7,1,3).
namespace octonion {

/// Product of two imaginary units: e_i e_j = sign * e_k (k = 0 encodes the
/// real unit, for i == j).
struct UnitProduct {
  int unit;
  int sign;
};
UnitProduct unit_product(int i, int j);

/// Cross product u x v = Im(uv) of imaginary octonions (7-vectors).
Vec cross(const Vec& u, const Vec& v);

/// Associative 3-form phi(u, v, w) = <u x v, w>.
double triple(const Vec& u, const Vec& v, const Vec& w);

}  // namespace octonion

/// Ambient matrix of the Cayley almost-complex structure at p in S^6: the map
/// v -> p x v as a 7x7 matrix. Restricted to T_p S^6 it is orthogonal with
/// square -1. Requires |p| = 1 to 1e-12.
Mat cayley_j(const Vec& p);

/// Covariant derivative of the Kaehler form at a point, in the orthonormal
/// frame: components(i,j,k) = (nabla_{f_i} omega)(f_j, f_k).
struct NablaOmega {
  Tensor3 components;
  /// |alpha(X, JY, JZ) + alpha(X, Y, Z)| relative to |alpha|.
  double type_residual = 0.0;
};

/// An orthogonal almost-complex structure field over a chart.
///
/// j_coord gives the endomorphism on coordinate tangent vectors; the frame
/// representation at p is F(p)^{-1} J_coord(p) F(p). Fields backed by an
/// ambient sphere embedding may also carry an exact ambient evaluator for
/// nabla_omega, bypassing finite differences.
class ACSField {
 public:
  const ChartGeometry* geom = nullptr;
  std::string label;
  std::function<Mat(const Vec&)> j_coord_fn;
  enum class Differentiability { Analytic, FiniteDifference, None } differentiability =
      Differentiability::FiniteDifference;

  /// Optional analytic coordinate derivatives d_i J.
  std::function<std::vector<Mat>(const Vec&)> dj_coord_fn;
  /// Optional exact route: alpha(i,j,k) in the chart frame at p.
  std::function<Tensor3(const Vec&)> nabla_frame_fn;

  Mat j_coord(const Vec& p) const;
  Mat j_frame(const Vec& p) const;

  /// Max of |J^2 + I| and |J^T g J - g| in the frame representation.
  double invariant_residual(const Vec& p) const;
};

/// Cayley field on a stereographic chart of the round S^6.
ACSField make_cayley_field(const ChartGeometry& sphere6);

/// Pullback of the standard complex structure of C^n \ {0} to the cylinder
/// chart of S^{2n-1} x S^1 under (p, t) -> e^t p.
ACSField make_hopf_field(const ChartGeometry& hopf);

/// Constant orthogonal complex structure on a flat torus. The input matrix
/// must be orthogonal with square -1.
ACSField make_constant_field(const ChartGeometry& torus, const Mat& j0);

/// Orthogonal J drawn independently per point (seeded, deterministic); not
/// differentiable. For pointwise curvature checks only.
ACSField make_random_pointwise_field(const ChartGeometry& geom, std::uint64_t seed);

/// Standard block structure diag[[0,-1],[1,0], ...] on R^d.
Mat standard_j(int d);

/// nabla omega at p via the chart pipeline (4th-order finite differences of
/// J unless the field is analytic), or the field's exact ambient route when
/// present. Components are skew-symmetrized exactly in the last two slots.
NablaOmega nabla_omega(const ACSField& field, const Vec& p);

/// Chart-pipeline evaluation regardless of any exact route (cross-check).
NablaOmega nabla_omega_chart(const ACSField& field, const Vec& p);

}  // namespace ghenergy
