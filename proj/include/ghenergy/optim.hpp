#pragma once

#include "ghenergy/bochner.hpp"

namespace ghenergy {

/// Polynomial family of skew generators for moving an almost-complex
/// structure inside the fibers of the twistor space.
///
/// Monomials are evaluated in bounded "feature" coordinates of the manifold
/// (ambient sphere coordinates, the (cos, sin) embedding of a torus) so the
/// generators stay uniformly bounded over the chart. The raw polynomial
/// value is skew by construction and projected pointwise onto the part that
/// anticommutes with the baseline structure, A = (B + J0 B J0)/2, which is
/// exactly the tangent space of the fiber at J0.
struct PerturbationField {
  int dim = 0;      // manifold dimension (generator size)
  int degree = 0;   // polynomial degree in the feature coordinates
  int nf = 0;       // number of feature coordinates
  std::uint64_t seed = 0;
  std::function<Vec(const Vec&)> features;
  std::vector<Mat> coeffs;  // one skew dim x dim matrix per monomial

  static int monomial_count(int nf, int degree);
  /// Raw polynomial value (skew, not yet projected).
  Mat raw_value(const Vec& p) const;
  /// Fiber-tangent generator at p for the given baseline frame matrix.
  Mat generator(const Vec& p, const Mat& j0_frame) const;
  PerturbationField scaled(double t) const;
};

/// Feature coordinates for a built-in geometry (bounded, smooth, injective
/// enough to separate points).
std::function<Vec(const Vec&)> feature_map(const ChartGeometry& geom, int& nf);

/// Seeded random direction with generators of RMS Frobenius norm ~ 1 over
/// the sampling region.
PerturbationField random_direction(const ACSField& baseline, std::uint64_t seed, int degree);

/// J_t(p) = exp(t A(p)) J0(p) exp(-t A(p)); orthogonality and the square -1
/// identity are preserved exactly by the conjugation.
ACSField perturb(const ACSField& baseline, const PerturbationField& p, double t);

struct EnergyProfile {
  std::vector<double> ts;
  std::vector<EnergyReport> reports;
  std::uint64_t direction_seed = 0;
};

EnergyProfile energy_profile(const ACSField& baseline, const PerturbationField& dir,
                             const std::vector<double>& ts, const QuadratureRule& rule,
                             const EnergyOptions& opts = {});

struct DescentResult {
  PerturbationField coeffs;          // final coefficient table
  std::vector<double> trace;         // accepted energies, non-increasing
  EnergyReport final_report;         // evaluated on the descent rule
  int gradient_evaluations = 0;
};

struct DescentOptions {
  int steps = 25;
  double step_size = 0.5;
  double coeff_fd_step = 1e-3;
  double grad_tol = 1e-4;
  EnergyOptions energy;
};

/// Gradient descent on the coefficient table with central-difference
/// gradients and backtracking line search, starting from the given table.
/// The quadrature rule is frozen for the whole run (common random numbers).
DescentResult descent(const ACSField& baseline, const PerturbationField& start,
                      const QuadratureRule& rule, const DescentOptions& opts = {});

/// Matrix exponential of a skew matrix (scaling-and-squaring Taylor).
Mat expm_skew(const Mat& a);

}  // namespace ghenergy
