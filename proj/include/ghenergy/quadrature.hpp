#pragma once

#include "ghenergy/geometry.hpp"

namespace ghenergy {

enum class Scheme { ProductGauss, MonteCarlo };

/// Nodes and weights for integrating scalar fields over a built-in manifold.
/// Weights include the volume density, so an integral is a plain weighted
/// sum over nodes.
struct QuadratureRule {
  Mat nodes;  // dim x N chart points
  Vec weights;
  bool includes_volume_density = true;
  Scheme scheme = Scheme::MonteCarlo;
  std::uint64_t seed = 0;
  int node_count = 0;

  Vec node(int i) const { return nodes.col(i); }
  double volume() const { return weights.sum(); }
};

/// Builds a rule for the geometry's manifold.
///  - Monte Carlo: `resolution` is the node count. Spheres and sphere-circle
///    products are sampled uniformly via normalized Gaussians (the exact
///    surface measure); boxes and balls sample the chart with the metric
///    density folded into the weights.
///  - Product Gauss: `resolution` is the per-axis count. Tori use periodic
///    midpoint grids (spectrally exact); spheres use Gauss-Legendre in the
///    polar angles with the spherical Jacobian in the weights.
QuadratureRule make_rule(const ChartGeometry& geom, Scheme scheme, int resolution,
                         std::uint64_t seed);

struct IntegralEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for deterministic product rules
};

/// Weighted sum of f over the rule's nodes with a fixed pairwise reduction
/// order. Throws (with the node index) on non-finite values.
IntegralEstimate integrate(const std::function<double(const Vec&)>& f, const QuadratureRule& rule,
                           int threads = 1);

/// Evaluates a vector of channels per node and reduces each channel with the
/// same deterministic pairwise order. Returns per-channel estimates; the raw
/// weighted node values are exposed for derived-combination errors.
struct MultiIntegral {
  std::vector<IntegralEstimate> channels;
  /// Standard error of sum_c coeff_c * channel_c, accounting for node-level
  /// correlations (valid for Monte Carlo rules).
  double combination_std_error(const std::vector<double>& coeffs) const;
  Mat node_values;  // channels x N (unweighted integrand values)
  Vec weights;
  bool monte_carlo = false;
};

MultiIntegral integrate_channels(const std::function<void(const Vec&, double*)>& f, int channels,
                                 const QuadratureRule& rule, int threads);

}  // namespace ghenergy
