#include "ghenergy/bochner.hpp"

#include <algorithm>
#include <cmath>

namespace ghenergy {

double trace_u_perp(const CurvatureData& curv, const Mat& j) {
  const int d = curv.dim;
  if (j.rows() != d || j.cols() != d)
    throw std::invalid_argument("frame mismatch between J and curvature data");
  const double sq = (j * j + Mat::Identity(d, d)).cwiseAbs().maxCoeff();
  const double orth = (j.transpose() * j - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
  if (sq > 1e-8 || orth > 1e-8)
    throw std::invalid_argument("J must be orthogonal with square -1 in the curvature frame");

  const auto pairs = lambda2_pairs(d);
  const int D = static_cast<int>(pairs.size());

  // Projector onto the anticommuting block, transported to Lambda^2
  // coordinates through A = sum_{i<j} a_{ij} (e_i e_j^T - e_j e_i^T).
  Mat proj(D, D);
  for (int P = 0; P < D; ++P) {
    Mat a = Mat::Zero(d, d);
    a(pairs[P].first, pairs[P].second) = 1.0;
    a(pairs[P].second, pairs[P].first) = -1.0;
    const Mat pa = 0.5 * (a + j * a * j);
    for (int Q = 0; Q < D; ++Q) proj(Q, P) = pa(pairs[Q].first, pairs[Q].second);
  }
  return kUperpTraceScale * (proj * curv.curvature_operator * proj).trace();
}

Lemma1Result lemma1_check(const ChartGeometry& geom, const ACSField& field,
                          const std::vector<Vec>& points, double gate_tol) {
  const int d = geom.dim;
  const int n = d / 2;

  std::optional<int> orientation;
  if (d == 4) {
    // orientation induced by J: the one for which the Kaehler form is
    // self-dual, read off from the Pfaffian sign of its frame matrix
    const Mat jf = field.j_frame(points.front());
    const double pf = jf(0, 1) * jf(2, 3) - jf(0, 2) * jf(1, 3) + jf(0, 3) * jf(1, 2);
    orientation = (pf >= 0) ? 1 : -1;
  }
  const GateResult gate = conformal_flatness_gate(geom, points, gate_tol, orientation);
  if (!gate.pass)
    throw std::runtime_error("conformal-flatness hypothesis fails on the sample (max " +
                             std::to_string(gate.max_weyl) + "); trace identity not applicable");

  Lemma1Result out;
  for (const Vec& p : points) {
    const CurvatureData curv = curvature(geom, p);
    const Mat jf = field.j_frame(p);
    const double lhs = trace_u_perp(curv, jf);
    const double rhs = (2.0 * n - 2.0) / (2.0 * n - 1.0) * curv.scalar;
    const double res = std::abs(lhs - rhs);
    out.residuals.push_back(res);
    out.max_residual = std::max(out.max_residual, res);
  }
  return out;
}

EnergyReport energies(const ACSField& field, const QuadratureRule& rule,
                      const EnergyOptions& opts) {
  const ChartGeometry& geom = *field.geom;
  const int d = geom.dim;
  const int n = d / 2;

  EnergyReport rep;
  rep.n = n;
  rep.manifold = geom.label;
  rep.structure = field.label;
  rep.seed = rule.seed;
  rep.node_count = rule.node_count;

  // channels: |a_1|^2 .. |a_4|^2, scalar curvature
  const int kChannels = 5;
  const auto multi = integrate_channels(
      [&](const Vec& p, double* out) {
        const Mat jf = field.j_frame(p);
        const Tensor3 alpha = nabla_omega(field, p).components;
        const auto sq = gh_sq_norms_fast(jf, alpha);
        for (int i = 0; i < 4; ++i) out[i] = sq[i];
        out[4] = scalar_curvature(geom, p);
      },
      kChannels, rule, opts.threads);

  const double cg_factor = (n - 1.0) / (2.0 * n - 1.0);
  for (int i = 0; i < 4; ++i) {
    rep.e[i] = multi.channels[i].value;
    rep.e_se[i] = multi.channels[i].std_error;
  }
  rep.total = rep.e[0] + rep.e[1] + rep.e[2] + rep.e[3];
  rep.total_se = multi.combination_std_error({1.0, 1.0, 1.0, 1.0, 0.0});
  rep.c_g = cg_factor * multi.channels[4].value;
  rep.c_g_se = cg_factor * multi.channels[4].std_error;

  // 2 E1 - E2 + (n-1) E4 - C_g (E1 vanishes identically when n = 2)
  std::vector<double> comb = {2.0, -1.0, 0.0, n - 1.0, -cg_factor};
  rep.identity_residual = 2.0 * rep.e[0] - rep.e[1] + (n - 1.0) * rep.e[3] - rep.c_g;
  rep.identity_residual_se = multi.combination_std_error(comb);

  rep.type_detected = classify_type(rep.e, opts.classify_tol);

  // conformal-flatness gate on a subsample of nodes
  std::vector<Vec> gate_pts;
  const int stride = std::max(1, rule.node_count / opts.gate_samples);
  for (int i = 0; i < rule.node_count && static_cast<int>(gate_pts.size()) < opts.gate_samples;
       i += stride)
    gate_pts.push_back(rule.node(i));
  std::optional<int> orientation;
  if (d == 4) {
    const Mat jf = field.j_frame(gate_pts.front());
    const double pf = jf(0, 1) * jf(2, 3) - jf(0, 2) * jf(1, 3) + jf(0, 3) * jf(1, 2);
    orientation = (pf >= 0) ? 1 : -1;
  }
  rep.gate = conformal_flatness_gate(geom, gate_pts, opts.gate_tol, orientation);
  rep.identity_applicable = rep.gate.pass;

  // predicted minimum when the detected type matches a minimizing case
  if (rep.identity_applicable) {
    const auto& t = rep.type_detected;
    auto subset_of = [&](std::initializer_list<int> allowed) {
      for (int x : t)
        if (std::find(allowed.begin(), allowed.end(), x) == allowed.end()) return false;
      return true;
    };
    if (n == 3 && subset_of({1, 4}))
      rep.predicted_min = minimum_prediction(n, rep.c_g, MinimizerType::W1PlusW4);
    else if ((n == 2 || n >= 4) && subset_of({4}))
      rep.predicted_min = minimum_prediction(n, rep.c_g, MinimizerType::W4);
    else if (subset_of({2}) && !t.empty())
      rep.predicted_min = minimum_prediction(n, rep.c_g, MinimizerType::W2);
  }
  return rep;
}

std::optional<double> minimum_prediction(int n, double c_g, MinimizerType type) {
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  switch (type) {
    case MinimizerType::W1PlusW4:
      if (n != 3) return std::nullopt;
      return c_g / (n - 1.0);
    case MinimizerType::W4:
      if (n == 3) return std::nullopt;  // covered only jointly with W1
      return c_g / (n - 1.0);
    case MinimizerType::W2:
      return -c_g;
  }
  throw std::invalid_argument("invalid minimizer type");
}

IdentityCheck verify_identity(const EnergyReport& report, double tol) {
  IdentityCheck out;
  out.tol = tol;
  out.residual = report.identity_residual;
  if (!report.identity_applicable) {
    out.pass = false;
    return out;
  }
  out.pass = std::abs(report.identity_residual) <= tol * std::max(1.0, std::abs(report.c_g));
  return out;
}

}  // namespace ghenergy
