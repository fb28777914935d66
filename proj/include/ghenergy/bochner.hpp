#pragma once

#include "ghenergy/gh_decomp.hpp"
#include "ghenergy/hermitian.hpp"
#include "ghenergy/quadrature.hpp"

#include <optional>
#include <set>

namespace ghenergy {

/// Scale relating the curvature operator (unit sphere -> identity) to the
/// trace over the complement of the unitary algebra. Pinned together with
/// kEnergyNormFactor by the requirement that the trace identity and the
/// integrated energy identity hold simultaneously on two independent
/// geometries; see tests/test_bochner.cpp.
inline constexpr double kUperpTraceScale = 4.0;

/// Trace of the curvature operator over the skew endomorphisms that
/// anticommute with J (the u_n-perp block), computed as tr(P R P) where P is
/// the block projector A -> (A + JAJ)/2 on Lambda^2 coordinates.
double trace_u_perp(const CurvatureData& curv, const Mat& j);

struct Lemma1Result {
  double max_residual = 0.0;
  std::vector<double> residuals;
};

/// Max over the sample of |tr(R, u_n-perp) - (2n-2)/(2n-1) s|. Requires the
/// conformal-flatness gate (or the self-dual gate for dim 4, oriented by J)
/// to pass; otherwise throws.
Lemma1Result lemma1_check(const ChartGeometry& geom, const ACSField& field,
                          const std::vector<Vec>& points, double gate_tol = 1e-6);

struct EnergyReport {
  int n = 0;
  std::array<double, 4> e{};     // E_1..E_4
  std::array<double, 4> e_se{};  // standard errors
  double total = 0.0;
  double total_se = 0.0;
  double c_g = 0.0;
  double c_g_se = 0.0;
  /// 2 E1 - E2 + (n-1) E4 - C_g; reduces to -E2 + E4 - C_g when n = 2.
  double identity_residual = 0.0;
  double identity_residual_se = 0.0;
  bool identity_applicable = true;
  std::optional<double> predicted_min;
  std::set<int> type_detected;
  GateResult gate;
  std::string manifold, structure;
  std::uint64_t seed = 0;
  int node_count = 0;
};

struct EnergyOptions {
  int threads = 1;
  double classify_tol = 1e-5;
  double gate_tol = 1e-6;
  int gate_samples = 32;
};

/// Energies of the four components by quadrature of the pointwise norms,
/// the Bochner constant C_g = (n-1)/(2n-1) * integral of s with the same
/// rule, and the identity residual.
EnergyReport energies(const ACSField& field, const QuadratureRule& rule,
                      const EnergyOptions& opts = {});

enum class MinimizerType { W1PlusW4, W4, W2 };

/// Predicted minimum energy per the classification of minimizing types:
/// C_g/(n-1) for W1+W4 (n = 3) and for W4 (n = 2 or n >= 4), -C_g for W2;
/// nullopt for combinations outside those cases.
std::optional<double> minimum_prediction(int n, double c_g, MinimizerType type);

struct IdentityCheck {
  bool pass = false;
  double residual = 0.0;
  double tol = 0.0;
};

/// |identity residual| <= tol * max(1, |C_g|); requires the gate to have
/// passed when the report was produced.
IdentityCheck verify_identity(const EnergyReport& report, double tol);

}  // namespace ghenergy
