#pragma once

#include "ghenergy/optim.hpp"

#include <iosfwd>

namespace ghenergy {

/// Parsed run configuration; one flat config file fully determines a run.
struct RunConfig {
  std::string command;  // curvature | decompose | energies | verify | lemma1 | profile | descend

  struct {
    std::string label;  // torus | sphere_stereographic | hyperbolic_ball | hopf_cylinder
    int dim = 6;
    double radius = 1.0;
    double conformal_amplitude = 0.0;  // torus only
    double bump_amplitude = 0.0;       // torus only; breaks conformal flatness
    std::uint64_t bump_seed = 1;
  } manifold;

  struct {
    std::string label;  // cayley | hopf | constant | perturbed | random | custom
    std::uint64_t seed = 1;
    int degree = 1;
    double t = 0.0;                   // perturbed: parameter value
    std::vector<Mat> custom_coeffs;   // custom: generator coefficient table
  } structure;

  struct {
    std::string scheme = "monte_carlo";  // or product_gauss
    int nodes = 100000;                  // Monte Carlo node count
    int resolution = 16;                 // per-axis count for product rules
    std::uint64_t seed = 1;
  } quadrature;

  struct {
    double identity_rel = 0.005;
    double type_ratio = 1e-5;
    double gate = 1e-6;
    double lemma1_abs = 1e-6;
    double floor_rel = 0.005;
    double descent_final_rel = 0.01;
  } tolerances;

  int points = 50;  // sample count for pointwise commands

  struct {
    int directions = 20;
    std::vector<double> ts = {0.0, 0.05, -0.05, 0.1, -0.1, 0.2, -0.2};
    std::uint64_t seed = 11;
    int degree = 1;
  } profile;

  struct {
    int steps = 25;
    double step_size = 0.5;
    double t0 = 0.3;
    std::uint64_t seed = 3;
    int degree = 1;
  } descent;

  struct {
    std::string path = "report.json";
    std::string format = "json";  // json | csv (csv applies to profile/descend)
  } output;

  int threads = 1;
  bool verbose = false;
};

/// Reads and validates a config file. Throws std::invalid_argument with a
/// description on malformed or incompatible configurations.
RunConfig load_config(const std::string& path);
RunConfig parse_config_json(const std::string& text);

/// Executes the configured command. Returns the process exit status:
/// 0 = all requested checks passed, 1 = a check failed (report still
/// written), 2 = configuration or validation error.
int run(const RunConfig& config);

/// Stable, versioned description of the JSON report format.
std::string report_schema();

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kSchemaVersion = "1";

}  // namespace ghenergy
