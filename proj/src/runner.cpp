#include "ghenergy/runner.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ghenergy {

using nlohmann::json;

namespace {

struct Check {
  std::string name;
  bool pass;
  double value;
  double threshold;
};

json check_to_json(const Check& c) {
  return json{{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"threshold", c.threshold}};
}

json config_echo(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["manifold"] = {{"label", c.manifold.label},
                   {"dim", c.manifold.dim},
                   {"radius", c.manifold.radius},
                   {"conformal_amplitude", c.manifold.conformal_amplitude},
                   {"bump_amplitude", c.manifold.bump_amplitude},
                   {"bump_seed", c.manifold.bump_seed}};
  j["structure"] = {{"label", c.structure.label},
                    {"seed", c.structure.seed},
                    {"degree", c.structure.degree},
                    {"t", c.structure.t}};
  j["quadrature"] = {{"scheme", c.quadrature.scheme},
                     {"nodes", c.quadrature.nodes},
                     {"resolution", c.quadrature.resolution},
                     {"seed", c.quadrature.seed}};
  j["tolerances"] = {{"identity_rel", c.tolerances.identity_rel},
                     {"type_ratio", c.tolerances.type_ratio},
                     {"gate", c.tolerances.gate},
                     {"lemma1_abs", c.tolerances.lemma1_abs},
                     {"floor_rel", c.tolerances.floor_rel},
                     {"descent_final_rel", c.tolerances.descent_final_rel}};
  j["points"] = c.points;
  j["output"] = {{"path", c.output.path}, {"format", c.output.format}};
  return j;
}

json report_results(const EnergyReport& r) {
  json out;
  out["E1"] = r.e[0];
  out["E2"] = r.e[1];
  out["E3"] = r.e[2];
  out["E4"] = r.e[3];
  out["E1_se"] = r.e_se[0];
  out["E2_se"] = r.e_se[1];
  out["E3_se"] = r.e_se[2];
  out["E4_se"] = r.e_se[3];
  out["total"] = r.total;
  out["total_se"] = r.total_se;
  out["C_g"] = r.c_g;
  out["C_g_se"] = r.c_g_se;
  if (r.identity_applicable) {
    out["identity_residual"] = r.identity_residual;
  } else {
    out["identity_residual"] = nullptr;  // hypothesis fails; not applicable
  }
  out["identity_residual_se"] = r.identity_residual_se;
  out["identity_applicable"] = r.identity_applicable;
  if (r.predicted_min.has_value())
    out["predicted_min"] = *r.predicted_min;
  else
    out["predicted_min"] = nullptr;
  out["type_detected"] = std::vector<int>(r.type_detected.begin(), r.type_detected.end());
  out["conformal_flatness"] = {{"pass", r.gate.pass}, {"max_weyl", r.gate.max_weyl}, {"tol", r.gate.tol}};
  out["n"] = r.n;
  out["node_count"] = r.node_count;
  return out;
}

ChartGeometry build_manifold(const RunConfig& c) {
  const auto& m = c.manifold;
  if (m.label == "torus") {
    if (m.bump_amplitude != 0.0) return make_bump_torus(m.dim, m.bump_seed, m.bump_amplitude);
    if (m.conformal_amplitude != 0.0) return make_conformal_torus(m.dim, m.conformal_amplitude);
    return make_flat_torus(m.dim);
  }
  if (m.label == "sphere_stereographic") return make_sphere(m.dim, m.radius);
  if (m.label == "hyperbolic_ball") return make_hyperbolic_ball(m.dim);
  if (m.label == "hopf_cylinder") return make_hopf_cylinder(m.dim / 2);
  throw std::invalid_argument("unknown manifold label: " + m.label);
}

void validate(const RunConfig& c) {
  static const std::vector<std::string> commands = {"curvature", "decompose", "energies", "verify",
                                                    "lemma1",    "profile",   "descend"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end())
    throw std::invalid_argument("unknown command: " + c.command);
  const auto& m = c.manifold;
  if (m.dim % 2 != 0 || m.dim < 4)
    throw std::invalid_argument("manifold dimension must be even and at least 4");
  const std::string& s = c.structure.label;
  if (s == "cayley" && !(m.label == "sphere_stereographic" && m.dim == 6))
    throw std::invalid_argument("the Cayley structure requires the 6-sphere");
  if (s == "hopf" && m.label != "hopf_cylinder")
    throw std::invalid_argument("the Hopf structure requires the hopf_cylinder manifold");
  if (s == "constant" && m.label != "torus")
    throw std::invalid_argument("constant structures are defined on tori");
  if (s == "random" && !(c.command == "lemma1" || c.command == "curvature"))
    throw std::invalid_argument("pointwise-random structures only support curvature and lemma1");
  if (c.quadrature.scheme != "monte_carlo" && c.quadrature.scheme != "product_gauss")
    throw std::invalid_argument("unknown quadrature scheme: " + c.quadrature.scheme);
  if (c.quadrature.nodes <= 0 || c.quadrature.resolution <= 0)
    throw std::invalid_argument("quadrature resolution must be positive");
  if (c.output.format != "json" && c.output.format != "csv")
    throw std::invalid_argument("unknown output format: " + c.output.format);
}

// Baseline structure for the manifold; "perturbed"/"custom" wrap it.
ACSField build_baseline(const RunConfig& c, const ChartGeometry& geom) {
  const std::string& s = c.structure.label;
  if (s == "cayley") return make_cayley_field(geom);
  if (s == "hopf") return make_hopf_field(geom);
  if (s == "constant") return make_constant_field(geom, standard_j(geom.dim));
  if (s == "random") return make_random_pointwise_field(geom, c.structure.seed);
  if (s == "perturbed" || s == "custom") {
    if (geom.label == "sphere_stereographic") return make_cayley_field(geom);
    if (geom.label == "hopf_cylinder") return make_hopf_field(geom);
    if (geom.label == "torus") return make_constant_field(geom, standard_j(geom.dim));
    throw std::invalid_argument("no baseline structure available on " + geom.label);
  }
  throw std::invalid_argument("unknown structure label: " + s);
}

ACSField build_structure(const RunConfig& c, const ChartGeometry& geom,
                         std::shared_ptr<ACSField>& keepalive) {
  ACSField base = build_baseline(c, geom);
  if (c.structure.label == "perturbed") {
    keepalive = std::make_shared<ACSField>(base);
    const PerturbationField dir = random_direction(*keepalive, c.structure.seed, c.structure.degree);
    return perturb(*keepalive, dir, c.structure.t);
  }
  if (c.structure.label == "custom") {
    keepalive = std::make_shared<ACSField>(base);
    PerturbationField dir;
    dir.dim = geom.dim;
    dir.degree = c.structure.degree;
    dir.seed = c.structure.seed;
    dir.features = feature_map(geom, dir.nf);
    const int nm = PerturbationField::monomial_count(dir.nf, dir.degree);
    if (static_cast<int>(c.structure.custom_coeffs.size()) != nm)
      throw std::invalid_argument("custom coefficient table needs " + std::to_string(nm) +
                                  " matrices");
    dir.coeffs = c.structure.custom_coeffs;
    for (Mat& m : dir.coeffs) m = 0.5 * (m - m.transpose().eval());
    return perturb(*keepalive, dir, 1.0);
  }
  return base;
}

QuadratureRule build_rule(const RunConfig& c, const ChartGeometry& geom) {
  const Scheme scheme =
      c.quadrature.scheme == "monte_carlo" ? Scheme::MonteCarlo : Scheme::ProductGauss;
  const int res = scheme == Scheme::MonteCarlo ? c.quadrature.nodes : c.quadrature.resolution;
  return make_rule(geom, scheme, res, c.quadrature.seed);
}

std::vector<Vec> sample_points(const ChartGeometry& geom, int count, std::uint64_t seed) {
  auto rng = make_rng(seed ^ 0xabcdef12345ULL);
  std::vector<Vec> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) pts.push_back(geom.domain.sample(rng));
  return pts;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
}

std::string csv_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(12);
  os << v;
  return os.str();
}

std::string profile_csv(const EnergyProfile& prof) {
  std::ostringstream os;
  os << "t,E1,E2,E3,E4,total,residual\n";
  for (size_t i = 0; i < prof.ts.size(); ++i) {
    const EnergyReport& r = prof.reports[i];
    os << csv_number(prof.ts[i]) << ',' << csv_number(r.e[0]) << ',' << csv_number(r.e[1]) << ','
       << csv_number(r.e[2]) << ',' << csv_number(r.e[3]) << ',' << csv_number(r.total) << ','
       << csv_number(r.identity_residual) << '\n';
  }
  return os.str();
}

struct CommandResult {
  json results;
  std::vector<Check> checks;
  std::string csv;  // optional side artifact
};

CommandResult run_curvature(const RunConfig& cfg, const ChartGeometry& geom) {
  CommandResult out;
  const auto pts = sample_points(geom, cfg.points, cfg.quadrature.seed);
  double sym = 0, bianchi = 0, compat = 0, traces = 0;
  double scalar_min = 1e300, scalar_max = -1e300;
  const int d = geom.dim;
  for (const Vec& p : pts) {
    const auto curv = curvature(geom, p);
    const double scale = std::max(1.0, curv.riemann.norm());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) {
            const double r = curv.riemann(i, j, k, l);
            sym = std::max(sym, std::abs(r + curv.riemann(j, i, k, l)) / scale);
            sym = std::max(sym, std::abs(r + curv.riemann(i, j, l, k)) / scale);
            sym = std::max(sym, std::abs(r - curv.riemann(k, l, i, j)) / scale);
            bianchi = std::max(bianchi, std::abs(r + curv.riemann(i, k, l, j) +
                                                 curv.riemann(i, l, j, k)) / scale);
          }
    // metric compatibility of the connection
    const auto gam = christoffel(geom, p);
    const auto dg = geom.metric_d1(p);
    const Mat g = geom.metric(p);
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double cov = dg[k](i, j);
          for (int mIdx = 0; mIdx < d; ++mIdx)
            cov -= gam[mIdx](k, i) * g(mIdx, j) + gam[mIdx](k, j) * g(i, mIdx);
          compat = std::max(compat, std::abs(cov));
        }
    // total trace-freeness of the Weyl part
    const double wscale = std::max(1.0, curv.riemann.norm());
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l) {
        double tr = 0;
        for (int a = 0; a < d; ++a) tr += curv.weyl(a, j, a, l);
        traces = std::max(traces, std::abs(tr) / wscale);
      }
    scalar_min = std::min(scalar_min, curv.scalar);
    scalar_max = std::max(scalar_max, curv.scalar);
  }
  const GateResult gate = conformal_flatness_gate(geom, pts, cfg.tolerances.gate);
  out.results["riemann_symmetry_residual"] = sym;
  out.results["first_bianchi_residual"] = bianchi;
  out.results["metric_compatibility_residual"] = compat;
  out.results["weyl_trace_residual"] = traces;
  out.results["scalar_min"] = scalar_min;
  out.results["scalar_max"] = scalar_max;
  out.results["conformal_flatness"] = {{"pass", gate.pass}, {"max_weyl", gate.max_weyl}};
  out.checks.push_back({"riemann_symmetries", sym < 1e-8, sym, 1e-8});
  out.checks.push_back({"first_bianchi", bianchi < 1e-8, bianchi, 1e-8});
  out.checks.push_back({"metric_compatibility", compat < 1e-8, compat, 1e-8});
  out.checks.push_back({"weyl_trace_free", traces < 1e-8, traces, 1e-8});
  return out;
}

CommandResult run_decompose(const RunConfig& cfg, const ChartGeometry& geom,
                            const ACSField& field) {
  CommandResult out;
  const auto pts = sample_points(geom, cfg.points, cfg.quadrature.seed);
  std::array<double, 4> sums{};
  double max_membership = 0.0, max_invariant = 0.0;
  for (const Vec& p : pts) {
    const Mat jf = field.j_frame(p);
    const auto nab = nabla_omega(field, p);
    const auto proj = build_projectors(jf, geom.dim);
    const auto comp = decompose(nab.components, proj);
    for (int i = 0; i < 4; ++i) sums[i] += comp.sq_norms[i];
    max_membership = std::max(max_membership, comp.membership_residual);
    max_invariant = std::max(max_invariant, field.invariant_residual(p));
  }
  const auto type = classify_type(sums, cfg.tolerances.type_ratio);
  out.results["mean_sq_norms"] = {sums[0] / pts.size(), sums[1] / pts.size(),
                                  sums[2] / pts.size(), sums[3] / pts.size()};
  out.results["type_detected"] = std::vector<int>(type.begin(), type.end());
  out.results["max_membership_residual"] = max_membership;
  out.results["max_structure_residual"] = max_invariant;
  out.checks.push_back({"w_membership", max_membership < 1e-6, max_membership, 1e-6});
  out.checks.push_back({"structure_invariants", max_invariant < 1e-10, max_invariant, 1e-10});
  return out;
}

CommandResult run_energies(const RunConfig& cfg, const ChartGeometry& geom, const ACSField& field,
                           bool verify) {
  CommandResult out;
  const QuadratureRule rule = build_rule(cfg, geom);
  EnergyOptions opts;
  opts.threads = cfg.threads;
  opts.classify_tol = cfg.tolerances.type_ratio;
  opts.gate_tol = cfg.tolerances.gate;
  const EnergyReport rep = energies(field, rule, opts);
  out.results = report_results(rep);
  if (verify) {
    const auto check = verify_identity(rep, cfg.tolerances.identity_rel);
    out.checks.push_back({"bochner_identity", check.pass, std::abs(check.residual),
                          check.tol * std::max(1.0, std::abs(rep.c_g))});
    bool nonneg = true;
    for (double e : rep.e) nonneg = nonneg && e >= -1e-12;
    out.checks.push_back({"energies_nonnegative", nonneg, 0.0, 0.0});
    const double sum_gap = std::abs(rep.total - (rep.e[0] + rep.e[1] + rep.e[2] + rep.e[3]));
    out.checks.push_back({"total_is_sum", sum_gap < 1e-9, sum_gap, 1e-9});
    if (rep.predicted_min.has_value()) {
      const double rel = std::abs(rep.total - *rep.predicted_min) /
                         std::max(1.0, std::abs(*rep.predicted_min));
      out.checks.push_back(
          {"minimum_prediction", rel < cfg.tolerances.identity_rel, rel, cfg.tolerances.identity_rel});
    }
  }
  return out;
}

CommandResult run_lemma1(const RunConfig& cfg, const ChartGeometry& geom, const ACSField& field) {
  CommandResult out;
  const auto pts = sample_points(geom, cfg.points, cfg.quadrature.seed);
  const auto res = lemma1_check(geom, field, pts, cfg.tolerances.gate);
  out.results["max_residual"] = res.max_residual;
  out.results["points"] = static_cast<int>(pts.size());
  out.checks.push_back(
      {"trace_identity", res.max_residual < cfg.tolerances.lemma1_abs, res.max_residual,
       cfg.tolerances.lemma1_abs});
  return out;
}

CommandResult run_profile(const RunConfig& cfg, const ChartGeometry& geom,
                          const ACSField& baseline) {
  CommandResult out;
  const QuadratureRule rule = build_rule(cfg, geom);
  EnergyOptions opts;
  opts.threads = cfg.threads;
  opts.classify_tol = cfg.tolerances.type_ratio;
  opts.gate_tol = cfg.tolerances.gate;

  const EnergyReport base_rep = energies(baseline, rule, opts);
  std::optional<double> floor = base_rep.predicted_min;

  json dirs = json::array();
  bool floor_ok = true, identity_ok = true;
  double worst_floor_gap = 0.0, worst_identity = 0.0;
  std::ostringstream csv;
  csv << "direction,t,E1,E2,E3,E4,total,residual\n";
  for (int k = 0; k < cfg.profile.directions; ++k) {
    const PerturbationField dir =
        random_direction(baseline, cfg.profile.seed + static_cast<std::uint64_t>(k), cfg.profile.degree);
    const EnergyProfile prof = energy_profile(baseline, dir, cfg.profile.ts, rule, opts);
    for (size_t i = 0; i < prof.ts.size(); ++i) {
      const EnergyReport& r = prof.reports[i];
      csv << k << ',' << csv_number(prof.ts[i]) << ',' << csv_number(r.e[0]) << ','
          << csv_number(r.e[1]) << ',' << csv_number(r.e[2]) << ',' << csv_number(r.e[3]) << ','
          << csv_number(r.total) << ',' << csv_number(r.identity_residual) << '\n';
      if (floor.has_value()) {
        const double gap = (*floor - r.total) / std::max(1.0, std::abs(*floor));
        worst_floor_gap = std::max(worst_floor_gap, gap);
        floor_ok = floor_ok && gap <= cfg.tolerances.floor_rel;
      }
      const double id_tol = std::max(cfg.tolerances.identity_rel * std::max(1.0, std::abs(r.c_g)),
                                     4.0 * r.identity_residual_se);
      worst_identity = std::max(worst_identity, std::abs(r.identity_residual));
      identity_ok = identity_ok && std::abs(r.identity_residual) <= id_tol;
    }
    dirs.push_back({{"seed", cfg.profile.seed + static_cast<std::uint64_t>(k)}});
  }
  out.csv = csv.str();
  out.results["baseline"] = report_results(base_rep);
  out.results["directions"] = dirs;
  out.results["worst_floor_gap_rel"] = worst_floor_gap;
  out.results["worst_identity_residual"] = worst_identity;
  if (floor.has_value())
    out.checks.push_back({"energy_floor", floor_ok, worst_floor_gap, cfg.tolerances.floor_rel});
  out.checks.push_back({"identity_constancy", identity_ok, worst_identity, 0.0});
  return out;
}

CommandResult run_descend(const RunConfig& cfg, const ChartGeometry& geom,
                          const ACSField& baseline) {
  CommandResult out;
  const QuadratureRule rule = build_rule(cfg, geom);
  DescentOptions opts;
  opts.steps = cfg.descent.steps;
  opts.step_size = cfg.descent.step_size;
  opts.energy.threads = cfg.threads;
  opts.energy.classify_tol = cfg.tolerances.type_ratio;
  opts.energy.gate_tol = cfg.tolerances.gate;

  const PerturbationField dir = random_direction(baseline, cfg.descent.seed, cfg.descent.degree);
  const PerturbationField start = dir.scaled(cfg.descent.t0);
  const DescentResult res = descent(baseline, start, rule, opts);

  const EnergyReport base_rep = energies(baseline, rule, opts.energy);
  std::optional<double> floor = base_rep.predicted_min;

  std::ostringstream csv;
  csv << "step,total\n";
  for (size_t i = 0; i < res.trace.size(); ++i) csv << i << ',' << csv_number(res.trace[i]) << '\n';
  out.csv = csv.str();

  bool monotone = true;
  for (size_t i = 1; i < res.trace.size(); ++i) monotone = monotone && res.trace[i] <= res.trace[i - 1] + 1e-12;
  out.results["trace"] = res.trace;
  out.results["final"] = report_results(res.final_report);
  out.results["gradient_evaluations"] = res.gradient_evaluations;
  out.checks.push_back({"monotone_trace", monotone, 0.0, 0.0});
  if (floor.has_value()) {
    const double fl = *floor;
    double worst_gap = 0.0;
    for (double e : res.trace) worst_gap = std::max(worst_gap, (fl - e) / std::max(1.0, std::abs(fl)));
    out.checks.push_back({"never_below_floor", worst_gap <= cfg.tolerances.floor_rel, worst_gap,
                          cfg.tolerances.floor_rel});
    const double final_rel = std::abs(res.trace.back() - fl) / std::max(1.0, std::abs(fl));
    out.checks.push_back({"terminates_at_floor", final_rel <= cfg.tolerances.descent_final_rel,
                          final_rel, cfg.tolerances.descent_final_rel});
  }
  return out;
}

}  // namespace

RunConfig parse_config_json(const std::string& text) {
  json j = json::parse(text);
  RunConfig c;
  c.command = j.value("command", "");
  if (j.contains("manifold")) {
    const auto& m = j["manifold"];
    c.manifold.label = m.value("label", "");
    c.manifold.dim = m.value("dim", 6);
    c.manifold.radius = m.value("radius", 1.0);
    c.manifold.conformal_amplitude = m.value("conformal_amplitude", 0.0);
    c.manifold.bump_amplitude = m.value("bump_amplitude", 0.0);
    c.manifold.bump_seed = m.value("bump_seed", 1ULL);
  }
  if (j.contains("structure")) {
    const auto& s = j["structure"];
    c.structure.label = s.value("label", "");
    c.structure.seed = s.value("seed", 1ULL);
    c.structure.degree = s.value("degree", 1);
    c.structure.t = s.value("t", 0.0);
    if (s.contains("coeffs")) {
      for (const auto& mat : s["coeffs"]) {
        const int d = c.manifold.dim;
        Mat m0 = Mat::Zero(d, d);
        int idx = 0;
        for (const auto& row : mat)
          for (const auto& v : row) {
            m0(idx / d, idx % d) = v.get<double>();
            ++idx;
          }
        c.structure.custom_coeffs.push_back(m0);
      }
    }
  }
  if (j.contains("quadrature")) {
    const auto& q = j["quadrature"];
    c.quadrature.scheme = q.value("scheme", "monte_carlo");
    c.quadrature.nodes = q.value("nodes", 100000);
    c.quadrature.resolution = q.value("resolution", 16);
    c.quadrature.seed = q.value("seed", 1ULL);
  }
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    c.tolerances.identity_rel = t.value("identity_rel", 0.005);
    c.tolerances.type_ratio = t.value("type_ratio", 1e-5);
    c.tolerances.gate = t.value("gate", 1e-6);
    c.tolerances.lemma1_abs = t.value("lemma1_abs", 1e-6);
    c.tolerances.floor_rel = t.value("floor_rel", 0.005);
    c.tolerances.descent_final_rel = t.value("descent_final_rel", 0.01);
  }
  c.points = j.value("points", 50);
  if (j.contains("profile")) {
    const auto& p = j["profile"];
    c.profile.directions = p.value("directions", 20);
    if (p.contains("ts")) c.profile.ts = p["ts"].get<std::vector<double>>();
    c.profile.seed = p.value("seed", 11ULL);
    c.profile.degree = p.value("degree", 1);
  }
  if (j.contains("descent")) {
    const auto& d = j["descent"];
    c.descent.steps = d.value("steps", 25);
    c.descent.step_size = d.value("step_size", 0.5);
    c.descent.t0 = d.value("t0", 0.3);
    c.descent.seed = d.value("seed", 3ULL);
    c.descent.degree = d.value("degree", 1);
  }
  if (j.contains("output")) {
    c.output.path = j["output"].value("path", "report.json");
    c.output.format = j["output"].value("format", "json");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str());
}

int run(const RunConfig& config) {
  json report;
  report["schema_version"] = kSchemaVersion;
  report["tool"] = {{"name", "ghenergy"}, {"version", kToolVersion}};
  report["config"] = config_echo(config);

  CommandResult result;
  try {
    validate(config);
    const ChartGeometry geom = build_manifold(config);
    std::shared_ptr<ACSField> keepalive;

    if (config.command == "curvature") {
      result = run_curvature(config, geom);
    } else if (config.command == "decompose") {
      const ACSField field = build_structure(config, geom, keepalive);
      result = run_decompose(config, geom, field);
    } else if (config.command == "energies" || config.command == "verify") {
      const ACSField field = build_structure(config, geom, keepalive);
      result = run_energies(config, geom, field, config.command == "verify");
    } else if (config.command == "lemma1") {
      const ACSField field = build_structure(config, geom, keepalive);
      result = run_lemma1(config, geom, field);
    } else if (config.command == "profile") {
      const ACSField field = build_structure(config, geom, keepalive);
      result = run_profile(config, geom, field);
    } else {  // descend
      const ACSField field = build_structure(config, geom, keepalive);
      result = run_descend(config, geom, field);
    }
  } catch (const std::invalid_argument& e) {
    if (config.verbose) std::cerr << "configuration error: " << e.what() << "\n";
    report["error"] = e.what();
    write_text(config.output.path, report.dump(2) + "\n");
    return 2;
  } catch (const std::exception& e) {
    if (config.verbose) std::cerr << "error: " << e.what() << "\n";
    report["error"] = e.what();
    write_text(config.output.path, report.dump(2) + "\n");
    return 2;
  }

  report["results"] = result.results;
  json checks = json::array();
  bool all_pass = true;
  for (const auto& c : result.checks) {
    checks.push_back(check_to_json(c));
    all_pass = all_pass && c.pass;
  }
  report["checks"] = checks;
  report["pass"] = all_pass;

  write_text(config.output.path, report.dump(2) + "\n");
  if (!result.csv.empty()) {
    std::string csv_path = config.output.path;
    const auto dot = csv_path.rfind('.');
    csv_path = (dot == std::string::npos ? csv_path : csv_path.substr(0, dot)) + ".csv";
    write_text(csv_path, result.csv);
  }
  if (config.verbose) {
    for (const auto& c : result.checks)
      std::cerr << (c.pass ? "[pass] " : "[FAIL] ") << c.name << " value=" << c.value << "\n";
  }
  return all_pass ? 0 : 1;
}

std::string report_schema() {
  json s;
  s["schema_version"] = kSchemaVersion;
  s["fields"] = {
      {"schema_version", "string"},
      {"tool", "{name: string, version: string}"},
      {"config", "echo of the input configuration (fully determines the run)"},
      {"results",
       {{"E1", "number"},
        {"E2", "number"},
        {"E3", "number"},
        {"E4", "number"},
        {"E1_se", "number"},
        {"E2_se", "number"},
        {"E3_se", "number"},
        {"E4_se", "number"},
        {"total", "number"},
        {"total_se", "number"},
        {"C_g", "number"},
        {"C_g_se", "number"},
        {"identity_residual", "number|null (null when the flatness gate fails)"},
        {"identity_residual_se", "number"},
        {"identity_applicable", "bool"},
        {"predicted_min", "number|null"},
        {"type_detected", "array of int (subset of 1..4)"},
        {"conformal_flatness", "{pass: bool, max_weyl: number, tol: number}"},
        {"n", "int"},
        {"node_count", "int"}}},
      {"checks", "array of {name, pass, value, threshold}"},
      {"pass", "bool"},
  };
  s["csv_profile_columns"] = {"direction", "t", "E1", "E2", "E3", "E4", "total", "residual"};
  s["csv_descent_columns"] = {"step", "total"};
  s["notes"] = "CSV uses '.' decimals, C locale, one header row";
  return s.dump(2) + "\n";
}

}  // namespace ghenergy
