#include "ghenergy/optim.hpp"

#include <cmath>

namespace ghenergy {

Mat expm_skew(const Mat& a) {
  const int d = static_cast<int>(a.rows());
  double nrm = a.norm();
  int squarings = 0;
  Mat b = a;
  while (nrm > 0.5) {
    b *= 0.5;
    nrm *= 0.5;
    ++squarings;
  }
  Mat result = Mat::Identity(d, d);
  Mat term = Mat::Identity(d, d);
  for (int k = 1; k <= 16; ++k) {
    term = term * b / static_cast<double>(k);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

int PerturbationField::monomial_count(int nf, int degree) {
  int count = 1;
  if (degree >= 1) count += nf;
  if (degree >= 2) count += nf * (nf + 1) / 2;
  if (degree > 2) throw std::invalid_argument("perturbation degree is capped at 2");
  return count;
}

Mat PerturbationField::raw_value(const Vec& p) const {
  const Vec f = features(p);
  Mat b = coeffs[0];
  int m = 1;
  if (degree >= 1)
    for (int i = 0; i < nf; ++i) b += f[i] * coeffs[m++];
  if (degree >= 2)
    for (int i = 0; i < nf; ++i)
      for (int j = i; j < nf; ++j) b += f[i] * f[j] * coeffs[m++];
  return b;
}

Mat PerturbationField::generator(const Vec& p, const Mat& j0_frame) const {
  const Mat b = raw_value(p);
  return 0.5 * (b + j0_frame * b * j0_frame);
}

PerturbationField PerturbationField::scaled(double t) const {
  PerturbationField out = *this;
  for (Mat& c : out.coeffs) c *= t;
  return out;
}

std::function<Vec(const Vec&)> feature_map(const ChartGeometry& geom, int& nf) {
  const int d = geom.dim;
  if (geom.label == "sphere_stereographic") {
    const double r = geom.radius;
    nf = d + 1;
    return [r](const Vec& x) { return Vec(stereo::to_sphere(x, r) / r); };
  }
  if (geom.label == "hopf_cylinder") {
    const int m = d - 1;
    nf = d + 2;
    return [m](const Vec& x) {
      Vec f(m + 3);
      f.head(m + 1) = stereo::to_sphere(x.head(m), 1.0);
      f[m + 1] = std::cos(x[m]);
      f[m + 2] = std::sin(x[m]);
      return f;
    };
  }
  if (geom.label == "torus") {
    nf = 2 * d;
    return [d](const Vec& x) {
      Vec f(2 * d);
      for (int i = 0; i < d; ++i) {
        f[2 * i] = std::cos(x[i]);
        f[2 * i + 1] = std::sin(x[i]);
      }
      return f;
    };
  }
  nf = d;  // bounded charts can use the coordinates directly
  return [](const Vec& x) { return x; };
}

PerturbationField random_direction(const ACSField& baseline, std::uint64_t seed, int degree) {
  const ChartGeometry& geom = *baseline.geom;
  const int d = geom.dim;
  PerturbationField out;
  out.dim = d;
  out.degree = degree;
  out.seed = seed;
  out.features = feature_map(geom, out.nf);

  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int nm = PerturbationField::monomial_count(out.nf, degree);
  out.coeffs.resize(nm);
  for (Mat& c : out.coeffs) {
    Mat g(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = gauss(rng);
    c = 0.5 * (g - g.transpose());
  }

  // normalize: RMS Frobenius norm of the projected generator ~ 1
  double ms = 0.0;
  const int samples = 16;
  for (int s = 0; s < samples; ++s) {
    const Vec p = geom.domain.sample(rng);
    const Mat a = out.generator(p, baseline.j_frame(p));
    ms += a.squaredNorm();
  }
  const double rms = std::sqrt(ms / samples);
  if (rms > 1e-12)
    for (Mat& c : out.coeffs) c /= rms;
  return out;
}

ACSField perturb(const ACSField& baseline, const PerturbationField& p, double t) {
  ACSField out;
  out.geom = baseline.geom;
  out.label = "perturbed(" + baseline.label + ")";
  out.differentiability = ACSField::Differentiability::FiniteDifference;
  const ChartGeometry* geom = baseline.geom;
  const auto base_j = baseline.j_coord_fn;
  const auto dir = std::make_shared<PerturbationField>(p);
  out.j_coord_fn = [geom, base_j, dir, t](const Vec& x) {
    const Mat f = geom->frame(x);
    const Mat finv = f.partialPivLu().solve(Mat::Identity(geom->dim, geom->dim));
    const Mat j0f = finv * base_j(x) * f;
    const Mat a = dir->generator(x, j0f);
    const Mat e = expm_skew(t * a);
    const Mat jf = e * j0f * e.transpose();
    return Mat(f * jf * finv);
  };
  return out;
}

EnergyProfile energy_profile(const ACSField& baseline, const PerturbationField& dir,
                             const std::vector<double>& ts, const QuadratureRule& rule,
                             const EnergyOptions& opts) {
  bool has_zero = false;
  for (double t : ts) has_zero = has_zero || t == 0.0;
  if (!has_zero) throw std::invalid_argument("profile parameter values must include t = 0");
  EnergyProfile out;
  out.ts = ts;
  out.direction_seed = dir.seed;
  for (double t : ts) {
    const ACSField jt = perturb(baseline, dir, t);
    out.reports.push_back(energies(jt, rule, opts));
  }
  return out;
}

namespace {

// flatten/unflatten coefficient tables over the strict upper triangle
int coeff_dof(const PerturbationField& p) {
  return static_cast<int>(p.coeffs.size()) * p.dim * (p.dim - 1) / 2;
}

void set_entry(PerturbationField& p, int flat_index, double value) {
  const int per = p.dim * (p.dim - 1) / 2;
  const int mono = flat_index / per;
  int rem = flat_index % per;
  for (int i = 0; i < p.dim; ++i)
    for (int j = i + 1; j < p.dim; ++j) {
      if (rem == 0) {
        p.coeffs[mono](i, j) = value;
        p.coeffs[mono](j, i) = -value;
        return;
      }
      --rem;
    }
}

double get_entry(const PerturbationField& p, int flat_index) {
  const int per = p.dim * (p.dim - 1) / 2;
  const int mono = flat_index / per;
  int rem = flat_index % per;
  for (int i = 0; i < p.dim; ++i)
    for (int j = i + 1; j < p.dim; ++j) {
      if (rem == 0) return p.coeffs[mono](i, j);
      --rem;
    }
  return 0.0;
}

}  // namespace

DescentResult descent(const ACSField& baseline, const PerturbationField& start,
                      const QuadratureRule& rule, const DescentOptions& opts) {
  if (opts.steps <= 0 || opts.step_size <= 0.0)
    throw std::invalid_argument("descent needs positive steps and step size");
  DescentResult out;
  out.coeffs = start;
  const int dof = coeff_dof(start);

  auto energy_of = [&](const PerturbationField& c) {
    const ACSField f = perturb(baseline, c, 1.0);
    return energies(f, rule, opts.energy).total;
  };

  double current = energy_of(out.coeffs);
  out.trace.push_back(current);

  for (int step = 0; step < opts.steps; ++step) {
    // central differences in coefficient space
    Vec grad(dof);
    for (int k = 0; k < dof; ++k) {
      PerturbationField up = out.coeffs, dn = out.coeffs;
      const double v = get_entry(out.coeffs, k);
      set_entry(up, k, v + opts.coeff_fd_step);
      set_entry(dn, k, v - opts.coeff_fd_step);
      const double ep = energy_of(up);
      const double em = energy_of(dn);
      if (!std::isfinite(ep) || !std::isfinite(em))
        throw std::runtime_error("gradient estimation failure (non-finite differences)");
      grad[k] = (ep - em) / (2.0 * opts.coeff_fd_step);
      out.gradient_evaluations += 2;
    }
    const double gnorm = grad.norm();
    if (gnorm < opts.grad_tol) break;

    // backtracking line search
    double step_len = opts.step_size / std::max(1.0, gnorm);
    bool accepted = false;
    for (int bt = 0; bt < 25; ++bt) {
      PerturbationField trial = out.coeffs;
      for (int k = 0; k < dof; ++k)
        set_entry(trial, k, get_entry(out.coeffs, k) - step_len * grad[k]);
      const double e = energy_of(trial);
      if (e <= current - 1e-6 * step_len * gnorm * gnorm) {
        out.coeffs = trial;
        current = e;
        out.trace.push_back(current);
        accepted = true;
        break;
      }
      step_len *= 0.5;
    }
    if (!accepted) break;  // no descent possible at this resolution
  }

  out.final_report = energies(perturb(baseline, out.coeffs, 1.0), rule, opts.energy);
  return out;
}

}  // namespace ghenergy
