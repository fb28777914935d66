#include "ghenergy/geometry.hpp"

#include <cmath>

namespace ghenergy {

// ---------------------------------------------------------------------------
// ChartDomain

bool ChartDomain::contains(const Vec& p) const {
  if (p.size() != dim) return false;
  if (!p.allFinite()) return false;
  if (kind == Kind::Box) {
    for (int i = 0; i < dim; ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
  return p.norm() <= radius;
}

Vec ChartDomain::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (kind == Kind::Box) {
    Vec p(dim);
    for (int i = 0; i < dim; ++i) p[i] = sample_lo[i] + (sample_hi[i] - sample_lo[i]) * u01(rng);
    return p;
  }
  // uniform in the sampling ball
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec dir(dim);
  for (int i = 0; i < dim; ++i) dir[i] = gauss(rng);
  dir.normalize();
  const double rad = sample_radius * std::pow(u01(rng), 1.0 / dim);
  return rad * dir;
}

ChartDomain ChartDomain::box(const Vec& lo, const Vec& hi) {
  ChartDomain d;
  d.kind = Kind::Box;
  d.lo = lo;
  d.hi = hi;
  d.sample_lo = lo;
  d.sample_hi = hi;
  d.dim = static_cast<int>(lo.size());
  return d;
}

ChartDomain ChartDomain::ball(int dim, double radius) {
  ChartDomain d;
  d.kind = Kind::Ball;
  d.dim = dim;
  d.radius = radius;
  d.sample_radius = radius;
  return d;
}

// ---------------------------------------------------------------------------
// ChartGeometry

void ChartGeometry::require_inside(const Vec& p) const {
  if (!domain.contains(p)) throw std::domain_error("point outside chart domain: " + label);
}

Mat ChartGeometry::metric(const Vec& p) const {
  require_inside(p);
  Mat g = metric_fn(p);
  if (!g.allFinite()) throw std::runtime_error("metric not finite at sample point");
  return g;
}

std::vector<Mat> ChartGeometry::metric_d1(const Vec& p, bool force_numeric) const {
  if (dmetric_fn && !force_numeric) return dmetric_fn(p);
  const double h = 1e-4 * (1.0 + p.cwiseAbs().maxCoeff());
  std::vector<Mat> d(dim);
  for (int k = 0; k < dim; ++k) d[k] = central_diff4(metric_fn, p, k, h);
  return d;
}

std::vector<std::vector<Mat>> ChartGeometry::metric_d2(const Vec& p, bool force_numeric) const {
  if (d2metric_fn && !force_numeric) return d2metric_fn(p);
  const double h = 1e-3 * (1.0 + p.cwiseAbs().maxCoeff());
  std::vector<std::vector<Mat>> dd(dim, std::vector<Mat>(dim));
  for (int k = 0; k < dim; ++k) {
    dd[k][k] = central_diff4_second(metric_fn, p, k, h);
    for (int l = k + 1; l < dim; ++l) {
      auto once = [&](const Vec& x) { return central_diff4(metric_fn, x, l, h); };
      dd[k][l] = central_diff4(once, p, k, h);
      dd[l][k] = dd[k][l];
    }
  }
  return dd;
}

Mat ChartGeometry::frame(const Vec& p) const {
  const Mat g = metric(p);
  Mat f = Mat::Identity(dim, dim);
  for (int a = 0; a < dim; ++a) {
    Vec v = f.col(a);
    for (int b = 0; b < a; ++b) {
      const double proj = f.col(b).dot(g * v);
      v -= proj * f.col(b);
    }
    const double nn = v.dot(g * v);
    if (!(nn > 0.0)) throw std::runtime_error("metric not positive definite at sample point");
    f.col(a) = v / std::sqrt(nn);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Connection and curvature

namespace {

Mat inverse_spd(const Mat& g) {
  Eigen::LDLT<Mat> ldlt(g);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw std::runtime_error("metric not invertible (bad chart)");
  return ldlt.solve(Mat::Identity(g.rows(), g.cols()));
}

std::vector<Mat> christoffel_impl(const Mat& ginv, const std::vector<Mat>& dg, int d) {
  std::vector<Mat> gam(d, Mat::Zero(d, d));
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double s = 0.0;
        for (int m = 0; m < d; ++m) s += ginv(k, m) * (dg[i](m, j) + dg[j](m, i) - dg[m](i, j));
        gam[k](i, j) = 0.5 * s;
        gam[k](j, i) = gam[k](i, j);
      }
  return gam;
}

// Coordinate curvature R(d_i, d_j) d_l = rho[m](l, i*d+j) d_m, flattened on
// the last two slots.
struct CoordCurvature {
  int d;
  std::vector<double> rho;  // index ((m*d + l)*d + i)*d + j
  double& at(int m, int l, int i, int j) { return rho[((static_cast<size_t>(m) * d + l) * d + i) * d + j]; }
  double at(int m, int l, int i, int j) const {
    return rho[((static_cast<size_t>(m) * d + l) * d + i) * d + j];
  }
};

CoordCurvature coord_curvature(const ChartGeometry& geom, const Vec& p, Mat& g_out, Mat& ginv_out) {
  const int d = geom.dim;
  const Mat g = geom.metric(p);
  const Mat ginv = inverse_spd(g);
  const auto dg = geom.metric_d1(p);
  const auto ddg = geom.metric_d2(p);
  const auto gam = christoffel_impl(ginv, dg, d);

  // d_l g^{km} = -g^{ka} (d_l g_{ab}) g^{bm}
  std::vector<Mat> dginv(d);
  for (int l = 0; l < d; ++l) dginv[l] = -ginv * dg[l] * ginv;

  // d_l Gamma^k_{ij}
  std::vector<std::vector<Mat>> dgam(d, std::vector<Mat>(d, Mat::Zero(d, d)));
  for (int l = 0; l < d; ++l)
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
          double s = 0.0;
          for (int m = 0; m < d; ++m) {
            s += dginv[l](k, m) * (dg[i](m, j) + dg[j](m, i) - dg[m](i, j));
            s += ginv(k, m) * (ddg[l][i](m, j) + ddg[l][j](m, i) - ddg[l][m](i, j));
          }
          dgam[l][k](i, j) = 0.5 * s;
          dgam[l][k](j, i) = dgam[l][k](i, j);
        }

  CoordCurvature cc;
  cc.d = d;
  cc.rho.assign(static_cast<size_t>(d) * d * d * d, 0.0);
  for (int m = 0; m < d; ++m)
    for (int l = 0; l < d; ++l)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double s = dgam[i][m](j, l) - dgam[j][m](i, l);
          for (int q = 0; q < d; ++q) s += gam[m](i, q) * gam[q](j, l) - gam[m](j, q) * gam[q](i, l);
          cc.at(m, l, i, j) = s;
        }
  g_out = g;
  ginv_out = ginv;
  return cc;
}

// Contract one index of a rank-4 array with frame columns.
Tensor4 contract_axis(const Tensor4& t, const Mat& f, int axis) {
  const int d = t.d;
  Tensor4 out(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double s = 0.0;
          switch (axis) {
            case 0:
              for (int i = 0; i < d; ++i) s += f(i, a) * t(i, b, c, e);
              break;
            case 1:
              for (int i = 0; i < d; ++i) s += f(i, b) * t(a, i, c, e);
              break;
            case 2:
              for (int i = 0; i < d; ++i) s += f(i, c) * t(a, b, i, e);
              break;
            default:
              for (int i = 0; i < d; ++i) s += f(i, e) * t(a, b, c, i);
          }
          out(a, b, c, e) = s;
        }
  return out;
}

// Kulkarni-Nomizu product (h ^ k)_{ijkl}.
double kn(const Mat& h, const Mat& k, int i, int j, int a, int b) {
  return h(i, a) * k(j, b) + h(j, b) * k(i, a) - h(i, b) * k(j, a) - h(j, a) * k(i, b);
}

}  // namespace

std::vector<Mat> christoffel(const ChartGeometry& geom, const Vec& p) {
  const Mat g = geom.metric(p);
  const Mat ginv = inverse_spd(g);
  return christoffel_impl(ginv, geom.metric_d1(p), geom.dim);
}

CurvatureData curvature(const ChartGeometry& geom, const Vec& p) {
  const int d = geom.dim;
  Mat g, ginv;
  const CoordCurvature cc = coord_curvature(geom, p, g, ginv);

  // riemann_coord(i,j,k,l) = g_{km} rho^m(l, i, j)
  Tensor4 rc(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          double s = 0.0;
          for (int m = 0; m < d; ++m) s += g(k, m) * cc.at(m, l, i, j);
          rc(i, j, k, l) = s;
        }

  CurvatureData out;
  out.dim = d;
  out.frame = geom.frame(p);
  Tensor4 rf = contract_axis(rc, out.frame, 0);
  rf = contract_axis(rf, out.frame, 1);
  rf = contract_axis(rf, out.frame, 2);
  rf = contract_axis(rf, out.frame, 3);
  out.riemann = std::move(rf);

  out.ricci = Mat::Zero(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) s += out.riemann(a, j, a, k);
      out.ricci(j, k) = s;
    }
  out.scalar = out.ricci.trace();

  if (d >= 4) out.weyl = weyl_tensor(out, d);

  const auto pairs = lambda2_pairs(d);
  const int D = static_cast<int>(pairs.size());
  out.curvature_operator = Mat::Zero(D, D);
  for (int P = 0; P < D; ++P)
    for (int Q = 0; Q < D; ++Q)
      out.curvature_operator(P, Q) =
          out.riemann(pairs[P].first, pairs[P].second, pairs[Q].first, pairs[Q].second);
  return out;
}

double scalar_curvature(const ChartGeometry& geom, const Vec& p) {
  const int d = geom.dim;
  Mat g, ginv;
  const CoordCurvature cc = coord_curvature(geom, p, g, ginv);
  double s = 0.0;
  for (int j = 0; j < d; ++j)
    for (int l = 0; l < d; ++l) {
      double ric = 0.0;
      for (int m = 0; m < d; ++m) ric += cc.at(m, l, m, j);
      s += ginv(j, l) * ric;
    }
  return s;
}

Tensor4 weyl_tensor(const CurvatureData& curv, int dim) {
  if (dim < 4)
    throw std::domain_error("Weyl tensor is identically zero below dimension 4 (degenerate input)");
  const int d = dim;
  const Mat id = Mat::Identity(d, d);
  const Mat ric0 = curv.ricci - (curv.scalar / d) * id;
  const double sfac = curv.scalar / (2.0 * d * (d - 1));
  const double rfac = 1.0 / (d - 2);
  Tensor4 w(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
          w(i, j, k, l) = curv.riemann(i, j, k, l) - rfac * kn(ric0, id, i, j, k, l) -
                          sfac * kn(id, id, i, j, k, l);
  return w;
}

std::pair<double, double> self_dual_parts(const CurvatureData& curv, int orientation) {
  if (curv.dim != 4) throw std::domain_error("self-dual split requires dimension 4");
  if (orientation != 1 && orientation != -1) throw std::invalid_argument("orientation must be +-1");
  const auto pairs = lambda2_pairs(4);
  const int D = 6;

  // Hodge star on Lambda^2 in the pair basis.
  Mat star = Mat::Zero(D, D);
  for (int P = 0; P < D; ++P) {
    const auto [i, j] = pairs[P];
    int k = -1, l = -1;
    for (int m = 0; m < 4; ++m)
      if (m != i && m != j) (k < 0 ? k : l) = m;
    // sign of the permutation (i, j, k, l) of (0,1,2,3)
    int perm[4] = {i, j, k, l};
    int sign = 1;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        if (perm[a] > perm[b]) sign = -sign;
    int Q = 0;
    while (pairs[Q] != std::make_pair(std::min(k, l), std::max(k, l))) ++Q;
    star(Q, P) = sign * orientation;
  }

  Mat wop = Mat::Zero(D, D);
  for (int P = 0; P < D; ++P)
    for (int Q = 0; Q < D; ++Q)
      wop(P, Q) = curv.weyl(pairs[P].first, pairs[P].second, pairs[Q].first, pairs[Q].second);

  const Mat plus = 0.5 * (Mat::Identity(D, D) + star);
  const Mat minus = 0.5 * (Mat::Identity(D, D) - star);
  return {(plus * wop * plus).norm(), (minus * wop * minus).norm()};
}

GateResult conformal_flatness_gate(const ChartGeometry& geom, const std::vector<Vec>& points,
                                   double tol, std::optional<int> orientation) {
  GateResult res;
  res.tol = tol;
  double worst = 0.0;
  for (const Vec& p : points) {
    const CurvatureData c = curvature(geom, p);
    double wnorm;
    const double scale = std::max(1.0, c.riemann.norm());
    if (geom.dim == 4 && orientation.has_value()) {
      wnorm = self_dual_parts(c, *orientation).first;
    } else {
      wnorm = c.weyl.norm();
    }
    worst = std::max(worst, wnorm / scale);
  }
  res.max_weyl = worst;
  res.pass = worst < tol;
  return res;
}

ChartGeometry conformal_rescale(const ChartGeometry& geom, const ScalarField& lambda) {
  ChartGeometry out = geom;
  out.label = geom.label;
  const ChartGeometry base = geom;
  const ScalarField lam = lambda;
  out.metric_fn = [base, lam](const Vec& p) {
    const double l = lam.value(p);
    if (!(l > 0.0)) throw std::domain_error("conformal factor must be positive");
    return Mat(l * base.metric_fn(p));
  };
  out.dmetric_fn = [base, lam](const Vec& p) {
    const double l = lam.value(p);
    const Vec gl = lam.grad(p);
    const Mat g = base.metric_fn(p);
    auto dg = base.metric_d1(p);
    std::vector<Mat> d(base.dim);
    for (int k = 0; k < base.dim; ++k) d[k] = gl[k] * g + l * dg[k];
    return d;
  };
  out.d2metric_fn = [base, lam](const Vec& p) {
    const double l = lam.value(p);
    const Vec gl = lam.grad(p);
    const Mat hl = lam.hess(p);
    const Mat g = base.metric_fn(p);
    auto dg = base.metric_d1(p);
    auto ddg = base.metric_d2(p);
    std::vector<std::vector<Mat>> dd(base.dim, std::vector<Mat>(base.dim));
    for (int k = 0; k < base.dim; ++k)
      for (int m = 0; m < base.dim; ++m)
        dd[k][m] = hl(k, m) * g + gl[k] * dg[m] + gl[m] * dg[k] + l * ddg[k][m];
    return dd;
  };
  return out;
}

// ---------------------------------------------------------------------------
// Built-in geometries

namespace {

ChartGeometry conformal_chart(int dim, const std::string& label, ChartDomain dom,
                              std::function<double(const Vec&)> phi,
                              std::function<Vec(const Vec&)> dphi,
                              std::function<Mat(const Vec&)> ddphi) {
  ChartGeometry g;
  g.dim = dim;
  g.label = label;
  g.domain = std::move(dom);
  g.metric_fn = [dim, phi](const Vec& p) { return Mat(phi(p) * Mat::Identity(dim, dim)); };
  g.dmetric_fn = [dim, dphi](const Vec& p) {
    const Vec d = dphi(p);
    std::vector<Mat> out(dim);
    for (int k = 0; k < dim; ++k) out[k] = d[k] * Mat::Identity(dim, dim);
    return out;
  };
  g.d2metric_fn = [dim, ddphi](const Vec& p) {
    const Mat h = ddphi(p);
    std::vector<std::vector<Mat>> out(dim, std::vector<Mat>(dim));
    for (int k = 0; k < dim; ++k)
      for (int l = 0; l < dim; ++l) out[k][l] = h(k, l) * Mat::Identity(dim, dim);
    return out;
  };
  return g;
}

}  // namespace

ChartGeometry make_flat_torus(int dim) {
  if (dim < 2) throw std::invalid_argument("torus dimension must be >= 2");
  ChartGeometry g;
  g.dim = dim;
  g.label = "torus";
  g.domain = ChartDomain::box(Vec::Zero(dim), Vec::Constant(dim, 2.0 * M_PI));
  g.metric_fn = [dim](const Vec&) { return Mat(Mat::Identity(dim, dim)); };
  g.dmetric_fn = [dim](const Vec&) { return std::vector<Mat>(dim, Mat::Zero(dim, dim)); };
  g.d2metric_fn = [dim](const Vec&) {
    return std::vector<std::vector<Mat>>(dim, std::vector<Mat>(dim, Mat::Zero(dim, dim)));
  };
  return g;
}

ScalarField sin_conformal_factor(double amplitude) {
  ScalarField f;
  f.value = [amplitude](const Vec& p) { return 1.0 + amplitude * std::sin(p[0]); };
  f.grad = [amplitude](const Vec& p) {
    Vec g = Vec::Zero(p.size());
    g[0] = amplitude * std::cos(p[0]);
    return g;
  };
  f.hess = [amplitude](const Vec& p) {
    Mat h = Mat::Zero(p.size(), p.size());
    h(0, 0) = -amplitude * std::sin(p[0]);
    return h;
  };
  return f;
}

ChartGeometry make_conformal_torus(int dim, double amplitude) {
  if (!(std::abs(amplitude) < 1.0))
    throw std::invalid_argument("conformal torus amplitude must stay below 1");
  return conformal_rescale(make_flat_torus(dim), sin_conformal_factor(amplitude));
}

ChartGeometry make_bump_torus(int dim, std::uint64_t seed, double amplitude) {
  struct Term {
    Mat coeff;
    Vec wave;
    double phase;
  };
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto terms = std::make_shared<std::vector<Term>>();
  const int nterms = 4;
  for (int t = 0; t < nterms; ++t) {
    Term term;
    Mat c(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) c(i, j) = gauss(rng);
    c = 0.5 * (c + c.transpose());
    term.coeff = (amplitude / nterms) * c / c.norm() * dim;
    term.wave = Vec::Zero(dim);
    term.wave[t % dim] = 1.0;
    if (t >= 2) term.wave[(t + 1) % dim] = 1.0;  // a couple of mixed modes
    term.phase = 2.0 * M_PI * u01(rng);
    terms->push_back(std::move(term));
  }

  ChartGeometry g;
  g.dim = dim;
  g.label = "torus";
  g.domain = ChartDomain::box(Vec::Zero(dim), Vec::Constant(dim, 2.0 * M_PI));
  g.metric_fn = [dim, terms](const Vec& p) {
    Mat m = Mat::Identity(dim, dim);
    for (const auto& t : *terms) m += std::sin(t.wave.dot(p) + t.phase) * t.coeff;
    return m;
  };
  g.dmetric_fn = [dim, terms](const Vec& p) {
    std::vector<Mat> d(dim, Mat::Zero(dim, dim));
    for (const auto& t : *terms) {
      const double c = std::cos(t.wave.dot(p) + t.phase);
      for (int k = 0; k < dim; ++k)
        if (t.wave[k] != 0.0) d[k] += c * t.wave[k] * t.coeff;
    }
    return d;
  };
  g.d2metric_fn = [dim, terms](const Vec& p) {
    std::vector<std::vector<Mat>> dd(dim, std::vector<Mat>(dim, Mat::Zero(dim, dim)));
    for (const auto& t : *terms) {
      const double s = std::sin(t.wave.dot(p) + t.phase);
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l)
          if (t.wave[k] != 0.0 && t.wave[l] != 0.0) dd[k][l] -= s * t.wave[k] * t.wave[l] * t.coeff;
    }
    return dd;
  };
  return g;
}

ChartGeometry make_sphere(int m, double radius) {
  if (radius <= 0) throw std::invalid_argument("sphere radius must be positive");
  const double r2 = radius * radius;
  const double r4 = r2 * r2;
  ChartDomain dom = ChartDomain::ball(m, 1e6);
  dom.sample_radius = 3.0 * radius;
  ChartGeometry g = conformal_chart(
      m, "sphere_stereographic", std::move(dom),
      [r2, r4](const Vec& p) {
        const double q = r2 + p.squaredNorm();
        return 4.0 * r4 / (q * q);
      },
      [r2, r4](const Vec& p) {
        const double q = r2 + p.squaredNorm();
        return Vec(-16.0 * r4 / (q * q * q) * p);
      },
      [r2, r4, m](const Vec& p) {
        const double q = r2 + p.squaredNorm();
        Mat h = -16.0 * r4 / (q * q * q) * Mat::Identity(m, m);
        h += 96.0 * r4 / (q * q * q * q) * (p * p.transpose());
        return h;
      });
  g.radius = radius;
  return g;
}

ChartGeometry make_hyperbolic_ball(int m) {
  ChartDomain dom = ChartDomain::ball(m, 0.95);
  dom.sample_radius = 0.75;
  ChartGeometry g = conformal_chart(
      m, "hyperbolic_ball", std::move(dom),
      [](const Vec& p) {
        const double q = 1.0 - p.squaredNorm();
        return 4.0 / (q * q);
      },
      [](const Vec& p) {
        const double q = 1.0 - p.squaredNorm();
        return Vec(16.0 / (q * q * q) * p);
      },
      [m](const Vec& p) {
        const double q = 1.0 - p.squaredNorm();
        Mat h = 16.0 / (q * q * q) * Mat::Identity(m, m);
        h += 96.0 / (q * q * q * q) * (p * p.transpose());
        return h;
      });
  return g;
}

ChartGeometry make_hopf_cylinder(int n) {
  if (n < 2) throw std::invalid_argument("hopf cylinder needs n >= 2");
  const int m = 2 * n - 1;  // sphere factor dimension
  const int dim = 2 * n;
  ChartGeometry g;
  g.dim = dim;
  g.label = "hopf_cylinder";
  Vec lo = Vec::Constant(dim, -1e6), hi = Vec::Constant(dim, 1e6);
  lo[dim - 1] = 0.0;
  hi[dim - 1] = 2.0 * M_PI;
  g.domain = ChartDomain::box(lo, hi);
  g.domain.sample_lo = Vec::Constant(dim, -2.0);
  g.domain.sample_hi = Vec::Constant(dim, 2.0);
  g.domain.sample_lo[dim - 1] = 0.0;
  g.domain.sample_hi[dim - 1] = 2.0 * M_PI;

  auto phi = [](const Vec& y) {
    const double q = 1.0 + y.squaredNorm();
    return 4.0 / (q * q);
  };
  g.metric_fn = [dim, m, phi](const Vec& p) {
    Mat g0 = Mat::Identity(dim, dim);
    const Vec y = p.head(m);
    g0.topLeftCorner(m, m) *= phi(y);
    return g0;
  };
  g.dmetric_fn = [dim, m](const Vec& p) {
    const Vec y = p.head(m);
    const double q = 1.0 + y.squaredNorm();
    std::vector<Mat> d(dim, Mat::Zero(dim, dim));
    for (int k = 0; k < m; ++k) {
      Mat dk = Mat::Zero(dim, dim);
      dk.topLeftCorner(m, m) = (-16.0 / (q * q * q) * y[k]) * Mat::Identity(m, m);
      d[k] = dk;
    }
    return d;
  };
  g.d2metric_fn = [dim, m](const Vec& p) {
    const Vec y = p.head(m);
    const double q = 1.0 + y.squaredNorm();
    std::vector<std::vector<Mat>> dd(dim, std::vector<Mat>(dim, Mat::Zero(dim, dim)));
    for (int k = 0; k < m; ++k)
      for (int l = 0; l < m; ++l) {
        double val = 96.0 / (q * q * q * q) * y[k] * y[l];
        if (k == l) val += -16.0 / (q * q * q);
        Mat h = Mat::Zero(dim, dim);
        h.topLeftCorner(m, m) = val * Mat::Identity(m, m);
        dd[k][l] = h;
      }
    return dd;
  };
  return g;
}

// ---------------------------------------------------------------------------
// Stereographic helpers

namespace stereo {

Vec to_sphere(const Vec& x, double r) {
  const int m = static_cast<int>(x.size());
  const double rho = x.squaredNorm();
  const double q = r * r + rho;
  Vec out(m + 1);
  out.head(m) = (2.0 * r * r / q) * x;
  out[m] = r * (rho - r * r) / q;
  return out;
}

Vec from_sphere(const Vec& q, double r) {
  const int m = static_cast<int>(q.size()) - 1;
  const double denom = r - q[m];
  if (std::abs(denom) < 1e-12 * r)
    throw std::domain_error("stereographic chart does not cover the projection pole");
  return Vec(r / denom * q.head(m));
}

Mat jacobian(const Vec& x, double r) {
  const int m = static_cast<int>(x.size());
  const double rho = x.squaredNorm();
  const double q = r * r + rho;
  Mat jac(m + 1, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      jac(i, j) = 2.0 * r * r * ((i == j ? 1.0 : 0.0) / q - 2.0 * x[i] * x[j] / (q * q));
  for (int j = 0; j < m; ++j) jac(m, j) = 4.0 * r * r * r * x[j] / (q * q);
  return jac;
}

double conformal_factor(const Vec& x, double r) {
  const double q = r * r + x.squaredNorm();
  return 4.0 * r * r * r * r / (q * q);
}

}  // namespace stereo

}  // namespace ghenergy
