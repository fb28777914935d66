#include "ghenergy/hermitian.hpp"

#include <cmath>
#include <cstring>

namespace ghenergy {

// ---------------------------------------------------------------------------
// Octonions

namespace octonion {

namespace {

// mult[i][j] = signed unit index of e_i e_j (1-based units, 0 = real part).
struct Table {
  int unit[8][8] = {};
  int sign[8][8] = {};
  Table() {
    const int triples[7][3] = {{1, 2, 4}, {2, 3, 5}, {3, 4, 6}, {4, 5, 7},
                               {5, 6, 1}, {6, 7, 2}, {7, 1, 3}};
    for (int i = 1; i <= 7; ++i) {
      unit[i][i] = 0;
      sign[i][i] = -1;
    }
    for (const auto& t : triples) {
      const int a = t[0], b = t[1], c = t[2];
      auto set = [&](int i, int j, int k) {
        unit[i][j] = k;
        sign[i][j] = 1;
        unit[j][i] = k;
        sign[j][i] = -1;
      };
      set(a, b, c);
      set(b, c, a);
      set(c, a, b);
    }
  }
};

const Table& table() {
  static const Table t;
  return t;
}

}  // namespace

UnitProduct unit_product(int i, int j) {
  if (i < 1 || i > 7 || j < 1 || j > 7) throw std::invalid_argument("octonion unit out of range");
  return {table().unit[i][j], table().sign[i][j]};
}

Vec cross(const Vec& u, const Vec& v) {
  Vec out = Vec::Zero(7);
  const Table& t = table();
  for (int i = 1; i <= 7; ++i) {
    const double ui = u[i - 1];
    if (ui == 0.0) continue;
    for (int j = 1; j <= 7; ++j) {
      const int k = t.unit[i][j];
      if (k == 0) continue;  // real part, dropped
      out[k - 1] += t.sign[i][j] * ui * v[j - 1];
    }
  }
  return out;
}

double triple(const Vec& u, const Vec& v, const Vec& w) { return cross(u, v).dot(w); }

}  // namespace octonion

Mat cayley_j(const Vec& p) {
  if (p.size() != 7) throw std::invalid_argument("cayley_j expects a point in R^7");
  if (std::abs(p.norm() - 1.0) > 1e-12) throw std::invalid_argument("cayley_j expects |p| = 1");
  Mat j(7, 7);
  for (int col = 0; col < 7; ++col) j.col(col) = octonion::cross(p, Vec(Vec::Unit(7, col)));
  return j;
}

// ---------------------------------------------------------------------------
// ACSField

Mat ACSField::j_coord(const Vec& p) const {
  geom->require_inside(p);
  return j_coord_fn(p);
}

Mat ACSField::j_frame(const Vec& p) const {
  const Mat f = geom->frame(p);
  return f.partialPivLu().solve(j_coord(p) * f);
}

double ACSField::invariant_residual(const Vec& p) const {
  const Mat j = j_frame(p);
  const int d = static_cast<int>(j.rows());
  const double sq = (j * j + Mat::Identity(d, d)).cwiseAbs().maxCoeff();
  const double orth = (j.transpose() * j - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
  return std::max(sq, orth);
}

Mat standard_j(int d) {
  if (d % 2 != 0) throw std::invalid_argument("standard_j needs even dimension");
  Mat j = Mat::Zero(d, d);
  for (int a = 0; a < d / 2; ++a) {
    j(2 * a + 1, 2 * a) = 1.0;
    j(2 * a, 2 * a + 1) = -1.0;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Built-in fields

ACSField make_cayley_field(const ChartGeometry& sphere6) {
  if (sphere6.dim != 6 || sphere6.label != "sphere_stereographic")
    throw std::invalid_argument("cayley field requires the 6-sphere chart");
  const double r = sphere6.radius;
  ACSField f;
  f.geom = &sphere6;
  f.label = "cayley";
  f.differentiability = ACSField::Differentiability::FiniteDifference;
  f.j_coord_fn = [r](const Vec& x) {
    const Vec q = stereo::to_sphere(x, r);
    const Mat jamb = cayley_j(q / r);
    const Mat ds = stereo::jacobian(x, r);
    const double phi = stereo::conformal_factor(x, r);
    return Mat(ds.transpose() * jamb * ds / phi);
  };
  // Exact route: the ambient derivative of v -> p x v is u -> u x v, so in
  // any tangent frame u_a the components are trilinear in the frame.
  f.nabla_frame_fn = [r](const Vec& x) {
    const Mat ds = stereo::jacobian(x, r);
    const double phi = stereo::conformal_factor(x, r);
    const double inv_sqrt_phi = 1.0 / std::sqrt(phi);
    Mat u(7, 6);
    for (int a = 0; a < 6; ++a) u.col(a) = ds.col(a) * inv_sqrt_phi;
    Tensor3 alpha(6);
    for (int a = 0; a < 6; ++a)
      for (int b = a + 1; b < 6; ++b) {
        const Vec cab = octonion::cross(u.col(a), u.col(b)) / r;
        for (int c = 0; c < 6; ++c) {
          const double val = cab.dot(u.col(c));
          alpha(a, b, c) = val;
          alpha(b, a, c) = -val;  // the triple form is totally skew
        }
      }
    return alpha;
  };
  return f;
}

ACSField make_hopf_field(const ChartGeometry& hopf) {
  if (hopf.label != "hopf_cylinder")
    throw std::invalid_argument("hopf field requires the cylinder chart");
  const int dim = hopf.dim;
  const int m = dim - 1;  // sphere factor dimension 2n-1
  ACSField f;
  f.geom = &hopf;
  f.label = "hopf";
  f.differentiability = ACSField::Differentiability::FiniteDifference;
  f.j_coord_fn = [dim, m](const Vec& x) {
    const Vec y = x.head(m);
    const Vec p = stereo::to_sphere(y, 1.0);  // in R^{2n} = C^n
    const Mat ds = stereo::jacobian(y, 1.0);
    const double phi = stereo::conformal_factor(y, 1.0);
    const Mat istd = standard_j(m + 1);
    const Vec ip = istd * p;

    Mat j = Mat::Zero(dim, dim);
    for (int a = 0; a < m; ++a) {
      const Vec v = ds.col(a);
      Vec w = istd * v;
      w -= w.dot(p) * p;  // tangential part
      j.block(0, a, m, 1) = ds.transpose() * w / phi;
      j(m, a) = p.dot(istd * v);
    }
    // d/dt column: J(0, 1) = (i p, 0)
    j.block(0, m, m, 1) = ds.transpose() * ip / phi;
    j(m, m) = 0.0;
    return j;
  };
  return f;
}

ACSField make_constant_field(const ChartGeometry& torus, const Mat& j0) {
  const int d = torus.dim;
  if (j0.rows() != d || j0.cols() != d) throw std::invalid_argument("constant J has wrong size");
  const double orth = (j0.transpose() * j0 - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
  const double sq = (j0 * j0 + Mat::Identity(d, d)).cwiseAbs().maxCoeff();
  if (orth > 1e-10 || sq > 1e-10)
    throw std::invalid_argument("constant J must be orthogonal with square -1");
  if (torus.label != "torus")
    throw std::invalid_argument("constant fields are defined on torus charts");
  ACSField f;
  f.geom = &torus;
  f.label = "constant";
  f.differentiability = ACSField::Differentiability::Analytic;
  Mat jc = j0;
  f.j_coord_fn = [jc](const Vec&) { return jc; };
  f.dj_coord_fn = [d](const Vec&) { return std::vector<Mat>(d, Mat::Zero(d, d)); };
  return f;
}

ACSField make_random_pointwise_field(const ChartGeometry& geom, std::uint64_t seed) {
  ACSField f;
  f.geom = &geom;
  f.label = "random";
  f.differentiability = ACSField::Differentiability::None;
  const int d = geom.dim;
  const ChartGeometry* gp = &geom;
  f.j_coord_fn = [d, seed, gp](const Vec& p) {
    // hash the point into a per-point seed
    std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
    for (int i = 0; i < p.size(); ++i) {
      std::uint64_t bits;
      const double x = p[i];
      std::memcpy(&bits, &x, sizeof(bits));
      h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    auto rng = make_rng(h);
    const Mat q = random_orthogonal(d, rng);
    const Mat jf = q * standard_j(d) * q.transpose();
    const Mat fr = gp->frame(p);
    return Mat(fr * jf * fr.partialPivLu().solve(Mat::Identity(d, d)));
  };
  return f;
}

// ---------------------------------------------------------------------------
// nabla omega

namespace {

double type_condition_residual(const Tensor3& a, const Mat& jf) {
  const int d = a.d;
  double worst = 0.0;
  const double scale = std::max(1.0, a.norm());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        double s = 0.0;
        for (int b = 0; b < d; ++b)
          for (int c = 0; c < d; ++c) s += jf(b, j) * jf(c, k) * a(i, b, c);
        worst = std::max(worst, std::abs(s + a(i, j, k)));
      }
  return worst / scale;
}

}  // namespace

NablaOmega nabla_omega_chart(const ACSField& field, const Vec& p) {
  if (field.differentiability == ACSField::Differentiability::None)
    throw std::runtime_error("field is not differentiable (pointwise-random J)");
  const ChartGeometry& geom = *field.geom;
  const int d = geom.dim;
  geom.require_inside(p);

  const Mat g = geom.metric(p);
  const auto gam = christoffel(geom, p);
  const Mat jc = field.j_coord_fn(p);

  std::vector<Mat> dj(d);
  if (field.dj_coord_fn) {
    dj = field.dj_coord_fn(p);
  } else {
    const double h = 1e-3 * (1.0 + p.cwiseAbs().maxCoeff());
    for (int i = 0; i < d; ++i) dj[i] = central_diff4(field.j_coord_fn, p, i, h);
    for (int i = 0; i < d; ++i)
      if (!dj[i].allFinite())
        throw std::runtime_error("finite-difference derivative of J failed (non-smooth field)");
  }

  // nabla_i J^k_l = d_i J^k_l + Gamma^k_{im} J^m_l - Gamma^m_{il} J^k_m
  std::vector<Mat> nj(d, Mat::Zero(d, d));
  for (int i = 0; i < d; ++i) {
    Mat v = dj[i];
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        double s = 0.0;
        for (int m = 0; m < d; ++m) s += gam[k](i, m) * jc(m, l) - gam[m](i, l) * jc(k, m);
        v(k, l) += s;
      }
    nj[i] = v;
  }

  // (nabla_i omega)_{jl} = (nabla_i J)^m_j g_{ml}, then push to the frame.
  const Mat f = geom.frame(p);
  Tensor3 alpha(d);
  std::vector<Mat> no(d);
  for (int i = 0; i < d; ++i) no[i] = nj[i].transpose() * g;  // no[i](j,l)
  // frame transform in stages: first the two form slots, then the direction.
  std::vector<Mat> nof(d);
  for (int i = 0; i < d; ++i) nof[i] = f.transpose() * no[i] * f;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += f(i, a) * nof[i](b, c);
        alpha(a, b, c) = s;
      }

  // exact skew symmetry in the form slots
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = b + 1; c < d; ++c) {
        const double v = 0.5 * (alpha(a, b, c) - alpha(a, c, b));
        alpha(a, b, c) = v;
        alpha(a, c, b) = -v;
      }
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) alpha(a, b, b) = 0.0;

  NablaOmega out;
  out.type_residual = type_condition_residual(alpha, field.j_frame(p));
  out.components = std::move(alpha);
  return out;
}

NablaOmega nabla_omega(const ACSField& field, const Vec& p) {
  if (field.nabla_frame_fn) {
    field.geom->require_inside(p);
    NablaOmega out;
    out.components = field.nabla_frame_fn(p);
    out.type_residual = type_condition_residual(out.components, field.j_frame(p));
    return out;
  }
  return nabla_omega_chart(field, p);
}

}  // namespace ghenergy
