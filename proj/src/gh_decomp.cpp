#include "ghenergy/gh_decomp.hpp"

#include <cmath>
#include <complex>

namespace ghenergy {

namespace {

constexpr double kNullTol = 1e-9;

void check_acs(const Mat& j, int dim) {
  if (j.rows() != dim || j.cols() != dim) throw std::invalid_argument("J has wrong size");
  const double sq = (j * j + Mat::Identity(dim, dim)).cwiseAbs().maxCoeff();
  const double orth = (j.transpose() * j - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (sq > 1e-8 || orth > 1e-8)
    throw std::invalid_argument("J must be orthogonal with square -1");
}

// Basis of the solution space of L(B) = 0 on skew matrices, where L is
// either B -> BJ + JB or B -> BJ - JB. Returned matrices have unit Frobenius
// norm and are pairwise orthogonal.
std::vector<Mat> skew_solution_basis(const Mat& j, bool anticommuting) {
  const int d = static_cast<int>(j.rows());
  const auto pairs = lambda2_pairs(d);
  const int D = static_cast<int>(pairs.size());

  auto to_matrix = [&](const Vec& x) {
    Mat b = Mat::Zero(d, d);
    for (int P = 0; P < D; ++P) {
      b(pairs[P].first, pairs[P].second) = x[P];
      b(pairs[P].second, pairs[P].first) = -x[P];
    }
    return b;
  };

  // BJ + JB is symmetric and BJ - JB is skew; map into the full matrix
  // space so no entries of the constraint are dropped.
  Mat L(d * d, D);
  for (int P = 0; P < D; ++P) {
    const Mat b = to_matrix(Vec::Unit(D, P));
    const Mat lb = anticommuting ? Mat(b * j + j * b) : Mat(b * j - j * b);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) L(r * d + c, P) = lb(r, c);
  }

  Eigen::JacobiSVD<Mat> svd(L, Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  const double cutoff = kNullTol * std::max(1.0, sv.size() ? sv[0] : 0.0);
  std::vector<Mat> basis;
  for (int k = 0; k < D; ++k)
    if (sv[k] < cutoff) basis.push_back(to_matrix(svd.matrixV().col(k)) / std::sqrt(2.0));
  return basis;
}

Tensor3 tensor_from_flat(const Vec& v, int d) {
  Tensor3 t(d);
  for (size_t i = 0; i < t.v.size(); ++i) t.v[i] = v[static_cast<Eigen::Index>(i)];
  return t;
}

Vec flat_from_tensor(const Tensor3& t) {
  Vec v(static_cast<Eigen::Index>(t.v.size()));
  for (size_t i = 0; i < t.v.size(); ++i) v[static_cast<Eigen::Index>(i)] = t.v[i];
  return v;
}

// Cyclic average; equals full antisymmetrization on tensors already skew in
// the last two slots.
Tensor3 cyclic_average(const Tensor3& a) {
  const int d = a.d;
  Tensor3 out(d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z) out(x, y, z) = (a(x, y, z) + a(y, z, x) + a(z, x, y)) / 3.0;
  return out;
}

Mat orthonormal_range(const Mat& cols, double tol) {
  Eigen::JacobiSVD<Mat> svd(cols, Eigen::ComputeThinU);
  const Vec sv = svd.singularValues();
  int rank = 0;
  const double cutoff = tol * std::max(1.0, sv.size() ? sv[0] : 0.0);
  for (int k = 0; k < sv.size(); ++k)
    if (sv[k] > cutoff) ++rank;
  return svd.matrixU().leftCols(rank);
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

std::vector<Mat> skew_anticommuting_basis(const Mat& j) { return skew_solution_basis(j, true); }
std::vector<Mat> skew_commuting_basis(const Mat& j) { return skew_solution_basis(j, false); }

Vec GHProjectors::to_coords(const Tensor3& a) const { return basis_w.transpose() * flat_from_tensor(a); }

Tensor3 GHProjectors::from_coords(const Vec& x) const { return tensor_from_flat(basis_w * x, dim); }

double GHProjectors::membership_residual(const Tensor3& a) const {
  const Vec flat = flat_from_tensor(a);
  const double nrm = flat.norm();
  if (nrm == 0.0) return 0.0;
  const Vec back = basis_w * (basis_w.transpose() * flat);
  return (flat - back).norm() / nrm;
}

Mat build_w_space(const Mat& j, int dim) {
  check_acs(j, dim);
  const auto bforms = skew_anticommuting_basis(j);
  const int n = dim / 2;
  if (static_cast<int>(bforms.size()) != n * (n - 1))
    throw std::runtime_error("unexpected dimension of the (2,0)+(0,2) form space");
  const int M = static_cast<int>(bforms.size());
  Mat basis = Mat::Zero(static_cast<Eigen::Index>(dim) * dim * dim, static_cast<Eigen::Index>(dim) * M);
  for (int i = 0; i < dim; ++i)
    for (int m = 0; m < M; ++m) {
      const int col = i * M + m;
      for (int y = 0; y < dim; ++y)
        for (int z = 0; z < dim; ++z)
          basis((static_cast<Eigen::Index>(i) * dim + y) * dim + z, col) = bforms[m](y, z);
    }
  return basis;
}

GHProjectors build_projectors(const Mat& j, int dim) {
  check_acs(j, dim);
  const int n = dim / 2;
  GHProjectors out;
  out.n = n;
  out.dim = dim;
  out.j = j;
  out.basis_w = build_w_space(j, dim);
  const int W = static_cast<int>(out.basis_w.cols());
  const auto bforms = skew_anticommuting_basis(j);
  const int M = static_cast<int>(bforms.size());

  // --- P4: image of the adjoint of the contraction c(alpha)(Z) = sum_i
  // alpha(e_i, e_i, Z). On the gamma_i (x) B_m basis, c maps column (i, m)
  // to the covector B_m(i, .).
  Mat c = Mat::Zero(dim, W);
  for (int i = 0; i < dim; ++i)
    for (int m = 0; m < M; ++m)
      for (int k = 0; k < dim; ++k) c(k, i * M + m) = bforms[m](i, k);
  const Mat u4 = orthonormal_range(c.transpose(), kNullTol);
  out.p[3] = u4 * u4.transpose();

  // --- P1: totally skew tensors inside W, as the null space of
  // alpha -> alpha - cyclic(alpha) over the ambient tensor space.
  Mat skew_gap(out.basis_w.rows(), W);
  for (int col = 0; col < W; ++col) {
    const Tensor3 t = tensor_from_flat(out.basis_w.col(col), dim);
    skew_gap.col(col) = flat_from_tensor(t - cyclic_average(t));
  }
  Eigen::JacobiSVD<Mat> svd1(skew_gap, Eigen::ComputeFullV);
  const Vec sv1 = svd1.singularValues();
  const double cut1 = kNullTol * std::max(1.0, sv1.size() ? sv1[0] : 0.0);
  int r1 = 0;
  for (int k = 0; k < sv1.size(); ++k)
    if (sv1[k] < cut1) ++r1;
  const Mat u1 = svd1.matrixV().rightCols(r1);
  out.p[0] = u1 * u1.transpose();

  // --- P2: real span of Young-symmetrized cubes of holomorphic covectors,
  // orthogonalized against the P1 and P4 images.
  Mat adapted = Mat::Zero(dim, dim);
  {
    int filled = 0;
    while (filled < dim) {
      // most independent standard axis first, for a deterministic frame
      Vec best;
      double best_norm = -1.0;
      for (int cand = 0; cand < dim; ++cand) {
        Vec v = Vec::Unit(dim, cand);
        for (int b = 0; b < filled; ++b) v -= adapted.col(b).dot(v) * adapted.col(b);
        if (v.norm() > best_norm) {
          best_norm = v.norm();
          best = v;
        }
      }
      if (best_norm < 1e-8) throw std::runtime_error("failed to build a J-adapted frame");
      best.normalize();
      adapted.col(filled++) = best;
      Vec w = j * best;
      for (int b = 0; b < filled; ++b) w -= adapted.col(b).dot(w) * adapted.col(b);
      w.normalize();
      adapted.col(filled++) = w;
    }
  }
  using CVec = Eigen::VectorXcd;
  std::vector<CVec> hol(n);
  for (int a = 0; a < n; ++a)
    hol[a] = (adapted.col(2 * a).cast<std::complex<double>>() +
              std::complex<double>(0.0, 1.0) * adapted.col(2 * a + 1).cast<std::complex<double>>()) /
             std::sqrt(2.0);

  std::vector<Vec> young_cols;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int cc = 0; cc < n; ++cc) {
        Eigen::VectorXcd t(static_cast<Eigen::Index>(dim) * dim * dim);
        for (int x = 0; x < dim; ++x)
          for (int y = 0; y < dim; ++y)
            for (int z = 0; z < dim; ++z) {
              // (1 - (23))(1 + (12)) applied to hol_a (x) hol_b (x) hol_c
              const std::complex<double> val =
                  hol[a][x] * hol[b][y] * hol[cc][z] + hol[a][y] * hol[b][x] * hol[cc][z] -
                  hol[a][x] * hol[b][z] * hol[cc][y] - hol[a][z] * hol[b][x] * hol[cc][y];
              t[(static_cast<Eigen::Index>(x) * dim + y) * dim + z] = val;
            }
        young_cols.push_back(t.real());
        young_cols.push_back(t.imag());
      }
  Mat y2 = Mat::Zero(W, static_cast<Eigen::Index>(young_cols.size()));
  for (size_t k = 0; k < young_cols.size(); ++k)
    y2.col(static_cast<Eigen::Index>(k)) = out.basis_w.transpose() * young_cols[k];
  // numerical hygiene; the span is orthogonal to W1 and W4 already
  y2 = (Mat::Identity(W, W) - out.p[0] - out.p[3]) * y2;
  const Mat u2 = orthonormal_range(y2, 1e-7);
  out.p[1] = u2 * u2.transpose();

  // --- P3: the rest.
  out.p[2] = Mat::Identity(W, W) - out.p[0] - out.p[1] - out.p[3];

  for (int i = 0; i < 4; ++i) out.dims[i] = static_cast<int>(std::lround(out.p[i].trace()));

  // Structural sanity: projector algebra and expected ranks.
  const double tol = 1e-9;
  for (int i = 0; i < 4; ++i) {
    if ((out.p[i] - out.p[i].transpose()).cwiseAbs().maxCoeff() > tol)
      throw std::runtime_error("projector not symmetric");
    if ((out.p[i] * out.p[i] - out.p[i]).cwiseAbs().maxCoeff() > tol)
      throw std::runtime_error("projector not idempotent");
    for (int k = 0; k < i; ++k)
      if ((out.p[i] * out.p[k]).cwiseAbs().maxCoeff() > tol)
        throw std::runtime_error("projectors not mutually orthogonal");
  }
  const int expected_d1 = (n >= 3) ? (n * (n - 1) * (n - 2)) / 3 : 0;  // 2 * C(n,3)
  if (out.dims[0] != expected_d1 || out.dims[3] != dim || out.dims[0] + out.dims[1] + out.dims[2] + out.dims[3] != W)
    throw std::runtime_error("unexpected Gray-Hervella component dimensions");

  // --- Casimir cross-check. Orthonormal basis of the unitary algebra, with
  // the central direction (J itself) split off; the central term keeps the
  // four isotypic eigenvalues distinct for every n.
  auto un = skew_commuting_basis(j);
  if (static_cast<int>(un.size()) != n * n) throw std::runtime_error("unexpected dim of u(n)");
  const Mat jhat = j / j.norm();
  std::vector<Mat> su;
  for (const Mat& a : un) {
    Mat b = a - (jhat.cwiseProduct(a)).sum() * jhat;
    for (const Mat& s : su) b -= (s.cwiseProduct(b)).sum() * s;
    const double nn = b.norm();
    if (nn > 1e-6) su.push_back(b / nn);
  }
  if (static_cast<int>(su.size()) != n * n - 1) throw std::runtime_error("unexpected dim of su(n)");

  auto rho = [&](const Mat& a) {
    Mat ca(M, M);
    for (int m = 0; m < M; ++m) {
      const Mat br = a * bforms[m] - bforms[m] * a;
      for (int l = 0; l < M; ++l) ca(l, m) = (bforms[l].cwiseProduct(br)).sum();
    }
    return Mat(kron(a, Mat::Identity(M, M)) + kron(Mat::Identity(dim, dim), ca));
  };

  Mat omega = Mat::Zero(W, W);
  for (const Mat& s : su) {
    const Mat r = rho(s);
    omega += r * r;
  }
  {
    const Mat r = rho(j);
    omega += r * r;
  }
  out.casimir = omega;

  const double oscale = std::max(1.0, omega.norm());
  for (int i = 0; i < 4; ++i) {
    if (out.dims[i] == 0) {
      out.casimir_eigenvalue[i] = 0.0;
      continue;
    }
    const double lam = (omega * out.p[i]).trace() / out.dims[i];
    out.casimir_eigenvalue[i] = lam;
    const double res = (omega * out.p[i] - lam * out.p[i]).norm() / oscale;
    if (res > 1e-8)
      throw std::runtime_error(
          "Casimir eigenspaces disagree with the structural projectors (implementation bug)");
  }
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < i; ++k)
      if (out.dims[i] > 0 && out.dims[k] > 0 &&
          std::abs(out.casimir_eigenvalue[i] - out.casimir_eigenvalue[k]) < 1e-3 * oscale)
        throw std::runtime_error("Casimir eigenvalues collide; isotypic cross-check impossible");

  return out;
}

GHComponents decompose(const Tensor3& alpha, const GHProjectors& proj) {
  GHComponents out;
  out.membership_residual = proj.membership_residual(alpha);
  if (out.membership_residual > 1e-3)
    throw std::runtime_error("tensor is far outside W; upstream derivative looks broken");
  out.projected_onto_w = out.membership_residual > 1e-6;
  const Vec x = proj.to_coords(alpha);
  for (int i = 0; i < 4; ++i) {
    const Vec xi = proj.p[i] * x;
    out.parts[i] = proj.from_coords(xi);
    out.sq_norms[i] = kEnergyNormFactor * xi.squaredNorm();
  }
  return out;
}

std::set<int> classify_type(const std::array<double, 4>& sq_norms, double tol) {
  double total = 0.0;
  for (double s : sq_norms) total += s;
  std::set<int> type;
  if (total <= 0.0) return type;
  for (int i = 0; i < 4; ++i)
    if (sq_norms[i] > tol * total) type.insert(i + 1);
  return type;
}

std::set<int> classify_type(const GHComponents& comp, double tol) {
  return classify_type(comp.sq_norms, tol);
}

GHComponents gh_components_fast(const Mat& j, const Tensor3& alpha) {
  const int d = alpha.d;
  const int n = d / 2;

  // W4 from the contraction: theta_k = c(alpha)_k / (2n - 2).
  Vec theta = Vec::Zero(d);
  for (int k = 0; k < d; ++k) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += alpha(i, i, k);
    theta[k] = s / (2.0 * n - 2.0);
  }
  const Vec jtheta = j.transpose() * theta;  // theta o J
  Tensor3 a4(d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z)
        a4(x, y, z) = (x == y ? theta[z] : 0.0) - (x == z ? theta[y] : 0.0) +
                      j(y, x) * jtheta[z] - j(z, x) * jtheta[y];

  // Split by the involution Q(alpha)(X,Y,Z) = -alpha(JX, JY, Z); the +1
  // eigenspace carries W1 + W2, the -1 eigenspace W3 + W4.
  Tensor3 q(d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z) {
        double s = 0.0;
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) s += j(a, x) * j(b, y) * alpha(a, b, z);
        q(x, y, z) = -s;
      }

  GHComponents out;
  const Tensor3 plus = 0.5 * (alpha + q);
  const Tensor3 minus = 0.5 * (alpha - q);
  out.parts[0] = cyclic_average(plus);
  out.parts[1] = plus - out.parts[0];
  out.parts[3] = a4;
  out.parts[2] = minus - a4;
  for (int i = 0; i < 4; ++i) out.sq_norms[i] = energy_sq_norm(out.parts[i]);
  return out;
}

std::array<double, 4> gh_sq_norms_fast(const Mat& j, const Tensor3& alpha) {
  return gh_components_fast(j, alpha).sq_norms;
}

}  // namespace ghenergy
