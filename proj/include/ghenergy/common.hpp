#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghenergy {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense rank-3 array of real components, index order (i,j,k).
struct Tensor3 {
  int d = 0;
  std::vector<double> v;

  Tensor3() = default;
  explicit Tensor3(int dim) : d(dim), v(static_cast<size_t>(dim) * dim * dim, 0.0) {}

  double& operator()(int i, int j, int k) { return v[(static_cast<size_t>(i) * d + j) * d + k]; }
  double operator()(int i, int j, int k) const { return v[(static_cast<size_t>(i) * d + j) * d + k]; }

  double dot(const Tensor3& o) const;
  double squared_norm() const { return dot(*this); }
  double norm() const;

  Tensor3& operator+=(const Tensor3& o);
  Tensor3& operator-=(const Tensor3& o);
  Tensor3& operator*=(double s);
};

Tensor3 operator+(Tensor3 a, const Tensor3& b);
Tensor3 operator-(Tensor3 a, const Tensor3& b);
Tensor3 operator*(double s, Tensor3 a);

/// Dense rank-4 array, index order (i,j,k,l).
struct Tensor4 {
  int d = 0;
  std::vector<double> v;

  Tensor4() = default;
  explicit Tensor4(int dim) : d(dim), v(static_cast<size_t>(dim) * dim * dim * dim, 0.0) {}

  double& operator()(int i, int j, int k, int l) {
    return v[((static_cast<size_t>(i) * d + j) * d + k) * d + l];
  }
  double operator()(int i, int j, int k, int l) const {
    return v[((static_cast<size_t>(i) * d + j) * d + k) * d + l];
  }

  double squared_norm() const;
  double norm() const;

  Tensor4& operator+=(const Tensor4& o);
  Tensor4& operator-=(const Tensor4& o);
  Tensor4& operator*=(double s);
};

Tensor4 operator-(Tensor4 a, const Tensor4& b);

/// Sums in a fixed pairwise tree order; the result does not depend on how the
/// values were produced (thread count, evaluation order).
double pairwise_sum(std::span<const double> v);

/// Runs fn(i) for i in [0,n). Results must be written to disjoint slots keyed
/// by i so the outcome is independent of the partition.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

std::mt19937_64 make_rng(std::uint64_t seed);

/// Lexicographic list of index pairs (i,j), i<j, for the e_i^e_j basis of
/// Lambda^2.
std::vector<std::pair<int, int>> lambda2_pairs(int d);

/// Haar-ish random orthogonal matrix (QR of a Gaussian matrix, signs fixed).
Mat random_orthogonal(int d, std::mt19937_64& rng);

/// 4th-order central difference along one chart axis. The return type is
/// materialized (no expression templates escaping with dangling operands).
template <typename F>
auto central_diff4(F&& f, Vec x, int axis, double h) -> std::decay_t<decltype(f(x))> {
  const double x0 = x[axis];
  x[axis] = x0 + 2 * h;
  auto r = f(x);
  x[axis] = x0 + h;
  auto a = f(x);
  x[axis] = x0 - h;
  auto b = f(x);
  x[axis] = x0 - 2 * h;
  auto c = f(x);
  x[axis] = x0;
  return (-r + 8.0 * a - 8.0 * b + c) / (12.0 * h);
}

/// 4th-order second derivative along a single axis.
template <typename F>
auto central_diff4_second(F&& f, Vec x, int axis, double h) -> std::decay_t<decltype(f(x))> {
  const double x0 = x[axis];
  auto f0 = f(x);
  x[axis] = x0 + 2 * h;
  auto p2 = f(x);
  x[axis] = x0 + h;
  auto p1 = f(x);
  x[axis] = x0 - h;
  auto m1 = f(x);
  x[axis] = x0 - 2 * h;
  auto m2 = f(x);
  x[axis] = x0;
  return (-p2 + 16.0 * p1 - 30.0 * f0 + 16.0 * m1 - m2) / (12.0 * h * h);
}

}  // namespace ghenergy
