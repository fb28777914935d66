#include "ghenergy/common.hpp"

#include <cmath>
#include <mutex>
#include <thread>

namespace ghenergy {

double Tensor3::dot(const Tensor3& o) const {
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i) s += v[i] * o.v[i];
  return s;
}

double Tensor3::norm() const { return std::sqrt(squared_norm()); }

Tensor3& Tensor3::operator+=(const Tensor3& o) {
  for (size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& o) {
  for (size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  for (double& x : v) x *= s;
  return *this;
}

Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

double Tensor4::squared_norm() const {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double Tensor4::norm() const { return std::sqrt(squared_norm()); }

Tensor4& Tensor4::operator+=(const Tensor4& o) {
  for (size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
  return *this;
}

Tensor4& Tensor4::operator-=(const Tensor4& o) {
  for (size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
  return *this;
}

Tensor4& Tensor4::operator*=(double s) {
  for (double& x : v) x *= s;
  return *this;
}

Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }

double pairwise_sum(std::span<const double> v) {
  const size_t n = v.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const size_t half = n / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t nt = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::exception_ptr err;
  std::mutex err_mtx;
  for (std::size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      const std::size_t lo = n * t / nt, hi = n * (t + 1) / nt;
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::scoped_lock lock(err_mtx);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::mt19937_64 make_rng(std::uint64_t seed) {
  const std::uint64_t mixed[] = {seed, seed ^ static_cast<std::uint64_t>(0x9e3779b97f4a7c15ULL),
                                 seed + static_cast<std::uint64_t>(0x632be59bd9b4e019ULL)};
  std::seed_seq seq(std::begin(mixed), std::end(mixed));
  return std::mt19937_64(seq);
}

std::vector<std::pair<int, int>> lambda2_pairs(int d) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(d * (d - 1) / 2);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
  return pairs;
}

Mat random_orthogonal(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

}  // namespace ghenergy
