#include "ghenergy/quadrature.hpp"

#include <atomic>
#include <cmath>

namespace ghenergy {

namespace {

double sphere_area(int m, double r) {
  // Area of S^m with radius r.
  return 2.0 * std::pow(M_PI, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1)) * std::pow(r, m);
}

void gauss_legendre(int n, Vec& x, Vec& w) {
  x.resize(n);
  w.resize(n);
  const int mid = (n + 1) / 2;
  for (int i = 0; i < mid; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

double sqrt_det_metric(const ChartGeometry& geom, const Vec& p) {
  return std::sqrt(geom.metric(p).determinant());
}

// Polar-coordinate product rule on S^m (radius r), Gauss-Legendre in the
// m-1 polar angles and a periodic midpoint rule in the azimuth. The ambient
// pole axis is placed at cos(theta_1), which Gauss-Legendre nodes never hit,
// so every node has a stereographic image.
void sphere_product_nodes(int m, double r, int res, std::vector<Vec>& chart_nodes,
                          std::vector<double>& weights, int extra_dim = 0, double circle_len = 0.0) {
  Vec gx, gw;
  gauss_legendre(res, gx, gw);
  const int nphi = 2 * res;
  std::vector<int> idx(m, 0);  // m-1 polar angles + azimuth (last slot)
  const bool with_circle = extra_dim > 0;
  const int ncircle = with_circle ? 2 * res : 1;

  for (int circle_i = 0; circle_i < ncircle; ++circle_i) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      double weight = std::pow(r, m);
      std::vector<double> theta(m);
      for (int k = 0; k < m - 1; ++k) {
        theta[k] = 0.5 * M_PI * (gx[idx[k]] + 1.0);  // map [-1,1] -> [0,pi]
        weight *= 0.5 * M_PI * gw[idx[k]];
        weight *= std::pow(std::sin(theta[k]), m - 1 - k);
      }
      theta[m - 1] = 2.0 * M_PI * (idx[m - 1] + 0.5) / nphi;  // azimuth
      weight *= 2.0 * M_PI / nphi;

      Vec amb(m + 1);
      double sines = 1.0;
      // pole axis first, then the chain of angles
      amb[m] = std::cos(theta[0]);
      sines *= std::sin(theta[0]);
      for (int k = 1; k < m - 1; ++k) {
        amb[k - 1] = sines * std::cos(theta[k]);
        sines *= std::sin(theta[k]);
      }
      amb[m - 2 >= 0 ? m - 2 : 0] = sines * std::cos(theta[m - 1]);
      amb[m - 1] = sines * std::sin(theta[m - 1]);

      const Vec x = stereo::from_sphere(r * amb, r);
      if (with_circle) {
        Vec full(m + 1 + extra_dim - 1);
        full.head(m) = x;
        full[m] = circle_len * (circle_i + 0.5) / ncircle;
        chart_nodes.push_back(full);
        weights.push_back(weight * circle_len / ncircle);
      } else {
        chart_nodes.push_back(x);
        weights.push_back(weight);
      }

      int axis = m - 1;
      while (axis >= 0) {
        ++idx[axis];
        const int lim = (axis == m - 1) ? nphi : res;
        if (idx[axis] < lim) break;
        idx[axis] = 0;
        --axis;
      }
      if (axis < 0) break;
    }
  }
}

}  // namespace

QuadratureRule make_rule(const ChartGeometry& geom, Scheme scheme, int resolution,
                         std::uint64_t seed) {
  if (resolution <= 0) throw std::invalid_argument("quadrature resolution must be positive");
  QuadratureRule rule;
  rule.scheme = scheme;
  rule.seed = seed;
  const int d = geom.dim;
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::vector<Vec> nodes;
  std::vector<double> weights;

  if (geom.label == "torus") {
    const double side = 2.0 * M_PI;
    if (scheme == Scheme::MonteCarlo) {
      const double coord_vol = std::pow(side, d);
      for (int i = 0; i < resolution; ++i) {
        Vec x(d);
        for (int k = 0; k < d; ++k) x[k] = side * u01(rng);
        nodes.push_back(x);
        weights.push_back(coord_vol / resolution * sqrt_det_metric(geom, x));
      }
    } else {
      const int res = resolution;
      std::vector<int> idx(d, 0);
      const double h = side / res;
      while (true) {
        Vec x(d);
        for (int k = 0; k < d; ++k) x[k] = (idx[k] + 0.5) * h;
        nodes.push_back(x);
        weights.push_back(std::pow(h, d) * sqrt_det_metric(geom, x));
        int axis = d - 1;
        while (axis >= 0 && ++idx[axis] == res) idx[axis--] = 0;
        if (axis < 0) break;
      }
    }
  } else if (geom.label == "sphere_stereographic") {
    const double r = geom.radius;
    if (scheme == Scheme::MonteCarlo) {
      const double area = sphere_area(d, r);
      for (int i = 0; i < resolution; ++i) {
        Vec amb(d + 1);
        do {
          for (int k = 0; k <= d; ++k) amb[k] = gauss(rng);
        } while (amb.norm() < 1e-8 || std::abs(r - r * amb[d] / amb.norm()) < 1e-9 * r);
        amb *= r / amb.norm();
        nodes.push_back(stereo::from_sphere(amb, r));
        weights.push_back(area / resolution);
      }
    } else {
      sphere_product_nodes(d, r, resolution, nodes, weights);
    }
  } else if (geom.label == "hopf_cylinder") {
    const int m = d - 1;  // sphere factor dimension
    const double circle = 2.0 * M_PI;
    if (scheme == Scheme::MonteCarlo) {
      const double vol = sphere_area(m, 1.0) * circle;
      for (int i = 0; i < resolution; ++i) {
        Vec amb(m + 1);
        do {
          for (int k = 0; k <= m; ++k) amb[k] = gauss(rng);
        } while (amb.norm() < 1e-8 || std::abs(1.0 - amb[m] / amb.norm()) < 1e-9);
        amb /= amb.norm();
        Vec x(d);
        x.head(m) = stereo::from_sphere(amb, 1.0);
        x[m] = circle * u01(rng);
        nodes.push_back(x);
        weights.push_back(vol / resolution);
      }
    } else {
      sphere_product_nodes(m, 1.0, resolution, nodes, weights, 1, circle);
    }
  } else if (geom.label == "hyperbolic_ball") {
    if (scheme != Scheme::MonteCarlo)
      throw std::invalid_argument("product rules are not supported on the hyperbolic ball");
    const double rad = geom.domain.sample_radius;
    const double coord_vol =
        std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0) * std::pow(rad, d);
    for (int i = 0; i < resolution; ++i) {
      Vec dir(d);
      for (int k = 0; k < d; ++k) dir[k] = gauss(rng);
      dir.normalize();
      const Vec x = rad * std::pow(u01(rng), 1.0 / d) * dir;
      nodes.push_back(x);
      weights.push_back(coord_vol / resolution * sqrt_det_metric(geom, x));
    }
  } else {
    throw std::invalid_argument("unsupported manifold label for quadrature: " + geom.label);
  }

  rule.node_count = static_cast<int>(nodes.size());
  rule.nodes.resize(d, rule.node_count);
  rule.weights.resize(rule.node_count);
  for (int i = 0; i < rule.node_count; ++i) {
    rule.nodes.col(i) = nodes[i];
    rule.weights[i] = weights[i];
  }
  return rule;
}

IntegralEstimate integrate(const std::function<double(const Vec&)>& f, const QuadratureRule& rule,
                           int threads) {
  auto multi = integrate_channels([&f](const Vec& p, double* out) { out[0] = f(p); }, 1, rule,
                                  threads);
  return multi.channels[0];
}

MultiIntegral integrate_channels(const std::function<void(const Vec&, double*)>& f, int channels,
                                 const QuadratureRule& rule, int threads) {
  const int N = rule.node_count;
  MultiIntegral out;
  out.node_values.resize(channels, N);
  out.weights = rule.weights;
  out.monte_carlo = rule.scheme == Scheme::MonteCarlo;

  std::atomic<long long> bad_index{-1};
  Mat& vals = out.node_values;
  parallel_for(static_cast<size_t>(N), threads, [&](size_t i) {
    std::vector<double> buf(channels);
    f(rule.nodes.col(static_cast<Eigen::Index>(i)), buf.data());
    for (int c = 0; c < channels; ++c) {
      if (!std::isfinite(buf[c])) {
        long long expected = -1;
        bad_index.compare_exchange_strong(expected, static_cast<long long>(i));
      }
      vals(c, static_cast<Eigen::Index>(i)) = buf[c];
    }
  });
  if (bad_index.load() >= 0)
    throw std::runtime_error("non-finite integrand value at node " +
                             std::to_string(bad_index.load()));

  out.channels.resize(channels);
  std::vector<double> scratch(N);
  for (int c = 0; c < channels; ++c) {
    for (int i = 0; i < N; ++i) scratch[i] = rule.weights[i] * vals(c, i);
    const double value = pairwise_sum(scratch);
    double se = 0.0;
    if (out.monte_carlo && N > 1) {
      // h_i = N w_i f_i are iid samples with mean equal to the integral
      const double mean = value;  // = mean of h
      for (int i = 0; i < N; ++i) {
        const double h = N * rule.weights[i] * vals(c, i);
        scratch[i] = (h - mean) * (h - mean);
      }
      const double var = pairwise_sum(scratch) / (N - 1);
      se = std::sqrt(var / N);
    }
    out.channels[c] = {value, se};
  }
  return out;
}

double MultiIntegral::combination_std_error(const std::vector<double>& coeffs) const {
  if (!monte_carlo) return 0.0;
  const int N = static_cast<int>(node_values.cols());
  if (N < 2) return 0.0;
  std::vector<double> h(N);
  for (int i = 0; i < N; ++i) {
    double v = 0.0;
    for (size_t c = 0; c < coeffs.size(); ++c) v += coeffs[c] * node_values(static_cast<Eigen::Index>(c), i);
    h[i] = N * weights[i] * v;
  }
  const double mean = pairwise_sum(h) / N;
  std::vector<double> dev(N);
  for (int i = 0; i < N; ++i) dev[i] = (h[i] - mean) * (h[i] - mean);
  const double var = pairwise_sum(dev) / (N - 1);
  return std::sqrt(var / N);
}

}  // namespace ghenergy
