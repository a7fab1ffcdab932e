#pragma once

// Reference computations for the tests, written independently of the library
// internals (plain loops, no shared helpers beyond the Matrix type).

#include "sands/common.hpp"
#include "sands/dataset.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using sands::Index;
using sands::Matrix;
using sands::Vector;

inline std::vector<double> column_mean(const Matrix& x) {
  std::vector<double> m(static_cast<std::size_t>(x.cols()), 0.0);
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) m[static_cast<std::size_t>(j)] += x(i, j);
  for (auto& v : m) v /= static_cast<double>(x.rows());
  return m;
}

// sqrt of the mean per-dimension sample variance
inline double spread(const Matrix& x) {
  const auto m = column_mean(x);
  double s = 0.0;
  for (Index j = 0; j < x.cols(); ++j) {
    double v = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
      const double e = x(i, j) - m[static_cast<std::size_t>(j)];
      v += e * e;
    }
    s += v / static_cast<double>(x.rows() - 1);
  }
  return std::sqrt(s / static_cast<double>(x.cols()));
}

inline double directional_spread(const Matrix& x, const std::vector<double>& u) {
  std::vector<double> p(static_cast<std::size_t>(x.rows()), 0.0);
  double mean = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) p[static_cast<std::size_t>(i)] += x(i, j) * u[static_cast<std::size_t>(j)];
    mean += p[static_cast<std::size_t>(i)];
  }
  mean /= static_cast<double>(x.rows());
  double v = 0.0;
  for (double q : p) v += (q - mean) * (q - mean);
  return std::sqrt(v / static_cast<double>(x.rows() - 1));
}

struct Sands {
  double d, sigma, db;
};

// Pairwise S&S by direct evaluation; directional uses the unit center line.
inline Sands pair_sands(const Matrix& a, const Matrix& b, bool directional, double alpha = 6.0) {
  const auto ma = column_mean(a), mb = column_mean(b);
  double d2 = 0.0;
  for (std::size_t j = 0; j < ma.size(); ++j) d2 += (ma[j] - mb[j]) * (ma[j] - mb[j]);
  const double d = std::sqrt(d2);
  double sa, sb;
  if (directional && d > 0.0) {
    std::vector<double> u(ma.size());
    for (std::size_t j = 0; j < ma.size(); ++j) u[j] = (mb[j] - ma[j]) / d;
    sa = directional_spread(a, u);
    sb = directional_spread(b, u);
  } else {
    sa = spread(a);
    sb = spread(b);
  }
  const double na = static_cast<double>(a.rows()), nb = static_cast<double>(b.rows());
  const double sigma = std::sqrt((na * sa * sa + nb * sb * sb) / (na + nb));
  return {d, sigma, 20.0 * std::log10(d / (alpha * sigma))};
}

inline Matrix rows_of(const Matrix& x, const std::vector<int>& labels, int c) {
  std::vector<Index> idx;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == c) idx.push_back(static_cast<Index>(i));
  Matrix out(static_cast<Index>(idx.size()), x.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Index>(k)) = x.row(idx[k]);
  return out;
}

// Soft-margin primal with regularized bias:
//   1/2 (|w|^2 + b^2) + C sum max(0, 1 - y (w.x + b))
inline double primal(const Vector& w, double b, double c, const Matrix& x, const Vector& y) {
  double obj = 0.5 * (w.squaredNorm() + b * b);
  for (Index i = 0; i < x.rows(); ++i) {
    double f = b;
    for (Index j = 0; j < x.cols(); ++j) f += w(j) * x(i, j);
    obj += c * std::max(0.0, 1.0 - y(i) * f);
  }
  return obj;
}

// Primal reference by smoothing: the hinge is replaced by t*log(1+exp(z/t))
// and each smoothed problem is solved by damped Newton, with t shrunk
// geometrically. Returns (w, b) packed as v = [w, b].
inline Vector smoothed_newton_svm(const Matrix& x, const Vector& y, double c) {
  const Index n = x.rows(), p = x.cols() + 1;
  Matrix a(n, p);
  a.leftCols(p - 1) = x;
  a.col(p - 1).setOnes();
  Vector v = Vector::Zero(p);
  auto objective = [&](const Vector& v, double t) {
    double o = 0.5 * v.squaredNorm();
    for (Index i = 0; i < n; ++i) {
      const double z = (1.0 - y(i) * a.row(i).dot(v)) / t;
      o += c * t * (z > 30 ? z : std::log1p(std::exp(z)));
    }
    return o;
  };
  for (double t = 1.0; t >= 1e-9; t *= 0.3) {
    for (int it = 0; it < 200; ++it) {
      Vector g = v;
      Matrix h = Matrix::Identity(p, p);
      for (Index i = 0; i < n; ++i) {
        const double z = (1.0 - y(i) * a.row(i).dot(v)) / t;
        const double s = 1.0 / (1.0 + std::exp(-z));
        g -= c * s * y(i) * a.row(i).transpose();
        h += (c * s * (1.0 - s) / t) * a.row(i).transpose() * a.row(i);
      }
      const Vector step = h.ldlt().solve(g);
      const double f0 = objective(v, t);
      double lr = 1.0;
      Vector next = v - step;
      while (objective(next, t) > f0 - 1e-4 * lr * g.dot(step) && lr > 1e-12) {
        lr *= 0.5;
        next = v - lr * step;
      }
      v = next;
      if (g.norm() < 1e-12 * (1.0 + c * static_cast<double>(n)) || lr <= 1e-12) break;
    }
  }
  return v;
}

// Points on two circles of radius r1 (class 0) and r2 (class 1), with noise.
inline sands::Dataset rings(Index n_per_class, double r1, double r2, double noise, std::uint64_t seed) {
  sands::Dataset d;
  d.features.resize(2 * n_per_class, 2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  std::normal_distribution<double> z(0.0, noise);
  for (Index i = 0; i < 2 * n_per_class; ++i) {
    const bool inner = i < n_per_class;
    const double r = (inner ? r1 : r2) + z(rng);
    const double t = ang(rng);
    d.features(i, 0) = r * std::cos(t);
    d.features(i, 1) = r * std::sin(t);
    d.labels.push_back(inner ? 0 : 1);
  }
  d.class_names = {{0, "inner"}, {1, "outer"}};
  return d;
}

// Isotropic Gaussian blobs, one per center.
inline sands::Dataset blobs(const std::vector<std::vector<double>>& centers, double sigma, Index n_per_class,
                            std::uint64_t seed) {
  sands::Dataset d;
  const auto psi = static_cast<Index>(centers.front().size());
  d.features.resize(static_cast<Index>(centers.size()) * n_per_class, psi);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, sigma);
  Index row = 0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (Index i = 0; i < n_per_class; ++i, ++row) {
      for (Index j = 0; j < psi; ++j) d.features(row, j) = centers[c][static_cast<std::size_t>(j)] + z(rng);
      d.labels.push_back(static_cast<int>(c));
    }
    d.class_names[static_cast<int>(c)] = "c" + std::to_string(c);
  }
  return d;
}

}  // namespace oracle
