#include "sands/svm.hpp"

#include "sands/error.hpp"

#include <atomic>
#include <cmath>
#include <limits>

namespace sands {

namespace {

std::atomic<std::uint64_t> g_train_calls{0};

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kUnshrinkEvery = 100;

double dot(const double* a, const double* b, Index n) {
  double s = 0.0;
  for (Index k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

void axpy(double a, const double* x, double* y, Index n) {
  for (Index k = 0; k < n; ++k) y[k] += a * x[k];
}

}  // namespace

std::uint64_t train_call_count() { return g_train_calls.load(); }

double mean_hinge(const Vector& scores, const Vector& y) {
  if (scores.size() != y.size()) throw DimensionMismatch("hinge: scores and labels differ in length");
  if (scores.size() == 0) return 0.0;
  return (1.0 - y.array() * scores.array()).max(0.0).mean();
}

double primal_objective(const Vector& w, double b, double c, const Matrix& x, const Vector& y) {
  const Vector f = (x * w).array() + b;
  const double slack = (1.0 - y.array() * f.array()).max(0.0).sum();
  return 0.5 * (w.squaredNorm() + b * b) + c * slack;
}

TrainResult train_detailed(const Matrix& x, const Vector& y, double c, const SolverConfig& cfg,
                           const Vector* warm_alpha) {
  ++g_train_calls;
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("C must be finite and > 0");
  if (cfg.max_epochs < 1) throw InvalidArgument("max_epochs must be >= 1");
  if (!(cfg.tolerance > 0.0)) throw InvalidArgument("tolerance must be > 0");
  if (x.rows() != y.size()) throw DimensionMismatch("train: rows and labels differ in length");
  bool has_pos = false, has_neg = false;
  for (Index i = 0; i < y.size(); ++i) {
    if (y(i) == 1.0) has_pos = true;
    else if (y(i) == -1.0) has_neg = true;
    else throw InvalidArgument("train: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw SingleClassError("train: both +1 and -1 labels are required");

  const Index n = x.rows();
  const Index p = x.cols() + 1;

  // Augmented rows [x_i, 1], contiguous.
  Matrix xa(n, p);
  xa.leftCols(x.cols()) = x;
  xa.col(p - 1).setOnes();
  Vector qd = xa.rowwise().squaredNorm();

  TrainResult res;
  Vector& alpha = res.alpha;
  alpha = Vector::Zero(n);
  Vector wa = Vector::Zero(p);
  if (warm_alpha && warm_alpha->size() == n) {
    alpha = warm_alpha->cwiseMax(0.0).cwiseMin(c);
    for (Index i = 0; i < n; ++i) {
      if (alpha(i) != 0.0) axpy(alpha(i) * y(i), xa.row(i).data(), wa.data(), p);
    }
  }

  std::vector<Index> active(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) active[static_cast<std::size_t>(i)] = i;
  std::size_t active_size = active.size();

  double pg_max_old = kInf, pg_min_old = -kInf;
  bool converged = false;
  int epoch = 0;
  Rng rng = make_rng(derive_seed(cfg.seed, 0x5c0));

  auto dual_value = [&] { return alpha.sum() - 0.5 * wa.squaredNorm(); };

  // Largest projected gradient over every point at the current w.
  auto full_kkt = [&] {
    double worst = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double g = y(i) * dot(wa.data(), xa.row(i).data(), p) - 1.0;
      double pg = g;
      if (alpha(i) == 0.0) pg = std::min(g, 0.0);
      else if (alpha(i) == c) pg = std::max(g, 0.0);
      worst = std::max(worst, std::abs(pg));
    }
    return worst;
  };

  for (epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // Shuffle the active prefix.
    for (std::size_t i = active_size; i > 1; --i) std::swap(active[i - 1], active[uniform_index(rng, i)]);

    double pg_max = -kInf, pg_min = kInf;
    for (std::size_t s = 0; s < active_size; ++s) {
      const Index i = active[s];
      const double yi = y(i);
      const double* xi = xa.row(i).data();
      const double g = yi * dot(wa.data(), xi, p) - 1.0;
      double pg = 0.0;
      if (alpha(i) == 0.0) {
        if (cfg.shrinking && g > pg_max_old) {
          --active_size;
          std::swap(active[s], active[active_size]);
          --s;
          continue;
        }
        pg = std::min(g, 0.0);
      } else if (alpha(i) == c) {
        if (cfg.shrinking && g < pg_min_old) {
          --active_size;
          std::swap(active[s], active[active_size]);
          --s;
          continue;
        }
        pg = std::max(g, 0.0);
      } else {
        pg = g;
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::abs(pg) > 1e-14) {
        const double old = alpha(i);
        alpha(i) = std::min(std::max(old - g / qd(i), 0.0), c);
        axpy((alpha(i) - old) * yi, xi, wa.data(), p);
      }
    }
    if (cfg.track_objective) res.dual_trace.push_back(dual_value());

    if (active_size == 0) pg_max = pg_min = 0.0;
    const double violation = std::max(std::abs(pg_max), std::abs(pg_min));
    if (violation <= cfg.tolerance) {
      // gradients seen mid-sweep can be stale, so confirm at the final w
      if (active_size == active.size() && full_kkt() <= cfg.tolerance) {
        converged = true;
        break;
      }
      // Unshrink and re-check everything.
      active_size = active.size();
      pg_max_old = kInf;
      pg_min_old = -kInf;
      continue;
    }
    pg_max_old = pg_max <= 0.0 ? kInf : pg_max;
    pg_min_old = pg_min >= 0.0 ? -kInf : pg_min;
    // a small shrunk set can crawl while the dropped points stay violated
    if (cfg.shrinking && epoch % kUnshrinkEvery == 0) {
      active_size = active.size();
      pg_max_old = kInf;
      pg_min_old = -kInf;
    }
  }

  const double kkt = full_kkt();

  SvmModel& m = res.model;
  m.w = wa.head(p - 1);
  m.b = wa(p - 1);
  m.c = c;
  auto& diag = m.diagnostics;
  const Vector scores = (x * m.w).array() + m.b;
  diag.train_hinge = mean_hinge(scores, y);
  const double wn = m.w.norm();
  diag.margin_width = wn > 0.0 ? 2.0 / wn : kInf;
  diag.iterations = std::min(epoch, cfg.max_epochs);
  diag.converged = converged;
  diag.primal_objective = primal_objective(m.w, m.b, c, x, y);
  diag.dual_objective = dual_value();
  diag.max_kkt_violation = kkt;
  return res;
}

SvmModel train(const BinaryProblem& p, double c, const SolverConfig& cfg) {
  return train_detailed(p.x, p.y, c, cfg).model;
}

SvmModel train(const BinaryProblem& p, std::shared_ptr<const FeatureMap> map, double c, const SolverConfig& cfg) {
  if (!map) return train(p, c, cfg);
  SvmModel m = train_detailed(transform(*map, p.x), p.y, c, cfg).model;
  m.map = std::move(map);
  return m;
}

Vector decision_function(const SvmModel& m, const Matrix& rows) {
  if (m.map) {
    const Matrix z = transform(*m.map, rows);
    return (z * m.w).array() + m.b;
  }
  if (rows.cols() != m.w.size()) {
    throw DimensionMismatch("model expects " + std::to_string(m.w.size()) + " features, got " +
                            std::to_string(rows.cols()));
  }
  return (rows * m.w).array() + m.b;
}

Prediction predict(const SvmModel& m, const Vector& x) {
  Matrix row = x.transpose();
  const double s = decision_function(m, row)(0);
  return {s >= 0.0 ? 1 : -1, s};
}

double hinge_loss(const SvmModel& m, const BinaryProblem& p) { return mean_hinge(decision_function(m, p.x), p.y); }

double margin_width(const SvmModel& m) {
  const double wn = m.w.norm();
  if (!(wn > 0.0)) throw InvalidArgument("margin width undefined for a zero weight vector");
  return 2.0 / wn;
}

}  // namespace sands
