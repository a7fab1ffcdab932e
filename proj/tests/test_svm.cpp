#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "sands/error.hpp"
#include "sands/svm.hpp"

#include <cmath>

using namespace sands;

namespace {

BinaryProblem random_problem(Index n, Index psi, double shift, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  BinaryProblem p;
  p.x.resize(n, psi);
  p.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    p.y(i) = i % 2 == 0 ? 1.0 : -1.0;
    for (Index j = 0; j < psi; ++j) p.x(i, j) = z(rng) + (j == 0 ? shift * p.y(i) : 0.0);
  }
  return p;
}

}  // namespace

TEST_CASE("two point hard margin") {
  BinaryProblem p;
  p.x.resize(2, 1);
  p.x << -2, 2;
  p.y.resize(2);
  p.y << -1, 1;
  const auto m = train(p, 1000.0);
  CHECK(m.w(0) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(std::abs(m.b) < 1e-3);
  CHECK(margin_width(m) == doctest::Approx(4.0).epsilon(1e-2));
  CHECK(m.diagnostics.converged);
}

TEST_CASE("hard margin limit on two point instances") {
  Rng rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 20; ++t) {
    BinaryProblem p;
    p.x.resize(2, 2);
    p.x << u(rng), u(rng), u(rng), u(rng);
    if ((p.x.row(0) - p.x.row(1)).norm() < 0.5) continue;
    p.y.resize(2);
    p.y << 1, -1;
    // Regularized bias: minimize |w|^2 + b^2 subject to a_i.v >= 1. Either
    // one constraint is active alone or both are (minimum-norm solution).
    Matrix a(2, 3);
    a << p.x(0, 0), p.x(0, 1), 1, -p.x(1, 0), -p.x(1, 1), -1;
    Vector v = a.transpose() * (a * a.transpose()).ldlt().solve(Vector::Ones(2));
    for (Index k = 0; k < 2; ++k) {
      const Vector single = a.row(k).transpose() / a.row(k).squaredNorm();
      if (a.row(1 - k).dot(single) >= 1.0 && single.norm() < v.norm()) v = single;
    }
    const double expected = 2.0 / v.head(2).norm();
    SolverConfig cfg;
    cfg.tolerance = 1e-8;
    const auto m = train(p, 1e6, cfg);
    CHECK(margin_width(m) == doctest::Approx(expected).epsilon(1e-2));
  }
}

TEST_CASE("separable clusters reach zero hinge") {
  const auto p = random_problem(100, 2, 5.0, 1);
  const auto m = train(p, 1e4);
  CHECK(m.diagnostics.train_hinge < 1e-3);
}

TEST_CASE("xor is not separable") {
  BinaryProblem p;
  p.x.resize(4, 2);
  p.x << 1, 1, -1, -1, 1, -1, -1, 1;
  p.y.resize(4);
  p.y << 1, 1, -1, -1;
  for (double c : {0.01, 1.0, 100.0}) {
    const auto m = train(p, c);
    CHECK(m.diagnostics.converged);
    CHECK(m.diagnostics.train_hinge > 0.0);
  }
}

TEST_CASE("argument errors") {
  auto p = random_problem(10, 2, 1.0, 2);
  CHECK_THROWS_AS(train(p, 0.0), InvalidArgument);
  CHECK_THROWS_AS(train(p, -1.0), InvalidArgument);
  SolverConfig bad;
  bad.max_epochs = 0;
  CHECK_THROWS_AS(train(p, 1.0, bad), InvalidArgument);
  bad = {};
  bad.tolerance = 0.0;
  CHECK_THROWS_AS(train(p, 1.0, bad), InvalidArgument);
  p.y.setOnes();
  CHECK_THROWS_AS(train(p, 1.0), SingleClassError);
}

TEST_CASE("hinge evaluation") {
  SvmModel m;
  m.w = Vector::Ones(1);
  m.b = 0.0;
  BinaryProblem p;
  p.x.resize(2, 1);
  p.x << 1, -1;
  p.y.resize(2);
  p.y << 1, 1;
  // first point sits on its margin (0), second has y f = -1 (2)
  CHECK(hinge_loss(m, p) == doctest::Approx(1.0));
  BinaryProblem wrong;
  wrong.x = Matrix::Ones(1, 3);
  wrong.y = Vector::Ones(1);
  CHECK_THROWS_AS(hinge_loss(m, wrong), DimensionMismatch);
  Vector s(2), y(3);
  CHECK_THROWS_AS(mean_hinge(s, y), DimensionMismatch);
}

TEST_CASE("prediction and tie break") {
  SvmModel m;
  m.w = Vector::Zero(2);
  m.w(0) = 1.0;
  m.b = 0.0;
  Vector x = Vector::Zero(2);
  CHECK(predict(m, x).label == 1);
  CHECK(predict(m, x).score == 0.0);
  x(0) = -0.1;
  CHECK(predict(m, x).label == -1);
  x(0) = 3.0;
  CHECK(predict(m, x).label == 1);
  CHECK_THROWS_AS(predict(m, Vector::Zero(3)), DimensionMismatch);
}

TEST_CASE("margin width") {
  SvmModel m;
  m.w = Vector::Zero(2);
  CHECK_THROWS_AS(margin_width(m), InvalidArgument);
  m.w << 1, 0;
  CHECK(margin_width(m) == 2.0);
  m.w << 3, 4;
  CHECK(margin_width(m) == doctest::Approx(0.4));
}

TEST_CASE("primal agrees with the smoothed newton reference") {
  Rng rng(77);
  for (int t = 0; t < 15; ++t) {
    const auto n = static_cast<Index>(20 + uniform_index(rng, 180));
    const auto psi = static_cast<Index>(1 + uniform_index(rng, 5));
    const double c = std::pow(10.0, -2.0 + 4.0 * static_cast<double>(uniform_index(rng, 1000)) / 1000.0);
    const auto p = random_problem(n, psi, 0.8, rng());
    SolverConfig cfg;
    cfg.tolerance = 1e-6;
    cfg.max_epochs = 20000;
    const auto r = train_detailed(p.x, p.y, c, cfg);
    const Vector v = oracle::smoothed_newton_svm(p.x, p.y, c);
    const double ref = oracle::primal(v.head(psi), v(psi), c, p.x, p.y);
    const double got = oracle::primal(r.model.w, r.model.b, c, p.x, p.y);
    CHECK(std::abs(got - ref) <= 1e-3 * ref);
    CHECK(r.model.diagnostics.primal_objective == doctest::Approx(got).epsilon(1e-12));

    // predictions agree with the reference
    int agree = 0;
    for (Index i = 0; i < n; ++i) {
      const double f1 = p.x.row(i).dot(r.model.w) + r.model.b;
      const double f2 = p.x.row(i).dot(v.head(psi)) + v(psi);
      agree += (f1 >= 0) == (f2 >= 0);
    }
    CHECK(static_cast<double>(agree) >= 0.99 * static_cast<double>(n) - 1.0);
  }
}

TEST_CASE("kkt certificate") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = random_problem(150, 3, 0.7, seed);
    const double c = 0.1 * static_cast<double>(seed + 1);
    SolverConfig cfg;
    const auto r = train_detailed(p.x, p.y, c, cfg);
    REQUIRE(r.model.diagnostics.converged);
    const double tol = cfg.tolerance;
    for (Index i = 0; i < p.x.rows(); ++i) {
      const double yf = p.y(i) * (p.x.row(i).dot(r.model.w) + r.model.b);
      const double a = r.alpha(i);
      if (a == 0.0) CHECK(yf >= 1.0 - tol);
      else if (a == c) CHECK(yf <= 1.0 + tol);
      else CHECK(std::abs(yf - 1.0) <= tol);
      CHECK(a >= 0.0);
      CHECK(a <= c);
    }
    CHECK(r.model.diagnostics.max_kkt_violation <= tol);
  }
}

TEST_CASE("converged means the final iterate passes the kkt check") {
  Rng rng(12);
  int converged = 0;
  for (int t = 0; t < 40; ++t) {
    const auto n = static_cast<Index>(20 + uniform_index(rng, 150));
    const double c = std::pow(10.0, -2.0 + 5.0 * static_cast<double>(uniform_index(rng, 1000)) / 1000.0);
    const auto p = random_problem(n, 3, 0.5, rng());
    SolverConfig cfg;
    cfg.max_epochs = 200000;
    const auto r = train_detailed(p.x, p.y, c, cfg);
    double kkt = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double g = p.y(i) * (p.x.row(i).dot(r.model.w) + r.model.b) - 1.0;
      const double a = r.alpha(i);
      kkt = std::max(kkt, std::abs(a <= 0.0 ? std::min(g, 0.0) : a >= c ? std::max(g, 0.0) : g));
    }
    CHECK(r.model.diagnostics.max_kkt_violation == doctest::Approx(kkt).epsilon(1e-9));
    if (r.model.diagnostics.converged) CHECK(kkt <= cfg.tolerance);
    // stopping short of max_epochs only happens on convergence
    if (r.model.diagnostics.iterations < cfg.max_epochs) CHECK(r.model.diagnostics.converged);
    converged += r.model.diagnostics.converged;
  }
  CHECK(converged == 40);
}

TEST_CASE("shrinking reaches the same optimum as the full sweep") {
  Rng rng(45);
  int checked = 0;
  for (int t = 0; t < 150; ++t) {
    const auto n = static_cast<Index>(20 + uniform_index(rng, 180));
    const auto psi = static_cast<Index>(1 + uniform_index(rng, 8));
    const double c = std::pow(10.0, 3.0 * static_cast<double>(uniform_index(rng, 1000)) / 1000.0);
    const auto p = random_problem(n, psi, 0.25 * static_cast<double>(uniform_index(rng, 5)), rng());
    SolverConfig on, off;
    on.max_epochs = off.max_epochs = 200000;
    on.tolerance = off.tolerance = 1e-6;
    off.shrinking = false;
    const auto b = train_detailed(p.x, p.y, c, off);
    if (!b.model.diagnostics.converged) continue;
    ++checked;
    const auto a = train_detailed(p.x, p.y, c, on);
    CHECK(a.model.diagnostics.converged);
    CHECK(a.model.diagnostics.primal_objective ==
          doctest::Approx(b.model.diagnostics.primal_objective).epsilon(1e-5));
  }
  CHECK(checked >= 100);
}

TEST_CASE("dual objective is non-decreasing per epoch") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = random_problem(200, 4, 0.3, 100 + seed);
    for (bool shrink : {true, false}) {
      SolverConfig cfg;
      cfg.track_objective = true;
      cfg.shrinking = shrink;
      cfg.tolerance = 1e-7;
      const auto r = train_detailed(p.x, p.y, 5.0, cfg);
      REQUIRE(r.dual_trace.size() >= 2);
      for (std::size_t k = 1; k < r.dual_trace.size(); ++k)
        CHECK(r.dual_trace[k] >= r.dual_trace[k - 1] - 1e-9 * std::abs(r.dual_trace[k - 1]));
      CHECK(r.model.diagnostics.dual_objective <= r.model.diagnostics.primal_objective + 1e-9);
    }
  }
}

TEST_CASE("determinism") {
  const auto p = random_problem(120, 3, 0.5, 9);
  SolverConfig cfg;
  cfg.seed = 42;
  const auto a = train(p, 3.0, cfg);
  const auto b = train(p, 3.0, cfg);
  CHECK(a.w == b.w);
  CHECK(a.b == b.b);
  CHECK(a.diagnostics.iterations == b.diagnostics.iterations);
}

TEST_CASE("hinge is bounded by the slack term") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto p = random_problem(40 + static_cast<Index>(seed), 2, 0.5, 500 + seed);
    const double c = 0.05 * static_cast<double>(seed + 1);
    const auto m = train(p, c);
    const double n = static_cast<double>(p.x.rows());
    const double slack = m.diagnostics.primal_objective - 0.5 * (m.w.squaredNorm() + m.b * m.b);
    CHECK(c * n * hinge_loss(m, p) <= slack + 1e-6);
    CHECK(hinge_loss(m, p) >= 0.0);
  }
}

TEST_CASE("warm start reaches the same optimum") {
  const auto p = random_problem(200, 3, 0.4, 31);
  SolverConfig cfg;
  cfg.tolerance = 1e-6;
  const auto cold = train_detailed(p.x, p.y, 2.0, cfg);
  const auto first = train_detailed(p.x, p.y, 1.0, cfg);
  const auto warm = train_detailed(p.x, p.y, 2.0, cfg, &first.alpha);
  CHECK(warm.model.diagnostics.primal_objective ==
        doctest::Approx(cold.model.diagnostics.primal_objective).epsilon(1e-4));
}

TEST_CASE("train counter counts calls") {
  const auto p = random_problem(20, 2, 1.0, 3);
  const auto before = train_call_count();
  for (int i = 0; i < 3; ++i) train(p, 1.0);
  CHECK(train_call_count() - before == 3);
}
