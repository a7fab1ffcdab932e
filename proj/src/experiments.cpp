#include "sands/experiments.hpp"

#include "sands/error.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <array>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace sands {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g;
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < count; ++i) g.push_back(std::pow(10.0, a + (b - a) * i / (count - 1)));
  return g;
}

struct ExpProblem {
  const std::vector<double>* x;
  const std::vector<double>* y;
  double sign;
};

double sse(const ExponentialFit& f, const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = f(x[i]) - y[i];
    s += r * r;
  }
  return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

// params: (ln|a|, b, c)
double nm_objective(const gsl_vector* v, void* params) {
  const auto* p = static_cast<const ExpProblem*>(params);
  const ExponentialFit f{p->sign * std::exp(gsl_vector_get(v, 0)), gsl_vector_get(v, 1), gsl_vector_get(v, 2)};
  return sse(f, *p->x, *p->y);
}

std::optional<ExponentialFit> nelder_mead(const ExponentialFit& start, double scale, const std::vector<double>& x,
                                          const std::vector<double>& y) {
  gsl_set_error_handler_off();
  ExpProblem prob{&x, &y, start.a < 0.0 ? -1.0 : 1.0};
  gsl_multimin_function fn{&nm_objective, 3, &prob};
  gsl_vector* v = gsl_vector_alloc(3);
  gsl_vector* step = gsl_vector_alloc(3);
  gsl_vector_set(v, 0, std::log(std::abs(start.a)));
  gsl_vector_set(v, 1, start.b);
  gsl_vector_set(v, 2, start.c);
  gsl_vector_set(step, 0, 0.05);
  gsl_vector_set(step, 1, 0.05 * (std::abs(start.b) + 1.0));
  gsl_vector_set(step, 2, 0.05 * scale);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);
  gsl_multimin_fminimizer_set(s, &fn, v, step);
  int status = GSL_CONTINUE;
  for (int it = 0; it < 20000 && status == GSL_CONTINUE; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-13);
  }
  const gsl_vector* best = gsl_multimin_fminimizer_x(s);
  std::optional<ExponentialFit> out;
  const ExponentialFit f{prob.sign * std::exp(gsl_vector_get(best, 0)), gsl_vector_get(best, 1),
                         gsl_vector_get(best, 2)};
  if (std::isfinite(f.a) && std::isfinite(f.b) && std::isfinite(f.c)) out = f;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(v);
  return out;
}

}  // namespace

void GaussianPairSpec::validate() const {
  if (mu1.size() == 0 || mu1.size() != mu2.size()) throw DimensionMismatch("gaussian pair: means differ in dimension");
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw InvalidArgument("gaussian pair: sigmas must be > 0");
  if (n1 < 2 || n2 < 2) throw InvalidArgument("gaussian pair: class sizes must be >= 2");
}

GaussianPairSpec GaussianPairSpec::planar(double d, double sigma1, double sigma2, Index n1, Index n2,
                                          std::uint64_t seed) {
  GaussianPairSpec s;
  s.mu1 = Vector::Zero(2);
  s.mu2 = Vector::Zero(2);
  s.mu2(0) = d;
  s.sigma1 = sigma1;
  s.sigma2 = sigma2;
  s.n1 = n1;
  s.n2 = n2;
  s.seed = seed;
  return s;
}

Dataset gen_gaussian_pair(const GaussianPairSpec& spec) {
  spec.validate();
  const Index psi = spec.mu1.size();
  Dataset d;
  d.features.resize(spec.n1 + spec.n2, psi);
  d.labels.resize(static_cast<std::size_t>(spec.n1 + spec.n2));
  Rng rng = make_rng(spec.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  for (Index i = 0; i < spec.n1 + spec.n2; ++i) {
    const bool first = i < spec.n1;
    const Vector& mu = first ? spec.mu1 : spec.mu2;
    const double s = first ? spec.sigma1 : spec.sigma2;
    for (Index j = 0; j < psi; ++j) d.features(i, j) = mu(j) + s * z(rng);
    d.labels[static_cast<std::size_t>(i)] = first ? 0 : 1;
  }
  d.class_names = {{0, "+1"}, {1, "-1"}};
  d.meta.source = "gaussian_pair";
  return d;
}

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::margin_width: return "margin_width";
    case Quantity::train_hinge: return "train_hinge";
    case Quantity::test_hinge: return "test_hinge";
  }
  return "?";
}

Quantity parse_quantity(const std::string& s) {
  if (s == "margin_width") return Quantity::margin_width;
  if (s == "train_hinge") return Quantity::train_hinge;
  if (s == "test_hinge") return Quantity::test_hinge;
  throw InvalidArgument("unknown quantity '" + s + "'");
}

std::vector<double> desk_c_grid() { return log_grid(0.1, 1000.0, 25); }

std::vector<SweepResult> sweep_all(const GaussianPairSpec& spec, const std::vector<Quantity>& quantities,
                                   const SweepOptions& opts, const SolverConfig& solver) {
  spec.validate();
  if (opts.runs < 1) throw InvalidArgument("sweep: runs must be >= 1");
  if (opts.c_grid.empty()) throw InvalidArgument("sweep: C grid is empty");
  std::vector<double> cs = opts.c_grid;
  std::sort(cs.begin(), cs.end());
  const auto nc = cs.size();
  const auto runs = static_cast<std::size_t>(opts.runs);
  const double dist = (spec.mu2 - spec.mu1).norm();
  if (!(dist > 0.0)) throw InvalidArgument("sweep: class centers coincide");
  // [run][ci] -> (margin width, train hinge, test hinge)
  std::vector<std::array<double, 3>> cell(runs * nc, {kNaN, kNaN, kNaN});

  parallel_for(runs, opts.jobs, [&](std::size_t run) {
    GaussianPairSpec s = spec;
    s.seed = derive_seed(spec.seed, run, 0x9a55ULL);
    Dataset data = gen_gaussian_pair(s);
    // Normalized coordinates: midpoint of the true centers at the origin, d = 1.
    const Vector mid = 0.5 * (spec.mu1 + spec.mu2);
    data.features.rowwise() -= mid.transpose();
    data.features /= dist;
    const auto [tr, te] = split(data, {opts.train_fraction, true, derive_seed(spec.seed, run, 0x5b1ULL)});
    const auto ptr = binary_problem(tr, 0, 1);
    const auto pte = binary_problem(te, 0, 1);
    SolverConfig sc = solver;
    sc.seed = derive_seed(solver.seed, run);
    Vector warm;
    for (std::size_t ci = 0; ci < nc; ++ci) {
      try {
        auto res = train_detailed(ptr.x, ptr.y, cs[ci], sc, warm.size() ? &warm : nullptr);
        warm = res.alpha;
        const auto& m = res.model;
        const Vector scores = (pte.x * m.w).array() + m.b;
        cell[run * nc + ci] = {m.diagnostics.margin_width, m.diagnostics.train_hinge, mean_hinge(scores, pte.y)};
      } catch (const Error&) {
        warm = Vector();
      }
    }
  });

  std::vector<SweepResult> out;
  for (auto q : quantities) {
    const auto slot = static_cast<std::size_t>(q);
    SweepResult r;
    r.quantity = q;
    r.runs = opts.runs;
    r.c_values = cs;
    for (std::size_t ci = 0; ci < nc; ++ci) {
      double sum = 0.0;
      int ok = 0;
      for (std::size_t run = 0; run < runs; ++run) {
        const double v = cell[run * nc + ci][slot];
        if (std::isnan(v)) continue;
        sum += v;
        ++ok;
      }
      const double mean = ok ? sum / ok : kNaN;
      double ss = 0.0;
      for (std::size_t run = 0; run < runs; ++run) {
        const double v = cell[run * nc + ci][slot];
        if (!std::isnan(v)) ss += (v - mean) * (v - mean);
      }
      r.mean_curve.push_back(mean);
      r.std_curve.push_back(ok > 1 ? std::sqrt(ss / (ok - 1)) : 0.0);
      r.failures.push_back(opts.runs - ok);
    }
    out.push_back(std::move(r));
  }
  return out;
}

SweepResult sweep(const GaussianPairSpec& spec, Quantity quantity, const SweepOptions& opts,
                  const SolverConfig& solver) {
  return sweep_all(spec, {quantity}, opts, solver).front();
}

std::size_t argmin_index(const std::vector<double>& v) {
  if (v.empty()) throw InvalidArgument("argmin of an empty curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::isnan(v[best]) || v[i] < v[best]) best = i;
  }
  return best;
}

std::vector<EmpiricalCopt> empirical_copt_table(const std::vector<double>& grid, const CoptTableOptions& opts,
                                                const SolverConfig& solver) {
  if (!(opts.d > 0.0)) throw InvalidArgument("copt table: d must be > 0");
  std::vector<EmpiricalCopt> rows;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double s = grid[k];
    if (!(s > 0.0 && s <= 0.35)) throw InvalidArgument("sigma/d grid values must lie in (0, 0.35]");
    const auto spec = GaussianPairSpec::planar(opts.d, s * opts.d, s * opts.d, opts.n_per_class, opts.n_per_class,
                                               derive_seed(opts.seed, k));
    EmpiricalCopt row;
    row.sigma_over_d = s;
    row.curve = sweep(spec, Quantity::test_hinge, opts.sweep, solver);
    const auto i = argmin_index(row.curve.mean_curve);
    row.c_opt = row.curve.c_values[i];
    row.min_hinge = row.curve.mean_curve[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

ExponentialFitResult fit_exponential(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionMismatch("fit: x and y differ in length");
  if (x.size() < 4) throw InvalidArgument("fit: at least 4 points are required");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidArgument("fit: points must be finite");
    if (i > 0 && !(x[i] > x[i - 1])) throw InvalidArgument("fit: x must be strictly increasing");
  }
  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  const double ymin = *ymin_it, ymax = *ymax_it;
  const double scale = ymax > ymin ? ymax - ymin : std::max(std::abs(ymin), 1.0);

  std::vector<double> z(x.size());
  ExponentialFit best{0.0, 0.0, 0.0};
  double best_sse = std::numeric_limits<double>::infinity();
  for (double sign : {1.0, -1.0}) {
    for (int t = 0; t <= 800; ++t) {
      const double gap = scale * std::pow(10.0, -6.0 + 8.0 * t / 800.0);
      const double c = sign > 0 ? ymin - gap : ymax + gap;
      bool ok = true;
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double v = sign * (y[i] - c);
        if (!(v > 0.0)) {
          ok = false;
          break;
        }
        z[i] = std::log(v);
      }
      if (!ok) continue;
      const double b = ols_slope(x, z);
      double zbar = 0.0, xbar = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        zbar += z[i];
        xbar += x[i];
      }
      zbar /= static_cast<double>(x.size());
      xbar /= static_cast<double>(x.size());
      const ExponentialFit f{sign * std::exp(zbar - b * xbar), b, c};
      const double e = sse(f, x, y);
      if (e < best_sse) {
        best_sse = e;
        best = f;
      }
    }
  }
  if (!std::isfinite(best_sse)) throw FitFailed("fit: no offset in the bracket keeps y - c of one sign");

  if (auto polished = nelder_mead(best, scale, x, y)) {
    const double e = sse(*polished, x, y);
    if (e < best_sse) {
      best_sse = e;
      best = *polished;
    }
  }
  return {best, std::sqrt(best_sse / static_cast<double>(x.size()))};
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope needs >= 2 paired points");
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xbar += x[i];
    ybar += y[i];
  }
  xbar /= static_cast<double>(x.size());
  ybar /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - xbar) * (y[i] - ybar);
    sxx += (x[i] - xbar) * (x[i] - xbar);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("slope: x values are all equal");
  return sxy / sxx;
}

VarianceScaling variance_scaling(double d, double sigma, const std::vector<Index>& ns, double c, int runs,
                                 std::uint64_t seed, std::size_t jobs, const SolverConfig& solver) {
  VarianceScaling out;
  std::vector<double> lx, ly;
  for (Index n : ns) {
    const auto spec = GaussianPairSpec::planar(d, sigma, sigma, n, n, derive_seed(seed, static_cast<std::uint64_t>(n)));
    SweepOptions so;
    so.runs = runs;
    so.c_grid = {c};
    so.jobs = jobs;
    const auto r = sweep(spec, Quantity::test_hinge, so, solver);
    const double var = r.std_curve[0] * r.std_curve[0];
    out.points.push_back({n, var});
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(var));
  }
  if (ns.size() >= 2) out.slope = ols_slope(lx, ly);
  return out;
}

std::string describe(const std::optional<KernelSpec>& k) { return k ? k->describe() : "linear"; }

std::vector<BenchRow> benchmark_compare(const std::vector<NamedDataset>& datasets, const BenchOptions& opts,
                                        const SolverConfig& solver) {
  std::vector<BenchRow> rows;
  for (std::size_t k = 0; k < datasets.size(); ++k) {
    const auto& nd = datasets[k];
    BenchRow row;
    row.dataset = nd.name;
    try {
      const Dataset& data = nd.data;
      data.validate();
      row.n = data.size();
      row.psi = data.dims();
      row.classes = data.num_classes();
      const auto [train, test] = split(data, opts.split);
      const KernelGrid grid = opts.grid ? *opts.grid : default_kernel_grid(data.dims(), opts.split.seed);

      CvConfig cv = opts.cv;
      if (cv.kernel_grid.candidates.empty()) cv.kernel_grid = grid;
      row.cv_combinations = cv_candidates(cv).size() * cv.c_grid.size() * static_cast<std::size_t>(cv.folds);

      for (CvScore score : {CvScore::f1, CvScore::hinge}) {
        cv.score = score;
        const auto t0 = Clock::now();
        const auto res = grid_search_cv(train, cv, solver);
        const auto model = fit_cv_best(train, cv, res, solver);
        const auto pred = model.predict(test.features);
        const double secs = seconds_since(t0);
        const double f1 = f1_score(pred, test.labels, data.num_classes());
        const std::string choice = describe(res.best_candidate().kernel) + " C=" + std::to_string(res.best_cell().c);
        if (score == CvScore::f1) {
          row.f1_cv_f1 = f1;
          row.seconds_cv_f1 = secs;
          row.cv_fits = res.fit_count;
          row.cv_f1_choice = choice;
        } else {
          row.f1_cv_hinge = f1;
          row.seconds_cv_hinge = secs;
          row.cv_hinge_choice = choice;
        }
      }

      const auto t0 = Clock::now();
      const auto pr = fit_pipeline(train, grid, opts.pipeline, solver);
      const auto pred = pr.model.predict(test.features);
      row.seconds_sandsrb = seconds_since(t0);
      row.f1_sandsrb = f1_score(pred, test.labels, data.num_classes());
      row.sandsrb_fits = pr.svm_fits;
      const auto& rep = pr.report;
      row.d = rep.input_min->report.d;
      row.sigma = rep.input_min->report.sigma;
      row.sands_min_db = rep.input_min->report.ratio_db;
      row.sandsrb_choice = describe(rep.chosen->kernel);
      row.sandsrb_c = rep.chosen->c;
      row.sandsrb_fallback = rep.chosen->fallback;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepResult>& curves) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "quantity,c,mean,std,runs,failures\n";
  for (const auto& r : curves) {
    for (std::size_t i = 0; i < r.c_values.size(); ++i) {
      out << to_string(r.quantity) << "," << r.c_values[i] << "," << r.mean_curve[i] << "," << r.std_curve[i] << ","
          << r.runs << "," << r.failures[i] << "\n";
    }
  }
  return out.str();
}

std::string empirical_copt_csv(const std::vector<EmpiricalCopt>& rows) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "sigma_over_d,ratio_db,c_opt,min_test_hinge\n";
  for (const auto& r : rows) {
    out << r.sigma_over_d << "," << ratio_db_for_sigma_over_d(r.sigma_over_d) << "," << r.c_opt << "," << r.min_hinge
        << "\n";
  }
  return out.str();
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "dataset,n,psi,classes,f1_cv_f1,f1_cv_hinge,f1_sandsrb,seconds_cv_f1,seconds_cv_hinge,seconds_sandsrb,"
         "cv_combinations,cv_fits,sandsrb_fits,d,sigma,sands_min_db,sandsrb_choice,sandsrb_c,sandsrb_fallback,"
         "cv_f1_choice,cv_hinge_choice,error\n";
  for (const auto& r : rows) {
    out << csv_field(r.dataset) << "," << r.n << "," << r.psi << "," << r.classes << "," << r.f1_cv_f1 << ","
        << r.f1_cv_hinge << "," << r.f1_sandsrb << "," << r.seconds_cv_f1 << "," << r.seconds_cv_hinge << ","
        << r.seconds_sandsrb << "," << r.cv_combinations << "," << r.cv_fits << "," << r.sandsrb_fits << "," << r.d
        << "," << r.sigma << "," << r.sands_min_db << "," << csv_field(r.sandsrb_choice) << "," << r.sandsrb_c << ","
        << (r.sandsrb_fallback ? "true" : "false") << "," << csv_field(r.cv_f1_choice) << ","
        << csv_field(r.cv_hinge_choice) << "," << csv_field(r.error) << "\n";
  }
  return out.str();
}

}  // namespace sands
