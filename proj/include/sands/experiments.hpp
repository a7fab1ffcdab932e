#pragma once

#include "sands/copt.hpp"
#include "sands/cv.hpp"
#include "sands/dataset.hpp"
#include "sands/select.hpp"
#include "sands/svm.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sands {

// Two isotropic Gaussian classes. Class 0 (the +1 side) is drawn around mu1.
struct GaussianPairSpec {
  Vector mu1;
  Vector mu2;
  double sigma1 = 0.1;
  double sigma2 = 0.1;
  Index n1 = 1000;
  Index n2 = 1000;
  std::uint64_t seed = 0;

  void validate() const;
  // mu1 = (0, 0), mu2 = (d, 0).
  static GaussianPairSpec planar(double d, double sigma1, double sigma2, Index n1, Index n2, std::uint64_t seed = 0);
};

Dataset gen_gaussian_pair(const GaussianPairSpec& spec);

enum class Quantity { margin_width, train_hinge, test_hinge };
std::string to_string(Quantity q);
Quantity parse_quantity(const std::string& s);

// 25 log-spaced values over [0.1, 1000].
std::vector<double> desk_c_grid();

struct SweepOptions {
  int runs = 100;
  std::vector<double> c_grid = desk_c_grid();
  double train_fraction = 0.7;
  std::size_t jobs = 1;
};

struct SweepResult {
  Quantity quantity = Quantity::test_hinge;
  int runs = 0;
  std::vector<double> c_values;  // ascending
  std::vector<double> mean_curve;
  std::vector<double> std_curve;  // sample std across runs (0 when runs == 1)
  std::vector<int> failures;      // runs that threw, per C
};

// Solver settings for the Monte Carlo curves: the library default of 1000
// epochs leaves large-C fits on overlapping classes short of the 1e-4 KKT
// tolerance, which shifts the hinge curves near their minimum.
inline SolverConfig monte_carlo_solver() {
  SolverConfig s;
  s.max_epochs = 200000;
  return s;
}

// Fresh sample per run (seed derived from spec.seed and the run index),
// stratified 70/30 split, one warm-started fit per C in ascending order.
// Fits run on x' = (x - (mu1 + mu2)/2) / |mu2 - mu1|, so C is read in units
// where d = 1 and the bias is centered.
SweepResult sweep(const GaussianPairSpec& spec, Quantity quantity, const SweepOptions& opts = {},
                  const SolverConfig& solver = monte_carlo_solver());
// All quantities from the same fits.
std::vector<SweepResult> sweep_all(const GaussianPairSpec& spec, const std::vector<Quantity>& quantities,
                                   const SweepOptions& opts = {}, const SolverConfig& solver = monte_carlo_solver());

// Index of the smallest mean; ties go to the smaller C.
std::size_t argmin_index(const std::vector<double>& v);

struct EmpiricalCopt {
  double sigma_over_d = 0.0;
  double c_opt = 0.0;       // argmin of the mean test hinge
  double min_hinge = 0.0;
  SweepResult curve;
};

struct CoptTableOptions {
  double d = 1.0;
  Index n_per_class = 1000;
  std::uint64_t seed = 0;
  SweepOptions sweep;
};

// sigma/d values must lie in (0, 0.35]; sigma1 = sigma2 = (sigma/d) * d.
std::vector<EmpiricalCopt> empirical_copt_table(const std::vector<double>& sigma_over_d_grid,
                                                const CoptTableOptions& opts = {}, const SolverConfig& solver = monte_carlo_solver());

struct ExponentialFitResult {
  ExponentialFit fit{0.0, 0.0, 0.0};
  double rmse = 0.0;
};

// Least squares y = a e^(b x) + c. c is scanned over a bracket below min(y)
// (a > 0) and above max(y) (a < 0); for each c, (ln|a|, b) come from linear
// regression on ln|y - c|; the best triple is then polished with Nelder-Mead.
// Needs >= 4 points with strictly increasing x. Constant y returns b = 0 and
// rmse = 0.
ExponentialFitResult fit_exponential(const std::vector<double>& x, const std::vector<double>& y);

struct VariancePoint {
  Index n = 0;
  double variance = 0.0;
};

struct VarianceScaling {
  std::vector<VariancePoint> points;
  double slope = 0.0;  // of log var against log n
};

// var(mean test hinge) across runs at a fixed C, for each per-class size n.
VarianceScaling variance_scaling(double d, double sigma, const std::vector<Index>& ns, double c, int runs,
                                 std::uint64_t seed = 0, std::size_t jobs = 1, const SolverConfig& solver = monte_carlo_solver());

// Least-squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

struct NamedDataset {
  std::string name;
  Dataset data;
};

struct BenchOptions {
  SplitSpec split;                  // 70/30, stratified
  std::optional<KernelGrid> grid;   // default_kernel_grid(psi, split.seed) when absent
  CvConfig cv;                      // kernel_grid filled from `grid` when empty
  PipelineOptions pipeline{{}, 512, true, NoKernelPolicy::best_candidate};
};

struct BenchRow {
  std::string dataset;
  Index n = 0;
  Index psi = 0;
  int classes = 0;
  double f1_cv_f1 = 0.0;
  double f1_cv_hinge = 0.0;
  double f1_sandsrb = 0.0;
  double seconds_cv_f1 = 0.0;
  double seconds_cv_hinge = 0.0;
  double seconds_sandsrb = 0.0;
  std::size_t cv_combinations = 0;  // candidates x |C grid| x folds
  std::size_t cv_fits = 0;
  std::size_t sandsrb_fits = 0;
  double d = 0.0;                   // input-space min pair
  double sigma = 0.0;
  double sands_min_db = 0.0;
  std::string sandsrb_choice;
  double sandsrb_c = 0.0;
  bool sandsrb_fallback = false;
  std::string cv_f1_choice;
  std::string cv_hinge_choice;
  std::string error;  // non-empty when the dataset failed
};

std::vector<BenchRow> benchmark_compare(const std::vector<NamedDataset>& datasets, const BenchOptions& opts = {},
                                        const SolverConfig& solver = {});

// Tidy CSV layouts.
std::string sweep_csv(const std::vector<SweepResult>& curves);
std::string empirical_copt_csv(const std::vector<EmpiricalCopt>& rows);
std::string bench_csv(const std::vector<BenchRow>& rows);

std::string describe(const std::optional<KernelSpec>& k);

}  // namespace sands
