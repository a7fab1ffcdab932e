#pragma once

#include "sands/stats.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sands {

// Exponential fits of the hinge-optimal C against sigma/d (d normalized to 1):
//   increasing branch, S&S > 0:       a e^(b s) + c with (0.7345, 33.6915, -0.5247)
//   decreasing branch, -5 < S&S <= 0: (5164.4657, -21.2514, -0.8548)
struct ExponentialFit {
  double a;
  double b;
  double c;
  double operator()(double x) const;
};

inline constexpr ExponentialFit kIncreasingFit{0.7345, 33.6915, -0.5247};
inline constexpr ExponentialFit kDecreasingFit{5164.4657, -21.2514, -0.8548};
inline constexpr double kMinC = 0.01;

enum class CoptBranch { Increasing, Decreasing, KernelRequired };

std::string to_string(CoptBranch b);
CoptBranch branch_for(double ratio_db);

struct CoptDecision {
  std::optional<double> c_opt;  // absent on KernelRequired
  CoptBranch branch = CoptBranch::KernelRequired;
  double input_ratio_db = 0.0;
  double sigma_over_d = 0.0;

  bool kernel_required() const { return branch == CoptBranch::KernelRequired; }
};

// sigma/d recovered from the ratio. KernelRequired is returned, not thrown;
// the caller routes it to kernel selection. Throws AlphaMismatch unless
// r.alpha == 6, the normalization the fits were made under.
CoptDecision c_opt_from_sands(const SAndSReport& r);

double ratio_db_for_sigma_over_d(double sigma_over_d, double alpha = kDefaultAlpha);
double sigma_over_d_for_ratio_db(double ratio_db, double alpha = kDefaultAlpha);

struct CoptRow {
  double sigma_over_d;
  double ratio_db;
  std::optional<double> c_opt;
  CoptBranch branch;
};

// Grid values must lie in (0, 0.35].
std::vector<CoptRow> c_opt_table(const std::vector<double>& sigma_over_d_grid);

// Header sigma_over_d,ratio_db,c_opt,branch; c_opt empty on KernelRequired rows.
std::string c_opt_table_csv(const std::vector<CoptRow>& rows);

}  // namespace sands
