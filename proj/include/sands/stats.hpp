#pragma once

#include "sands/common.hpp"
#include "sands/dataset.hpp"
#include "sands/kernel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sands {

inline constexpr double kDefaultAlpha = 6.0;
inline constexpr double kIncreasingThresholdDb = 0.0;
inline constexpr double kKernelThresholdDb = -5.0;

enum class SpreadMode { pooled, directional };

enum class Verdict {
  LinearIncreasing,  // S&S > 0
  LinearDecreasing,  // -5 < S&S <= 0
  KernelRequired,    // S&S <= -5
};

std::string to_string(SpreadMode m);
std::string to_string(Verdict v);
SpreadMode parse_spread_mode(const std::string& s);
Verdict verdict_for(double ratio_db);

// Center and spread of one class.
//   spread             sqrt(mean_j var_j), per-dimension sample variances (n-1)
//   directional_spread sample std of the projections onto a unit direction;
//                      equals spread when no direction is given
struct ClassGeometry {
  Vector mean;
  Index count = 0;
  double spread = 0.0;
  double directional_spread = 0.0;
};

ClassGeometry class_geometry(const Matrix& rows);
ClassGeometry class_geometry(const Matrix& rows, const Vector& unit_direction);
ClassGeometry class_geometry(const Dataset& d, int class_id);

double separability(const ClassGeometry& g1, const ClassGeometry& g2);

// sqrt((n1 s1^2 + n2 s2^2) / (n1 + n2)) with s = spread or directional_spread.
double pooled_scatteredness(const ClassGeometry& g1, const ClassGeometry& g2, SpreadMode mode);
double pooled_sigma(double s1, Index n1, double s2, Index n2);

struct SAndSReport {
  double d = 0.0;
  double sigma = 0.0;
  double ratio_db = 0.0;
  double alpha = kDefaultAlpha;
  SpreadMode mode = SpreadMode::directional;
  Verdict verdict = Verdict::KernelRequired;
};

// 20 log10(d / (alpha sigma)); d = 0 gives -inf.
SAndSReport sands_ratio(double d, double sigma, double alpha = kDefaultAlpha,
                        SpreadMode mode = SpreadMode::directional);

struct PairSands {
  int class_a = 0;
  int class_b = 0;
  SAndSReport report;
};

struct PairwiseOptions {
  double alpha = kDefaultAlpha;
  SpreadMode mode = SpreadMode::directional;
  // When > 0, a pooled sigma below this is raised to it and the pair is
  // listed in `floored`; when 0, a zero sigma is an error.
  double sigma_floor = 0.0;
};

struct PairwiseSands {
  std::vector<PairSands> pairs;  // (0,1), (0,2), ..., (r-2,r-1)
  std::vector<std::pair<int, int>> floored;
};

// Geometry of the two classes measured on their own rows, with the
// center-line direction used for directional mode.
SAndSReport pair_sands(const Matrix& rows_a, const Matrix& rows_b, const PairwiseOptions& opts = {},
                       bool* floored = nullptr);

PairwiseSands pairwise_sands(const Dataset& d, const FeatureMap* map = nullptr, const PairwiseOptions& opts = {});
// Same, on rows already mapped to feature space.
PairwiseSands pairwise_sands(const Matrix& rows, const std::vector<int>& labels, int num_classes,
                             const PairwiseOptions& opts = {});

}  // namespace sands
