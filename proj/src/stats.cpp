#include "sands/stats.hpp"

#include "sands/error.hpp"

#include <cmath>
#include <limits>

namespace sands {

std::string to_string(SpreadMode m) { return m == SpreadMode::pooled ? "pooled" : "directional"; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::LinearIncreasing: return "LinearIncreasing";
    case Verdict::LinearDecreasing: return "LinearDecreasing";
    case Verdict::KernelRequired: return "KernelRequired";
  }
  return "?";
}

SpreadMode parse_spread_mode(const std::string& s) {
  if (s == "pooled") return SpreadMode::pooled;
  if (s == "directional") return SpreadMode::directional;
  throw InvalidArgument("unknown spread mode '" + s + "'");
}

Verdict verdict_for(double ratio_db) {
  if (ratio_db > kIncreasingThresholdDb) return Verdict::LinearIncreasing;
  if (ratio_db > kKernelThresholdDb) return Verdict::LinearDecreasing;
  return Verdict::KernelRequired;
}

ClassGeometry class_geometry(const Matrix& rows) {
  if (rows.rows() < 1) throw InvalidArgument("class_geometry needs at least one row");
  ClassGeometry g;
  g.count = rows.rows();
  g.mean = rows.colwise().mean().transpose();
  if (g.count > 1) {
    const Matrix centered = rows.rowwise() - g.mean.transpose();
    const double total_var = centered.squaredNorm() / static_cast<double>(g.count - 1);
    g.spread = std::sqrt(total_var / static_cast<double>(rows.cols()));
  }
  g.directional_spread = g.spread;
  return g;
}

ClassGeometry class_geometry(const Matrix& rows, const Vector& unit_direction) {
  ClassGeometry g = class_geometry(rows);
  if (unit_direction.size() != rows.cols()) {
    throw DimensionMismatch("projection direction has wrong dimension");
  }
  if (g.count > 1) {
    const Vector proj = rows * unit_direction;
    const double m = proj.mean();
    g.directional_spread = std::sqrt((proj.array() - m).square().sum() / static_cast<double>(g.count - 1));
  } else {
    g.directional_spread = 0.0;
  }
  return g;
}

ClassGeometry class_geometry(const Dataset& d, int class_id) {
  if (class_id < 0 || class_id >= d.num_classes()) {
    throw UnknownClass("class id " + std::to_string(class_id) + " not present");
  }
  const auto idx = d.rows_of(class_id);
  if (idx.empty()) throw UnknownClass("class id " + std::to_string(class_id) + " has no rows");
  Matrix rows(static_cast<Index>(idx.size()), d.dims());
  for (std::size_t i = 0; i < idx.size(); ++i) rows.row(static_cast<Index>(i)) = d.features.row(idx[i]);
  return class_geometry(rows);
}

double separability(const ClassGeometry& g1, const ClassGeometry& g2) {
  if (g1.mean.size() != g2.mean.size()) {
    throw DimensionMismatch("separability: class centers have different dimensions");
  }
  return (g1.mean - g2.mean).norm();
}

double pooled_sigma(double s1, Index n1, double s2, Index n2) {
  const auto a = static_cast<double>(n1);
  const auto b = static_cast<double>(n2);
  return std::sqrt((a * s1 * s1 + b * s2 * s2) / (a + b));
}

double pooled_scatteredness(const ClassGeometry& g1, const ClassGeometry& g2, SpreadMode mode) {
  if (g1.count + g2.count < 2) throw InvalidArgument("pooled scatteredness needs n1 + n2 >= 2");
  if (mode == SpreadMode::pooled) return pooled_sigma(g1.spread, g1.count, g2.spread, g2.count);
  return pooled_sigma(g1.directional_spread, g1.count, g2.directional_spread, g2.count);
}

SAndSReport sands_ratio(double d, double sigma, double alpha, SpreadMode mode) {
  if (!(d >= 0.0)) throw InvalidArgument("separability must be >= 0");
  if (!(sigma > 0.0)) throw InvalidArgument("scatteredness must be > 0 (degenerate zero-spread classes)");
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be > 0");
  SAndSReport r;
  r.d = d;
  r.sigma = sigma;
  r.alpha = alpha;
  r.mode = mode;
  r.ratio_db = d > 0.0 ? 20.0 * std::log10(d / (alpha * sigma)) : -std::numeric_limits<double>::infinity();
  r.verdict = verdict_for(r.ratio_db);
  return r;
}

SAndSReport pair_sands(const Matrix& rows_a, const Matrix& rows_b, const PairwiseOptions& opts, bool* floored) {
  if (rows_a.cols() != rows_b.cols()) throw DimensionMismatch("pair_sands: classes differ in dimension");
  ClassGeometry ga = class_geometry(rows_a);
  ClassGeometry gb = class_geometry(rows_b);
  const double d = separability(ga, gb);
  if (opts.mode == SpreadMode::directional && d > 0.0) {
    const Vector u = (ga.mean - gb.mean) / d;
    ga = class_geometry(rows_a, u);
    gb = class_geometry(rows_b, u);
  }
  double sigma = pooled_scatteredness(ga, gb, opts.mode);
  if (floored) *floored = false;
  if (opts.sigma_floor > 0.0 && !(sigma >= opts.sigma_floor)) {
    sigma = opts.sigma_floor;
    if (floored) *floored = true;
  }
  return sands_ratio(d, sigma, opts.alpha, opts.mode);
}

PairwiseSands pairwise_sands(const Matrix& rows, const std::vector<int>& labels, int num_classes,
                             const PairwiseOptions& opts) {
  if (num_classes < 2) throw SingleClassError("pairwise S&S needs at least 2 classes");
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) members.at(static_cast<std::size_t>(labels[i])).push_back(static_cast<Index>(i));

  std::vector<Matrix> blocks;
  for (int k = 0; k < num_classes; ++k) {
    const auto& idx = members[static_cast<std::size_t>(k)];
    if (idx.empty()) throw UnknownClass("class id " + std::to_string(k) + " has no rows");
    Matrix b(static_cast<Index>(idx.size()), rows.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) b.row(static_cast<Index>(i)) = rows.row(idx[i]);
    blocks.push_back(std::move(b));
  }

  PairwiseSands out;
  for (int a = 0; a < num_classes; ++a) {
    for (int b = a + 1; b < num_classes; ++b) {
      bool floored = false;
      PairSands p{a, b, pair_sands(blocks[static_cast<std::size_t>(a)], blocks[static_cast<std::size_t>(b)], opts, &floored)};
      if (floored) out.floored.emplace_back(a, b);
      out.pairs.push_back(p);
    }
  }
  return out;
}

PairwiseSands pairwise_sands(const Dataset& d, const FeatureMap* map, const PairwiseOptions& opts) {
  if (map) return pairwise_sands(transform(*map, d.features), d.labels, d.num_classes(), opts);
  return pairwise_sands(d.features, d.labels, d.num_classes(), opts);
}

}  // namespace sands
