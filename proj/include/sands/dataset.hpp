#pragma once

#include "sands/common.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sands {

// Per-column z-score record. Fit on training rows, applied unchanged to test rows.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;          // population std; 1.0 where zero_variance
  std::vector<bool> zero_variance;

  bool empty() const { return mean.empty(); }
  Matrix apply(const Matrix& x) const;
};

struct DatasetMeta {
  std::string source;
  std::optional<Standardization> standardization;
};

// Feature matrix (n x psi) with 0-based contiguous class ids.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::map<int, std::string> class_names;
  DatasetMeta meta;

  Index size() const { return features.rows(); }
  Index dims() const { return features.cols(); }
  int num_classes() const;
  std::vector<Index> class_counts() const;
  std::vector<Index> rows_of(int class_id) const;

  // Throws DataError if n < 2, r < 2, a class id in 0..r-1 is unused, or a
  // feature is not finite.
  void validate() const;
};

enum class Format { csv, libsvm };

// Column selector for CSV input: header name or 0-based index.
using LabelColumn = std::variant<std::string, std::size_t>;

struct LoadOptions {
  Format format = Format::csv;
  std::optional<LabelColumn> label_column;  // default: last column
  std::optional<std::size_t> num_features;  // libsvm only; default: max index seen
};

Dataset load_dataset(const std::string& path, const LoadOptions& opts = {});
Dataset parse_csv(const std::string& text, const LoadOptions& opts = {}, const std::string& source = "<memory>");
Dataset parse_libsvm(const std::string& text, const LoadOptions& opts = {}, const std::string& source = "<memory>");

// Writes a header row (f0..f{psi-1},label) with class names as labels, using
// round-trip precision.
void write_csv(const Dataset& d, const std::string& path);
std::string to_csv(const Dataset& d);

Standardization fit_standardization(const Matrix& x);
// z-score every column; result records the standardization in meta.
Dataset standardize(const Dataset& d);
Dataset apply_standardization(const Dataset& d, const Standardization& s);

struct SplitSpec {
  double train_fraction = 0.7;
  bool stratified = true;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<Index> train;
  std::vector<Index> test;
};

SplitIndices split_indices(const Dataset& d, const SplitSpec& s);
std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& s);

// Rows in `idx` order, class ids preserved.
Dataset subset(const Dataset& d, const std::vector<Index>& idx);

// Binary sub-problem in solver terms: pos_class -> +1, neg_class -> -1.
struct BinaryProblem {
  Matrix x;
  Vector y;
};

BinaryProblem binary_problem(const Dataset& d, int pos_class, int neg_class);

}  // namespace sands
