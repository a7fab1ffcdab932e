#pragma once

#include "sands/dataset.hpp"
#include "sands/kernel.hpp"
#include "sands/select.hpp"
#include "sands/svm.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sands {

enum class CvScore { f1, hinge };
std::string to_string(CvScore s);
CvScore parse_cv_score(const std::string& s);

// 13 log-spaced values, 0.01 ... 1000.
std::vector<double> default_c_grid();

struct CvConfig {
  int folds = 5;
  std::vector<double> c_grid = default_c_grid();
  KernelGrid kernel_grid;     // may be empty when include_linear is set
  bool include_linear = true; // identity map as an extra candidate, tried first
  CvScore score = CvScore::f1;
  std::uint64_t seed = 0;
  Index feature_dim = 512;
  bool standardize = true;
  std::size_t jobs = 1;
};

struct CvCandidate {
  std::optional<KernelSpec> kernel;  // absent: linear
  MapMethod method = MapMethod::rff;
};

struct CvCell {
  std::size_t candidate = 0;
  double c = 0.0;
  std::vector<double> fold_scores;
  double mean = 0.0;
  double std = 0.0;  // population std across folds
  bool failed = false;
  std::string error;
  double seconds = 0.0;
};

struct CvResult {
  CvScore score = CvScore::f1;
  int folds = 0;
  std::vector<CvCandidate> candidates;
  std::vector<CvCell> table;  // candidate-major, C ascending
  std::size_t best = 0;       // index into table
  std::map<std::string, double> timings;
  std::size_t fit_count = 0;

  const CvCell& best_cell() const { return table.at(best); }
  const CvCandidate& best_candidate() const { return candidates.at(best_cell().candidate); }
};

// Stratified folds, each sorted. Throws FoldInfeasible when k < 2 or k exceeds
// the smallest class count.
std::vector<std::vector<Index>> kfold_indices(const std::vector<int>& labels, int k, std::uint64_t seed);

std::vector<CvCandidate> cv_candidates(const CvConfig& cfg);

// Every (candidate, C, fold) is fit on k-1 folds and scored on the held-out
// one. F1 is maximized, hinge minimized; ties go to the smaller C, then the
// earlier candidate. A combination that throws scores worst and is flagged.
CvResult grid_search_cv(const Dataset& train, const CvConfig& cfg, const SolverConfig& solver = {});

// Refits the winning combination on all of train.
OvoModel fit_cv_best(const Dataset& train, const CvConfig& cfg, const CvResult& res, const SolverConfig& solver = {});

// F1 of `positive` versus the rest; 0 when precision or recall is undefined.
double binary_f1(const std::vector<int>& pred, const std::vector<int>& truth, int positive);
double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth, int num_classes);
// Binary F1 on class 0 when num_classes == 2, macro F1 otherwise.
double f1_score(const std::vector<int>& pred, const std::vector<int>& truth, int num_classes);

}  // namespace sands
