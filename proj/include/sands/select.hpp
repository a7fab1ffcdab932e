#pragma once

#include "sands/copt.hpp"
#include "sands/dataset.hpp"
#include "sands/kernel.hpp"
#include "sands/stats.hpp"
#include "sands/svm.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sands {

struct ParamRange {
  std::vector<double> values;

  static ParamRange of(std::vector<double> v) { return {std::move(v)}; }
  // [min : step : max], inclusive of max up to rounding.
  static ParamRange stepped(double min, double step, double max);
};

// One kernel family with a range per parameter; expands to the cartesian
// product. Parameters a family does not use are ignored.
struct CandidateTemplate {
  KernelFamily family = KernelFamily::rbf;
  ParamRange gamma = ParamRange::of({1.0});
  ParamRange degree = ParamRange::of({2.0});
  ParamRange coef0 = ParamRange::of({0.0});
};

struct KernelGrid {
  std::vector<CandidateTemplate> candidates;
  Index scan_dim = 512;
  std::uint64_t seed = 0;

  // Throws InvalidArgument when empty or when an expanded spec is invalid.
  std::vector<KernelSpec> expand() const;
};

// rbf gamma in {0.01, 0.1, 1, 10} / psi; polynomial degree {2, 3} x coef0
// {0, 1} with gamma 1/psi; sigmoid gamma {0.01, 0.1} x coef0 {-1, 0}.
KernelGrid default_kernel_grid(Index psi, std::uint64_t seed = 0);

enum class SelectionMode { input_space, kernel_space, unresolved };
std::string to_string(SelectionMode m);

struct CandidateResult {
  KernelSpec spec;
  MapMethod method = MapMethod::rff;
  std::vector<PairSands> pairs;
  std::optional<PairSands> min_pair;
  bool accepted = false;  // min-pair S&S > -5
  bool failed = false;
  std::string error;
  double seconds = 0.0;
};

struct ChosenConfig {
  std::optional<KernelSpec> kernel;  // absent: input space
  MapMethod method = MapMethod::rff;
  PairSands min_pair;
  CoptDecision copt;
  double c = 0.0;
  bool fallback = false;  // picked under NoKernelPolicy::best_candidate
};

struct SelectionReport {
  SelectionMode mode = SelectionMode::unresolved;
  std::vector<PairSands> input_pairs;
  std::optional<PairSands> input_min;
  std::vector<CandidateResult> per_candidate;
  std::optional<ChosenConfig> chosen;
  std::vector<std::string> warnings;
  std::map<std::string, double> timings;
};

struct SelectOptions {
  double alpha = kDefaultAlpha;
  SpreadMode mode = SpreadMode::directional;
  double sigma_floor = 1e-9;
  std::size_t jobs = 1;
};

// Entry with the lowest ratio; ties go to the lexicographically smallest pair.
PairSands sands_min(const std::vector<PairSands>& pairwise);

SelectionReport select_input_space(const Dataset& train, const SelectOptions& opts = {});
SelectionReport select_kernel(const Dataset& train, const KernelGrid& grid, const SelectOptions& opts = {});

struct PairModel {
  int pos_class = 0;  // +1 side, lower id
  int neg_class = 1;
  SvmModel model;
};

// One-vs-one ensemble sharing a single standardization and feature map.
struct OvoModel {
  int num_classes = 0;
  std::map<int, std::string> class_names;
  std::optional<Standardization> standardization;
  std::shared_ptr<const FeatureMap> map;
  std::vector<PairModel> models;

  // Raw rows -> space the pair models were trained in.
  Matrix prepare(const Matrix& raw_rows) const;
  // Majority vote; ties broken by summed margin scores, then lowest id.
  std::vector<int> predict(const Matrix& raw_rows) const;
  std::vector<int> predict_prepared(const Matrix& rows) const;
};

// Trains C(r,2) models on rows already in model space.
OvoModel train_ovo(const Matrix& rows, const std::vector<int>& labels, int num_classes, double c,
                   const SolverConfig& cfg, std::size_t jobs = 1);

enum class NoKernelPolicy {
  fail,            // throw NoSuitableKernel
  best_candidate,  // use the highest-S&S option with C at the -5 dB edge
};

struct PipelineOptions {
  SelectOptions select;
  Index final_dim = 2048;
  bool standardize = true;
  NoKernelPolicy no_kernel = NoKernelPolicy::fail;
};

struct PipelineResult {
  OvoModel model;
  SelectionReport report;
  std::size_t svm_fits = 0;
};

// Raw S&S_min > -5 trains directly in input space; otherwise the grid is
// scanned by S&S and the winner is trained once per class pair.
PipelineResult fit_pipeline(const Dataset& train, const KernelGrid& grid, const PipelineOptions& opts = {},
                            const SolverConfig& solver = {});

}  // namespace sands
