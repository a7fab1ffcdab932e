#pragma once

#include "sands/common.hpp"
#include "sands/dataset.hpp"
#include "sands/kernel.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace sands {

struct SolverConfig {
  int max_epochs = 1000;
  double tolerance = 1e-4;  // max projected-gradient (KKT) violation
  std::uint64_t seed = 0;
  bool shrinking = true;
  bool track_objective = false;  // record the dual objective after every epoch
};

struct TrainDiagnostics {
  double train_hinge = 0.0;  // mean over training points
  double margin_width = 0.0; // 2 / |w|, +inf when w = 0
  int iterations = 0;        // epochs run
  bool converged = false;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double max_kkt_violation = 0.0;
};

// Linear soft-margin model f(x) = w.phi(x) + b. The bias is trained as an
// extra weight on a constant-1 feature, so the objective regularizes it:
//   1/2 (|w|^2 + b^2) + C sum_i max(0, 1 - y_i f(x_i)).
struct SvmModel {
  Vector w;
  double b = 0.0;
  double c = 1.0;
  std::shared_ptr<const FeatureMap> map;  // applied to raw inputs before w
  TrainDiagnostics diagnostics;
};

struct TrainResult {
  SvmModel model;
  Vector alpha;                    // dual variables, 0 <= alpha_i <= C
  std::vector<double> dual_trace;  // filled when track_objective
};

// x rows are already in the space w lives in (mapped if a kernel is used).
// warm_alpha, when given, seeds the dual variables (clipped to [0, C]).
TrainResult train_detailed(const Matrix& x, const Vector& y, double c, const SolverConfig& cfg = {},
                           const Vector* warm_alpha = nullptr);

SvmModel train(const BinaryProblem& p, double c, const SolverConfig& cfg = {});

// Trains on map(p.x) and attaches the map to the returned model.
SvmModel train(const BinaryProblem& p, std::shared_ptr<const FeatureMap> map, double c,
               const SolverConfig& cfg = {});

// Number of solver invocations in this process.
std::uint64_t train_call_count();

// w.phi(x) + b for each row; applies m.map when present.
Vector decision_function(const SvmModel& m, const Matrix& rows);

struct Prediction {
  int label;  // +1 or -1; a score of exactly 0 maps to +1
  double score;
};

Prediction predict(const SvmModel& m, const Vector& x);

// Mean of max(0, 1 - y f(x)).
double hinge_loss(const SvmModel& m, const BinaryProblem& p);
double mean_hinge(const Vector& scores, const Vector& y);

double margin_width(const SvmModel& m);

double primal_objective(const Vector& w, double b, double c, const Matrix& x, const Vector& y);

}  // namespace sands
