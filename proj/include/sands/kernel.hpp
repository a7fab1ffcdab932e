#pragma once

#include "sands/common.hpp"

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sands {

enum class KernelFamily { rbf, polynomial, sigmoid };

// rbf:        exp(-gamma * |x - y|^2)
// polynomial: (gamma * x.y + coef0)^degree
// sigmoid:    tanh(gamma * x.y + coef0)
struct KernelSpec {
  KernelFamily family = KernelFamily::rbf;
  double gamma = 1.0;
  int degree = 2;
  double coef0 = 0.0;

  static KernelSpec rbf(double gamma) { return {KernelFamily::rbf, gamma, 0, 0.0}; }
  static KernelSpec polynomial(int degree, double gamma, double coef0) {
    return {KernelFamily::polynomial, gamma, degree, coef0};
  }
  static KernelSpec sigmoid(double gamma, double coef0) { return {KernelFamily::sigmoid, gamma, 0, coef0}; }

  // Throws InvalidArgument when a parameter is out of range.
  void validate() const;
  double operator()(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const;
  std::string describe() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string to_string(KernelFamily f);
KernelFamily parse_kernel_family(const std::string& s);

// G[i][j] = k(a_i, b_j).
Matrix gram(const KernelSpec& spec, const Matrix& rows_a, const Matrix& rows_b);

enum class MapMethod { rff, tensor_sketch, nystrom_eig };

std::string to_string(MapMethod m);
MapMethod parse_map_method(const std::string& s);
MapMethod default_method(KernelFamily f);

// sqrt(2/D) cos(omega^T x + phase), omega ~ N(0, 2 gamma I).
struct RffState {
  Matrix omega;  // D x psi
  Vector phase;  // D
};

// Count-sketch tables for each of the `degree` factors. Inputs are augmented
// to (sqrt(gamma) x, sqrt(coef0)) so the sketch targets a homogeneous form.
struct TensorSketchState {
  std::vector<std::vector<std::uint32_t>> hash;  // degree x (psi + 1), values in [0, D)
  std::vector<std::vector<std::int8_t>> sign;    // degree x (psi + 1), values +-1
};

// phi(x) = k(landmarks, x)^T * projection, projection = U_k diag(lambda_k^-1/2).
struct NystromState {
  Matrix landmarks;   // m x psi
  Matrix projection;  // m x effective_dim
  Vector eigenvalues; // effective_dim, descending, all > 0
};

struct FeatureMap {
  KernelSpec spec;
  MapMethod method = MapMethod::rff;
  Index dim = 0;            // requested D
  Index input_dim = 0;      // psi
  std::uint64_t seed = 0;
  std::variant<RffState, TensorSketchState, NystromState> state;

  // Output width of transform(); equals dim except for nystrom_eig, where
  // truncated eigenvalues shrink it.
  Index output_dim() const;
};

inline constexpr Index kMaxLandmarks = 256;
inline constexpr double kEigenFloor = 1e-10;

// fit_data is only read by nystrom_eig, but its column count fixes psi for
// every method.
FeatureMap fit_feature_map(const KernelSpec& spec, MapMethod method, Index dim, std::uint64_t seed,
                           const Matrix& fit_data);

Matrix transform(const FeatureMap& map, const Matrix& rows);

}  // namespace sands
