#include "sands/kernel.hpp"

#include "sands/error.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace sands {

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::rbf: return "rbf";
    case KernelFamily::polynomial: return "polynomial";
    case KernelFamily::sigmoid: return "sigmoid";
  }
  return "?";
}

KernelFamily parse_kernel_family(const std::string& s) {
  if (s == "rbf") return KernelFamily::rbf;
  if (s == "polynomial" || s == "poly") return KernelFamily::polynomial;
  if (s == "sigmoid") return KernelFamily::sigmoid;
  throw InvalidArgument("unknown kernel family '" + s + "'");
}

std::string to_string(MapMethod m) {
  switch (m) {
    case MapMethod::rff: return "rff";
    case MapMethod::tensor_sketch: return "tensor_sketch";
    case MapMethod::nystrom_eig: return "nystrom_eig";
  }
  return "?";
}

MapMethod parse_map_method(const std::string& s) {
  if (s == "rff") return MapMethod::rff;
  if (s == "tensor_sketch") return MapMethod::tensor_sketch;
  if (s == "nystrom_eig") return MapMethod::nystrom_eig;
  throw InvalidArgument("unknown feature map method '" + s + "'");
}

MapMethod default_method(KernelFamily f) {
  switch (f) {
    case KernelFamily::rbf: return MapMethod::rff;
    case KernelFamily::polynomial: return MapMethod::tensor_sketch;
    case KernelFamily::sigmoid: return MapMethod::nystrom_eig;
  }
  return MapMethod::nystrom_eig;
}

void KernelSpec::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("kernel gamma must be finite and > 0");
  if (!std::isfinite(coef0)) throw InvalidArgument("kernel coef0 must be finite");
  if (family == KernelFamily::polynomial) {
    if (degree < 1 || degree > 10) throw InvalidArgument("polynomial degree must be in [1, 10]");
    if (coef0 < 0.0) throw InvalidArgument("polynomial coef0 must be >= 0");
  }
}

double KernelSpec::operator()(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const {
  switch (family) {
    case KernelFamily::rbf: return std::exp(-gamma * (x - y).squaredNorm());
    case KernelFamily::polynomial: return std::pow(gamma * x.dot(y) + coef0, degree);
    case KernelFamily::sigmoid: return std::tanh(gamma * x.dot(y) + coef0);
  }
  return 0.0;
}

std::string KernelSpec::describe() const {
  std::ostringstream s;
  s << to_string(family) << "(gamma=" << gamma;
  if (family == KernelFamily::polynomial) s << ", degree=" << degree;
  if (family != KernelFamily::rbf) s << ", coef0=" << coef0;
  s << ")";
  return s.str();
}

Matrix gram(const KernelSpec& spec, const Matrix& rows_a, const Matrix& rows_b) {
  if (rows_a.cols() != rows_b.cols()) {
    throw DimensionMismatch("gram: column counts differ (" + std::to_string(rows_a.cols()) + " vs " +
                            std::to_string(rows_b.cols()) + ")");
  }
  Matrix inner = rows_a * rows_b.transpose();
  switch (spec.family) {
    case KernelFamily::rbf: {
      const Vector na = rows_a.rowwise().squaredNorm();
      const Vector nb = rows_b.rowwise().squaredNorm();
      for (Index i = 0; i < inner.rows(); ++i) {
        for (Index j = 0; j < inner.cols(); ++j) {
          const double d2 = std::max(0.0, na(i) + nb(j) - 2.0 * inner(i, j));
          inner(i, j) = std::exp(-spec.gamma * d2);
        }
      }
      break;
    }
    case KernelFamily::polynomial:
      inner = (spec.gamma * inner.array() + spec.coef0).pow(spec.degree).matrix();
      break;
    case KernelFamily::sigmoid:
      inner = (spec.gamma * inner.array() + spec.coef0).tanh().matrix();
      break;
  }
  return inner;
}

Index FeatureMap::output_dim() const {
  if (const auto* ny = std::get_if<NystromState>(&state)) return ny->projection.cols();
  return dim;
}

namespace {

void check_compatible(KernelFamily f, MapMethod m) {
  const bool ok = m == MapMethod::nystrom_eig || (m == MapMethod::rff && f == KernelFamily::rbf) ||
                  (m == MapMethod::tensor_sketch && f == KernelFamily::polynomial);
  if (!ok) {
    throw IncompatibleMethod("feature map method " + to_string(m) + " cannot represent a " + to_string(f) +
                             " kernel");
  }
}

RffState fit_rff(const KernelSpec& spec, Index dim, Index psi, Rng& rng) {
  RffState s;
  s.omega.resize(dim, psi);
  s.phase.resize(dim);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 * spec.gamma));
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < psi; ++j) s.omega(i, j) = normal(rng);
    s.phase(i) = uniform(rng);
  }
  return s;
}

TensorSketchState fit_tensor_sketch(const KernelSpec& spec, Index dim, Index psi, Rng& rng) {
  TensorSketchState s;
  const auto width = static_cast<std::size_t>(psi + 1);
  for (int k = 0; k < spec.degree; ++k) {
    std::vector<std::uint32_t> h(width);
    std::vector<std::int8_t> g(width);
    for (std::size_t j = 0; j < width; ++j) {
      h[j] = static_cast<std::uint32_t>(uniform_index(rng, static_cast<std::uint64_t>(dim)));
      g[j] = (rng() & 1U) ? std::int8_t{1} : std::int8_t{-1};
    }
    s.hash.push_back(std::move(h));
    s.sign.push_back(std::move(g));
  }
  return s;
}

NystromState fit_nystrom(const KernelSpec& spec, Index dim, const Matrix& data, Rng& rng) {
  if (data.rows() == 0) throw InvalidArgument("nystrom_eig needs nonempty fit data");
  std::vector<Index> idx(static_cast<std::size_t>(data.rows()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Index>(i);
  shuffle_in_place(idx, rng);
  const Index m = std::min<Index>(data.rows(), kMaxLandmarks);
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());

  NystromState s;
  s.landmarks.resize(m, data.cols());
  for (Index i = 0; i < m; ++i) s.landmarks.row(i) = data.row(idx[static_cast<std::size_t>(i)]);

  Matrix w = gram(spec, s.landmarks, s.landmarks);
  w = 0.5 * (w + w.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w);
  if (eig.info() != Eigen::Success) throw DegenerateSpectrum("eigendecomposition of landmark Gram failed");

  // Eigen returns ascending eigenvalues.
  const Vector& evals = eig.eigenvalues();
  Index keep = 0;
  for (Index i = evals.size() - 1; i >= 0 && keep < dim; --i) {
    if (evals(i) > kEigenFloor) ++keep;
    else break;
  }
  if (keep == 0) throw DegenerateSpectrum("all landmark Gram eigenvalues are <= 1e-10");

  s.eigenvalues.resize(keep);
  s.projection.resize(m, keep);
  for (Index k = 0; k < keep; ++k) {
    const Index src = evals.size() - 1 - k;
    s.eigenvalues(k) = evals(src);
    s.projection.col(k) = eig.eigenvectors().col(src) / std::sqrt(evals(src));
  }
  return s;
}

Matrix transform_tensor_sketch(const FeatureMap& map, const TensorSketchState& s, const Matrix& rows) {
  const Index n = rows.rows();
  const Index dim = map.dim;
  const double scale = std::sqrt(map.spec.gamma);
  const double offset = std::sqrt(map.spec.coef0);
  const auto width = static_cast<std::size_t>(rows.cols() + 1);

  // Circular convolution of the per-factor count sketches. Sizes other than
  // powers of two are computed as a zero-padded linear convolution folded
  // back mod D; kissfft's generic radix is unreliable for primes above 5.
  const auto degree = s.hash.size();
  const auto d = static_cast<std::size_t>(dim);
  std::size_t nfft = d;
  if (d < 2 || (d & (d - 1)) != 0) {
    nfft = 2;
    while (nfft < degree * (d - 1) + 1) nfft <<= 1;
  }

  Matrix out(n, dim);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> sketch(nfft);
  std::vector<std::complex<double>> spectrum, product, result;
  std::vector<double> aug(width);

  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < rows.cols(); ++j) aug[static_cast<std::size_t>(j)] = scale * rows(i, j);
    aug[width - 1] = offset;

    for (std::size_t k = 0; k < degree; ++k) {
      std::fill(sketch.begin(), sketch.end(), std::complex<double>(0.0, 0.0));
      for (std::size_t j = 0; j < width; ++j) sketch[s.hash[k][j]] += s.sign[k][j] * aug[j];
      if (degree == 1) {
        result = sketch;
        break;
      }
      fft.fwd(spectrum, sketch);
      if (k == 0) {
        product = spectrum;
      } else {
        for (std::size_t f = 0; f < product.size(); ++f) product[f] *= spectrum[f];
      }
    }
    if (degree > 1) fft.inv(result, product);
    out.row(i).setZero();
    for (std::size_t t = 0; t < result.size(); ++t) out(i, static_cast<Index>(t % d)) += result[t].real();
  }
  return out;
}

}  // namespace

FeatureMap fit_feature_map(const KernelSpec& spec, MapMethod method, Index dim, std::uint64_t seed,
                           const Matrix& fit_data) {
  spec.validate();
  check_compatible(spec.family, method);
  if (dim < 1) throw InvalidArgument("feature map dimension must be >= 1");
  if (fit_data.cols() < 1) throw InvalidArgument("fit data must have at least one column");

  FeatureMap map;
  map.spec = spec;
  map.method = method;
  map.dim = dim;
  map.input_dim = fit_data.cols();
  map.seed = seed;
  Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(method)));
  switch (method) {
    case MapMethod::rff: map.state = fit_rff(spec, dim, map.input_dim, rng); break;
    case MapMethod::tensor_sketch: map.state = fit_tensor_sketch(spec, dim, map.input_dim, rng); break;
    case MapMethod::nystrom_eig: map.state = fit_nystrom(spec, dim, fit_data, rng); break;
  }
  return map;
}

Matrix transform(const FeatureMap& map, const Matrix& rows) {
  if (rows.cols() != map.input_dim) {
    throw DimensionMismatch("feature map expects " + std::to_string(map.input_dim) + " columns, got " +
                            std::to_string(rows.cols()));
  }
  return std::visit(
      [&](const auto& s) -> Matrix {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, RffState>) {
          Matrix z = rows * s.omega.transpose();
          z.rowwise() += s.phase.transpose();
          return (std::sqrt(2.0 / static_cast<double>(map.dim)) * z.array().cos()).matrix();
        } else if constexpr (std::is_same_v<S, TensorSketchState>) {
          return transform_tensor_sketch(map, s, rows);
        } else {
          return gram(map.spec, rows, s.landmarks) * s.projection;
        }
      },
      map.state);
}

}  // namespace sands
