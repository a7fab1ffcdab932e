#include "sands/serialize.hpp"

#include "sands/error.hpp"

#include <sodium.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace sands {

namespace {

template <typename T>
std::string encode_vector(const std::vector<T>& v) {
  return base64_encode(v.data(), v.size() * sizeof(T));
}

template <typename T>
std::vector<T> decode_vector(const std::string& s, std::size_t expected) {
  const auto bytes = base64_decode(s);
  if (bytes.size() != expected * sizeof(T)) throw ParseError("binary field has the wrong length", 0);
  std::vector<T> out(expected);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

Json table_to_json(const std::vector<std::vector<std::uint32_t>>& t) {
  Json a = Json::array();
  for (const auto& row : t) a.push_back(encode_vector(row));
  return a;
}

Json optional_pair(const std::optional<PairSands>& p) { return p ? to_json(*p) : Json(nullptr); }

}  // namespace

Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParseError("expected a number", 0);
}

std::string base64_encode(const void* data, std::size_t bytes) {
  const int variant = sodium_base64_VARIANT_ORIGINAL;
  std::string out(sodium_base64_encoded_len(bytes, variant), '\0');
  sodium_bin2base64(out.data(), out.size(), static_cast<const unsigned char*>(data), bytes, variant);
  out.resize(std::strlen(out.c_str()));
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  std::vector<unsigned char> out(text.size() / 4 * 3 + 3);
  std::size_t len = 0;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, nullptr,
                        sodium_base64_VARIANT_ORIGINAL) != 0) {
    throw ParseError("invalid base64", 0);
  }
  out.resize(len);
  return out;
}

Json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", base64_encode(m.data(), sizeof(double) * m.size())}};
}

Matrix matrix_from_json(const Json& j) {
  const Index r = j.at("rows").get<Index>(), c = j.at("cols").get<Index>();
  const auto v = decode_vector<double>(j.at("data").get<std::string>(), static_cast<std::size_t>(r * c));
  Matrix m(r, c);
  if (!v.empty()) std::memcpy(m.data(), v.data(), v.size() * sizeof(double));
  return m;
}

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = read_number(j[i]);
  return v;
}

Json to_json(const SAndSReport& r) {
  return {{"d", number(r.d)},
          {"sigma", number(r.sigma)},
          {"ratio_db", number(r.ratio_db)},
          {"alpha", r.alpha},
          {"mode", to_string(r.mode)},
          {"verdict", to_string(r.verdict)}};
}

Json to_json(const PairSands& p) {
  Json j = to_json(p.report);
  j["class_a"] = p.class_a;
  j["class_b"] = p.class_b;
  return j;
}

Json to_json(const CoptDecision& d) {
  return {{"c_opt", d.c_opt ? Json(*d.c_opt) : Json(nullptr)},
          {"branch", to_string(d.branch)},
          {"input_ratio_db", number(d.input_ratio_db)},
          {"sigma_over_d", number(d.sigma_over_d)}};
}

Json to_json(const KernelSpec& s) {
  Json j{{"family", to_string(s.family)}, {"gamma", s.gamma}};
  if (s.family == KernelFamily::polynomial) j["degree"] = s.degree;
  if (s.family != KernelFamily::rbf) j["coef0"] = s.coef0;
  return j;
}

KernelSpec kernel_spec_from_json(const Json& j) {
  KernelSpec s;
  s.family = parse_kernel_family(j.at("family").get<std::string>());
  s.gamma = j.at("gamma").get<double>();
  s.degree = s.family == KernelFamily::polynomial ? j.value("degree", 2) : 0;
  s.coef0 = s.family == KernelFamily::rbf ? 0.0 : j.value("coef0", 0.0);
  s.validate();
  return s;
}

Json to_json(const Standardization& s) {
  Json zv = Json::array();
  for (bool b : s.zero_variance) zv.push_back(b);
  return {{"mean", s.mean}, {"scale", s.scale}, {"zero_variance", zv}};
}

Standardization standardization_from_json(const Json& j) {
  Standardization s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  s.zero_variance = j.at("zero_variance").get<std::vector<bool>>();
  if (s.mean.size() != s.scale.size() || s.mean.size() != s.zero_variance.size()) {
    throw ParseError("standardization fields differ in length", 0);
  }
  return s;
}

Json to_json(const FeatureMap& m) {
  Json j{{"kernel", to_json(m.spec)},
         {"method", to_string(m.method)},
         {"dim", m.dim},
         {"input_dim", m.input_dim},
         {"output_dim", m.output_dim()},
         {"seed", m.seed}};
  Json st;
  if (const auto* rff = std::get_if<RffState>(&m.state)) {
    st = {{"omega", matrix_to_json(rff->omega)}, {"phase", matrix_to_json(rff->phase.transpose())}};
  } else if (const auto* ts = std::get_if<TensorSketchState>(&m.state)) {
    Json signs = Json::array();
    for (const auto& s : ts->sign) signs.push_back(encode_vector(s));
    st = {{"width", ts->hash.empty() ? 0 : ts->hash.front().size()}, {"hash", table_to_json(ts->hash)},
          {"sign", signs}};
  } else if (const auto* ny = std::get_if<NystromState>(&m.state)) {
    st = {{"landmarks", matrix_to_json(ny->landmarks)},
          {"projection", matrix_to_json(ny->projection)},
          {"eigenvalues", vector_to_json(ny->eigenvalues)}};
  }
  j["state"] = st;
  return j;
}

FeatureMap feature_map_from_json(const Json& j) {
  FeatureMap m;
  m.spec = kernel_spec_from_json(j.at("kernel"));
  m.method = parse_map_method(j.at("method").get<std::string>());
  m.dim = j.at("dim").get<Index>();
  m.input_dim = j.at("input_dim").get<Index>();
  m.seed = j.at("seed").get<std::uint64_t>();
  const auto& st = j.at("state");
  switch (m.method) {
    case MapMethod::rff: {
      RffState s;
      s.omega = matrix_from_json(st.at("omega"));
      s.phase = matrix_from_json(st.at("phase")).transpose();
      if (s.omega.rows() != m.dim || s.omega.cols() != m.input_dim || s.phase.size() != m.dim) {
        throw ParseError("rff state does not match dim/input_dim", 0);
      }
      m.state = std::move(s);
      break;
    }
    case MapMethod::tensor_sketch: {
      TensorSketchState s;
      const auto width = st.at("width").get<std::size_t>();
      for (const auto& h : st.at("hash")) s.hash.push_back(decode_vector<std::uint32_t>(h.get<std::string>(), width));
      for (const auto& g : st.at("sign")) s.sign.push_back(decode_vector<std::int8_t>(g.get<std::string>(), width));
      if (s.hash.size() != s.sign.size()) throw ParseError("tensor sketch tables differ in count", 0);
      m.state = std::move(s);
      break;
    }
    case MapMethod::nystrom_eig: {
      NystromState s;
      s.landmarks = matrix_from_json(st.at("landmarks"));
      s.projection = matrix_from_json(st.at("projection"));
      s.eigenvalues = vector_from_json(st.at("eigenvalues"));
      m.state = std::move(s);
      break;
    }
  }
  return m;
}

Json to_json(const TrainDiagnostics& d) {
  return {{"train_hinge", number(d.train_hinge)},
          {"margin_width", number(d.margin_width)},
          {"iterations", d.iterations},
          {"converged", d.converged},
          {"primal_objective", number(d.primal_objective)},
          {"dual_objective", number(d.dual_objective)},
          {"max_kkt_violation", number(d.max_kkt_violation)}};
}

Json to_json(const SvmModel& m) {
  return {{"w", vector_to_json(m.w)},
          {"b", m.b},
          {"c", m.c},
          {"has_map", static_cast<bool>(m.map)},
          {"diagnostics", to_json(m.diagnostics)}};
}

SvmModel svm_model_from_json(const Json& j) {
  SvmModel m;
  m.w = vector_from_json(j.at("w"));
  m.b = j.at("b").get<double>();
  m.c = j.at("c").get<double>();
  if (j.contains("diagnostics")) {
    const auto& d = j["diagnostics"];
    m.diagnostics.train_hinge = read_number(d.at("train_hinge"));
    m.diagnostics.margin_width = read_number(d.at("margin_width"));
    m.diagnostics.iterations = d.at("iterations").get<int>();
    m.diagnostics.converged = d.at("converged").get<bool>();
    m.diagnostics.primal_objective = read_number(d.at("primal_objective"));
    m.diagnostics.dual_objective = read_number(d.at("dual_objective"));
    m.diagnostics.max_kkt_violation = read_number(d.at("max_kkt_violation"));
  }
  return m;
}

Json to_json(const OvoModel& m) {
  Json names = Json::object();
  for (const auto& [id, name] : m.class_names) names[std::to_string(id)] = name;
  Json models = Json::array();
  for (const auto& pm : m.models) {
    Json e = to_json(pm.model);
    e["pos_class"] = pm.pos_class;
    e["neg_class"] = pm.neg_class;
    models.push_back(e);
  }
  return {{"format", "sands-ovo-1"},
          {"num_classes", m.num_classes},
          {"class_names", names},
          {"standardization", m.standardization ? to_json(*m.standardization) : Json(nullptr)},
          {"feature_map", m.map ? to_json(*m.map) : Json(nullptr)},
          {"models", models}};
}

OvoModel ovo_model_from_json(const Json& j) {
  if (j.value("format", "") != "sands-ovo-1") throw ParseError("not a model file (format tag missing)", 0);
  OvoModel m;
  m.num_classes = j.at("num_classes").get<int>();
  for (const auto& [k, v] : j.at("class_names").items()) m.class_names[std::stoi(k)] = v.get<std::string>();
  if (!j.at("standardization").is_null()) m.standardization = standardization_from_json(j["standardization"]);
  if (!j.at("feature_map").is_null()) {
    m.map = std::make_shared<const FeatureMap>(feature_map_from_json(j["feature_map"]));
  }
  for (const auto& e : j.at("models")) {
    PairModel pm;
    pm.pos_class = e.at("pos_class").get<int>();
    pm.neg_class = e.at("neg_class").get<int>();
    pm.model = svm_model_from_json(e);
    pm.model.map = m.map;
    m.models.push_back(std::move(pm));
  }
  return m;
}

Json to_json(const CandidateResult& c) {
  return {{"kernel", to_json(c.spec)},
          {"method", to_string(c.method)},
          {"min_pair", optional_pair(c.min_pair)},
          {"accepted", c.accepted},
          {"failed", c.failed},
          {"error", c.error},
          {"seconds", c.seconds},
          {"pairs", [&] {
             Json a = Json::array();
             for (const auto& p : c.pairs) a.push_back(to_json(p));
             return a;
           }()}};
}

Json to_json(const SelectionReport& r) {
  Json pairs = Json::array();
  for (const auto& p : r.input_pairs) pairs.push_back(to_json(p));
  Json cands = Json::array();
  for (const auto& c : r.per_candidate) cands.push_back(to_json(c));
  Json chosen = nullptr;
  if (r.chosen) {
    chosen = {{"kernel", r.chosen->kernel ? to_json(*r.chosen->kernel) : Json(nullptr)},
              {"method", r.chosen->kernel ? Json(to_string(r.chosen->method)) : Json(nullptr)},
              {"min_pair", to_json(r.chosen->min_pair)},
              {"copt", to_json(r.chosen->copt)},
              {"c", r.chosen->c},
              {"fallback", r.chosen->fallback}};
  }
  Json timings = Json::object();
  for (const auto& [k, v] : r.timings) timings[k] = v;
  return {{"mode", to_string(r.mode)}, {"input_pairs", pairs}, {"input_min", optional_pair(r.input_min)},
          {"per_candidate", cands},    {"chosen", chosen},     {"warnings", r.warnings},
          {"timings", timings}};
}

Json to_json(const CvResult& r) {
  Json cands = Json::array();
  for (const auto& c : r.candidates) {
    cands.push_back({{"kernel", c.kernel ? to_json(*c.kernel) : Json(nullptr)},
                     {"method", c.kernel ? Json(to_string(c.method)) : Json(nullptr)}});
  }
  Json table = Json::array();
  for (const auto& cell : r.table) {
    Json folds = Json::array();
    for (double v : cell.fold_scores) folds.push_back(number(v));
    table.push_back({{"candidate", cell.candidate},
                     {"c", cell.c},
                     {"mean", number(cell.mean)},
                     {"std", number(cell.std)},
                     {"fold_scores", folds},
                     {"failed", cell.failed},
                     {"error", cell.error},
                     {"seconds", cell.seconds}});
  }
  const auto& best = r.best_cell();
  Json timings = Json::object();
  for (const auto& [k, v] : r.timings) timings[k] = v;
  return {{"score", to_string(r.score)},
          {"folds", r.folds},
          {"best", {{"candidate", best.candidate},
                    {"kernel", r.best_candidate().kernel ? to_json(*r.best_candidate().kernel) : Json(nullptr)},
                    {"c", best.c},
                    {"mean", number(best.mean)}}},
          {"fit_count", r.fit_count},
          {"candidates", cands},
          {"table", table},
          {"timings", timings}};
}

Json to_json(const SweepResult& r) {
  Json mean = Json::array(), sd = Json::array();
  for (double v : r.mean_curve) mean.push_back(number(v));
  for (double v : r.std_curve) sd.push_back(number(v));
  return {{"quantity", to_string(r.quantity)}, {"runs", r.runs},      {"c_values", r.c_values},
          {"mean_curve", mean},                {"std_curve", sd},     {"failures", r.failures}};
}

Json to_json(const EmpiricalCopt& r) {
  return {{"sigma_over_d", r.sigma_over_d}, {"c_opt", r.c_opt}, {"min_test_hinge", number(r.min_hinge)}};
}

Json to_json(const BenchRow& r) {
  return {{"dataset", r.dataset},
          {"n", r.n},
          {"psi", r.psi},
          {"classes", r.classes},
          {"f1", {{"cv_f1", r.f1_cv_f1}, {"cv_hinge", r.f1_cv_hinge}, {"sandsrb", r.f1_sandsrb}}},
          {"seconds", {{"cv_f1", r.seconds_cv_f1}, {"cv_hinge", r.seconds_cv_hinge}, {"sandsrb", r.seconds_sandsrb}}},
          {"cv_combinations", r.cv_combinations},
          {"cv_fits", r.cv_fits},
          {"sandsrb_fits", r.sandsrb_fits},
          {"d", number(r.d)},
          {"sigma", number(r.sigma)},
          {"sands_min_db", number(r.sands_min_db)},
          {"sandsrb_choice", r.sandsrb_choice},
          {"sandsrb_c", r.sandsrb_c},
          {"sandsrb_fallback", r.sandsrb_fallback},
          {"cv_f1_choice", r.cv_f1_choice},
          {"cv_hinge_choice", r.cv_hinge_choice},
          {"error", r.error}};
}

Json to_json(const KernelGrid& g) {
  Json cands = Json::array();
  for (const auto& t : g.candidates) {
    Json c{{"family", to_string(t.family)}, {"gamma", t.gamma.values}};
    if (t.family == KernelFamily::polynomial) c["degree"] = t.degree.values;
    if (t.family != KernelFamily::rbf) c["coef0"] = t.coef0.values;
    cands.push_back(c);
  }
  return {{"scan_dim", g.scan_dim}, {"seed", g.seed}, {"candidates", cands}};
}

namespace {

ParamRange range_from_json(const Json& j) {
  if (j.is_number()) return ParamRange::of({j.get<double>()});
  if (j.is_array()) return ParamRange::of(j.get<std::vector<double>>());
  if (j.is_object()) return ParamRange::stepped(j.at("min").get<double>(), j.at("step").get<double>(), j.at("max").get<double>());
  throw InvalidArgument("parameter range must be a number, a list, or {min, step, max}");
}

}  // namespace

KernelGrid kernel_grid_from_json(const Json& j) {
  KernelGrid g;
  try {
    g.scan_dim = j.value("scan_dim", g.scan_dim);
    g.seed = j.value("seed", g.seed);
    for (const auto& c : j.at("candidates")) {
      CandidateTemplate t;
      t.family = parse_kernel_family(c.at("family").get<std::string>());
      if (c.contains("gamma")) t.gamma = range_from_json(c["gamma"]);
      if (c.contains("degree")) t.degree = range_from_json(c["degree"]);
      if (c.contains("coef0")) t.coef0 = range_from_json(c["coef0"]);
      g.candidates.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("grid file: ") + e.what());
  }
  g.expand();
  return g;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace sands
