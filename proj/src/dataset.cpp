#include "sands/dataset.hpp"

#include "sands/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace sands {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path + "'");
  return ss.str();
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Splits RFC-4180 text into records. Quoted fields may contain commas,
// doubled quotes and newlines. Each record carries its starting line number.
struct Record {
  std::vector<std::string> fields;
  std::size_t line;
};

std::vector<Record> csv_records(const std::string& text) {
  std::vector<Record> out;
  Record cur{{}, 1};
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  std::size_t line = 1;
  bool record_has_content = false;

  auto end_field = [&] {
    cur.fields.push_back(field_quoted ? field : trim(field));
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    if (record_has_content) out.push_back(std::move(cur));
    cur = Record{{}, line};
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_quoted = true;
        record_has_content = true;
        field.clear();
        break;
      case ',':
        end_field();
        record_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        if (!std::isspace(static_cast<unsigned char>(c))) record_has_content = true;
        field.push_back(c);
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", cur.line);
  end_record();
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec == std::errc::result_out_of_range) {
    return std::strtod(s.c_str(), nullptr);
  }
  if (ec != std::errc() || ptr != end) {
    // from_chars rejects "inf"/"nan" spellings some tools emit; strtod accepts them.
    char* e = nullptr;
    const double w = std::strtod(s.c_str(), &e);
    if (e == s.c_str() + s.size()) return w;
    return std::nullopt;
  }
  return v;
}

// Maps raw label strings to 0..r-1. Numeric labels sort numerically, anything
// else lexicographically, so ids do not depend on row order.
std::vector<int> remap_labels(const std::vector<std::string>& raw, std::map<int, std::string>& names) {
  std::vector<std::string> uniq(raw.begin(), raw.end());
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  bool numeric = true;
  for (const auto& u : uniq) {
    if (!parse_number(u)) {
      numeric = false;
      break;
    }
  }
  if (numeric) {
    std::stable_sort(uniq.begin(), uniq.end(),
                     [](const std::string& a, const std::string& b) { return *parse_number(a) < *parse_number(b); });
  }
  std::map<std::string, int> id;
  for (std::size_t k = 0; k < uniq.size(); ++k) {
    id[uniq[k]] = static_cast<int>(k);
    names[static_cast<int>(k)] = uniq[k];
  }
  std::vector<int> labels;
  labels.reserve(raw.size());
  for (const auto& s : raw) labels.push_back(id.at(s));
  return labels;
}

void check_finite(const Matrix& x) {
  std::ostringstream bad;
  int count = 0;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (!std::isfinite(x(i, j))) {
        if (count < 20) bad << (count ? ", " : "") << "(row " << i << ", col " << j << ")";
        ++count;
      }
    }
  }
  if (count > 0) {
    throw NonFiniteError("non-finite feature values at " + bad.str() + (count > 20 ? " ..." : "") + " [" +
                         std::to_string(count) + " cells]");
  }
}

Dataset finish(Matrix features, const std::vector<std::string>& raw_labels, const std::string& source) {
  Dataset d;
  d.features = std::move(features);
  d.labels = remap_labels(raw_labels, d.class_names);
  d.meta.source = source;
  check_finite(d.features);
  if (d.class_names.size() < 2) {
    throw SingleClassError("dataset '" + source + "' has " + std::to_string(d.class_names.size()) +
                           " class(es); at least 2 are required");
  }
  d.validate();
  return d;
}

}  // namespace

int Dataset::num_classes() const {
  if (!class_names.empty()) return static_cast<int>(class_names.size());
  int r = 0;
  for (int l : labels) r = std::max(r, l + 1);
  return r;
}

std::vector<Index> Dataset::class_counts() const {
  std::vector<Index> c(static_cast<std::size_t>(num_classes()), 0);
  for (int l : labels) ++c.at(static_cast<std::size_t>(l));
  return c;
}

std::vector<Index> Dataset::rows_of(int class_id) const {
  std::vector<Index> idx;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == class_id) idx.push_back(static_cast<Index>(i));
  }
  return idx;
}

void Dataset::validate() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw DataError("feature rows and labels differ in length");
  }
  if (features.rows() < 2) throw DataError("dataset needs at least 2 rows");
  const int r = num_classes();
  if (r < 2) throw SingleClassError("dataset needs at least 2 classes");
  const auto counts = class_counts();
  for (int k = 0; k < r; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0) {
      throw DataError("class id " + std::to_string(k) + " has no rows");
    }
  }
  check_finite(features);
}

Dataset parse_csv(const std::string& text, const LoadOptions& opts, const std::string& source) {
  auto records = csv_records(text);
  if (records.empty()) throw ParseError("missing header row", 1);
  const auto& header = records.front().fields;
  const std::size_t ncols = header.size();
  if (ncols < 2) throw ParseError("need at least one feature column and a label column", records.front().line);

  std::size_t label_col = ncols - 1;
  if (opts.label_column) {
    if (const auto* name = std::get_if<std::string>(&*opts.label_column)) {
      auto it = std::find(header.begin(), header.end(), *name);
      if (it == header.end()) throw ParseError("label column '" + *name + "' not in header", records.front().line);
      label_col = static_cast<std::size_t>(it - header.begin());
    } else {
      label_col = std::get<std::size_t>(*opts.label_column);
      if (label_col >= ncols) throw ParseError("label column index out of range", records.front().line);
    }
  }

  const std::size_t n = records.size() - 1;
  Matrix x(static_cast<Index>(n), static_cast<Index>(ncols - 1));
  std::vector<std::string> raw;
  raw.reserve(n);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != ncols) {
      throw ParseError("expected " + std::to_string(ncols) + " fields, got " + std::to_string(rec.fields.size()),
                       rec.line);
    }
    Index col = 0;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c == label_col) {
        if (rec.fields[c].empty()) throw ParseError("empty label", rec.line);
        raw.push_back(rec.fields[c]);
        continue;
      }
      auto v = parse_number(rec.fields[c]);
      if (!v) throw ParseError("not a number: '" + rec.fields[c] + "'", rec.line);
      x(static_cast<Index>(r - 1), col++) = *v;
    }
  }
  return finish(std::move(x), raw, source);
}

Dataset parse_libsvm(const std::string& text, const LoadOptions& opts, const std::string& source) {
  struct Row {
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<Row> rows;
  std::vector<std::string> raw;
  std::size_t max_index = 0;

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream toks(line);
    std::string tok;
    if (!(toks >> tok)) continue;
    if (!parse_number(tok)) throw ParseError("label is not numeric: '" + tok + "'", lineno);
    raw.push_back(tok);
    Row row;
    while (toks >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError("expected <index>:<value>, got '" + tok + "'", lineno);
      std::size_t idx = 0;
      const auto idx_str = tok.substr(0, colon);
      auto [p, ec] = std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), idx);
      if (ec != std::errc() || p != idx_str.data() + idx_str.size() || idx == 0) {
        throw ParseError("bad feature index '" + idx_str + "' (indices are 1-based)", lineno);
      }
      auto v = parse_number(tok.substr(colon + 1));
      if (!v) throw ParseError("bad feature value in '" + tok + "'", lineno);
      max_index = std::max(max_index, idx);
      row.entries.emplace_back(idx, *v);
    }
    rows.push_back(std::move(row));
  }
  const std::size_t psi = opts.num_features.value_or(max_index);
  if (max_index > psi) throw ParseError("feature index exceeds declared feature count", lineno);
  if (psi == 0) throw ParseError("no features found", lineno);

  Matrix x = Matrix::Zero(static_cast<Index>(rows.size()), static_cast<Index>(psi));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (auto [idx, v] : rows[i].entries) x(static_cast<Index>(i), static_cast<Index>(idx - 1)) = v;
  }
  return finish(std::move(x), raw, source);
}

Dataset load_dataset(const std::string& path, const LoadOptions& opts) {
  const std::string text = read_file(path);
  return opts.format == Format::csv ? parse_csv(text, opts, path) : parse_libsvm(text, opts, path);
}

std::string to_csv(const Dataset& d) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index j = 0; j < d.dims(); ++j) out << "f" << j << ",";
  out << "label\n";
  for (Index i = 0; i < d.size(); ++i) {
    for (Index j = 0; j < d.dims(); ++j) out << d.features(i, j) << ",";
    const int l = d.labels[static_cast<std::size_t>(i)];
    auto it = d.class_names.find(l);
    std::string name = it != d.class_names.end() ? it->second : std::to_string(l);
    if (name.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : name) {
        if (c == '"') q += '"';
        q += c;
      }
      name = q + "\"";
    }
    out << name << "\n";
  }
  return out.str();
}

void write_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << to_csv(d);
}

Matrix Standardization::apply(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != mean.size()) {
    throw DimensionMismatch("standardization fitted on " + std::to_string(mean.size()) + " columns, got " +
                            std::to_string(x.cols()));
  }
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    if (zero_variance[k]) {
      out.col(j).setZero();
    } else {
      out.col(j) = (x.col(j).array() - mean[k]) / scale[k];
    }
  }
  return out;
}

Standardization fit_standardization(const Matrix& x) {
  Standardization s;
  const auto n = static_cast<double>(x.rows());
  for (Index j = 0; j < x.cols(); ++j) {
    const double m = x.col(j).mean();
    const double var = (x.col(j).array() - m).square().sum() / n;
    const double sd = std::sqrt(var);
    const bool zero = !(sd > 1e-12 * std::max(1.0, std::abs(m)));
    s.mean.push_back(m);
    s.scale.push_back(zero ? 1.0 : sd);
    s.zero_variance.push_back(zero);
  }
  return s;
}

Dataset apply_standardization(const Dataset& d, const Standardization& s) {
  Dataset out = d;
  out.features = s.apply(d.features);
  out.meta.standardization = s;
  return out;
}

Dataset standardize(const Dataset& d) { return apply_standardization(d, fit_standardization(d.features)); }

SplitIndices split_indices(const Dataset& d, const SplitSpec& s) {
  if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  }
  const int r = d.num_classes();
  const auto counts = d.class_counts();
  for (int k = 0; k < r; ++k) {
    if (counts[static_cast<std::size_t>(k)] < 2) {
      throw SplitInfeasible("class " + std::to_string(k) + " has fewer than 2 rows; both splits need it");
    }
  }
  Rng rng = make_rng(derive_seed(s.seed, 0x5711));
  SplitIndices out;
  if (s.stratified) {
    for (int k = 0; k < r; ++k) {
      auto idx = d.rows_of(k);
      shuffle_in_place(idx, rng);
      const auto nk = static_cast<Index>(idx.size());
      Index ntrain = static_cast<Index>(std::llround(s.train_fraction * static_cast<double>(nk)));
      ntrain = std::clamp<Index>(ntrain, 1, nk - 1);
      out.train.insert(out.train.end(), idx.begin(), idx.begin() + ntrain);
      out.test.insert(out.test.end(), idx.begin() + ntrain, idx.end());
    }
  } else {
    std::vector<Index> idx(static_cast<std::size_t>(d.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Index>(i);
    shuffle_in_place(idx, rng);
    const auto ntrain = static_cast<std::size_t>(std::llround(s.train_fraction * static_cast<double>(idx.size())));
    out.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(ntrain));
    out.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(ntrain), idx.end());
    std::vector<bool> in_train(static_cast<std::size_t>(r)), in_test(static_cast<std::size_t>(r));
    for (auto i : out.train) in_train[static_cast<std::size_t>(d.labels[static_cast<std::size_t>(i)])] = true;
    for (auto i : out.test) in_test[static_cast<std::size_t>(d.labels[static_cast<std::size_t>(i)])] = true;
    for (int k = 0; k < r; ++k) {
      if (!in_train[static_cast<std::size_t>(k)] || !in_test[static_cast<std::size_t>(k)]) {
        throw SplitInfeasible("unstratified split left class " + std::to_string(k) + " out of one side");
      }
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Dataset subset(const Dataset& d, const std::vector<Index>& idx) {
  Dataset out;
  out.features.resize(static_cast<Index>(idx.size()), d.dims());
  out.labels.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.features.row(static_cast<Index>(i)) = d.features.row(idx[i]);
    out.labels.push_back(d.labels[static_cast<std::size_t>(idx[i])]);
  }
  out.class_names = d.class_names;
  out.meta = d.meta;
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& s) {
  const auto idx = split_indices(d, s);
  return {subset(d, idx.train), subset(d, idx.test)};
}

BinaryProblem binary_problem(const Dataset& d, int pos_class, int neg_class) {
  const int r = d.num_classes();
  if (pos_class < 0 || pos_class >= r || neg_class < 0 || neg_class >= r) {
    throw UnknownClass("class pair (" + std::to_string(pos_class) + "," + std::to_string(neg_class) +
                       ") outside 0.." + std::to_string(r - 1));
  }
  std::vector<Index> idx;
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    if (d.labels[i] == pos_class || d.labels[i] == neg_class) idx.push_back(static_cast<Index>(i));
  }
  BinaryProblem p;
  p.x.resize(static_cast<Index>(idx.size()), d.dims());
  p.y.resize(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    p.x.row(static_cast<Index>(i)) = d.features.row(idx[i]);
    p.y(static_cast<Index>(i)) = d.labels[static_cast<std::size_t>(idx[i])] == pos_class ? 1.0 : -1.0;
  }
  return p;
}

}  // namespace sands
