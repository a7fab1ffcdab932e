#include "sands/select.hpp"

#include "sands/error.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

namespace sands {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

PairwiseOptions pairwise_options(const SelectOptions& o) { return {o.alpha, o.mode, o.sigma_floor}; }

void note_floored(const PairwiseSands& p, const std::string& where, std::vector<std::string>& warnings) {
  for (auto [a, b] : p.floored) {
    warnings.push_back(where + ": zero spread for class pair (" + std::to_string(a) + "," + std::to_string(b) +
                       "); sigma floored");
  }
}

// C used when no option clears -5 dB: the decreasing fit at its lower edge.
double edge_c() { return std::max(kMinC, kDecreasingFit(sigma_over_d_for_ratio_db(kKernelThresholdDb))); }

}  // namespace

ParamRange ParamRange::stepped(double min, double step, double max) {
  if (!(step > 0.0) || max < min) throw InvalidArgument("parameter range needs step > 0 and max >= min");
  ParamRange r;
  const auto count = static_cast<long>(std::floor((max - min) / step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) r.values.push_back(min + static_cast<double>(i) * step);
  return r;
}

std::vector<KernelSpec> KernelGrid::expand() const {
  if (candidates.empty()) throw InvalidArgument("kernel grid is empty");
  std::vector<KernelSpec> out;
  for (const auto& t : candidates) {
    const std::vector<double> one{0.0};
    const auto& degrees = t.family == KernelFamily::polynomial ? t.degree.values : one;
    const auto& coefs = t.family == KernelFamily::rbf ? one : t.coef0.values;
    for (double g : t.gamma.values) {
      for (double p : degrees) {
        for (double c0 : coefs) {
          KernelSpec s{t.family, g, static_cast<int>(std::lround(p)), c0};
          if (t.family != KernelFamily::polynomial) s.degree = 0;
          s.validate();
          out.push_back(s);
        }
      }
    }
  }
  if (out.empty()) throw InvalidArgument("kernel grid expands to no candidates");
  return out;
}

KernelGrid default_kernel_grid(Index psi, std::uint64_t seed) {
  const double inv = 1.0 / static_cast<double>(std::max<Index>(psi, 1));
  KernelGrid g;
  g.seed = seed;
  g.candidates.push_back({KernelFamily::rbf, ParamRange::of({0.01 * inv, 0.1 * inv, 1.0 * inv, 10.0 * inv}), {}, {}});
  g.candidates.push_back(
      {KernelFamily::polynomial, ParamRange::of({inv}), ParamRange::of({2.0, 3.0}), ParamRange::of({0.0, 1.0})});
  g.candidates.push_back({KernelFamily::sigmoid, ParamRange::of({0.01, 0.1}), {}, ParamRange::of({-1.0, 0.0})});
  return g;
}

std::string to_string(SelectionMode m) {
  switch (m) {
    case SelectionMode::input_space: return "input_space";
    case SelectionMode::kernel_space: return "kernel_space";
    case SelectionMode::unresolved: return "unresolved";
  }
  return "?";
}

PairSands sands_min(const std::vector<PairSands>& pairwise) {
  if (pairwise.empty()) throw InvalidArgument("sands_min of an empty collection");
  const PairSands* best = &pairwise.front();
  for (const auto& p : pairwise) {
    if (std::tie(p.report.ratio_db, p.class_a, p.class_b) <
        std::tie(best->report.ratio_db, best->class_a, best->class_b)) {
      best = &p;
    }
  }
  return *best;
}

SelectionReport select_input_space(const Dataset& train, const SelectOptions& opts) {
  const auto t0 = Clock::now();
  SelectionReport rep;
  const auto pw = pairwise_sands(train, nullptr, pairwise_options(opts));
  note_floored(pw, "input space", rep.warnings);
  rep.input_pairs = pw.pairs;
  rep.input_min = sands_min(pw.pairs);
  const auto dec = c_opt_from_sands(rep.input_min->report);
  if (!dec.kernel_required()) {
    rep.mode = SelectionMode::input_space;
    rep.chosen = ChosenConfig{std::nullopt, MapMethod::rff, *rep.input_min, dec, *dec.c_opt, false};
  }
  rep.timings["input_scan"] = seconds_since(t0);
  return rep;
}

SelectionReport select_kernel(const Dataset& train, const KernelGrid& grid, const SelectOptions& opts) {
  const auto t0 = Clock::now();
  const auto specs = grid.expand();
  SelectionReport rep;
  rep.per_candidate.resize(specs.size());
  const auto popts = pairwise_options(opts);
  std::vector<std::vector<std::string>> cand_warnings(specs.size());

  parallel_for(specs.size(), opts.jobs, [&](std::size_t k) {
    const auto tc = Clock::now();
    auto& cr = rep.per_candidate[k];
    cr.spec = specs[k];
    cr.method = default_method(specs[k].family);
    try {
      const auto map = fit_feature_map(cr.spec, cr.method, grid.scan_dim, derive_seed(grid.seed, k), train.features);
      const auto pw = pairwise_sands(transform(map, train.features), train.labels, train.num_classes(), popts);
      note_floored(pw, cr.spec.describe(), cand_warnings[k]);
      cr.pairs = pw.pairs;
      cr.min_pair = sands_min(pw.pairs);
      cr.accepted = cr.min_pair->report.ratio_db > kKernelThresholdDb;
    } catch (const std::exception& e) {
      cr.failed = true;
      cr.accepted = false;
      cr.error = e.what();
    }
    cr.seconds = seconds_since(tc);
  });
  for (const auto& w : cand_warnings) rep.warnings.insert(rep.warnings.end(), w.begin(), w.end());

  const CandidateResult* best = nullptr;
  for (const auto& cr : rep.per_candidate) {
    if (!cr.accepted) continue;
    if (!best || cr.min_pair->report.ratio_db > best->min_pair->report.ratio_db) best = &cr;
  }
  if (best) {
    const auto dec = c_opt_from_sands(best->min_pair->report);
    rep.mode = SelectionMode::kernel_space;
    rep.chosen = ChosenConfig{best->spec, best->method, *best->min_pair, dec, *dec.c_opt, false};
  } else {
    rep.warnings.push_back("no kernel candidate scored above -5 dB");
  }
  rep.timings["kernel_scan"] = seconds_since(t0);
  return rep;
}

Matrix OvoModel::prepare(const Matrix& raw_rows) const {
  Matrix x = standardization ? standardization->apply(raw_rows) : raw_rows;
  return map ? transform(*map, x) : x;
}

std::vector<int> OvoModel::predict_prepared(const Matrix& rows) const {
  const auto n = static_cast<std::size_t>(rows.rows());
  const auto r = static_cast<std::size_t>(num_classes);
  std::vector<int> votes(n * r, 0);
  std::vector<double> margins(n * r, 0.0);
  for (const auto& pm : models) {
    const Vector s = (rows * pm.model.w).array() + pm.model.b;
    for (std::size_t i = 0; i < n; ++i) {
      const double si = s(static_cast<Index>(i));
      const auto winner = static_cast<std::size_t>(si >= 0.0 ? pm.pos_class : pm.neg_class);
      ++votes[i * r + winner];
      margins[i * r + static_cast<std::size_t>(pm.pos_class)] += si;
      margins[i * r + static_cast<std::size_t>(pm.neg_class)] -= si;
    }
  }
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < r; ++k) {
      const auto v = votes[i * r + k], bv = votes[i * r + best];
      if (v > bv || (v == bv && margins[i * r + k] > margins[i * r + best])) best = k;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> OvoModel::predict(const Matrix& raw_rows) const { return predict_prepared(prepare(raw_rows)); }

OvoModel train_ovo(const Matrix& rows, const std::vector<int>& labels, int num_classes, double c,
                   const SolverConfig& cfg, std::size_t jobs) {
  OvoModel m;
  m.num_classes = num_classes;
  for (int a = 0; a < num_classes; ++a) {
    for (int b = a + 1; b < num_classes; ++b) m.models.push_back({a, b, {}});
  }
  Dataset view;
  view.features = rows;
  view.labels = labels;
  parallel_for(m.models.size(), jobs, [&](std::size_t k) {
    auto& pm = m.models[k];
    const auto p = binary_problem(view, pm.pos_class, pm.neg_class);
    SolverConfig pc = cfg;
    pc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(pm.pos_class), static_cast<std::uint64_t>(pm.neg_class));
    pm.model = train_detailed(p.x, p.y, c, pc).model;
  });
  return m;
}

PipelineResult fit_pipeline(const Dataset& train_raw, const KernelGrid& grid, const PipelineOptions& opts,
                            const SolverConfig& solver) {
  const auto t0 = Clock::now();
  train_raw.validate();
  std::optional<Standardization> stdz;
  Dataset train = train_raw;
  if (opts.standardize) {
    stdz = fit_standardization(train_raw.features);
    train = apply_standardization(train_raw, *stdz);
  }

  SelectionReport rep = select_input_space(train, opts.select);
  if (rep.mode != SelectionMode::input_space) {
    SelectionReport kr = select_kernel(train, grid, opts.select);
    kr.input_pairs = rep.input_pairs;
    kr.input_min = rep.input_min;
    kr.warnings.insert(kr.warnings.begin(), rep.warnings.begin(), rep.warnings.end());
    kr.timings.insert(rep.timings.begin(), rep.timings.end());
    rep = std::move(kr);
  }

  if (!rep.chosen) {
    if (opts.no_kernel == NoKernelPolicy::fail) {
      std::ostringstream msg;
      msg << "no kernel candidate reached S&S > -5 dB (input-space S&S_min "
          << rep.input_min->report.ratio_db << " dB)";
      throw NoSuitableKernel(msg.str());
    }
    // Highest S&S_min among input space and every scanned candidate.
    ChosenConfig fb{std::nullopt, MapMethod::rff, *rep.input_min, c_opt_from_sands(rep.input_min->report), edge_c(),
                    true};
    for (const auto& cr : rep.per_candidate) {
      if (cr.failed || !cr.min_pair) continue;
      if (cr.min_pair->report.ratio_db > fb.min_pair.report.ratio_db) {
        fb.kernel = cr.spec;
        fb.method = cr.method;
        fb.min_pair = *cr.min_pair;
        fb.copt = c_opt_from_sands(cr.min_pair->report);
      }
    }
    rep.chosen = fb;
    rep.mode = fb.kernel ? SelectionMode::kernel_space : SelectionMode::input_space;
    rep.warnings.push_back("fallback: trained the highest-S&S option with C at the -5 dB edge");
  }

  const auto ttrain = Clock::now();
  std::shared_ptr<const FeatureMap> map;
  if (rep.chosen->kernel) {
    map = std::make_shared<const FeatureMap>(fit_feature_map(*rep.chosen->kernel, rep.chosen->method, opts.final_dim,
                                                             derive_seed(grid.seed, 0xf17a1ULL), train.features));
  }
  const Matrix z = map ? transform(*map, train.features) : train.features;
  const auto before = train_call_count();
  PipelineResult out;
  out.model = train_ovo(z, train.labels, train.num_classes(), rep.chosen->c, solver, opts.select.jobs);
  out.svm_fits = static_cast<std::size_t>(train_call_count() - before);
  out.model.class_names = train_raw.class_names;
  out.model.standardization = stdz;
  out.model.map = map;
  for (auto& pm : out.model.models) pm.model.map = map;
  rep.timings["train"] = seconds_since(ttrain);
  rep.timings["total"] = seconds_since(t0);
  out.report = std::move(rep);
  return out;
}

}  // namespace sands
