#include "sands/cv.hpp"

#include "sands/error.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>

namespace sands {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double worst_score(CvScore s) {
  return s == CvScore::f1 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
}

bool better(CvScore s, double a, double b) { return s == CvScore::f1 ? a > b : a < b; }

void check_lengths(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) throw DimensionMismatch("f1: predictions and labels differ in length");
  if (pred.empty()) throw InvalidArgument("f1: no predictions");
}

}  // namespace

std::string to_string(CvScore s) { return s == CvScore::f1 ? "f1" : "hinge"; }

CvScore parse_cv_score(const std::string& s) {
  if (s == "f1") return CvScore::f1;
  if (s == "hinge") return CvScore::hinge;
  throw InvalidArgument("unknown score '" + s + "' (expected f1 or hinge)");
}

std::vector<double> default_c_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 12; ++i) g.push_back(std::pow(10.0, -2.0 + 0.5 * i));
  return g;
}

std::vector<std::vector<Index>> kfold_indices(const std::vector<int>& labels, int k, std::uint64_t seed) {
  if (k < 2) throw FoldInfeasible("k-fold needs k >= 2");
  int r = 0;
  for (int l : labels) {
    if (l < 0) throw InvalidArgument("negative class id");
    r = std::max(r, l + 1);
  }
  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(r));
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
  for (int c = 0; c < r; ++c) {
    const auto n = by_class[static_cast<std::size_t>(c)].size();
    if (n > 0 && n < static_cast<std::size_t>(k)) {
      throw FoldInfeasible("class " + std::to_string(c) + " has " + std::to_string(n) + " rows, fewer than k = " +
                           std::to_string(k));
    }
  }
  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
  std::size_t next = 0;
  for (int c = 0; c < r; ++c) {
    auto& rows = by_class[static_cast<std::size_t>(c)];
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    shuffle_in_place(rows, rng);
    for (Index i : rows) {
      folds[next].push_back(i);
      next = (next + 1) % folds.size();
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<CvCandidate> cv_candidates(const CvConfig& cfg) {
  std::vector<CvCandidate> out;
  if (cfg.include_linear) out.push_back({});
  if (!cfg.kernel_grid.candidates.empty()) {
    for (const auto& s : cfg.kernel_grid.expand()) out.push_back({s, default_method(s.family)});
  }
  if (out.empty()) throw InvalidArgument("cv: no candidates (empty kernel grid and linear disabled)");
  return out;
}

CvResult grid_search_cv(const Dataset& train_raw, const CvConfig& cfg, const SolverConfig& solver) {
  const auto t0 = Clock::now();
  train_raw.validate();
  if (cfg.c_grid.empty()) throw InvalidArgument("cv: C grid is empty");
  for (double c : cfg.c_grid) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("cv: C grid values must be finite and > 0");
  }
  const Dataset train = cfg.standardize ? standardize(train_raw) : train_raw;
  const int r = train.num_classes();
  const auto folds = kfold_indices(train.labels, cfg.folds, derive_seed(cfg.seed, 0xf01dULL));
  const auto k = folds.size();

  CvResult res;
  res.score = cfg.score;
  res.folds = cfg.folds;
  res.candidates = cv_candidates(cfg);
  std::vector<double> cs = cfg.c_grid;
  std::sort(cs.begin(), cs.end());
  const auto nq = res.candidates.size();
  const auto nc = cs.size();
  res.timings["folding"] = seconds_since(t0);

  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < r; ++a) {
    for (int b = a + 1; b < r; ++b) pairs.emplace_back(a, b);
  }

  // cell (q, ci) x fold
  const auto slot = [&](std::size_t q, std::size_t ci, std::size_t f) { return (q * nc + ci) * k + f; };
  std::vector<double> scores(nq * nc * k, worst_score(cfg.score));
  std::vector<double> secs(nq * nc * k, 0.0);
  std::vector<std::string> errors(nq * nc * k);
  std::atomic<std::size_t> fits{0};

  const auto tgrid = Clock::now();
  parallel_for(nq * k, cfg.jobs, [&](std::size_t task) {
    const std::size_t q = task / k;
    const std::size_t f = task % k;
    std::vector<Index> tr_idx;
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) tr_idx.insert(tr_idx.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(tr_idx.begin(), tr_idx.end());
    Dataset tr = subset(train, tr_idx);
    const Dataset te = subset(train, folds[f]);

    const auto tmap = Clock::now();
    Matrix zte;
    try {
      const auto& cand = res.candidates[q];
      if (cand.kernel) {
        const auto map = fit_feature_map(*cand.kernel, cand.method, cfg.feature_dim, derive_seed(cfg.seed, q, f),
                                         tr.features);
        tr.features = transform(map, tr.features);
        zte = transform(map, te.features);
      } else {
        zte = te.features;
      }
    } catch (const std::exception& e) {
      for (std::size_t ci = 0; ci < nc; ++ci) errors[slot(q, ci, f)] = e.what();
      return;
    }
    const double map_share = seconds_since(tmap) / static_cast<double>(nc);

    std::vector<BinaryProblem> probs;
    std::vector<std::vector<Index>> test_rows(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      probs.push_back(binary_problem(tr, pairs[p].first, pairs[p].second));
      for (std::size_t i = 0; i < te.labels.size(); ++i) {
        if (te.labels[i] == pairs[p].first || te.labels[i] == pairs[p].second) test_rows[p].push_back(static_cast<Index>(i));
      }
    }

    for (std::size_t ci = 0; ci < nc; ++ci) {
      const auto tc = Clock::now();
      const auto s = slot(q, ci, f);
      try {
        OvoModel ovo;
        ovo.num_classes = r;
        double hinge_sum = 0.0;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
          SolverConfig pc = solver;
          pc.seed = derive_seed(solver.seed, static_cast<std::uint64_t>(pairs[p].first),
                                static_cast<std::uint64_t>(pairs[p].second));
          auto tr_res = train_detailed(probs[p].x, probs[p].y, cs[ci], pc);
          ++fits;
          if (cfg.score == CvScore::hinge) {
            Vector sc(static_cast<Index>(test_rows[p].size()));
            Vector y(sc.size());
            for (std::size_t j = 0; j < test_rows[p].size(); ++j) {
              const Index i = test_rows[p][j];
              sc(static_cast<Index>(j)) = zte.row(i).dot(tr_res.model.w) + tr_res.model.b;
              y(static_cast<Index>(j)) = te.labels[static_cast<std::size_t>(i)] == pairs[p].first ? 1.0 : -1.0;
            }
            hinge_sum += mean_hinge(sc, y);
          } else {
            ovo.models.push_back({pairs[p].first, pairs[p].second, std::move(tr_res.model)});
          }
        }
        if (cfg.score == CvScore::hinge) {
          scores[s] = hinge_sum / static_cast<double>(pairs.size());
        } else {
          scores[s] = f1_score(ovo.predict_prepared(zte), te.labels, r);
        }
      } catch (const std::exception& e) {
        errors[s] = e.what();
      }
      secs[s] = seconds_since(tc) + map_share;
    }
  });
  res.timings["grid"] = seconds_since(tgrid);
  res.fit_count = fits.load();

  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t ci = 0; ci < nc; ++ci) {
      CvCell cell;
      cell.candidate = q;
      cell.c = cs[ci];
      for (std::size_t f = 0; f < k; ++f) {
        const auto s = slot(q, ci, f);
        cell.fold_scores.push_back(scores[s]);
        cell.seconds += secs[s];
        if (!errors[s].empty()) {
          cell.failed = true;
          if (cell.error.empty()) cell.error = errors[s];
        }
      }
      if (cell.failed) {
        cell.mean = worst_score(cfg.score);
        cell.std = 0.0;
      } else {
        double m = 0.0;
        for (double v : cell.fold_scores) m += v;
        m /= static_cast<double>(k);
        double v2 = 0.0;
        for (double v : cell.fold_scores) v2 += (v - m) * (v - m);
        cell.mean = m;
        cell.std = std::sqrt(v2 / static_cast<double>(k));
      }
      res.table.push_back(std::move(cell));
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < res.table.size(); ++i) {
    const auto& a = res.table[i];
    const auto& b = res.table[best];
    if (a.failed) continue;
    if (b.failed || better(cfg.score, a.mean, b.mean) || (a.mean == b.mean && a.c < b.c)) best = i;
  }
  res.best = best;
  res.timings["total"] = seconds_since(t0);
  return res;
}

OvoModel fit_cv_best(const Dataset& train_raw, const CvConfig& cfg, const CvResult& res, const SolverConfig& solver) {
  const auto& cell = res.best_cell();
  if (cell.failed) throw SolverError("cv: every combination failed: " + cell.error);
  const auto& cand = res.best_candidate();
  std::optional<Standardization> stdz;
  Matrix x = train_raw.features;
  if (cfg.standardize) {
    stdz = fit_standardization(x);
    x = stdz->apply(x);
  }
  std::shared_ptr<const FeatureMap> map;
  if (cand.kernel) {
    map = std::make_shared<const FeatureMap>(
        fit_feature_map(*cand.kernel, cand.method, cfg.feature_dim, derive_seed(cfg.seed, 0xf17a1ULL), x));
    x = transform(*map, x);
  }
  OvoModel m = train_ovo(x, train_raw.labels, train_raw.num_classes(), cell.c, solver, cfg.jobs);
  m.class_names = train_raw.class_names;
  m.standardization = stdz;
  m.map = map;
  for (auto& pm : m.models) pm.model.map = map;
  return m;
}

double binary_f1(const std::vector<int>& pred, const std::vector<int>& truth, int positive) {
  check_lengths(pred, truth);
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == positive, t = truth[i] == positive;
    if (p && t) ++tp;
    else if (p) ++fp;
    else if (t) ++fn;
  }
  if (tp == 0.0) return 0.0;
  const double prec = tp / (tp + fp), rec = tp / (tp + fn);
  return 2.0 * prec * rec / (prec + rec);
}

double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth, int num_classes) {
  check_lengths(pred, truth);
  if (num_classes < 1) throw InvalidArgument("macro f1 needs at least one class");
  double s = 0.0;
  for (int c = 0; c < num_classes; ++c) s += binary_f1(pred, truth, c);
  return s / static_cast<double>(num_classes);
}

double f1_score(const std::vector<int>& pred, const std::vector<int>& truth, int num_classes) {
  return num_classes == 2 ? binary_f1(pred, truth, 0) : macro_f1(pred, truth, num_classes);
}

}  // namespace sands
