#include "sands/copt.hpp"
#include "sands/cv.hpp"
#include "sands/dataset.hpp"
#include "sands/error.hpp"
#include "sands/experiments.hpp"
#include "sands/select.hpp"
#include "sands/serialize.hpp"
#include "sands/stats.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace sands;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kUsage = 1, kDataError = 2, kNoKernel = 3, kSolver = 4 };

struct Common {
  std::string format = "csv";
  std::string label_col;
  double alpha = kDefaultAlpha;
  std::string mode = "directional";
  std::string grid;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::size_t jobs = default_jobs();
};

std::string now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Run {
 public:
  Run(std::string command, const Common& c) : command_(std::move(command)), common_(c), started_(now_iso()) {}

  Json& config() { return config_; }

  fs::path path(const std::string& name) const { return fs::path(common_.out) / name; }

  void write(const std::string& name, const std::string& text) {
    fs::create_directories(common_.out);
    const auto p = path(name);
    write_text_file(p.string(), text);
    outputs_.push_back(p.string());
  }

  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  // Manifest goes last so every path it lists already exists.
  void finish(const Json& summary) {
    Json m{{"command", command_},
           {"version", kVersion},
           {"seed", common_.seed},
           {"config", config_},
           {"started", started_},
           {"finished", now_iso()},
           {"outputs", outputs_}};
    fs::create_directories(common_.out);
    write_text_file(path("manifest.json").string(), m.dump(2) + "\n");
    std::cout << summary.dump(2) << std::endl;
  }

 private:
  std::string command_;
  Common common_;
  std::string started_;
  Json config_ = Json::object();
  std::vector<std::string> outputs_;
};

void add_common(CLI::App* app, Common& c, bool data_flags = true) {
  if (data_flags) {
    app->add_option("--format", c.format, "Input format")->check(CLI::IsMember({"csv", "libsvm"}));
    app->add_option("--label-col", c.label_col, "CSV label column: header name or 0-based index (default: last)");
    app->add_option("--alpha", c.alpha, "S&S normalizing factor");
    app->add_option("--mode", c.mode, "Scatteredness")->check(CLI::IsMember({"directional", "pooled"}));
    app->add_option("--grid", c.grid, "Kernel grid JSON file");
  }
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

Json common_json(const Common& c) {
  return {{"format", c.format}, {"label_col", c.label_col}, {"alpha", c.alpha}, {"mode", c.mode},
          {"grid", c.grid},     {"seed", c.seed},           {"out", c.out},     {"jobs", c.jobs}};
}

LoadOptions load_options(const Common& c) {
  LoadOptions o;
  o.format = c.format == "libsvm" ? Format::libsvm : Format::csv;
  if (!c.label_col.empty()) {
    const bool numeric = c.label_col.find_first_not_of("0123456789") == std::string::npos;
    if (numeric) o.label_column = static_cast<std::size_t>(std::stoul(c.label_col));
    else o.label_column = c.label_col;
  }
  return o;
}

KernelGrid load_grid(const Common& c, Index psi) {
  if (c.grid.empty()) return default_kernel_grid(psi, c.seed);
  KernelGrid g = kernel_grid_from_json(read_json_file(c.grid));
  return g;
}

SelectOptions select_options(const Common& c) {
  SelectOptions o;
  o.alpha = c.alpha;
  o.mode = parse_spread_mode(c.mode);
  o.jobs = c.jobs;
  return o;
}

Json dataset_json(const Dataset& d) {
  Json names = Json::array();
  for (const auto& [id, name] : d.class_names) names.push_back(name);
  Json counts = Json::array();
  for (auto n : d.class_counts()) counts.push_back(n);
  return {{"source", d.meta.source}, {"n", d.size()}, {"psi", d.dims()}, {"classes", names}, {"class_counts", counts}};
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) v.push_back(std::stod(tok));
  }
  return v;
}

// ---- analyze

struct AnalyzeArgs {
  std::string data;
  bool standardize = false;
};

int cmd_analyze(const Common& c, const AnalyzeArgs& a) {
  Run run("analyze", c);
  run.config() = common_json(c);
  run.config()["data"] = a.data;
  run.config()["standardize"] = a.standardize;
  Dataset d = load_dataset(a.data, load_options(c));
  if (a.standardize) d = standardize(d);
  PairwiseOptions po;
  po.alpha = c.alpha;
  po.mode = parse_spread_mode(c.mode);
  po.sigma_floor = 1e-9;
  const auto pw = pairwise_sands(d, nullptr, po);
  const auto mn = sands_min(pw.pairs);
  Json pairs = Json::array();
  for (const auto& p : pw.pairs) {
    Json j = to_json(p);
    j["name_a"] = d.class_names.at(p.class_a);
    j["name_b"] = d.class_names.at(p.class_b);
    pairs.push_back(j);
  }
  Json copt = nullptr;
  std::vector<std::string> warnings;
  for (auto [x, y] : pw.floored) warnings.push_back("zero spread for pair (" + std::to_string(x) + "," + std::to_string(y) + "); sigma floored");
  try {
    copt = to_json(c_opt_from_sands(mn.report));
  } catch (const AlphaMismatch& e) {
    warnings.push_back(e.what());
  }
  Json summary{{"command", "analyze"},
               {"dataset", dataset_json(d)},
               {"pairs", pairs},
               {"min_pair", to_json(mn)},
               {"ratio_db", number(mn.report.ratio_db)},
               {"verdict", to_string(mn.report.verdict)},
               {"copt", copt},
               {"warnings", warnings}};
  run.write_json("analyze.json", summary);
  run.finish(summary);
  return kOk;
}

// ---- fit

struct FitArgs {
  std::string data;
  std::string no_kernel = "fail";
  Index final_dim = 2048;
  bool no_standardize = false;
};

int cmd_fit(const Common& c, const FitArgs& a) {
  Run run("fit", c);
  run.config() = common_json(c);
  run.config()["data"] = a.data;
  run.config()["no_kernel"] = a.no_kernel;
  run.config()["final_dim"] = a.final_dim;
  run.config()["standardize"] = !a.no_standardize;
  const Dataset d = load_dataset(a.data, load_options(c));
  const KernelGrid grid = load_grid(c, d.dims());
  run.config()["kernel_grid"] = to_json(grid);
  PipelineOptions po;
  po.select = select_options(c);
  po.final_dim = a.final_dim;
  po.standardize = !a.no_standardize;
  po.no_kernel = a.no_kernel == "best" ? NoKernelPolicy::best_candidate : NoKernelPolicy::fail;
  SolverConfig sc;
  sc.seed = c.seed;
  const auto res = fit_pipeline(d, grid, po, sc);

  run.write_json("model.json", to_json(res.model));
  Json files = Json::array();
  for (const auto& pm : res.model.models) {
    Json j = to_json(pm.model);
    j["pos_class"] = res.model.class_names.at(pm.pos_class);
    j["neg_class"] = res.model.class_names.at(pm.neg_class);
    const auto name = "model_" + std::to_string(pm.pos_class) + "_" + std::to_string(pm.neg_class) + ".json";
    run.write_json(name, j);
    files.push_back(run.path(name).string());
  }
  if (res.model.map) run.write_json("feature_map.json", to_json(*res.model.map));
  run.write_json("selection.json", to_json(res.report));

  const auto& ch = *res.report.chosen;
  Json summary{{"command", "fit"},
               {"dataset", dataset_json(d)},
               {"mode", to_string(res.report.mode)},
               {"kernel", ch.kernel ? to_json(*ch.kernel) : Json(nullptr)},
               {"method", ch.kernel ? Json(to_string(ch.method)) : Json(nullptr)},
               {"min_pair", to_json(ch.min_pair)},
               {"c", ch.c},
               {"branch", to_string(ch.copt.branch)},
               {"fallback", ch.fallback},
               {"svm_fits", res.svm_fits},
               {"models", res.model.models.size()},
               {"model_files", files},
               {"model", run.path("model.json").string()},
               {"warnings", res.report.warnings}};
  run.finish(summary);
  return kOk;
}

// ---- cv

struct CvArgs {
  std::string data;
  std::string score = "f1";
  int folds = 5;
  std::string c_grid;
  bool no_linear = false;
  bool no_kernels = false;
  Index feature_dim = 512;
};

int cmd_cv(const Common& c, const CvArgs& a) {
  Run run("cv", c);
  run.config() = common_json(c);
  const Dataset d = load_dataset(a.data, load_options(c));
  CvConfig cfg;
  cfg.folds = a.folds;
  if (!a.c_grid.empty()) cfg.c_grid = parse_list(a.c_grid);
  if (!a.no_kernels) cfg.kernel_grid = load_grid(c, d.dims());
  cfg.include_linear = !a.no_linear;
  cfg.score = parse_cv_score(a.score);
  cfg.seed = c.seed;
  cfg.feature_dim = a.feature_dim;
  cfg.jobs = c.jobs;
  run.config()["data"] = a.data;
  run.config()["score"] = a.score;
  run.config()["folds"] = a.folds;
  run.config()["c_grid"] = cfg.c_grid;
  run.config()["include_linear"] = cfg.include_linear;
  run.config()["kernel_grid"] = to_json(cfg.kernel_grid);
  run.config()["feature_dim"] = cfg.feature_dim;
  SolverConfig sc;
  sc.seed = c.seed;
  const auto res = grid_search_cv(d, cfg, sc);
  const Json full = to_json(res);
  run.write_json("cv.json", full);
  std::ostringstream csv;
  csv.precision(17);
  csv << "candidate,kernel,c,mean,std,failed,seconds\n";
  for (const auto& cell : res.table) {
    csv << cell.candidate << ",\"" << describe(res.candidates[cell.candidate].kernel) << "\"," << cell.c << ","
        << cell.mean << "," << cell.std << "," << (cell.failed ? "true" : "false") << "," << cell.seconds << "\n";
  }
  run.write("cv.csv", csv.str());
  Json summary{{"command", "cv"},
               {"dataset", dataset_json(d)},
               {"score", a.score},
               {"best", full["best"]},
               {"fit_count", res.fit_count},
               {"combinations", res.table.size() * static_cast<std::size_t>(res.folds)},
               {"timings", full["timings"]},
               {"result", run.path("cv.json").string()}};
  run.finish(summary);
  return kOk;
}

// ---- predict

struct PredictArgs {
  std::string model;
  std::string data;
};

int cmd_predict(const Common& c, const PredictArgs& a) {
  Run run("predict", c);
  run.config() = common_json(c);
  run.config()["model"] = a.model;
  run.config()["data"] = a.data;
  const OvoModel m = ovo_model_from_json(read_json_file(a.model));
  const Dataset d = load_dataset(a.data, load_options(c));
  const auto pred = m.predict(d.features);
  // Map dataset class ids onto the model's by name.
  std::map<std::string, int> model_ids;
  for (const auto& [id, name] : m.class_names) model_ids[name] = id;
  std::vector<int> truth;
  bool comparable = true;
  for (int l : d.labels) {
    const auto it = model_ids.find(d.class_names.at(l));
    if (it == model_ids.end()) {
      comparable = false;
      break;
    }
    truth.push_back(it->second);
  }
  std::ostringstream csv;
  csv << "row,predicted\n";
  for (std::size_t i = 0; i < pred.size(); ++i) csv << i << "," << m.class_names.at(pred[i]) << "\n";
  run.write("predictions.csv", csv.str());
  Json summary{{"command", "predict"}, {"n", pred.size()}, {"predictions", run.path("predictions.csv").string()}};
  if (comparable) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i];
    summary["accuracy"] = static_cast<double>(hit) / static_cast<double>(pred.size());
    summary["f1"] = f1_score(pred, truth, m.num_classes);
  } else {
    summary["accuracy"] = nullptr;
    summary["f1"] = nullptr;
  }
  run.finish(summary);
  return kOk;
}

// ---- experiment

struct ExpArgs {
  int runs = 100;
  Index n = 1000;
  std::string c_grid;
  std::string sigmas;
  std::string input;
  std::vector<std::string> datasets;
  Index feature_dim = 512;
};

SweepOptions sweep_options(const Common& c, const ExpArgs& a) {
  SweepOptions so;
  so.runs = a.runs;
  if (!a.c_grid.empty()) so.c_grid = parse_list(a.c_grid);
  so.jobs = c.jobs;
  return so;
}

int cmd_margin(const Common& c, const ExpArgs& a) {
  Run run("experiment margin", c);
  run.config() = common_json(c);
  run.config()["runs"] = a.runs;
  const auto so = sweep_options(c, a);
  run.config()["c_grid"] = so.c_grid;
  struct Case {
    const char* name;
    double s1, s2;
    Index n1, n2;
  };
  const Case cases[] = {{"case1", 0.12, 0.12, 2000, 2000}, {"case2", 0.09, 0.132484, 1000, 2000},
                        {"case3", 0.16, 0.0996, 1000, 2500}};
  std::ostringstream csv;
  csv.precision(17);
  csv << "case,c,mean,std,runs\n";
  Json curves = Json::array();
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& cs = cases[k];
    const auto spec = GaussianPairSpec::planar(1.0, cs.s1, cs.s2, cs.n1, cs.n2, derive_seed(c.seed, k));
    const auto r = sweep(spec, Quantity::margin_width, so);
    for (std::size_t i = 0; i < r.c_values.size(); ++i) {
      csv << cs.name << "," << r.c_values[i] << "," << r.mean_curve[i] << "," << r.std_curve[i] << "," << r.runs << "\n";
    }
    Json j = to_json(r);
    j["case"] = cs.name;
    curves.push_back(j);
  }
  run.write("margin.csv", csv.str());
  run.write_json("margin.json", curves);
  run.finish({{"command", "experiment margin"}, {"csv", run.path("margin.csv").string()}, {"runs", a.runs}});
  return kOk;
}

int cmd_hinge(const Common& c, const ExpArgs& a) {
  Run run("experiment hinge", c);
  run.config() = common_json(c);
  const auto so = sweep_options(c, a);
  const auto sigmas = a.sigmas.empty() ? std::vector<double>{0.12, 0.16, 0.3} : parse_list(a.sigmas);
  run.config()["runs"] = a.runs;
  run.config()["n_per_class"] = a.n;
  run.config()["sigmas"] = sigmas;
  run.config()["c_grid"] = so.c_grid;
  std::ostringstream csv;
  csv.precision(17);
  csv << "sigma,quantity,c,mean,std,runs\n";
  Json argmins = Json::array();
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    const auto spec = GaussianPairSpec::planar(1.0, sigmas[k], sigmas[k], a.n, a.n, derive_seed(c.seed, k));
    const auto curves = sweep_all(spec, {Quantity::train_hinge, Quantity::test_hinge}, so);
    for (const auto& r : curves) {
      for (std::size_t i = 0; i < r.c_values.size(); ++i) {
        csv << sigmas[k] << "," << to_string(r.quantity) << "," << r.c_values[i] << "," << r.mean_curve[i] << ","
            << r.std_curve[i] << "," << r.runs << "\n";
      }
    }
    const auto& test = curves[1];
    argmins.push_back({{"sigma", sigmas[k]}, {"c_opt", test.c_values[argmin_index(test.mean_curve)]}});
  }
  run.write("hinge.csv", csv.str());
  run.finish({{"command", "experiment hinge"}, {"csv", run.path("hinge.csv").string()}, {"test_argmin", argmins}});
  return kOk;
}

int cmd_copt_table(const Common& c, const ExpArgs& a) {
  Run run("experiment copt-table", c);
  run.config() = common_json(c);
  std::vector<double> grid;
  if (a.sigmas.empty()) {
    for (int i = 0; i <= 13; ++i) grid.push_back(0.04 + 0.02 * i);
  } else {
    grid = parse_list(a.sigmas);
  }
  CoptTableOptions o;
  o.n_per_class = a.n;
  o.seed = c.seed;
  o.sweep = sweep_options(c, a);
  run.config()["sigma_over_d"] = grid;
  run.config()["runs"] = a.runs;
  run.config()["n_per_class"] = a.n;
  run.config()["c_grid"] = o.sweep.c_grid;
  const auto rows = empirical_copt_table(grid, o);
  run.write("copt_table.csv", empirical_copt_csv(rows));
  run.write("copt_closed_form.csv", c_opt_table_csv(c_opt_table(grid)));
  std::vector<double> copts;
  for (const auto& r : rows) copts.push_back(r.c_opt);
  const auto peak = std::max_element(copts.begin(), copts.end()) - copts.begin();
  Json table = Json::array();
  for (const auto& r : rows) table.push_back(to_json(r));
  run.finish({{"command", "experiment copt-table"},
              {"csv", run.path("copt_table.csv").string()},
              {"peak_sigma_over_d", rows[static_cast<std::size_t>(peak)].sigma_over_d},
              {"table", table}});
  return kOk;
}

int cmd_fit_curve(const Common& c, const ExpArgs& a) {
  Run run("experiment fit-curve", c);
  run.config() = common_json(c);
  run.config()["input"] = a.input;
  std::ifstream in(a.input);
  if (!in) throw IoError("cannot open " + a.input);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(a.input + ": empty file", 1);
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) header.push_back(tok);
  }
  const auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(a.input + ": missing column " + name, 1);
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto xs = col("sigma_over_d"), ys = col("c_opt");
  std::vector<double> rx, ry, fx, fy;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) cells.push_back(tok);
    if (cells.size() <= std::max(xs, ys)) throw ParseError(a.input + ": short row", lineno);
    double x = 0.0, y = 0.0;
    try {
      x = std::stod(cells[xs]);
      y = std::stod(cells[ys]);
    } catch (const std::exception&) {
      throw ParseError(a.input + ": non-numeric cell", lineno);
    }
    switch (branch_for(ratio_db_for_sigma_over_d(x))) {
      case CoptBranch::Increasing: rx.push_back(x), ry.push_back(y); break;
      case CoptBranch::Decreasing: fx.push_back(x), fy.push_back(y); break;
      case CoptBranch::KernelRequired: break;
    }
  }
  const auto fit_branch = [](const std::vector<double>& x, const std::vector<double>& y) -> Json {
    if (x.size() < 4) return nullptr;
    const auto f = fit_exponential(x, y);
    return {{"a", f.fit.a}, {"b", f.fit.b}, {"c", f.fit.c}, {"rmse", f.rmse}, {"points", x.size()}};
  };
  Json summary{{"command", "experiment fit-curve"},
               {"increasing", fit_branch(rx, ry)},
               {"decreasing", fit_branch(fx, fy)},
               {"published",
                {{"increasing", {{"a", kIncreasingFit.a}, {"b", kIncreasingFit.b}, {"c", kIncreasingFit.c}}},
                 {"decreasing", {{"a", kDecreasingFit.a}, {"b", kDecreasingFit.b}, {"c", kDecreasingFit.c}}}}}};
  run.write_json("fit_curve.json", summary);
  run.finish(summary);
  return kOk;
}

int cmd_bench(const Common& c, const ExpArgs& a) {
  Run run("experiment bench", c);
  run.config() = common_json(c);
  run.config()["datasets"] = a.datasets;
  run.config()["feature_dim"] = a.feature_dim;
  std::vector<NamedDataset> sets;
  for (const auto& p : a.datasets) sets.push_back({fs::path(p).stem().string(), load_dataset(p, load_options(c))});
  BenchOptions bo;
  bo.split.seed = c.seed;
  if (!c.grid.empty()) bo.grid = kernel_grid_from_json(read_json_file(c.grid));
  bo.cv.seed = c.seed;
  bo.cv.jobs = c.jobs;
  bo.cv.feature_dim = a.feature_dim;
  if (!a.c_grid.empty()) bo.cv.c_grid = parse_list(a.c_grid);
  bo.pipeline.final_dim = a.feature_dim;
  bo.pipeline.select = select_options(c);
  SolverConfig sc;
  sc.seed = c.seed;
  const auto rows = benchmark_compare(sets, bo, sc);
  run.write("bench.csv", bench_csv(rows));
  Json table = Json::array();
  for (const auto& r : rows) table.push_back(to_json(r));
  run.write_json("bench.json", table);
  run.finish({{"command", "experiment bench"}, {"csv", run.path("bench.csv").string()}, {"rows", table}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"S&S ratio based kernel and C selection for linear-solver SVMs"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Common common;

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "Pairwise S&S ratios, verdict and C_opt");
  analyze->add_option("data", aa.data, "Dataset path")->required();
  analyze->add_flag("--standardize", aa.standardize, "z-score features first");
  add_common(analyze, common);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Select kernel and C by S&S, then train one model per class pair");
  fit->add_option("data", fa.data, "Dataset path")->required();
  fit->add_option("--no-kernel", fa.no_kernel, "When no candidate clears -5 dB")->check(CLI::IsMember({"fail", "best"}));
  fit->add_option("--final-dim", fa.final_dim, "Feature map dimension of the trained model");
  fit->add_flag("--no-standardize", fa.no_standardize, "Train on raw features");
  add_common(fit, common);

  CvArgs ca;
  auto* cv = app.add_subcommand("cv", "Grid-search k-fold cross-validation baseline");
  cv->add_option("data", ca.data, "Dataset path")->required();
  cv->add_option("--score", ca.score, "Fold score")->check(CLI::IsMember({"f1", "hinge"}));
  cv->add_option("--folds", ca.folds, "k");
  cv->add_option("--c-grid", ca.c_grid, "Comma-separated C values");
  cv->add_flag("--no-linear", ca.no_linear, "Drop the linear candidate");
  cv->add_flag("--no-kernels", ca.no_kernels, "Linear candidate only");
  cv->add_option("--feature-dim", ca.feature_dim, "Feature map dimension");
  add_common(cv, common);

  PredictArgs pa;
  auto* pred = app.add_subcommand("predict", "Apply a saved model");
  pred->add_option("model", pa.model, "model.json from fit")->required();
  pred->add_option("data", pa.data, "Dataset path")->required();
  add_common(pred, common);

  ExpArgs ea;
  auto* exp = app.add_subcommand("experiment", "Monte Carlo curves and benchmarks");
  exp->require_subcommand(1);
  auto* margin = exp->add_subcommand("margin", "Margin width vs C for three same-sigma cases");
  auto* hinge = exp->add_subcommand("hinge", "Train/test hinge vs C");
  auto* ctab = exp->add_subcommand("copt-table", "Empirical C_opt against sigma/d");
  auto* fitc = exp->add_subcommand("fit-curve", "Exponential fits to a copt-table CSV");
  auto* bench = exp->add_subcommand("bench", "S&S-RB against grid-search CV");
  for (auto* s : {margin, hinge, ctab}) {
    s->add_option("--runs", ea.runs, "Monte Carlo runs")->check(CLI::PositiveNumber);
    s->add_option("--c-grid", ea.c_grid, "Comma-separated C values");
    add_common(s, common, false);
  }
  for (auto* s : {hinge, ctab}) {
    s->add_option("--n", ea.n, "Points per class");
    s->add_option("--sigmas", ea.sigmas, "Comma-separated sigma (d = 1) values");
  }
  fitc->add_option("input", ea.input, "copt_table.csv")->required();
  add_common(fitc, common, false);
  bench->add_option("datasets", ea.datasets, "Dataset paths")->required();
  bench->add_option("--c-grid", ea.c_grid, "Comma-separated C values for CV");
  bench->add_option("--feature-dim", ea.feature_dim, "Feature map dimension for both methods");
  add_common(bench, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*analyze) return cmd_analyze(common, aa);
    if (*fit) return cmd_fit(common, fa);
    if (*cv) return cmd_cv(common, ca);
    if (*pred) return cmd_predict(common, pa);
    if (*margin) return cmd_margin(common, ea);
    if (*hinge) return cmd_hinge(common, ea);
    if (*ctab) return cmd_copt_table(common, ea);
    if (*fitc) return cmd_fit_curve(common, ea);
    if (*bench) return cmd_bench(common, ea);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const NoSuitableKernel& e) {
    std::cerr << "no suitable kernel: " << e.what() << "\n";
    return kNoKernel;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
