#include "sands/copt.hpp"

#include "sands/error.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace sands {

double ExponentialFit::operator()(double x) const { return a * std::exp(b * x) + c; }

std::string to_string(CoptBranch b) {
  switch (b) {
    case CoptBranch::Increasing: return "Increasing";
    case CoptBranch::Decreasing: return "Decreasing";
    case CoptBranch::KernelRequired: return "KernelRequired";
  }
  return "?";
}

CoptBranch branch_for(double ratio_db) {
  switch (verdict_for(ratio_db)) {
    case Verdict::LinearIncreasing: return CoptBranch::Increasing;
    case Verdict::LinearDecreasing: return CoptBranch::Decreasing;
    case Verdict::KernelRequired: return CoptBranch::KernelRequired;
  }
  return CoptBranch::KernelRequired;
}

double ratio_db_for_sigma_over_d(double sigma_over_d, double alpha) {
  return 20.0 * std::log10(1.0 / (alpha * sigma_over_d));
}

double sigma_over_d_for_ratio_db(double ratio_db, double alpha) {
  return 1.0 / (alpha * std::pow(10.0, ratio_db / 20.0));
}

CoptDecision c_opt_from_sands(const SAndSReport& r) {
  if (std::abs(r.alpha - kDefaultAlpha) > 1e-12) {
    throw AlphaMismatch("C_opt fits are defined for alpha = 6 only (got " + std::to_string(r.alpha) + ")");
  }
  CoptDecision dec;
  dec.input_ratio_db = r.ratio_db;
  dec.sigma_over_d = sigma_over_d_for_ratio_db(r.ratio_db, r.alpha);
  dec.branch = branch_for(r.ratio_db);
  switch (dec.branch) {
    case CoptBranch::Increasing: dec.c_opt = std::max(kMinC, kIncreasingFit(dec.sigma_over_d)); break;
    case CoptBranch::Decreasing: dec.c_opt = std::max(kMinC, kDecreasingFit(dec.sigma_over_d)); break;
    case CoptBranch::KernelRequired: break;
  }
  return dec;
}

std::vector<CoptRow> c_opt_table(const std::vector<double>& grid) {
  std::vector<CoptRow> rows;
  rows.reserve(grid.size());
  for (double s : grid) {
    if (!(s > 0.0 && s <= 0.35)) throw InvalidArgument("sigma/d grid values must lie in (0, 0.35]");
    SAndSReport r = sands_ratio(1.0, s, kDefaultAlpha);
    const auto dec = c_opt_from_sands(r);
    rows.push_back({s, r.ratio_db, dec.c_opt, dec.branch});
  }
  return rows;
}

std::string c_opt_table_csv(const std::vector<CoptRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "sigma_over_d,ratio_db,c_opt,branch\n";
  for (const auto& r : rows) {
    out << r.sigma_over_d << "," << r.ratio_db << ",";
    if (r.c_opt) out << *r.c_opt;
    out << "," << to_string(r.branch) << "\n";
  }
  return out.str();
}

}  // namespace sands
