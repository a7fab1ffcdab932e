#pragma once

#include "sands/copt.hpp"
#include "sands/cv.hpp"
#include "sands/experiments.hpp"
#include "sands/kernel.hpp"
#include "sands/select.hpp"
#include "sands/stats.hpp"
#include "sands/svm.hpp"

#include <json.hpp>

#include <string>

namespace sands {

using Json = nlohmann::ordered_json;

// Non-finite doubles are written as the strings "inf", "-inf" and "nan".
Json number(double v);
double read_number(const Json& j);

std::string base64_encode(const void* data, std::size_t bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

// {"rows", "cols", "data"}: data is base64 of little-endian doubles, row-major.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json to_json(const SAndSReport& r);
Json to_json(const PairSands& p);
Json to_json(const CoptDecision& d);
Json to_json(const KernelSpec& s);
KernelSpec kernel_spec_from_json(const Json& j);
Json to_json(const Standardization& s);
Standardization standardization_from_json(const Json& j);
Json to_json(const FeatureMap& m);
FeatureMap feature_map_from_json(const Json& j);
Json to_json(const TrainDiagnostics& d);
// The feature map is written separately; `map` records only whether one exists.
Json to_json(const SvmModel& m);
SvmModel svm_model_from_json(const Json& j);
Json to_json(const OvoModel& m);
OvoModel ovo_model_from_json(const Json& j);
Json to_json(const CandidateResult& c);
Json to_json(const SelectionReport& r);
Json to_json(const CvResult& r);
Json to_json(const SweepResult& r);
Json to_json(const EmpiricalCopt& r);
Json to_json(const BenchRow& r);
Json to_json(const KernelGrid& g);

// Grid file:
//   {"scan_dim": 512, "seed": 0, "candidates": [
//      {"family": "rbf", "gamma": [0.1, 1]},
//      {"family": "polynomial", "gamma": {"min": 0.5, "step": 0.5, "max": 1}, "degree": [2, 3], "coef0": [1]}]}
KernelGrid kernel_grid_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace sands
