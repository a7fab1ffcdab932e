#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sands/dataset.hpp"
#include "sands/error.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

using namespace sands;

TEST_CASE("csv with string labels") {
  const auto d = parse_csv("x,y,label\n1,2,A\n3,4,B\n5,6,A\n7,8,B\n");
  CHECK(d.size() == 4);
  CHECK(d.dims() == 2);
  CHECK(d.num_classes() == 2);
  CHECK(d.class_names.at(0) == "A");
  CHECK(d.class_names.at(1) == "B");
  CHECK(d.labels == std::vector<int>{0, 1, 0, 1});
  CHECK(d.features(2, 1) == 6.0);
}

TEST_CASE("csv label column by name and by index") {
  const std::string text = "cls,a,b\nx,1,2\ny,3,4\n";
  LoadOptions by_name;
  by_name.label_column = std::string("cls");
  const auto d1 = parse_csv(text, by_name);
  LoadOptions by_index;
  by_index.label_column = std::size_t{0};
  const auto d2 = parse_csv(text, by_index);
  CHECK(d1.features == d2.features);
  CHECK(d1.features(1, 0) == 3.0);
  CHECK(d1.labels == d2.labels);

  LoadOptions missing;
  missing.label_column = std::string("nope");
  CHECK_THROWS_AS(parse_csv(text, missing), ParseError);
}

TEST_CASE("csv quoting") {
  const auto d = parse_csv("a,\"b,c\",label\n1,\"2\",\"one, two\"\n3,4,\"say \"\"hi\"\"\"\n");
  CHECK(d.features(0, 1) == 2.0);
  CHECK(d.class_names.at(0) == "one, two");
  CHECK(d.class_names.at(1) == "say \"hi\"");
}

TEST_CASE("numeric labels sort numerically") {
  const auto d = parse_csv("a,label\n1,10\n2,9\n3,10\n4,-1\n");
  CHECK(d.class_names.at(0) == "-1");
  CHECK(d.class_names.at(1) == "9");
  CHECK(d.class_names.at(2) == "10");
  CHECK(d.labels == std::vector<int>{2, 1, 2, 0});
}

TEST_CASE("csv errors carry line numbers") {
  try {
    parse_csv("a,label\n1,A\n2\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse_csv("a,label\n1,A\nzz,B\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_csv(""), ParseError);
  CHECK_THROWS_AS(parse_csv("a,label\n1,\"A\n"), ParseError);
}

TEST_CASE("non-finite values are rejected with their cells") {
  try {
    parse_csv("a,b,label\n1,nan,A\ninf,2,B\n");
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    const std::string w = e.what();
    CHECK(w.find("(row 0, col 1)") != std::string::npos);
    CHECK(w.find("(row 1, col 0)") != std::string::npos);
  }
}

TEST_CASE("single class is an error") {
  CHECK_THROWS_AS(parse_csv("a,label\n1,A\n2,A\n"), SingleClassError);
}

TEST_CASE("libsvm zero fills gaps") {
  LoadOptions o;
  o.format = Format::libsvm;
  o.num_features = 3;
  const auto d = parse_libsvm("1 1:0.5 3:2.0\n-1 2:1\n", o);
  CHECK(d.dims() == 3);
  CHECK(d.features(0, 0) == 0.5);
  CHECK(d.features(0, 1) == 0.0);
  CHECK(d.features(0, 2) == 2.0);
  CHECK(d.features(1, 1) == 1.0);
  CHECK(d.class_names.at(0) == "-1");
  CHECK(d.class_names.at(1) == "1");

  const auto inferred = parse_libsvm("1 1:0.5 3:2.0\n-1 2:1\n");
  CHECK(inferred.dims() == 3);
  CHECK_THROWS_AS(parse_libsvm("1 0:1\n-1 1:1\n"), ParseError);
  CHECK_THROWS_AS(parse_libsvm("1 1:1\n-1 a\n"), ParseError);
}

TEST_CASE("iris file") {
  const auto d = load_dataset(std::string(SANDS_DATA_DIR) + "/iris.csv");
  CHECK(d.size() == 150);
  CHECK(d.dims() == 4);
  CHECK(d.num_classes() == 3);
  CHECK(d.class_counts() == std::vector<Index>{50, 50, 50});
}

TEST_CASE("missing file is an io error") {
  CHECK_THROWS_AS(load_dataset("/nonexistent/file.csv"), IoError);
  CHECK_THROWS_AS(load_dataset("/nonexistent/file.csv"), DataError);
}

TEST_CASE("csv round trip") {
  Dataset d;
  Rng rng(11);
  std::normal_distribution<double> z(0.0, 1e3);
  d.features.resize(40, 5);
  for (Index i = 0; i < 40; ++i) {
    for (Index j = 0; j < 5; ++j) d.features(i, j) = z(rng) * std::pow(10.0, static_cast<double>(j) - 2.0);
    d.labels.push_back(static_cast<int>(i % 3));
  }
  d.class_names = {{0, "a"}, {1, "b"}, {2, "c"}};
  const auto path = (std::filesystem::temp_directory_path() / "sands_roundtrip.csv").string();
  write_csv(d, path);
  const auto back = load_dataset(path);
  CHECK(back.labels == d.labels);
  CHECK(back.class_names == d.class_names);
  CHECK((back.features - d.features).cwiseAbs().maxCoeff() <= 1e-12);
  std::filesystem::remove(path);
}

TEST_CASE("standardize") {
  Dataset d;
  d.features.resize(3, 2);
  d.features << 1, 5, 2, 5, 3, 5;
  d.labels = {0, 1, 0};
  const auto s = standardize(d);
  CHECK(s.features(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(s.features(1, 0) == doctest::Approx(0.0));
  CHECK(s.features(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
  CHECK(s.features.col(1).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(s.meta.standardization);
  CHECK(s.meta.standardization->zero_variance == std::vector<bool>{false, true});

  const auto twice = standardize(s);
  CHECK((twice.features - s.features).cwiseAbs().maxCoeff() <= 1e-12);

  // test rows use the train record unchanged
  Matrix test(1, 2);
  test << 4, 7;
  const Matrix t = s.meta.standardization->apply(test);
  CHECK(t(0, 0) == doctest::Approx((4.0 - 2.0) / std::sqrt(2.0 / 3.0)));
  CHECK(t(0, 1) == 0.0);
}

TEST_CASE("stratified split counts") {
  Dataset d;
  d.features = Matrix::Zero(10, 1);
  for (int i = 0; i < 10; ++i) {
    d.features(i, 0) = i;
    d.labels.push_back(i % 2);
  }
  const auto [tr, te] = split(d, {0.7, true, 5});
  CHECK(tr.size() + te.size() == 10);
  CHECK(tr.size() >= 6);
  CHECK(tr.size() <= 8);
  const auto counts = tr.class_counts();
  CHECK(counts[0] >= 3);
  CHECK(counts[1] >= 3);
  const auto a = split_indices(d, {0.7, true, 5});
  const auto b = split_indices(d, {0.7, true, 5});
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
}

TEST_CASE("split partitions indices for random triples") {
  Rng rng(2024);
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<Index>(6 + uniform_index(rng, 200));
    const double frac = 0.15 + 0.7 * static_cast<double>(uniform_index(rng, 1000)) / 1000.0;
    const bool strat = uniform_index(rng, 2) == 0;
    Dataset d;
    d.features = Matrix::Zero(n, 1);
    for (Index i = 0; i < n; ++i) d.labels.push_back(i < 3 ? 0 : static_cast<int>(uniform_index(rng, 3)) % 2);
    d.labels[1] = 1;
    d.labels[2] = 1;
    SplitSpec s{frac, strat, rng()};
    SplitIndices idx;
    try {
      idx = split_indices(d, s);
    } catch (const SplitInfeasible&) {
      continue;
    }
    std::vector<Index> all = idx.train;
    all.insert(all.end(), idx.test.begin(), idx.test.end());
    std::sort(all.begin(), all.end());
    std::vector<Index> expect(static_cast<std::size_t>(n));
    std::iota(expect.begin(), expect.end(), Index{0});
    CHECK(all == expect);
    std::set<Index> tr(idx.train.begin(), idx.train.end());
    for (Index i : idx.test) CHECK(tr.count(i) == 0);
  }
}

TEST_CASE("stratified proportions within one sample") {
  Dataset d;
  d.features = Matrix::Zero(97, 1);
  for (int i = 0; i < 97; ++i) d.labels.push_back(i < 60 ? 0 : (i < 85 ? 1 : 2));
  const auto idx = split_indices(d, {0.7, true, 3});
  std::vector<int> tc(3, 0);
  for (Index i : idx.train) ++tc[static_cast<std::size_t>(d.labels[static_cast<std::size_t>(i)])];
  CHECK(std::abs(tc[0] - 0.7 * 60) <= 1.0);
  CHECK(std::abs(tc[1] - 0.7 * 25) <= 1.0);
  CHECK(std::abs(tc[2] - 0.7 * 12) <= 1.0);
}

TEST_CASE("split errors") {
  Dataset tiny;
  tiny.features = Matrix::Zero(5, 1);
  tiny.labels = {0, 0, 0, 0, 1};
  CHECK_THROWS_AS(split(tiny, {}), SplitInfeasible);
  CHECK_THROWS_AS(split_indices(tiny, {1.0, true, 0}), InvalidArgument);
}

TEST_CASE("binary problem maps lower id to +1") {
  Dataset d;
  d.features.resize(4, 1);
  d.features << 0, 1, 2, 3;
  d.labels = {2, 0, 1, 2};
  const auto p = binary_problem(d, 0, 2);
  REQUIRE(p.x.rows() == 3);
  CHECK(p.y(0) == -1.0);
  CHECK(p.y(1) == 1.0);
  CHECK(p.y(2) == -1.0);
  CHECK(p.x(1, 0) == 1.0);
  CHECK_THROWS_AS(binary_problem(d, 0, 7), UnknownClass);
}
