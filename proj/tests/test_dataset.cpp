#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "purple/dataset.hpp"
#include "purple/synth.hpp"
#include "support.hpp"

using namespace purple;
using testing_support::make_dense;

namespace {

double normal_expectation_of_sigmoid(double mean, double sd) {
  // Simpson's rule over +-12 sd.
  const int n = 20000;
  const double lo = mean - 12 * sd, hi = mean + 12 * sd, h = (hi - lo) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = lo + i * h;
    const double z = (u - mean) / sd;
    const double f = std::exp(-0.5 * z * z) / (sd * std::sqrt(2 * M_PI)) / (1 + std::exp(-u));
    sum += f * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
  }
  return sum * h / 3;
}

}  // namespace

TEST_CASE("dense and sparse storage give the same dot products") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20, d = 30;
    std::vector<double> values(n * d);
    for (auto& v : values) v = unif(rng) < 0.2 ? normal(rng) : 0.0;
    auto dense = FeatureMatrix::dense(n, d, values);
    auto sparse = dense.to_sparse();
    CHECK(sparse.is_sparse());
    std::vector<double> w(d);
    for (auto& v : w) v = normal(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = dense.dot(i, w), b = sparse.dot(i, w);
      CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
    CHECK(sparse.to_dense().row_dense(7) == dense.row_dense(7));
  }
}

TEST_CASE("sparse rows reject bad indices") {
  CHECK_THROWS_AS(FeatureMatrix::sparse(5, {{{5, 1.0}}}), DatasetError);
  CHECK_THROWS_AS(FeatureMatrix::sparse(5, {{{2, 1.0}, {2, 1.0}}}), DatasetError);
  CHECK_THROWS_AS(FeatureMatrix::sparse(5, {{{3, 1.0}, {1, 1.0}}}), DatasetError);
  CHECK_NOTHROW(FeatureMatrix::sparse(5, {{{1, 1.0}, {4, 2.0}}, {}}));
}

TEST_CASE("without_columns drops entries but keeps dimensionality") {
  auto m = FeatureMatrix::sparse(6, {{{0, 1.0}, {2, 1.0}, {5, 1.0}}, {{2, 1.0}}});
  std::vector<std::uint32_t> cols = {2, 5};
  auto out = m.without_columns(cols);
  CHECK(out.n_dims() == 6);
  CHECK(out.nnz() == 1);
  CHECK(out.value(0, 0) == 1.0);
  CHECK(out.value(0, 2) == 0.0);
  CHECK(out.row_entries(1).empty());
}

TEST_CASE("dense csv row maps fields directly") {
  auto d = parse_dataset("g,s,y,x0,x1\na,1,1,0.5,-1.0\n", FileFormat::dense_csv);
  REQUIRE(d.size() == 1);
  CHECK(d.group_names[d.group[0]] == "a");
  CHECK(d.s[0] == 1);
  CHECK(d.y[0] == 1);
  CHECK(d.features.value(0, 0) == 0.5);
  CHECK(d.features.value(0, 1) == -1.0);
}

TEST_CASE("sparse line with unknown y") {
  auto d = parse_dataset("#sparse d=20\nb 0 ? 3:1 17:1\n", FileFormat::sparse_pu);
  REQUIRE(d.size() == 1);
  CHECK(d.group_names[d.group[0]] == "b");
  CHECK_FALSE(d.has_true_labels());
  CHECK(d.features.row_entries(0).size() == 2);
  CHECK(d.features.value(0, 17) == 1.0);
  CHECK(d.n_dims() == 20);
}

TEST_CASE("malformed rows raise parse errors naming the line") {
  auto line_of = [](const std::string& text, FileFormat f) -> std::size_t {
    try {
      parse_dataset(text, f);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("g,s,y,x0\na,0,0,1\na,2,1,0.5\n", FileFormat::dense_csv) == 3);
  CHECK(line_of("g,s,y,x0\na,0,0\n", FileFormat::dense_csv) == 2);
  CHECK(line_of("#sparse d=4\na 1 1 4:1\n", FileFormat::sparse_pu) == 2);
  CHECK(line_of("#sparse d=4\na 1 1 1:1\na 0 ? 3:1 2:1\n", FileFormat::sparse_pu) == 3);
  CHECK(line_of("#sparse d=4\na 3 ? 1:1\n", FileFormat::sparse_pu) == 2);
  try {
    parse_dataset("g,s,y,x0\na,2,1,0.5\n", FileFormat::dense_csv);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("observed positive with y=0 is rejected") {
  CHECK_THROWS_AS(parse_dataset("g,s,y,x0\na,1,0,0.5\n", FileFormat::dense_csv), DatasetError);
}

TEST_CASE("write then load round-trips both formats") {
  auto data = generate_gauss([] {
    GaussSynthConfig c;
    c.n_a = 40;
    c.n_b = 60;
    return c;
  }(), 11);
  const auto dir = std::filesystem::temp_directory_path() / "purple_roundtrip";
  std::filesystem::create_directories(dir);
  for (auto fmt : {FileFormat::dense_csv, FileFormat::sparse_pu}) {
    const auto path = (dir / (fmt == FileFormat::dense_csv ? "d.csv" : "d.pu")).string();
    write_dataset(data, path, fmt);
    auto back = load_dataset(path, fmt);
    REQUIRE(back.size() == data.size());
    CHECK(back.s == data.s);
    CHECK(back.y == data.y);
    for (std::size_t i = 0; i < data.size(); ++i) {
      CHECK(back.group_names[back.group[i]] == data.group_names[data.group[i]]);
      for (std::size_t j = 0; j < data.n_dims(); ++j)
        CHECK(std::abs(back.features.value(i, j) - data.features.value(i, j)) <= 1e-12);
    }
    CHECK(format_dataset(back, fmt) == format_dataset(data, fmt));
  }
  CHECK(format_for_path("x.csv") == FileFormat::dense_csv);
  CHECK(format_for_path("x.pu") == FileFormat::sparse_pu);
}

TEST_CASE("split sizes, determinism and coverage") {
  std::vector<double> x(10, 0.0);
  auto d = make_dense(1, x, std::vector<GroupId>(10, 0), std::vector<std::uint8_t>(10, 0), {"a"});
  SplitSpec spec;
  auto idx = split_indices(d, spec, 0);
  CHECK(idx.train.size() == 6);
  CHECK(idx.val.size() == 2);
  CHECK(idx.test.size() == 2);

  std::vector<double> x100(100, 0.0);
  std::vector<GroupId> g100(100);
  for (std::size_t i = 0; i < 100; ++i) g100[i] = i < 30 ? 0 : 1;
  auto d100 = make_dense(1, x100, g100, std::vector<std::uint8_t>(100, 0));
  auto a = split_indices(d100, spec, 0), b = split_indices(d100, spec, 0), c = split_indices(d100, spec, 1);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.test == b.test);
  CHECK(a.test != c.test);

  std::set<std::size_t> all;
  for (auto* part : {&a.train, &a.val, &a.test}) all.insert(part->begin(), part->end());
  CHECK(all.size() == 100);
  CHECK(a.train.size() + a.val.size() + a.test.size() == 100);
  // Stratified: group 0 (30 rows) puts 6 rows in test, group 1 (70 rows) 14.
  CHECK(std::count_if(a.test.begin(), a.test.end(), [](std::size_t i) { return i < 30; }) == 6);
  CHECK(a.test.size() == 20);

  auto tiny = make_dense(1, {0, 0, 0, 0, 0}, {0, 0, 0, 1, 1}, {0, 0, 0, 0, 0});
  CHECK_THROWS_AS(split_indices(tiny, spec, 0), DatasetError);
  CHECK_THROWS_AS(split_indices(d100, spec, 5), DatasetError);
}

TEST_CASE("stratified split preserves per-group observed rate") {
  GaussSynthConfig cfg;
  auto data = generate_gauss(cfg, 5);
  SplitSpec spec;
  auto parts = split(data, spec, 0);
  auto full = group_summary(data);
  for (const auto* part : {&parts.train, &parts.val, &parts.test}) {
    auto summ = group_summary(*part);
    for (std::size_t g = 0; g < 2; ++g) {
      const double p = full[g].observed_rate;
      const double se = std::sqrt(p * (1 - p) / static_cast<double>(summ[g].n));
      CHECK(std::abs(summ[g].observed_rate - p) < 4 * se);
    }
  }
}

TEST_CASE("group summary counts") {
  auto d = make_dense(1, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 1}, {1, 0, 0, 1, 0});
  auto s = group_summary(d);
  REQUIRE(s.size() == 2);
  CHECK(s[0].name == "a");
  CHECK(s[0].n == 4);
  CHECK(s[0].positives == 2);
  CHECK(s[0].observed_rate == 0.5);
  CHECK(group_summary(LabeledDataset{}).empty());
}

TEST_CASE("observed rate in a generated group matches an integrated oracle") {
  GaussSynthConfig cfg;
  cfg.c = {{"a", 0.5}, {"b", 0.5}};
  // Pooled over five seeds: 100k group-b rows.
  double labeled = 0, n = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto s = group_summary(generate_gauss(cfg, seed));
    labeled += static_cast<double>(s[1].positives);
    n += static_cast<double>(s[1].n);
  }
  // Group b: w.x/|w| ~ N(sqrt(5) * 1, 16).
  const double prev_b = normal_expectation_of_sigmoid(std::sqrt(5.0), 4.0);
  const double q = 0.5 * prev_b;
  const double se = std::sqrt(q * (1 - q) / n);
  CHECK(std::abs(labeled / n - q) < 3 * se);
}
