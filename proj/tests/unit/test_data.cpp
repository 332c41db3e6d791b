#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "aeg/data.hpp"
#include "aeg/error.hpp"

using namespace aeg;

TEST_CASE("dataset invariants are enforced") {
  CHECK_THROWS_AS(LabeledDataset({}, 2, {}, 2), InvalidArgument);
  CHECK_THROWS_AS(LabeledDataset({1.0, 2.0, 3.0}, 2, {0, 1}, 2), InvalidArgument);
  CHECK_THROWS_AS(LabeledDataset({1.0, 2.0}, 1, {0, 2}, 2), InvalidArgument);
  CHECK_THROWS_AS(LabeledDataset({1.0, 2.0}, 1, {0, 1}, 1), InvalidArgument);
  CHECK_THROWS_AS(LabeledDataset({1.0, NAN}, 1, {0, 1}, 2), InvalidArgument);
  CHECK_NOTHROW(LabeledDataset({1.0, 2.0}, 1, {0, 0}, 3));
}

TEST_CASE("two moons") {
  const LabeledDataset ds = make_two_moons(200, 0.1, 7);
  CHECK(ds.dim() == 2);
  CHECK(std::count(ds.labels().begin(), ds.labels().end(), 0) == 100);
  CHECK(std::count(ds.labels().begin(), ds.labels().end(), 1) == 100);
  CHECK(ds == make_two_moons(200, 0.1, 7));
  CHECK_FALSE(ds == make_two_moons(200, 0.1, 8));

  const LabeledDataset clean = make_two_moons(4, 0.0, 0);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const auto p = clean.point(i);
    if (clean.label(i) == 0) {
      CHECK(std::fabs(p[0] * p[0] + p[1] * p[1] - 1.0) < 1e-9);
    } else {
      // Lower moon: (1 - cos t, 0.5 - sin t) lies on the unit circle about (1, 0.5).
      CHECK(std::fabs((p[0] - 1.0) * (p[0] - 1.0) + (p[1] - 0.5) * (p[1] - 0.5) - 1.0) < 1e-9);
      CHECK(p[1] <= 0.5);
    }
  }
  CHECK_THROWS_AS(make_two_moons(5, 0.1, 0), InvalidArgument);
  CHECK_THROWS_AS(make_two_moons(0, 0.1, 0), InvalidArgument);
}

TEST_CASE("gaussian pair") {
  const LabeledDataset ds = make_gaussian_pair(100, 1.0, 1.0, 2, 3);
  CHECK(std::count(ds.labels().begin(), ds.labels().end(), 0) == 50);
  CHECK_THROWS_AS(make_gaussian_pair(100, 1.0, 0.0, 2, 3), InvalidArgument);
  CHECK_THROWS_AS(make_gaussian_pair(100, 1.0, -1.0, 2, 3), InvalidArgument);

  const LabeledDataset tiny = make_gaussian_pair(2, 1.0, 1e-9, 1, 1);
  CHECK(tiny.point(0)[0] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(tiny.point(1)[0] == doctest::Approx(1.0).epsilon(1e-6));

  // mu = 0: class-conditional means agree within 0.15 per coordinate, across 10 seeds.
  for (std::uint64_t seed = 5; seed < 15; ++seed) {
    const LabeledDataset z = make_gaussian_pair(1000, 0.0, 1.0, 2, seed);
    double m[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 0; i < z.size(); ++i) {
      for (std::size_t j = 0; j < 2; ++j) m[z.label(i)][j] += z.point(i)[j] / 500.0;
    }
    CHECK(std::fabs(m[0][0] - m[1][0]) < 0.15);
    CHECK(std::fabs(m[0][1] - m[1][1]) < 0.15);
  }
}

TEST_CASE("split is a balanced deterministic partition") {
  const LabeledDataset ten(std::vector<double>(10, 0.0), 1, std::vector<int>(10, 0), 2);
  SplitPlan two = split(ten, 2, 0);
  CHECK(two.sizes() == std::vector<std::size_t>{5, 5});
  SplitPlan three = split(ten, 3, 0);
  std::vector<std::size_t> sizes = three.sizes();
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{3, 3, 4});
  CHECK(three == split(ten, 3, 0));
  CHECK_THROWS_AS(split(ten, 11, 0), InvalidArgument);
  CHECK_THROWS_AS(split(ten, 1, 0), InvalidArgument);

  const LabeledDataset ds = make_two_moons(200, 0.1, 7);
  const SplitPlan plan = split(ds, 7, 99);
  std::set<std::size_t> seen;
  for (std::size_t s = 0; s < plan.num_splits; ++s) {
    for (std::size_t i : plan.indices_of(s)) CHECK(seen.insert(i).second);
  }
  CHECK(seen.size() == ds.size());
  const auto sz = plan.sizes();
  CHECK(*std::max_element(sz.begin(), sz.end()) - *std::min_element(sz.begin(), sz.end()) <= 1);
}

TEST_CASE("csv format and round trip") {
  const LabeledDataset one({0.1, -2.5}, 2, {1}, 2);
  std::ostringstream out;
  write_csv(one, out);
  CHECK(out.str() == "x0,x1,y\n0.1,-2.5,1\n");

  const LabeledDataset ds = make_two_moons(200, 0.1, 7);
  std::ostringstream full;
  write_csv(ds, full);
  std::istringstream in(full.str());
  CHECK(read_csv(in, "moons.csv", 2) == ds);
}

TEST_CASE("csv parse errors name the line") {
  auto parse = [](const std::string& text, std::optional<int> k = std::nullopt) {
    std::istringstream in(text);
    return read_csv(in, "bad.csv", k);
  };
  auto line_of = [&](const std::string& text, std::optional<int> k = std::nullopt) -> std::size_t {
    try {
      parse(text, k);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("x0,y\n1.0,2\n", 2) == 2);
  CHECK(line_of("x0,y\n1.0,0\n2.0,1.5\n") == 3);
  CHECK(line_of("x0,x1,y\n1.0,2.0,0\n1.0,1\n") == 3);
  CHECK(line_of("x0,y\nabc,0\n") == 2);
  CHECK(line_of("x0,y\n1.0,-1\n") == 2);
  CHECK(parse("x0,y\n1.0,0\n2.0,1\n").num_classes() == 2);
}

TEST_CASE("discrete joint distribution validation") {
  CHECK_NOTHROW(DiscreteJointDistribution({{0.0}}, {0.7, 0.3}, {1.0}, 2));
  CHECK_THROWS_AS(DiscreteJointDistribution({{0.0}}, {0.7, 0.4}, {1.0}, 2), InvalidArgument);
  CHECK_THROWS_AS(DiscreteJointDistribution({{0.0}}, {1.1, -0.1}, {1.0}, 2), InvalidArgument);
  CHECK_THROWS_AS(DiscreteJointDistribution({{0.0}, {1.0}}, {0.5, 0.5, 0.5, 0.5}, {0.6, 0.6}, 2), InvalidArgument);
}
