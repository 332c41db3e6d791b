#include <doctest.h>

#include <cmath>
#include <sstream>

#include "aeg/classifier.hpp"
#include "aeg/error.hpp"
#include "aeg/generator.hpp"
#include "oracles.hpp"

using namespace aeg;

namespace {

double loss_at(const LinearClassifier& f, std::span<const double> x, int label) { return example_loss(f, x, label); }

}  // namespace

TEST_CASE("closed-form attack hand values") {
  const std::vector<double> w{1.0, -2.0};
  const std::vector<double> x{0.0, 0.0};
  CHECK(closed_form_attack(w, AttackBudget(0.5), x, 1.0) == std::vector<double>{-0.5, 0.5});
  CHECK(closed_form_attack(w, AttackBudget(0.5), x, -1.0) == std::vector<double>{0.5, -0.5});
  CHECK(closed_form_attack(w, AttackBudget(0.0), std::vector<double>{0.3, -0.7}, 1.0) == std::vector<double>{0.3, -0.7});
  CHECK(closed_form_attack(std::vector<double>{0.0, 3.0}, AttackBudget(0.5), x, 1.0) == std::vector<double>{0.0, -0.5});
  CHECK_THROWS_AS(closed_form_attack(w, AttackBudget(0.5), std::vector<double>{0.0}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(AttackBudget(-0.1), InvalidArgument);
}

TEST_CASE("inner max value") {
  CHECK(inner_max_value(std::vector<double>{3.0, -4.0}, AttackBudget(0.5)) == 3.5);
  CHECK(inner_max_value(std::vector<double>{0.0, 0.0}, AttackBudget(0.5)) == 0.0);
  Rng rng(31);
  for (std::size_t d = 1; d <= 12; ++d) {
    const auto w = oracle::random_vector(rng, d);
    const double eps = rng.uniform(0.0, 1.0);
    CHECK(oracle::rel_err(inner_max_value(w, AttackBudget(eps)), oracle::vertex_max(w, eps)) < 1e-13);
  }
}

TEST_CASE("closed-form attack attains the vertex maximum of the loss") {
  Rng rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 6);
    const LinearClassifier f = oracle::random_classifier(rng, FeatureMap::linear(d), 2);
    const auto w = f.non_bias_weights();
    const auto x = oracle::random_vector(rng, d);
    const int label = trial % 2;
    const double eps = rng.uniform(0.0, 0.5);
    const auto adv = closed_form_attack(w, AttackBudget(eps), x, signed_label(label));
    double best = -INFINITY;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
      std::vector<double> v(x);
      for (std::size_t j = 0; j < d; ++j) v[j] += (mask >> j) & 1 ? eps : -eps;
      best = std::max(best, oracle::logistic_loss(f.weights(), v, label));
    }
    CHECK(std::fabs(oracle::logistic_loss(f.weights(), adv, label) - best) < 1e-12);
  }
}

TEST_CASE("grid attack hand value") {
  const LinearClassifier f(FeatureMap::linear(2), 2, {0.0, 1.0, 0.0});
  const std::vector<double> x{0.0, 0.0};
  const auto adv = grid_attack(f, AttackBudget(0.1), x, 1, 11);
  CHECK(adv[0] == -0.1);
  CHECK(adv[1] == -0.1);  // every row of the column ties; smallest j wins
  CHECK(oracle::rel_err(loss_at(f, adv, 1), oracle::kLog1pExp01) < 1e-15);
  CHECK(grid_attack(f, AttackBudget(0.0), x, 1, 5) == x);
  CHECK_THROWS_AS(grid_attack(f, AttackBudget(0.1), x, 1, 10), InvalidArgument);
  CHECK_THROWS_AS(grid_attack(f, AttackBudget(0.1), x, 1, 1), InvalidArgument);
}

TEST_CASE("grid attack equals an exhaustive pass over the grid") {
  Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const LinearClassifier f = oracle::random_classifier(rng, FeatureMap::polynomial(2, 3), 2);
    const auto x = oracle::random_vector(rng, 2);
    const int label = trial % 2;
    const double eps = 0.3;
    const int r = 21;
    const double step = 2.0 * eps / (r - 1);
    const int h = (r - 1) / 2;
    std::vector<double> best_point;
    double best = -INFINITY;
    for (int i = -h; i <= h; ++i) {
      for (int j = -h; j <= h; ++j) {
        const std::vector<double> p{x[0] + static_cast<double>(i) * step, x[1] + static_cast<double>(j) * step};
        const double v = loss_at(f, p, label);
        if (v > best) {
          best = v;
          best_point = p;
        }
      }
    }
    const auto got = grid_attack(f, AttackBudget(eps), x, label, r);
    CHECK(got == best_point);
    CHECK(loss_at(f, got, label) >= loss_at(f, x, label));
  }
}

TEST_CASE("gradient attack") {
  Rng rng(34);
  const LinearClassifier lin = oracle::random_classifier(rng, FeatureMap::linear(3), 2);
  const auto x = oracle::random_vector(rng, 3);
  CHECK(gradient_attack(lin, AttackBudget(0.2), x, 1, 1, 0.2) ==
        closed_form_attack(lin.non_bias_weights(), AttackBudget(0.2), x, 1.0));
  CHECK(gradient_attack(lin, AttackBudget(0.0), x, 0, 10, 0.1) == x);
  CHECK_THROWS_AS(gradient_attack(lin, AttackBudget(0.2), x, 1, 0, 0.1), InvalidArgument);

  double worst_gap = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const LinearClassifier f = oracle::random_classifier(rng, FeatureMap::polynomial(2, 3), 2);
    const auto p = oracle::random_vector(rng, 2);
    const int label = trial % 2;
    const double eps = 0.3;
    const auto g = gradient_attack(f, AttackBudget(eps), p, label, 50, eps / 25.0);
    const auto grid = grid_attack(f, AttackBudget(eps), p, label, 201);
    const double lg = loss_at(f, g, label);
    CHECK(lg >= loss_at(f, p, label));
    CHECK(std::fabs(g[0] - p[0]) <= eps + 1e-12);
    CHECK(std::fabs(g[1] - p[1]) <= eps + 1e-12);
    worst_gap = std::max(worst_gap, loss_at(f, grid, label) - lg);
  }
  CHECK(worst_gap <= 1e-3);
}

TEST_CASE("parametric generator sampling") {
  Rng rng(35);
  ParametricGenerator zero(AttackBudget(0.3), 2, 4, 2, 0.5);
  const std::vector<double> x{0.4, -0.2};
  CHECK(parametric_sample(zero, x, 1, 7) == x);
  const std::vector<double> gumbel{0.1, -0.3, 0.7, 0.0};
  CHECK(parametric_relaxed(zero, x, 0, gumbel).x_adv == x);
  CHECK_THROWS_AS(ParametricGenerator(AttackBudget(0.3), 2, 4, 2, 0.0), InvalidArgument);

  ParametricGenerator big = ParametricGenerator::random_init(AttackBudget(0.3), 2, 4, 2, 0.5, 100.0, rng);
  for (int k = 0; k < 200; ++k) {
    const auto s = parametric_sample(big, x, k % 2, static_cast<std::uint64_t>(k));
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::fabs(s[j] - x[j]) < 0.3);
  }
  CHECK(parametric_sample(big, x, 1, 9) == parametric_sample(big, x, 1, 9));

  ParametricGenerator sharp = ParametricGenerator::random_init(AttackBudget(0.3), 2, 4, 2, 1e-6, 1.0, rng);
  for (int k = 0; k < 4; ++k) sharp.logits()[k] = 0.1 * k;
  const RelaxedSample rs = parametric_relaxed(sharp, x, 0, gumbel);
  // logits + noise = (0.1, -0.2, 0.9, 0.3): argmax 2
  for (std::size_t z = 0; z < 4; ++z) CHECK(std::fabs(rs.soft[z] - (z == 2 ? 1.0 : 0.0)) <= 1e-9);
}

TEST_CASE("relaxed-path jacobians match finite differences") {
  Rng rng(36);
  const std::size_t m = 3;
  const std::size_t d = 2;
  ParametricGenerator gen = ParametricGenerator::random_init(AttackBudget(0.25), 2, m, d, 0.7, 0.8, rng);
  for (double& l : gen.logits()) l = rng.normal();
  const std::vector<double> x{0.1, 0.2};
  const auto noise = oracle::random_vector(rng, m);
  const int label = 1;
  const RelaxedSample rs = parametric_relaxed(gen, x, label, noise);
  auto check = [](double analytic, double fd) {
    CHECK(std::fabs(analytic - fd) <= 1e-5 * std::max(1e-3, std::fabs(fd)));
  };
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t z = 0; z < m; ++z) {
      const std::size_t li = static_cast<std::size_t>(label) * m + z;
      const auto fd_logit = oracle::fd_gradient(
          [&](std::span<const double> v) {
            ParametricGenerator g2 = gen;
            g2.logits()[li] = v[0];
            return parametric_relaxed(g2, x, label, noise).delta[j];
          },
          std::vector<double>{gen.logits()[li]});
      check(rs.jac_logits[j * m + z], fd_logit[0]);
      const std::size_t ui = li * d + j;
      const auto fd_shift = oracle::fd_gradient(
          [&](std::span<const double> v) {
            ParametricGenerator g2 = gen;
            g2.shifts()[ui] = v[0];
            return parametric_relaxed(g2, x, label, noise).delta[j];
          },
          std::vector<double>{gen.shifts()[ui]});
      check(rs.jac_shifts[j * m + z], fd_shift[0]);
    }
  }

  std::vector<double> gl(gen.logits().size(), 0.0);
  std::vector<double> gs(gen.shifts().size(), 0.0);
  const std::vector<double> upstream{0.7, -1.3};
  accumulate_relaxed_gradient(gen, rs, label, upstream, 2.0, gl, gs);
  for (std::size_t z = 0; z < m; ++z) {
    CHECK(gl[z] == 0.0);
    const double expect = 2.0 * (0.7 * rs.jac_logits[z] - 1.3 * rs.jac_logits[m + z]);
    CHECK(std::fabs(gl[m + z] - expect) < 1e-14);
  }
}

TEST_CASE("attack_dataset feasibility and provenance") {
  const LabeledDataset ds = make_two_moons(200, 0.1, 5);
  const LinearClassifier f = train_logreg(FeatureMap::linear(2), ds, 1e-3).classifier;
  const ClosedFormGenerator cf{f.non_bias_weights(), AttackBudget(0.3), "rep"};
  const AdversarialDataset adv = attack_dataset(cf, ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double dlt = adv.perturbed_point(i)[j] - ds.point(i)[j];
      CHECK((std::fabs(std::fabs(dlt) - 0.3) < 1e-12 || dlt == 0.0));
    }
  }
  CHECK(adv.generator_id().find("closed-form") != std::string::npos);
  CHECK(adv.perturbed().labels()[0] == ds.labels()[0]);

  const ClosedFormGenerator none{f.non_bias_weights(), AttackBudget(0.0), "rep"};
  const AdversarialDataset same = attack_dataset(none, ds);
  CHECK(same.perturbed() == ds);

  const LinearClassifier p3 = train_logreg(FeatureMap::polynomial(2, 3), ds, 1e-3).classifier;
  const GridGenerator grid{p3, AttackBudget(0.3), 21, "rep"};
  CHECK(cross_entropy(p3, attack_dataset(grid, ds).perturbed()) >= cross_entropy(p3, ds));

  const NoiseGenerator noise{AttackBudget(0.2)};
  CHECK(attack_dataset(noise, ds, 3) == attack_dataset(noise, ds, 3));
  CHECK_FALSE(attack_dataset(noise, ds, 3) == attack_dataset(noise, ds, 4));

  std::vector<double> far(ds.points().begin(), ds.points().end());
  far[0] += 0.31;
  CHECK_THROWS_AS(AdversarialDataset(ds, far, "bad", 0.3), InternalError);
}

TEST_CASE("adversarial csv round trip") {
  const LabeledDataset ds = make_gaussian_pair(20, 1.0, 1.0, 3, 6);
  const AdversarialDataset adv = attack_dataset(NoiseGenerator{AttackBudget(0.1)}, ds, 2);
  std::ostringstream out;
  write_adversarial_csv(adv, out);
  std::istringstream in(out.str());
  CHECK(read_adversarial_csv(in, "adv.csv", adv.generator_id(), 0.1) == adv);
}
