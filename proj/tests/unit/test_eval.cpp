#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aeg/error.hpp"
#include "aeg/eval.hpp"
#include "oracles.hpp"

using namespace aeg;

namespace {

std::vector<std::uint64_t> seeds_for(std::size_t k) {
  std::vector<std::uint64_t> s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = 100 + i;
  return s;
}

}  // namespace

TEST_CASE("mean and two sigma") {
  const std::vector<double> v{1.0, 2.0, 3.0};
  const MeanTwoSigma r = mean_two_sigma(v);
  CHECK(r.mean == 2.0);
  CHECK(r.two_sigma == 2.0);
  CHECK(mean_two_sigma(std::vector<double>{0.4}).two_sigma == 0.0);
  CHECK(mean_two_sigma(std::vector<double>{}).mean == 0.0);
}

TEST_CASE("pool training") {
  const LabeledDataset ds = make_gaussian_pair(200, 1.0, 1.0, 2, 1);
  const SplitPlan plan = split(ds, 5, 2);
  const auto seeds = seeds_for(5);
  const TargetPool pool = train_pool(ds, plan, FeatureMap::linear(2), seeds);
  CHECK(pool.size() == 5);
  CHECK(pool.provenance(3).id == "pool/split-3");
  CHECK(pool.provenance(3).split_id == 3);
  CHECK(pool.hypothesis_class() == "linear");
  CHECK(pool == train_pool(ds, plan, FeatureMap::linear(2), seeds));
  CHECK_THROWS_AS(train_pool(ds, plan, FeatureMap::linear(2), seeds_for(4)), InvalidArgument);

  PoolOptions one;
  one.splits = {2};
  const TargetPool single = train_pool(ds, plan, FeatureMap::linear(2), seeds_for(1), one);
  CHECK(single.size() == 1);
  CHECK(single.provenance(0).id == "pool/split-2");
}

TEST_CASE("targets fit their own split at least as well as the others") {
  double own = 0.0;
  double other = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LabeledDataset ds = make_two_moons(200, 0.3, seed);
    const SplitPlan plan = split(ds, 4, seed);
    const TargetPool pool = train_pool(ds, plan, FeatureMap::polynomial(2, 3), seeds_for(4));
    for (std::size_t k = 0; k < 4; ++k) {
      for (std::size_t s = 0; s < 4; ++s) {
        const double e = pool.error_rate(k, subset(ds, plan.indices_of(s)));
        (s == k ? own : other) += s == k ? e : e / 3.0;
      }
    }
  }
  CHECK(own <= other);
}

TEST_CASE("transfer evaluation") {
  const LabeledDataset ds = make_gaussian_pair(300, 1.0, 1.0, 2, 3);
  const SplitPlan plan = split(ds, 6, 4);
  PoolOptions opts;
  opts.splits = {0, 1, 2, 3, 4};
  const TargetPool pool = train_pool(ds, plan, FeatureMap::linear(2), seeds_for(5), opts);
  const LabeledDataset held = subset(ds, plan.indices_of(5));
  const LinearClassifier source = train_logreg(FeatureMap::linear(2), held, 0.0).classifier;

  const AdversarialDataset none = attack_dataset(IdentityGenerator{}, held);
  const TransferReport same = evaluate_transfer(none, pool, held);
  REQUIRE(same.targets.size() == 5);
  for (const auto& t : same.targets) CHECK(t.adv_err == t.clean_err);
  CHECK(same.macro_adv == same.macro_clean);

  const AdversarialDataset cf =
      attack_dataset(ClosedFormGenerator{source.non_bias_weights(), AttackBudget(0.5), "source/split-5"}, held);
  const TransferReport attacked = evaluate_transfer(cf, pool, held);
  CHECK(attacked.source == "source/split-5");
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& t : attacked.targets) {
    CHECK(t.adv_err >= 0.0);
    CHECK(t.adv_err <= 1.0);
    lo = std::min(lo, t.adv_err);
    hi = std::max(hi, t.adv_err);
  }
  CHECK(attacked.macro_adv >= lo);
  CHECK(attacked.macro_adv <= hi);

  double noise_total = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    noise_total += evaluate_transfer(random_noise_baseline(AttackBudget(0.5), held, seed), pool, held).macro_adv;
  }
  CHECK(attacked.macro_adv >= noise_total / 5.0);

  PoolOptions just_one;
  just_one.splits = {0};
  const TargetPool single = train_pool(ds, plan, FeatureMap::linear(2), seeds_for(1), just_one);
  const TransferReport solo = evaluate_transfer(cf, single, held);
  CHECK(solo.two_sigma == 0.0);
  CHECK(solo.two_sigma_clean == 0.0);

  std::vector<double> moved(held.points().begin(), held.points().end());
  const AdversarialDataset leaked(held, moved, "closed-form:eps=0.5:pool/split-2", 0.5);
  CHECK_THROWS_AS(evaluate_transfer(leaked, pool, held), ContractViolation);
  const AdversarialDataset unnamed(held, moved, "", 0.5);
  CHECK_THROWS_AS(evaluate_transfer(unnamed, pool, held), ContractViolation);
  const AdversarialDataset lookalike(held, moved, "closed-form:eps=0.5:pool/split-12", 0.5);
  CHECK_NOTHROW(evaluate_transfer(lookalike, pool, held));
  CHECK_THROWS_AS(evaluate_transfer(cf, pool, subset(ds, plan.indices_of(0))), InvalidArgument);

  std::ostringstream csv;
  write_transfer_csv(attacked, csv);
  CHECK(csv.str().rfind("target_id,clean_err,adv_err\npool/split-0,", 0) == 0);
  CHECK(transfer_summary_json(attacked).find("\"macro_adv\"") != std::string::npos);

  const std::vector<TransferReport> both{same, attacked};
  const SourceAggregate agg = aggregate_sources(both);
  CHECK(agg.num_sources == 2);
  CHECK(agg.macro_adv == doctest::Approx((same.macro_adv + attacked.macro_adv) / 2.0));
}

TEST_CASE("random noise baseline") {
  const LabeledDataset ds = make_gaussian_pair(400, 1.0, 1.0, 3, 5);
  const AdversarialDataset zero = random_noise_baseline(AttackBudget(0.0), ds, 1);
  CHECK(zero.perturbed() == ds);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const AdversarialDataset adv = random_noise_baseline(AttackBudget(0.2), ds, seed);
    std::vector<double> mean(3, 0.0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        const double d = adv.perturbed_point(i)[j] - ds.point(i)[j];
        CHECK(std::fabs(std::fabs(d) - 0.2) < 1e-12);
        mean[j] += d / 400.0;
      }
    }
    for (double m : mean) CHECK(std::fabs(m) <= 3.0 * 0.2 / std::sqrt(400.0));
  }
  CHECK(random_noise_baseline(AttackBudget(0.2), ds, 3) == random_noise_baseline(AttackBudget(0.2), ds, 3));
}
