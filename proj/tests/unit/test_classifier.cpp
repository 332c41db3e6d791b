#include <doctest.h>

#include <cmath>

#include "aeg/classifier.hpp"
#include "aeg/error.hpp"
#include "aeg/rng.hpp"
#include "oracles.hpp"

using namespace aeg;

namespace {

LabeledDataset separable_1d() { return LabeledDataset({-1.0, 1.0}, 1, {0, 1}, 2); }

}  // namespace

TEST_CASE("log1p_exp and sigmoid against high-precision values") {
  CHECK(oracle::rel_err(log1p_exp(-30.0), 9.3576229688397367794e-14) < 1e-15);
  CHECK(oracle::rel_err(log1p_exp(-1.0), 0.31326168751822283405) < 1e-15);
  CHECK(oracle::rel_err(log1p_exp(1.0), 1.313261687518222834) < 1e-15);
  CHECK(oracle::rel_err(log1p_exp(30.0), 30.000000000000093576) < 1e-15);
  CHECK(log1p_exp(-800.0) == 0.0);
  CHECK(log1p_exp(800.0) == 800.0);
  CHECK(oracle::rel_err(log1p_exp(-0.1), oracle::kLog1pExpMinus01) < 1e-15);
  CHECK(oracle::rel_err(sigmoid(2.0), 0.88079707797788244406) < 1e-15);
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(-800.0) == 0.0);
  CHECK(sigmoid(800.0) == 1.0);
}

TEST_CASE("zero weights give ln K") {
  const LabeledDataset ds2 = oracle::small_overlap();
  CHECK(oracle::rel_err(cross_entropy(LinearClassifier::zeros(FeatureMap::linear(2), 2), ds2), oracle::kLn2) < 1e-15);
  const LabeledDataset ds3({0.0, 1.0, 2.0}, 1, {0, 1, 2}, 3);
  CHECK(oracle::rel_err(cross_entropy(LinearClassifier::zeros(FeatureMap::polynomial(1, 3), 3), ds3), oracle::kLn3) < 1e-15);
}

TEST_CASE("cross-entropy against high-precision values") {
  const LinearClassifier f3(FeatureMap::linear(2), 3, {0.5, -1, 0.25, 0, 0.75, -0.5, -0.25, 0.125, 1});
  const LabeledDataset d3({0.3, -1.2, 1.5, 0.4, -0.7, 0.9, 2.0, -0.5}, 2, {0, 2, 1, 2}, 3);
  CHECK(oracle::rel_err(cross_entropy(f3, d3), 1.913835807418830238) < 1e-14);

  const LinearClassifier f2(FeatureMap::linear(2), 2, {0.2, -0.7, 1.1});
  const LabeledDataset d2({0.5, 0.5, -1, 2, 1.5, -0.25, 0, 0, -2, -1}, 2, {1, 0, 1, 0, 1}, 2);
  CHECK(oracle::rel_err(cross_entropy(f2, d2), 1.2670890420297079846) < 1e-14);

  double direct = 0.0;
  for (std::size_t i = 0; i < d2.size(); ++i) direct += oracle::logistic_loss(f2.weights(), d2.point(i), d2.label(i));
  CHECK(oracle::rel_err(cross_entropy(f2, d2), direct / 5.0) < 1e-14);
}

TEST_CASE("uniform example weights reproduce the unweighted loss exactly") {
  Rng rng(21);
  const LabeledDataset ds = oracle::random_dataset(rng, 37, 2, 3);
  const LinearClassifier f = oracle::random_classifier(rng, FeatureMap::polynomial(2, 3), 3);
  const std::vector<double> w(37, 1.0 / 37.0);
  CHECK(cross_entropy(f, ds, w) == cross_entropy(f, ds));
  const std::vector<double> bad(37, 1.0 / 36.0);
  CHECK_THROWS_AS(cross_entropy(f, ds, bad), InvalidArgument);
}

TEST_CASE("weight and input gradients match finite differences") {
  Rng rng(22);
  for (int K : {2, 3}) {
    const FeatureMap map = FeatureMap::polynomial(2, 3);
    const LabeledDataset ds = oracle::random_dataset(rng, 9, 2, K);
    const LinearClassifier f = oracle::random_classifier(rng, map, K, 0.5);
    const LossGradient g = loss_gradient(f, ds, std::nullopt, true);
    const auto fd = oracle::fd_gradient(
        [&](std::span<const double> w) {
          return cross_entropy(LinearClassifier(map, K, std::vector<double>(w.begin(), w.end())), ds);
        },
        f.weights());
    for (std::size_t k = 0; k < fd.size(); ++k) CHECK(std::fabs(g.weights[k] - fd[k]) < 1e-7);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto gi = input_gradient(f, ds.point(i), ds.label(i));
      const auto fdi = oracle::fd_gradient([&](std::span<const double> x) { return example_loss(f, x, ds.label(i)); },
                                           ds.point(i));
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(std::fabs(gi[j] - fdi[j]) < 1e-7);
        CHECK(g.inputs[i * 2 + j] == doctest::Approx(gi[j]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("input gradient hand value") {
  const LinearClassifier f(FeatureMap::linear(2), 2, {0.0, 1.0, 0.0});
  const auto g = input_gradient(f, std::vector<double>{0.0, 0.0}, 1);
  CHECK(g[0] == -0.5);
  CHECK(g[1] == 0.0);
}

TEST_CASE("prediction ties go to the lowest class") {
  const LinearClassifier f2(FeatureMap::linear(1), 2, {0.0, 1.0});
  CHECK(predict(f2, std::vector<double>{0.0}) == 0);
  CHECK(predict(f2, std::vector<double>{1e-300}) == 1);
  const LinearClassifier f3 = LinearClassifier::zeros(FeatureMap::linear(1), 3);
  CHECK(predict(f3, std::vector<double>{5.0}) == 0);
  const LinearClassifier g3(FeatureMap::linear(1), 3, {0, 0, 1, 1, 0, 0});
  CHECK(predict(g3, std::vector<double>{1.0}) == 1);
  CHECK(error_rate(f2, separable_1d()) == 0.0);
}

TEST_CASE("embedding into a larger map preserves scores") {
  Rng rng(23);
  const LinearClassifier f = oracle::random_classifier(rng, FeatureMap::polynomial(2, 3), 2);
  const LinearClassifier g = f.embed_into(FeatureMap::polynomial(2, 5));
  const LabeledDataset ds = oracle::random_dataset(rng, 20, 2, 2);
  CHECK(oracle::rel_err(cross_entropy(f, ds), cross_entropy(g, ds)) < 1e-13);
  CHECK_THROWS_AS(g.embed_into(FeatureMap::linear(2)), InvalidArgument);
}

TEST_CASE("logistic regression reaches the known optimum") {
  const TrainResult sep = train_logreg(FeatureMap::linear(1, false), separable_1d(), 0.1);
  CHECK(std::fabs(sep.classifier.weights()[0] - 1.6335061701558463842) < 1e-6);
  CHECK(std::fabs(sep.report.final_objective - 0.31176731392220461372) < 1e-12);
  CHECK(sep.report.converged);

  const TrainResult sym = train_logreg(FeatureMap::linear(1), separable_1d(), 0.1);
  CHECK(std::fabs(sym.classifier.weights()[0]) < 1e-8);
  CHECK(std::fabs(sym.classifier.weights()[1] - 1.6335061701558463842) < 1e-6);

  TrainOptions opts;
  opts.record_trace = true;
  const TrainResult ov = train_logreg(FeatureMap::linear(2), oracle::small_overlap(), 0.0, opts);
  CHECK(std::fabs(ov.report.final_objective - 0.57713371259550321151) < 1e-10);
  const double w_star[3] = {-0.24990967644575636, 0.74133287179911452, 0.50398603464105772};
  for (int k = 0; k < 3; ++k) CHECK(std::fabs(ov.classifier.weights()[k] - w_star[k]) < 1e-4);
  for (std::size_t t = 1; t < ov.report.objective_trace.size(); ++t) {
    CHECK(ov.report.objective_trace[t] <= ov.report.objective_trace[t - 1]);
  }
}

TEST_CASE("training is deterministic and warm starts agree") {
  const LabeledDataset ds = make_two_moons(100, 0.1, 4);
  const FeatureMap map = FeatureMap::polynomial(2, 3);
  const TrainResult a = train_logreg(map, ds, 1e-3);
  const TrainResult b = train_logreg(map, ds, 1e-3);
  CHECK(a.classifier == b.classifier);
  const TrainResult c = train_logreg(map, ds, 1e-3, {}, std::nullopt, &a.classifier);
  CHECK(std::fabs(c.report.final_objective - a.report.final_objective) < 1e-8);
}

TEST_CASE("robust objective against reference optima") {
  const LabeledDataset ds = oracle::small_overlap();
  const TrainResult r1 = train_robust_logreg_l1(ds, 0.1);
  CHECK(std::fabs(r1.report.final_objective - 0.6226325313295069) < 1e-5);
  CHECK(std::fabs(robust_objective(r1.classifier, ds, 0.1) - r1.report.final_objective) < 1e-15);
  const TrainResult r3 = train_robust_logreg_l1(ds, 0.3);
  CHECK(std::fabs(r3.report.final_objective - 0.6815840934805011) < 1e-5);
  CHECK(std::fabs(r3.classifier.weights()[2]) < 1e-2);
  CHECK(r3.classifier.trained_with().algorithm == "robust-l1-subgradient");
  CHECK(r3.classifier.trained_with().epsilon == 0.3);
}

TEST_CASE("robust objective matches the brute-force inner maximum") {
  Rng rng(24);
  const LabeledDataset ds = oracle::random_dataset(rng, 15, 3, 2);
  const LinearClassifier f = oracle::random_classifier(rng, FeatureMap::linear(3), 2);
  const auto w = f.weights();
  const double eps = 0.25;
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double y = signed_label(ds.label(i));
    const double margin = -y * oracle::naive_dot(w, FeatureMap::linear(3).featurize(ds.point(i))) +
                          oracle::vertex_max(w.subspan(1), eps);
    total += std::log1p(std::exp(margin));
  }
  const double ridge = 0.5 * f.l2_reg() * oracle::naive_dot(w, w);
  CHECK(oracle::rel_err(robust_objective(f, ds, eps), total / 15.0 + ridge) < 1e-13);
}

TEST_CASE("robust training edge cases") {
  RobustTrainOptions opts;
  const TrainResult big = train_robust_logreg_l1(separable_1d(), 1.5, opts);
  for (double w : big.classifier.weights()) CHECK(std::fabs(w) < 1e-2);

  const LabeledDataset ds = oracle::small_overlap();
  const TrainResult r0 = train_robust_logreg_l1(ds, 0.0);
  const TrainResult lr = train_logreg(FeatureMap::linear(2), ds, 1e-6);
  CHECK(std::fabs(r0.report.final_objective - lr.report.final_objective) < 1e-4);

  RobustTrainOptions no_ridge;
  no_ridge.l2_reg = 0.0;
  CHECK_THROWS_AS(train_robust_logreg_l1(separable_1d(), 0.1, no_ridge), UnboundedMinimizer);
  CHECK_NOTHROW(train_robust_logreg_l1(ds, 0.1, no_ridge));
  CHECK_THROWS_AS(train_robust_logreg_l1(ds, -0.1), InvalidArgument);
  const LabeledDataset three({0.0, 1.0, 2.0}, 1, {0, 1, 2}, 3);
  CHECK_THROWS_AS(train_robust_logreg_l1(three, 0.1), InvalidArgument);
}
