#include <doctest.h>

#include <filesystem>

#include "aeg/error.hpp"
#include "aeg/serialize.hpp"
#include "oracles.hpp"

using namespace aeg;

namespace {

template <class T, class Read>
void round_trip(const T& value, Read read) {
  const Json j = to_json(value);
  const T back = read(parse_json(j.dump(), "memory"));
  CHECK(back == value);
  CHECK(to_json(back).dump() == j.dump());
}

}  // namespace

TEST_CASE("feature maps and classifiers round trip bit for bit") {
  round_trip(FeatureMap::polynomial(3, 4, false), feature_map_from_json);
  round_trip(FeatureMap::linear(2), feature_map_from_json);
  Rng rng(61);
  for (int K : {2, 3}) {
    LinearClassifier f = oracle::random_classifier(rng, FeatureMap::polynomial(2, 3), K);
    std::vector<double> w(f.weights().begin(), f.weights().end());
    w[0] = 0.1 + 0.2;
    w[1] = 5e-324;
    w[2] = -1.7976931348623157e308;
    const LinearClassifier g(f.feature_map(), K, w, 1e-6, TrainedWith{"logreg-gd", 0.25, 42});
    round_trip(g, classifier_from_json);
  }
  const LinearClassifier plain = LinearClassifier::zeros(FeatureMap::linear(1), 2);
  const Json j = to_json(plain);
  CHECK(j.at("trained_with").at("algorithm") == "none");
  CHECK_FALSE(j.at("trained_with").contains("epsilon"));
}

TEST_CASE("every generator kind round trips") {
  Rng rng(62);
  const LinearClassifier f = oracle::random_classifier(rng, FeatureMap::polynomial(2, 3), 2);
  const std::vector<Generator> gens{
      IdentityGenerator{},
      ClosedFormGenerator{{0.3, -1.0 / 3.0}, AttackBudget(0.3), "rep"},
      GridGenerator{f, AttackBudget(0.1), 21, "rep"},
      GradientGenerator{f, AttackBudget(0.1), 30, 0.01, "rep"},
      NoiseGenerator{AttackBudget(0.2)},
      TabulatedGenerator{{0.1, -0.1, 0.0, 0.05}, AttackBudget(0.1), "best-response"},
      ParametricGenerator::random_init(AttackBudget(0.3), 2, 3, 2, 0.5, 1.0, rng),
  };
  for (const Generator& g : gens) {
    const Json j = to_json(g);
    CHECK(j.at("kind") == generator_kind(g));
    const Generator back = generator_from_json(parse_json(j.dump(), "memory"));
    CHECK(back == g);
    CHECK(generator_id(back) == generator_id(g));
  }
}

TEST_CASE("settings round trip") {
  TrainOptions t{1234, 1e-9, 0.5, true};
  const TrainOptions t2 = train_options_from_json(to_json(t));
  CHECK(t2.max_iter == 1234);
  CHECK(t2.tol == 1e-9);
  CHECK(t2.record_trace);

  BestResponseSettings br;
  br.iterations = 7;
  br.max_step = BestResponseSettings::MaxStep::Gradient;
  const auto back = std::get<BestResponseSettings>(solver_settings_from_json(to_json(SolverSettings{br})));
  CHECK(back.iterations == 7);
  CHECK(back.max_step == BestResponseSettings::MaxStep::Gradient);

  ExtraGradientSettings eg;
  eg.lr_generator = 0.1 + 0.2;
  eg.batch_size = 16;
  const auto eg2 = std::get<ExtraGradientSettings>(solver_settings_from_json(to_json(SolverSettings{eg})));
  CHECK(eg2.lr_generator == 0.1 + 0.2);
  CHECK(eg2.batch_size == 16);
  CHECK(to_json(SolverSettings{eg2}).dump() == to_json(SolverSettings{eg}).dump());
}

TEST_CASE("readers reject malformed input") {
  Json j = to_json(LinearClassifier::zeros(FeatureMap::linear(2), 2));
  j["extra"] = 1;
  CHECK_THROWS(classifier_from_json(j));
  Json k = to_json(LinearClassifier::zeros(FeatureMap::linear(2), 2));
  k["weights"] = Json::array({1.0});
  CHECK_THROWS(classifier_from_json(k));
  CHECK_THROWS_AS(parse_json("{not json", "broken.json"), ParseError);
  CHECK_THROWS(generator_from_json(Json{{"kind", "teleport"}, {"epsilon", 0.1}}));
}

TEST_CASE("model files") {
  const auto dir = std::filesystem::temp_directory_path() / "aeg_serialize_test";
  std::filesystem::create_directories(dir);
  Rng rng(63);
  const LinearClassifier f = oracle::random_classifier(rng, FeatureMap::polynomial(2, 5), 2);
  const std::string path = (dir / "m.json").string();
  save_model(f, path);
  CHECK(load_model(path) == f);
  const Generator g = ClosedFormGenerator{{0.5}, AttackBudget(0.1), "x"};
  save_generator(g, (dir / "g.json").string());
  CHECK(load_generator((dir / "g.json").string()) == g);
  CHECK_THROWS(load_model((dir / "missing.json").string()));
  std::filesystem::remove_all(dir);
}
