#include "aeg/serialize.hpp"

#include <cmath>
#include <initializer_list>
#include <set>

#include "aeg/error.hpp"
#include "aeg/io.hpp"

namespace aeg {

namespace {

void only_keys(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw InvalidArgument(std::string(what) + ": expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw InvalidArgument(std::string(what) + ": unknown key '" + key + "'");
  }
}

const Json& need(const Json& j, const char* key, const char* what) {
  if (!j.contains(key)) throw InvalidArgument(std::string(what) + ": missing key '" + key + "'");
  return j.at(key);
}

std::vector<double> doubles(const Json& j, const char* what) {
  if (!j.is_array()) throw InvalidArgument(std::string(what) + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw InvalidArgument(std::string(what) + ": expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Json finite_array(std::span<const double> v, const char* what) {
  Json a = Json::array();
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + ": non-finite value cannot be serialized");
    a.push_back(x);
  }
  return a;
}

}  // namespace

Json to_json(const FeatureMap& map) {
  return Json{{"kind", map.kind() == FeatureMap::Kind::Linear ? "linear" : "polynomial"},
              {"degree", map.degree()},
              {"input_dim", map.input_dim()},
              {"include_bias", map.include_bias()}};
}

FeatureMap feature_map_from_json(const Json& j) {
  only_keys(j, {"kind", "degree", "input_dim", "include_bias"}, "feature_map");
  const auto kind = need(j, "kind", "feature_map").get<std::string>();
  const auto dim = need(j, "input_dim", "feature_map").get<std::size_t>();
  const bool bias = need(j, "include_bias", "feature_map").get<bool>();
  const int degree = need(j, "degree", "feature_map").get<int>();
  if (kind == "linear") {
    if (degree != 1) throw InvalidArgument("feature_map: linear maps have degree 1");
    return FeatureMap::linear(dim, bias);
  }
  if (kind == "polynomial") return FeatureMap::polynomial(dim, degree, bias);
  throw InvalidArgument("feature_map: unknown kind '" + kind + "'");
}

Json to_json(const LinearClassifier& f) {
  Json tw{{"algorithm", f.trained_with().algorithm}};
  if (f.trained_with().epsilon) tw["epsilon"] = *f.trained_with().epsilon;
  if (f.trained_with().seed) tw["seed"] = *f.trained_with().seed;
  return Json{{"feature_map", to_json(f.feature_map())},
              {"num_classes", f.num_classes()},
              {"weights", finite_array(f.weights(), "model weights")},
              {"l2_reg", f.l2_reg()},
              {"trained_with", tw}};
}

LinearClassifier classifier_from_json(const Json& j) {
  only_keys(j, {"feature_map", "num_classes", "weights", "l2_reg", "trained_with"}, "model");
  TrainedWith tw;
  if (j.contains("trained_with")) {
    const Json& t = j.at("trained_with");
    only_keys(t, {"algorithm", "epsilon", "seed"}, "trained_with");
    tw.algorithm = need(t, "algorithm", "trained_with").get<std::string>();
    if (t.contains("epsilon") && !t.at("epsilon").is_null()) tw.epsilon = t.at("epsilon").get<double>();
    if (t.contains("seed") && !t.at("seed").is_null()) tw.seed = t.at("seed").get<std::uint64_t>();
  }
  return LinearClassifier(feature_map_from_json(need(j, "feature_map", "model")),
                          need(j, "num_classes", "model").get<int>(), doubles(need(j, "weights", "model"), "weights"),
                          j.value("l2_reg", 0.0), tw);
}

Json to_json(const Generator& g) {
  Json j{{"kind", generator_kind(g)}, {"epsilon", generator_epsilon(g)}};
  if (const auto* c = std::get_if<ClosedFormGenerator>(&g)) {
    j["weights"] = finite_array(c->weights, "generator weights");
    j["source"] = c->source;
  } else if (const auto* c = std::get_if<GridGenerator>(&g)) {
    j["resolution"] = c->resolution;
    j["target"] = to_json(c->target);
    j["source"] = c->source;
  } else if (const auto* c = std::get_if<GradientGenerator>(&g)) {
    j["steps"] = c->steps;
    j["step_size"] = c->step_size;
    j["target"] = to_json(c->target);
    j["source"] = c->source;
  } else if (const auto* c = std::get_if<TabulatedGenerator>(&g)) {
    j["deltas"] = finite_array(c->deltas, "generator deltas");
    j["source"] = c->source;
  } else if (const auto* c = std::get_if<ParametricGenerator>(&g)) {
    j["num_classes"] = c->num_classes();
    j["m"] = c->num_latent();
    j["dim"] = c->dim();
    j["tau"] = c->temperature();
    j["logits"] = finite_array(c->logits(), "generator logits");
    j["u"] = finite_array(c->shifts(), "generator shifts");
  }
  return j;
}

Generator generator_from_json(const Json& j) {
  const auto kind = need(j, "kind", "generator").get<std::string>();
  const AttackBudget budget(need(j, "epsilon", "generator").get<double>());
  if (kind == "identity") {
    only_keys(j, {"kind", "epsilon"}, "generator");
    return IdentityGenerator{};
  }
  if (kind == "closed-form") {
    only_keys(j, {"kind", "epsilon", "weights", "source"}, "generator");
    return ClosedFormGenerator{doubles(need(j, "weights", "generator"), "weights"), budget, j.value("source", "")};
  }
  if (kind == "grid") {
    only_keys(j, {"kind", "epsilon", "resolution", "target", "source"}, "generator");
    return GridGenerator{classifier_from_json(need(j, "target", "generator")), budget,
                         need(j, "resolution", "generator").get<int>(), j.value("source", "")};
  }
  if (kind == "gradient") {
    only_keys(j, {"kind", "epsilon", "steps", "step_size", "target", "source"}, "generator");
    return GradientGenerator{classifier_from_json(need(j, "target", "generator")), budget,
                             need(j, "steps", "generator").get<int>(), need(j, "step_size", "generator").get<double>(),
                             j.value("source", "")};
  }
  if (kind == "noise") {
    only_keys(j, {"kind", "epsilon"}, "generator");
    return NoiseGenerator{budget};
  }
  if (kind == "tabulated") {
    only_keys(j, {"kind", "epsilon", "deltas", "source"}, "generator");
    return TabulatedGenerator{doubles(need(j, "deltas", "generator"), "deltas"), budget, j.value("source", "")};
  }
  if (kind == "parametric") {
    only_keys(j, {"kind", "epsilon", "num_classes", "m", "dim", "tau", "logits", "u"}, "generator");
    ParametricGenerator gen(budget, need(j, "num_classes", "generator").get<int>(),
                            need(j, "m", "generator").get<std::size_t>(), need(j, "dim", "generator").get<std::size_t>(),
                            need(j, "tau", "generator").get<double>());
    const auto logits = doubles(need(j, "logits", "generator"), "logits");
    const auto u = doubles(need(j, "u", "generator"), "u");
    if (logits.size() != gen.logits().size() || u.size() != gen.shifts().size()) {
      throw InvalidArgument("generator: parametric arrays have the wrong size");
    }
    std::copy(logits.begin(), logits.end(), gen.logits().begin());
    std::copy(u.begin(), u.end(), gen.shifts().begin());
    return gen;
  }
  throw InvalidArgument("generator: unknown kind '" + kind + "'");
}

Json to_json(const TrainOptions& o) {
  return Json{{"max_iter", o.max_iter}, {"tol", o.tol}, {"step", o.step}, {"record_trace", o.record_trace}};
}

TrainOptions train_options_from_json(const Json& j) {
  only_keys(j, {"max_iter", "tol", "step", "record_trace"}, "train options");
  TrainOptions o;
  o.max_iter = j.value("max_iter", o.max_iter);
  o.tol = j.value("tol", o.tol);
  o.step = j.value("step", o.step);
  o.record_trace = j.value("record_trace", o.record_trace);
  return o;
}

Json to_json(const SolverSettings& s) {
  if (const auto* br = std::get_if<BestResponseSettings>(&s)) {
    return Json{{"kind", "best-response"},
                {"iterations", br->iterations},
                {"max_step", br->max_step == BestResponseSettings::MaxStep::Grid ? "grid" : "gradient"},
                {"grid_resolution", br->grid_resolution},
                {"gradient_steps", br->gradient_steps},
                {"gradient_step_size", br->gradient_step_size},
                {"l2_reg", br->l2_reg},
                {"train", to_json(br->train)}};
  }
  const auto& eg = std::get<ExtraGradientSettings>(s);
  return Json{{"kind", "extragradient"},
              {"steps", eg.steps},
              {"lr_classifier", eg.lr_classifier},
              {"lr_generator", eg.lr_generator},
              {"beta1", eg.beta1},
              {"beta2", eg.beta2},
              {"adam_epsilon", eg.adam_epsilon},
              {"generator_inner_cap", eg.generator_inner_cap},
              {"num_latent", eg.num_latent},
              {"temperature", eg.temperature},
              {"init_scale", eg.init_scale},
              {"batch_size", eg.batch_size},
              {"record_every", eg.record_every},
              {"num_z_samples", eg.num_z_samples},
              {"track_entropy", eg.track_entropy},
              {"entropy_train", to_json(eg.entropy_train)},
              {"divergence_factor", eg.divergence_factor}};
}

SolverSettings solver_settings_from_json(const Json& j) {
  const auto kind = need(j, "kind", "solver").get<std::string>();
  if (kind == "best-response") {
    only_keys(j, {"kind", "iterations", "max_step", "grid_resolution", "gradient_steps", "gradient_step_size", "l2_reg",
                  "train"},
              "solver");
    BestResponseSettings br;
    br.iterations = j.value("iterations", br.iterations);
    const auto step = j.value("max_step", std::string("grid"));
    if (step != "grid" && step != "gradient") throw InvalidArgument("solver: max_step must be grid or gradient");
    br.max_step = step == "grid" ? BestResponseSettings::MaxStep::Grid : BestResponseSettings::MaxStep::Gradient;
    br.grid_resolution = j.value("grid_resolution", br.grid_resolution);
    br.gradient_steps = j.value("gradient_steps", br.gradient_steps);
    br.gradient_step_size = j.value("gradient_step_size", br.gradient_step_size);
    br.l2_reg = j.value("l2_reg", br.l2_reg);
    if (j.contains("train")) br.train = train_options_from_json(j.at("train"));
    return br;
  }
  if (kind == "extragradient") {
    only_keys(j, {"kind", "steps", "lr_classifier", "lr_generator", "beta1", "beta2", "adam_epsilon",
                  "generator_inner_cap", "num_latent", "temperature", "init_scale", "batch_size", "record_every",
                  "num_z_samples", "track_entropy", "entropy_train", "divergence_factor"},
              "solver");
    ExtraGradientSettings eg;
    eg.steps = j.value("steps", eg.steps);
    eg.lr_classifier = j.value("lr_classifier", eg.lr_classifier);
    eg.lr_generator = j.value("lr_generator", eg.lr_generator);
    eg.beta1 = j.value("beta1", eg.beta1);
    eg.beta2 = j.value("beta2", eg.beta2);
    eg.adam_epsilon = j.value("adam_epsilon", eg.adam_epsilon);
    eg.generator_inner_cap = j.value("generator_inner_cap", eg.generator_inner_cap);
    eg.num_latent = j.value("num_latent", eg.num_latent);
    eg.temperature = j.value("temperature", eg.temperature);
    eg.init_scale = j.value("init_scale", eg.init_scale);
    eg.batch_size = j.value("batch_size", eg.batch_size);
    eg.record_every = j.value("record_every", eg.record_every);
    eg.num_z_samples = j.value("num_z_samples", eg.num_z_samples);
    eg.track_entropy = j.value("track_entropy", eg.track_entropy);
    if (j.contains("entropy_train")) eg.entropy_train = train_options_from_json(j.at("entropy_train"));
    eg.divergence_factor = j.value("divergence_factor", eg.divergence_factor);
    return eg;
  }
  throw InvalidArgument("solver: unknown kind '" + kind + "'");
}

Json game_config_to_json(const GameConfig& cfg, const std::string& target_path, const std::string& reference_path) {
  return Json{{"epsilon", cfg.budget.epsilon},
              {"lambda", cfg.lambda},
              {"target_data", target_path},
              {"reference_data", reference_path},
              {"feature_map", to_json(cfg.feature_map)},
              {"solver", to_json(cfg.solver)},
              {"seed", cfg.seed}};
}

Json parse_json(std::string_view text, const std::string& source_name) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source_name, 0, e.what());
  }
}

Json load_json(const std::string& path) { return parse_json(io::read_file(path), path); }

void save_json(const Json& j, const std::string& path) { io::write_file_atomic(path, j.dump(2) + "\n"); }

LinearClassifier load_model(const std::string& path) {
  try {
    return classifier_from_json(load_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
}

void save_model(const LinearClassifier& f, const std::string& path) { save_json(to_json(f), path); }

Generator load_generator(const std::string& path) {
  try {
    return generator_from_json(load_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
}

void save_generator(const Generator& g, const std::string& path) { save_json(to_json(g), path); }

}  // namespace aeg
