#include "cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "aeg/classifier.hpp"
#include "aeg/data.hpp"
#include "aeg/entropy.hpp"
#include "aeg/error.hpp"
#include "aeg/eval.hpp"
#include "aeg/features.hpp"
#include "aeg/game.hpp"
#include "aeg/generator.hpp"
#include "aeg/io.hpp"
#include "aeg/serialize.hpp"
#include "cli/svg.hpp"

namespace aeg::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kOutDirEnv = "AEG_OUT_DIR";

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string absolute_path(const std::string& p) { return fs::absolute(fs::path(p)).lexically_normal().string(); }

struct Context {
  fs::path out_dir;
  std::uint64_t seed = 0;
  std::ostream* out = nullptr;

  std::string path(const std::string& name) const {
    const fs::path p(name);
    return (p.is_absolute() ? p : out_dir / p).lexically_normal().string();
  }
  void write(const std::string& name, std::string_view contents) const { io::write_file_atomic(path(name), contents); }
};

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  std::vector<std::function<void(Json&)>> dump;
  std::vector<std::string*> inputs;
  std::vector<std::vector<std::string>*> input_lists;
  std::vector<std::string*> outputs;
  std::function<int(const Context&)> body;
  std::string out_dir;
  std::uint64_t seed = 0;
};

template <class T>
CLI::Option* option(Command& c, const std::string& name, T& var, const std::string& help) {
  CLI::Option* o = c.app->add_option("--" + name, var, help)->capture_default_str();
  c.dump.emplace_back([name, &var](Json& j) { j[name] = var; });
  return o;
}

CLI::Option* input(Command& c, const std::string& name, std::string& var, const std::string& help) {
  c.inputs.push_back(&var);
  return option(c, name, var, help);
}

CLI::Option* output(Command& c, const std::string& name, std::string& var, const std::string& help) {
  c.outputs.push_back(&var);
  return option(c, name, var, help);
}

FeatureMap map_for(const std::string& name, std::size_t dim) { return FeatureMap::parse(name, dim); }

std::string csv_of(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream ss;
  writer(ss);
  return ss.str();
}

// ---------------------------------------------------------------------------

void add_gen_data(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto c = std::make_unique<Command>();
  c->name = "gen-data";
  c->app = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  struct Args {
    std::string kind = "two-moons";
    std::size_t n = 200;
    double noise = 0.1;
    double mean = 1.0;
    double sigma = 1.0;
    std::size_t dim = 1;
    std::string out = "data.csv";
  };
  auto a = std::make_shared<Args>();
  option(*c, "kind", a->kind, "two-moons or gaussian-pair")->check(CLI::IsMember({"two-moons", "gaussian-pair"}));
  option(*c, "n", a->n, "number of examples (even)");
  option(*c, "noise", a->noise, "two-moons noise standard deviation");
  option(*c, "mean", a->mean, "gaussian-pair mean separation");
  option(*c, "sigma", a->sigma, "gaussian-pair standard deviation");
  option(*c, "dim", a->dim, "gaussian-pair input dimension");
  output(*c, "out", a->out, "output CSV");
  c->body = [a](const Context& ctx) {
    const LabeledDataset ds = a->kind == "two-moons" ? make_two_moons(a->n, a->noise, ctx.seed)
                                                     : make_gaussian_pair(a->n, a->mean, a->sigma, a->dim, ctx.seed);
    ctx.write(a->out, csv_of([&](std::ostream& o) { write_csv(ds, o); }));
    *ctx.out << "gen-data: " << a->kind << " n=" << ds.size() << " d=" << ds.dim() << " -> " << ctx.path(a->out)
             << '\n';
    return 0;
  };
  cmds.push_back(std::move(c));
}

void add_train(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto c = std::make_unique<Command>();
  c->name = "train";
  c->app = app.add_subcommand("train", "Train a logistic classifier over a feature map");
  struct Args {
    std::string data;
    std::string features = "linear";
    double l2 = 0.0;
    long max_iter = 5000;
    double tol = 1e-8;
    std::string out = "model.json";
  };
  auto a = std::make_shared<Args>();
  input(*c, "data", a->data, "training CSV")->required();
  option(*c, "features", a->features, "linear or poly<g>");
  option(*c, "l2", a->l2, "ridge coefficient");
  option(*c, "max-iter", a->max_iter, "iteration cap");
  option(*c, "tol", a->tol, "gradient-norm tolerance");
  output(*c, "out", a->out, "model JSON");
  c->body = [a](const Context& ctx) {
    const LabeledDataset ds = load_csv(a->data);
    TrainOptions opts;
    opts.max_iter = a->max_iter;
    opts.tol = a->tol;
    const TrainResult res = train_logreg(map_for(a->features, ds.dim()), ds, a->l2, opts);
    const LinearClassifier f(res.classifier.feature_map(), res.classifier.num_classes(),
                             std::vector<double>(res.classifier.weights().begin(), res.classifier.weights().end()),
                             a->l2, TrainedWith{res.classifier.trained_with().algorithm, std::nullopt, ctx.seed});
    ctx.write(a->out, to_json(f).dump(2) + "\n");
    *ctx.out << "train: objective=" << sci(res.report.final_objective) << " iterations=" << res.report.iterations
             << " converged=" << (res.report.converged ? "yes" : "no") << " train_err=" << sci(error_rate(f, ds))
             << '\n';
    return 0;
  };
  cmds.push_back(std::move(c));
}

void add_train_robust(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto c = std::make_unique<Command>();
  c->name = "train-robust";
  c->app = app.add_subcommand("train-robust", "Train the l1-robust logistic classifier");
  struct Args {
    std::string data;
    double eps = 0.3;
    long max_iter = 20000;
    double step = 1.0;
    double l2 = 1e-6;
    double tol = 1e-6;
    std::string out = "model.json";
  };
  auto a = std::make_shared<Args>();
  input(*c, "data", a->data, "binary training CSV")->required();
  option(*c, "eps", a->eps, "l_inf budget");
  option(*c, "max-iter", a->max_iter, "iteration cap");
  option(*c, "step", a->step, "subgradient step scale");
  option(*c, "l2", a->l2, "ridge coefficient");
  option(*c, "tol", a->tol, "subgradient tolerance");
  output(*c, "out", a->out, "model JSON");
  c->body = [a](const Context& ctx) {
    const LabeledDataset ds = load_csv(a->data, 2);
    RobustTrainOptions opts;
    opts.max_iter = a->max_iter;
    opts.step = a->step;
    opts.l2_reg = a->l2;
    opts.tol = a->tol;
    const TrainResult res = train_robust_logreg_l1(ds, a->eps, opts);
    TrainedWith tw = res.classifier.trained_with();
    tw.seed = ctx.seed;
    const LinearClassifier f(res.classifier.feature_map(), 2,
                             std::vector<double>(res.classifier.weights().begin(), res.classifier.weights().end()),
                             res.classifier.l2_reg(), tw);
    ctx.write(a->out, to_json(f).dump(2) + "\n");
    *ctx.out << "train-robust: objective=" << sci(res.report.final_objective)
             << " best=" << sci(res.report.best_objective) << " subgrad=" << sci(res.report.grad_norm_or_subgrad_gap)
             << " converged=" << (res.report.converged ? "yes" : "no") << '\n';
    return 0;
  };
  cmds.push_back(std::move(c));
}

void add_attack(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto c = std::make_unique<Command>();
  c->name = "attack";
  c->app = app.add_subcommand("attack", "Perturb a dataset within an l_inf budget");
  struct Args {
    std::string data;
    std::string model;
    std::string kind = "closed-form";
    double eps = 0.3;
    int resolution = 41;
    int steps = 50;
    double step_size = 0.0;
    std::string out = "adv.csv";
    std::string generator_out = "generator.json";
  };
  auto a = std::make_shared<Args>();
  input(*c, "data", a->data, "clean CSV")->required();
  input(*c, "model", a->model, "source model JSON (closed-form, grid, gradient)");
  option(*c, "kind", a->kind, "closed-form, grid, gradient, noise or identity")
      ->check(CLI::IsMember({"closed-form", "grid", "gradient", "noise", "identity"}));
  option(*c, "eps", a->eps, "l_inf budget");
  option(*c, "resolution", a->resolution, "grid points per axis (odd)");
  option(*c, "steps", a->steps, "gradient attack steps");
  option(*c, "step-size", a->step_size, "gradient attack step; 0 means eps/10");
  output(*c, "out", a->out, "adversarial CSV");
  output(*c, "generator-out", a->generator_out, "generator JSON");
  c->body = [a](const Context& ctx) {
    const LabeledDataset ds = load_csv(a->data);
    const AttackBudget budget(a->kind == "identity" ? 0.0 : a->eps);
    std::optional<LinearClassifier> f;
    if (a->kind == "closed-form" || a->kind == "grid" || a->kind == "gradient") {
      if (a->model.empty()) throw InvalidArgument("attack --kind " + a->kind + " needs --model");
      f = load_model(a->model);
    }
    const std::string source = a->model.empty() ? std::string() : "model=" + fs::path(a->model).filename().string();
    Generator g = IdentityGenerator{};
    if (a->kind == "closed-form") {
      if (!f->is_binary() || f->feature_map().degree() != 1) {
        throw InvalidArgument("closed-form attack needs a binary classifier over linear features");
      }
      g = ClosedFormGenerator{f->non_bias_weights(), budget, source};
    } else if (a->kind == "grid") {
      g = GridGenerator{*f, budget, a->resolution, source};
    } else if (a->kind == "gradient") {
      g = GradientGenerator{*f, budget, a->steps, a->step_size > 0 ? a->step_size : a->eps / 10.0, source};
    } else if (a->kind == "noise") {
      g = NoiseGenerator{budget};
    }
    const AdversarialDataset adv = attack_dataset(g, ds, ctx.seed);
    ctx.write(a->out, csv_of([&](std::ostream& o) { write_adversarial_csv(adv, o); }));
    ctx.write(a->generator_out, to_json(g).dump(2) + "\n");
    *ctx.out << "attack: " << adv.generator_id();
    if (f) {
      *ctx.out << " clean_err=" << sci(error_rate(*f, ds)) << " adv_err=" << sci(error_rate(*f, adv.perturbed()))
               << " clean_loss=" << sci(cross_entropy(*f, ds)) << " adv_loss=" << sci(cross_entropy(*f, adv.perturbed()));
    }
    *ctx.out << '\n';
    return 0;
  };
  cmds.push_back(std::move(c));
}

void add_solve_game(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto c = std::make_unique<Command>();
  c->name = "solve-game";
  c->app = app.add_subcommand("solve-game", "Solve the adversarial example game");
  struct Args {
    std::string data;
    std::string ref;
    std::string features = "linear";
    double eps = 0.3;
    double lambda = 0.0;
    std::string solver = "best-response";
    int iterations = 10;
    std::string max_step = "auto";
    int grid_resolution = 41;
    int gradient_steps = 50;
    double gradient_step_size = 0.0;
    double l2 = 0.0;
    long train_max_iter = 5000;
    double train_tol = 1e-8;
    int steps = 500;
    double lr_classifier = 1e-3;
    double lr_generator = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    int inner_cap = 20;
    std::size_t num_latent = 4;
    double temperature = 0.5;
    double init_scale = 0.1;
    std::size_t batch_size = 0;
    int record_every = 10;
    int num_z = 1;
    bool track_entropy = true;
    double divergence_factor = 10.0;
    std::string out = "trace.csv";
    std::string model_out = "model.json";
    std::string generator_out = "generator.json";
    std::string config_out = "game_config.json";
  };
  auto a = std::make_shared<Args>();
  input(*c, "data", a->data, "target examples CSV")->required();
  input(*c, "ref", a->ref, "reference CSV (defaults to --data)");
  option(*c, "features", a->features, "linear or poly<g>");
  option(*c, "eps", a->eps, "l_inf budget");
  option(*c, "lambda", a->lambda, "weight of the clean reference loss");
  option(*c, "solver", a->solver, "best-response or extragradient")
      ->check(CLI::IsMember({"best-response", "extragradient"}));
  option(*c, "iterations", a->iterations, "best-response rounds");
  option(*c, "max-step", a->max_step, "auto, grid or gradient")->check(CLI::IsMember({"auto", "grid", "gradient"}));
  option(*c, "grid-resolution", a->grid_resolution, "grid points per axis");
  option(*c, "gradient-steps", a->gradient_steps, "gradient inner-max steps");
  option(*c, "gradient-step-size", a->gradient_step_size, "gradient inner-max step; 0 means eps/10");
  option(*c, "l2", a->l2, "ridge coefficient of the min step");
  option(*c, "train-max-iter", a->train_max_iter, "min-step iteration cap");
  option(*c, "train-tol", a->train_tol, "min-step gradient tolerance");
  option(*c, "steps", a->steps, "extragradient steps");
  option(*c, "lr-classifier", a->lr_classifier, "classifier learning rate");
  option(*c, "lr-generator", a->lr_generator, "generator learning rate");
  option(*c, "beta1", a->beta1, "first-moment decay");
  option(*c, "beta2", a->beta2, "second-moment decay");
  option(*c, "inner-cap", a->inner_cap, "generator updates per step, at most");
  option(*c, "num-latent", a->num_latent, "latent categories");
  option(*c, "temperature", a->temperature, "gumbel-softmax temperature");
  option(*c, "init-scale", a->init_scale, "generator init scale");
  option(*c, "batch-size", a->batch_size, "minibatch size; 0 means full batch");
  option(*c, "record-every", a->record_every, "trace interval in steps");
  option(*c, "num-z", a->num_z, "latent samples per payoff evaluation");
  option(*c, "track-entropy", a->track_entropy, "record the mixture F-entropy");
  option(*c, "divergence-factor", a->divergence_factor, "abort when phi_lambda grows by this factor");
  output(*c, "out", a->out, "trace CSV");
  output(*c, "model-out", a->model_out, "final classifier JSON");
  output(*c, "generator-out", a->generator_out, "final generator JSON");
  output(*c, "config-out", a->config_out, "game config JSON");
  c->body = [a](const Context& ctx) {
    const LabeledDataset ds = load_csv(a->data);
    const LabeledDataset ref = a->ref.empty() ? ds : load_csv(a->ref);
    TrainOptions train;
    train.max_iter = a->train_max_iter;
    train.tol = a->train_tol;
    SolverSettings solver;
    if (a->solver == "best-response") {
      BestResponseSettings br;
      br.iterations = a->iterations;
      const bool grid = a->max_step == "grid" || (a->max_step == "auto" && ds.dim() == 2);
      br.max_step = grid ? BestResponseSettings::MaxStep::Grid : BestResponseSettings::MaxStep::Gradient;
      br.grid_resolution = a->grid_resolution;
      br.gradient_steps = a->gradient_steps;
      br.gradient_step_size = a->gradient_step_size;
      br.l2_reg = a->l2;
      br.train = train;
      solver = br;
    } else {
      ExtraGradientSettings eg;
      eg.steps = a->steps;
      eg.lr_classifier = a->lr_classifier;
      eg.lr_generator = a->lr_generator;
      eg.beta1 = a->beta1;
      eg.beta2 = a->beta2;
      eg.generator_inner_cap = a->inner_cap;
      eg.num_latent = a->num_latent;
      eg.temperature = a->temperature;
      eg.init_scale = a->init_scale;
      eg.batch_size = a->batch_size;
      eg.record_every = a->record_every;
      eg.num_z_samples = a->num_z;
      eg.track_entropy = a->track_entropy;
      eg.entropy_train = train;
      eg.divergence_factor = a->divergence_factor;
      solver = eg;
    }
    const GameConfig cfg{AttackBudget(a->eps), a->lambda, ds, ref, map_for(a->features, ds.dim()), solver, ctx.seed};
    ctx.write(a->config_out, game_config_to_json(cfg, a->data, a->ref.empty() ? a->data : a->ref).dump(2) + "\n");

    auto emit = [&](const GameTrace& trace) {
      ctx.write(a->out, csv_of([&](std::ostream& o) { write_trace_csv(trace, o); }));
      if (!trace.classifiers.empty()) ctx.write(a->model_out, to_json(trace.final_classifier()).dump(2) + "\n");
      if (!trace.generators.empty()) ctx.write(a->generator_out, to_json(trace.final_generator()).dump(2) + "\n");
    };
    GameTrace trace;
    try {
      trace = a->solver == "best-response" ? best_response_solve(cfg) : extragradient_solve(cfg);
    } catch (const GameDivergence& e) {
      emit(e.trace());
      throw;
    }
    emit(trace);
    const GameRecord& last = trace.records.back();
    *ctx.out << "solve-game: " << a->solver << " records=" << trace.records.size()
             << " phi_lambda_after_min=" << sci(last.phi_lambda_after_min)
             << " phi_lambda_after_max=" << sci(last.phi_lambda_after_max) << " f_entropy=" << sci(last.f_entropy)
             << '\n';
    return 0;
  };
  cmds.push_back(std::move(c));
}

void add_entropy(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto c = std::make_unique<Command>();
  c->name = "entropy";
  c->app = app.add_subcommand("entropy", "F-entropy along nested feature classes");
  struct Args {
    std::string data;
    std::vector<std::string> classes{"linear", "poly3", "poly5"};
    long max_iter = 5000;
    double tol = 1e-8;
    std::string out = "entropy.csv";
  };
  auto a = std::make_shared<Args>();
  input(*c, "data", a->data, "dataset CSV")->required();
  option(*c, "classes", a->classes, "nested classes, smallest first")->delimiter(',');
  option(*c, "max-iter", a->max_iter, "iteration cap per class");
  option(*c, "tol", a->tol, "gradient-norm tolerance");
  output(*c, "out", a->out, "entropy CSV");
  c->body = [a](const Context& ctx) {
    const LabeledDataset ds = load_csv(a->data);
    std::vector<FeatureMap> maps;
    for (const auto& name : a->classes) maps.push_back(map_for(name, ds.dim()));
    TrainOptions opts;
    opts.max_iter = a->max_iter;
    opts.tol = a->tol;
    const EntropyReport rep = entropy_chain(ds, maps, opts, fs::path(a->data).filename().string());
    ctx.write(a->out, csv_of([&](std::ostream& o) { write_entropy_csv(rep, o); }));
    *ctx.out << "entropy:";
    for (const auto& e : rep.entries) *ctx.out << ' ' << e.class_name << '=' << sci(e.estimate.value);
    *ctx.out << '\n';
    return 0;
  };
  cmds.push_back(std::move(c));
}

void add_verify_nash(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto c = std::make_unique<Command>();
  c->name = "verify-nash";
  c->app = app.add_subcommand("verify-nash", "Check the l1-robust pair for profitable deviations");
  struct Args {
    std::string data;
    double eps = 0.3;
    int deviations = 200;
    double tol = 1e-6;
    double gap_tol = 1e-3;
    long max_iter = 20000;
    double step = 1.0;
    double l2 = 1e-6;
    std::string out = "nash.json";
    std::string model_out = "robust_model.json";
  };
  auto a = std::make_shared<Args>();
  input(*c, "data", a->data, "binary dataset CSV")->required();
  option(*c, "eps", a->eps, "l_inf budget");
  option(*c, "deviations", a->deviations, "sampled deviations per player");
  option(*c, "tol", a->tol, "allowed deviation gain beyond optimizer slack");
  option(*c, "gap-tol", a->gap_tol, "allowed duality gap");
  option(*c, "max-iter", a->max_iter, "robust solver iteration cap");
  option(*c, "step", a->step, "robust solver step scale");
  option(*c, "l2", a->l2, "robust solver ridge coefficient");
  output(*c, "out", a->out, "report JSON");
  output(*c, "model-out", a->model_out, "robust classifier JSON");
  c->body = [a](const Context& ctx) {
    const LabeledDataset ds = load_csv(a->data, 2);
    NashOptions opts;
    opts.robust.max_iter = a->max_iter;
    opts.robust.step = a->step;
    opts.robust.l2_reg = a->l2;
    opts.tol = a->tol;
    const NashReport rep = verify_nash_prop2(ds, a->eps, a->deviations, ctx.seed, opts);
    const bool gap_ok = rep.duality_gap <= a->gap_tol;
    const bool pass = rep.passed && !rep.inconclusive && gap_ok;
    Json j{{"passed", pass},
           {"inconclusive", rep.inconclusive},
           {"worst_violation", rep.worst_violation},
           {"worst_generator_violation", rep.worst_generator_violation},
           {"worst_classifier_violation", rep.worst_classifier_violation},
           {"slack", rep.slack},
           {"phi_star", rep.phi_star},
           {"duality_gap", rep.duality_gap},
           {"generator_deviations", rep.generator_deviations},
           {"classifier_deviations", rep.classifier_deviations},
           {"message", rep.message}};
    if (rep.inconclusive) {
      for (const char* k : {"worst_violation", "worst_generator_violation", "worst_classifier_violation", "phi_star"}) {
        j[k] = nullptr;
      }
    }
    ctx.write(a->out, j.dump(2) + "\n");
    ctx.write(a->model_out, to_json(rep.classifier).dump(2) + "\n");
    if (rep.inconclusive) {
      *ctx.out << "INCONCLUSIVE " << rep.message << '\n';
      return 2;
    }
    const double bound = std::max({0.0, rep.duality_gap, rep.worst_violation});
    *ctx.out << (pass ? "PASS" : "FAIL") << " gap<=" << sci(bound) << " worst_violation=" << sci(rep.worst_violation)
             << " duality_gap=" << sci(rep.duality_gap) << " slack=" << sci(rep.slack) << '\n';
    return pass ? 0 : 2;
  };
  cmds.push_back(std::move(c));
}

void add_eval_transfer(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto c = std::make_unique<Command>();
  c->name = "eval-transfer";
  c->app = app.add_subcommand("eval-transfer", "NoBox transfer evaluation against split-trained targets");
  struct Args {
    std::string data;
    std::size_t splits = 6;
    long source_split = -1;
    std::string features = "linear";
    std::string target_features;
    double eps = 0.3;
    std::string attack = "closed-form";
    bool robust_source = false;
    double l2 = 0.0;
    long max_iter = 5000;
    std::string out = "transfer.csv";
    std::string summary_out = "transfer.json";
    std::string baseline_out = "baseline.csv";
    std::string baseline_summary_out = "baseline.json";
  };
  auto a = std::make_shared<Args>();
  input(*c, "data", a->data, "dataset CSV")->required();
  option(*c, "splits", a->splits, "number of splits, source included");
  option(*c, "source-split", a->source_split, "split held out for the attacker; -1 means the last");
  option(*c, "features", a->features, "feature class of the representative classifier");
  option(*c, "target-features", a->target_features, "feature class of the targets; empty means --features");
  option(*c, "eps", a->eps, "l_inf budget");
  option(*c, "attack", a->attack, "closed-form, grid, gradient or identity")
      ->check(CLI::IsMember({"closed-form", "grid", "gradient", "identity"}));
  option(*c, "robust-source", a->robust_source, "train the representative with the l1-robust solver");
  option(*c, "l2", a->l2, "ridge coefficient for all trained classifiers");
  option(*c, "max-iter", a->max_iter, "training iteration cap");
  output(*c, "out", a->out, "per-target CSV");
  output(*c, "summary-out", a->summary_out, "summary JSON");
  output(*c, "baseline-out", a->baseline_out, "random-noise per-target CSV");
  output(*c, "baseline-summary-out", a->baseline_summary_out, "random-noise summary JSON");
  c->body = [a](const Context& ctx) {
    const LabeledDataset ds = load_csv(a->data);
    if (a->splits < 2) throw InvalidArgument("eval-transfer needs at least 2 splits");
    const SplitPlan plan = split(ds, a->splits, ctx.seed);
    const std::size_t source = a->source_split < 0 ? a->splits - 1 : static_cast<std::size_t>(a->source_split);
    if (source >= a->splits) throw InvalidArgument("eval-transfer: --source-split out of range");

    PoolOptions pool_opts;
    pool_opts.l2_reg = a->l2;
    pool_opts.train.max_iter = a->max_iter;
    std::vector<std::uint64_t> seeds;
    for (std::size_t k = 0; k < a->splits; ++k) {
      if (k == source) continue;
      pool_opts.splits.push_back(k);
      seeds.push_back(ctx.seed + k);
    }
    const std::string target_class = a->target_features.empty() ? a->features : a->target_features;
    const TargetPool pool = train_pool(ds, plan, map_for(target_class, ds.dim()), seeds, pool_opts);

    const std::vector<std::size_t> held = plan.indices_of(source);
    const LabeledDataset eval = subset(ds, held);
    const std::string source_id = "source/split-" + std::to_string(source);
    std::optional<LinearClassifier> rep_f;
    if (a->attack != "identity") {
      if (a->robust_source) {
        RobustTrainOptions ro;
        ro.l2_reg = std::max(a->l2, ro.l2_reg);
        rep_f = train_robust_logreg_l1(eval, a->eps, ro).classifier;
      } else {
        TrainOptions to;
        to.max_iter = a->max_iter;
        rep_f = train_logreg(map_for(a->features, ds.dim()), eval, a->l2, to).classifier;
      }
    }
    const AttackBudget budget(a->attack == "identity" ? 0.0 : a->eps);
    Generator g = IdentityGenerator{};
    if (a->attack == "closed-form") {
      if (!rep_f->is_binary() || rep_f->feature_map().degree() != 1) {
        throw InvalidArgument("closed-form attack needs binary data and linear features");
      }
      g = ClosedFormGenerator{rep_f->non_bias_weights(), budget, source_id};
    } else if (a->attack == "grid") {
      g = GridGenerator{*rep_f, budget, 41, source_id};
    } else if (a->attack == "gradient") {
      g = GradientGenerator{*rep_f, budget, 50, a->eps / 10.0, source_id};
    }
    const TransferReport report = evaluate_transfer(attack_dataset(g, eval, ctx.seed), pool, eval);
    const TransferReport noise = evaluate_transfer(random_noise_baseline(budget, eval, ctx.seed), pool, eval);
    ctx.write(a->out, csv_of([&](std::ostream& o) { write_transfer_csv(report, o); }));
    ctx.write(a->summary_out, transfer_summary_json(report));
    ctx.write(a->baseline_out, csv_of([&](std::ostream& o) { write_transfer_csv(noise, o); }));
    ctx.write(a->baseline_summary_out, transfer_summary_json(noise));
    *ctx.out << "eval-transfer: targets=" << pool.size() << " clean=" << sci(report.macro_clean)
             << " adv=" << sci(report.macro_adv) << " +-2sd=" << sci(report.two_sigma)
             << " noise_adv=" << sci(noise.macro_adv) << '\n';
    return 0;
  };
  cmds.push_back(std::move(c));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

void add_plot_trace(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
  auto c = std::make_unique<Command>();
  c->name = "plot-trace";
  c->app = app.add_subcommand("plot-trace", "Line plot of CSV columns as SVG");
  struct Args {
    std::vector<std::string> in;
    std::vector<std::string> series;
    std::string x;
    std::string title;
    std::string out = "plot.svg";
  };
  auto a = std::make_shared<Args>();
  option(*c, "in", a->in, "input CSV files")->required();
  c->input_lists.push_back(&a->in);
  option(*c, "series", a->series, "columns to draw; empty means every column but x")->delimiter(',');
  option(*c, "x", a->x, "x column; empty means the first column");
  option(*c, "title", a->title, "plot title");
  output(*c, "out", a->out, "SVG file");
  c->body = [a](const Context& ctx) {
    PlotSpec spec;
    spec.title = a->title;
    for (const auto& path : a->in) {
      std::istringstream text(io::read_file(path));
      std::string line;
      if (!std::getline(text, line)) throw ParseError(path, 1, "empty file");
      const std::vector<std::string> header = split_csv_line(line);
      std::vector<std::vector<std::string>> rows;
      std::size_t lineno = 1;
      while (std::getline(text, line)) {
        ++lineno;
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
        if (rows.back().size() != header.size()) throw ParseError(path, lineno, "ragged row");
      }
      const auto col = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw InvalidArgument(path + ": no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
      };
      const std::size_t xc = a->x.empty() ? 0 : col(a->x);
      spec.x_label = header[xc];
      std::vector<double> xs(rows.size());
      bool numeric_x = true;
      for (std::size_t r = 0; r < rows.size(); ++r) numeric_x = numeric_x && io::parse_double(rows[r][xc], xs[r]);
      if (!numeric_x) {
        spec.x_tick_names.clear();
        for (std::size_t r = 0; r < rows.size(); ++r) {
          xs[r] = static_cast<double>(r);
          spec.x_tick_names.push_back(rows[r][xc]);
        }
      }
      std::vector<std::size_t> cols;
      if (a->series.empty()) {
        for (std::size_t k = 0; k < header.size(); ++k) {
          if (k == xc) continue;
          double probe;
          if (!rows.empty() && !io::parse_double(rows[0][k], probe)) continue;
          cols.push_back(k);
        }
      } else {
        for (const auto& s : a->series) cols.push_back(col(s));
      }
      for (std::size_t k : cols) {
        PlotSeries ser;
        ser.name = a->in.size() > 1 ? fs::path(path).stem().string() + ":" + header[k] : header[k];
        ser.xs = xs;
        for (std::size_t r = 0; r < rows.size(); ++r) {
          double v;
          if (!io::parse_double(rows[r][k], v)) throw ParseError(path, r + 2, "non-numeric value in " + header[k]);
          ser.ys.push_back(v);
        }
        spec.series.push_back(std::move(ser));
      }
    }
    spec.y_label = spec.series.size() == 1 ? spec.series[0].name : "value";
    ctx.write(a->out, render_line_plot(spec));
    *ctx.out << "plot-trace: " << spec.series.size() << " series -> " << ctx.path(a->out) << '\n';
    return 0;
  };
  cmds.push_back(std::move(c));
}

// ---------------------------------------------------------------------------

bool mentions_flag(const std::vector<std::string>& tokens, const std::string& flag) {
  return std::any_of(tokens.begin(), tokens.end(),
                     [&](const std::string& t) { return t == flag || t.rfind(flag + "=", 0) == 0; });
}

void append_value(std::vector<std::string>& tokens, const Json& v, const std::string& key) {
  if (v.is_string()) {
    tokens.push_back(v.get<std::string>());
  } else if (v.is_boolean()) {
    tokens.push_back(v.get<bool>() ? "true" : "false");
  } else if (v.is_number_unsigned()) {
    tokens.push_back(std::to_string(v.get<std::uint64_t>()));
  } else if (v.is_number_integer()) {
    tokens.push_back(std::to_string(v.get<std::int64_t>()));
  } else if (v.is_number_float()) {
    tokens.push_back(io::format_double(v.get<double>()));
  } else {
    throw InvalidArgument("config: unsupported value for '" + key + "'");
  }
}

// Folds a JSON config (the run.json layout) into argv; explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> tokens, const std::vector<std::string>& commands) {
  std::string config_path;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (tokens[k] == "--config") {
      if (k + 1 >= tokens.size()) throw InvalidArgument("--config needs a file");
      config_path = tokens[k + 1];
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(k), tokens.begin() + static_cast<std::ptrdiff_t>(k + 2));
      break;
    }
    if (tokens[k].rfind("--config=", 0) == 0) {
      config_path = tokens[k].substr(9);
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(k));
      break;
    }
  }
  if (config_path.empty()) return tokens;

  const Json cfg = load_json(config_path);
  if (!cfg.is_object()) throw InvalidArgument(config_path + ": expected a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    static const std::vector<std::string> known{"command", "version", "seed", "out_dir", "env", "args", "outputs"};
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InvalidArgument(config_path + ": unknown key '" + key + "'");
    }
  }
  std::string command;
  auto given = std::find_if(tokens.begin(), tokens.end(), [&](const std::string& t) {
    return std::find(commands.begin(), commands.end(), t) != commands.end();
  });
  if (given != tokens.end()) {
    command = *given;
    tokens.erase(given);
  } else if (cfg.contains("command")) {
    command = cfg.at("command").get<std::string>();
  } else {
    throw InvalidArgument(config_path + ": no command given");
  }

  std::vector<std::string> merged{command};
  auto add = [&](const std::string& key, const Json& v) {
    const std::string flag = "--" + key;
    if (mentions_flag(tokens, flag) || v.is_null()) return;
    merged.push_back(flag);
    if (v.is_array()) {
      if (v.empty()) {
        merged.pop_back();
        return;
      }
      for (const auto& e : v) append_value(merged, e, key);
    } else {
      append_value(merged, v, key);
    }
  };
  if (cfg.contains("seed")) add("seed", cfg.at("seed"));
  if (cfg.contains("out_dir")) add("out-dir", cfg.at("out_dir"));
  if (cfg.contains("args")) {
    if (!cfg.at("args").is_object()) throw InvalidArgument(config_path + ": 'args' must be an object");
    for (const auto& [key, value] : cfg.at("args").items()) add(key, value);
  }
  merged.insert(merged.end(), tokens.begin(), tokens.end());
  return merged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adversarial example games at desk scale", "aeg"};
  app.footer(
      "Every command accepts --seed, --out-dir and --config <run.json>. Outputs go to --out-dir, else $AEG_OUT_DIR, "
      "else the working directory; each run records its resolved arguments in run.json there.");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::vector<std::unique_ptr<Command>> cmds;
  add_gen_data(app, cmds);
  add_train(app, cmds);
  add_train_robust(app, cmds);
  add_attack(app, cmds);
  add_solve_game(app, cmds);
  add_entropy(app, cmds);
  add_verify_nash(app, cmds);
  add_eval_transfer(app, cmds);
  add_plot_trace(app, cmds);
  std::vector<std::string> names;
  for (auto& c : cmds) {
    names.push_back(c->name);
    c->app->add_option("--seed", c->seed, "global seed")->capture_default_str();
    c->app->add_option("--out-dir", c->out_dir, "output directory");
  }

  std::vector<std::string> tokens(args.begin() + (args.empty() ? 0 : 1), args.end());
  try {
    tokens = expand_config(std::move(tokens), names);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  Command* cmd = nullptr;
  for (auto& c : cmds) {
    if (c->app->parsed()) cmd = c.get();
  }
  if (!cmd) {
    err << app.help();
    return 1;
  }

  try {
    Context ctx;
    ctx.out = &out;
    ctx.seed = cmd->seed;
    const char* env = std::getenv(kOutDirEnv);
    std::string dir = cmd->out_dir;
    if (dir.empty()) dir = env && *env ? env : ".";
    ctx.out_dir = fs::path(absolute_path(dir));
    fs::create_directories(ctx.out_dir);
    for (std::string* p : cmd->inputs) {
      if (!p->empty()) *p = absolute_path(*p);
    }
    for (auto* list : cmd->input_lists) {
      for (auto& p : *list) p = absolute_path(p);
    }

    Json manifest;
    manifest["command"] = cmd->name;
    manifest["version"] = kVersion;
    manifest["seed"] = cmd->seed;
    manifest["out_dir"] = ctx.out_dir.string();
    manifest["env"] = Json{{kOutDirEnv, env ? Json(env) : Json(nullptr)}};
    Json resolved = Json::object();
    for (auto& d : cmd->dump) d(resolved);
    manifest["args"] = resolved;
    Json outputs = Json::array();
    for (std::string* o : cmd->outputs) outputs.push_back(*o);
    manifest["outputs"] = outputs;
    ctx.write("run.json", manifest.dump(2) + "\n");

    return cmd->body(ctx);
  } catch (const GameDivergence& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const UnboundedMinimizer& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace aeg::cli
