#include "aeg/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "aeg/entropy.hpp"
#include "aeg/error.hpp"
#include "aeg/io.hpp"
#include "aeg/kernels.hpp"

namespace aeg {

void GameConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
  if (target_data.dim() != feature_map.input_dim() || reference_data.dim() != feature_map.input_dim()) {
    throw InvalidArgument("game datasets must match the feature map input dimension");
  }
}

namespace {

constexpr std::uint64_t kZStream = 0x5A17E5EEDULL;

std::uint64_t z_seed(std::uint64_t seed, int sample) {
  return seed * 0x9E3779B97F4A7C15ULL + kZStream + static_cast<std::uint64_t>(sample);
}

double eps_or_default(double step, double eps) { return step > 0.0 ? step : eps / 10.0; }

}  // namespace

PayoffReport payoff(const LinearClassifier& f, const Generator& g, const GameConfig& cfg, int num_z_samples) {
  cfg.validate();
  if (num_z_samples < 1) throw InvalidArgument("payoff: num_z_samples must be >= 1");
  const int samples = is_stochastic(g) ? num_z_samples : 1;
  PayoffReport rep;
  rep.per_example.assign(cfg.target_data.size(), 0.0);
  double phi = 0.0;
  for (int s = 0; s < samples; ++s) {
    const AdversarialDataset adv = attack_dataset(g, cfg.target_data, z_seed(cfg.seed, s));
    const LabeledDataset pts = adv.perturbed();
    phi += cross_entropy(f, pts);
    const auto losses = example_losses(f, pts);
    for (std::size_t i = 0; i < losses.size(); ++i) rep.per_example[i] += losses[i] / samples;
  }
  rep.phi = samples == 1 ? phi : phi / samples;
  rep.ref_term = cross_entropy(f, cfg.reference_data);
  rep.phi_lambda = rep.phi + cfg.lambda * rep.ref_term;
  return rep;
}

// ---------------------------------------------------------------------------
// Best-response dynamics

namespace {

AdversarialDataset max_step(const LinearClassifier& f, const AdversarialDataset& previous,
                            const BestResponseSettings& br, AttackBudget budget, long iteration) {
  const LabeledDataset& clean = previous.clean();
  const std::size_t d = clean.dim();
  std::vector<double> pts(previous.perturbed_points().begin(), previous.perturbed_points().end());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    std::vector<double> cand;
    if (br.max_step == BestResponseSettings::MaxStep::Grid) {
      cand = grid_attack(f, budget, clean.point(i), clean.label(i), br.grid_resolution);
    } else {
      cand = gradient_attack(f, budget, clean.point(i), clean.label(i), br.gradient_steps,
                             eps_or_default(br.gradient_step_size, budget.epsilon));
    }
    // The previous point is feasible too; never hand back something worse.
    const auto prev = previous.perturbed_point(i);
    if (example_loss(f, cand, clean.label(i)) >= example_loss(f, prev, clean.label(i))) {
      std::copy(cand.begin(), cand.end(), pts.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
  }
  const std::string kind = br.max_step == BestResponseSettings::MaxStep::Grid ? "grid" : "gradient";
  return AdversarialDataset(clean, std::move(pts),
                            "best-response-" + kind + ":eps=" + io::format_double(budget.epsilon) + ":iter=" +
                                std::to_string(iteration),
                            budget.epsilon);
}

TabulatedGenerator tabulate(const AdversarialDataset& adv) {
  std::vector<double> deltas(adv.perturbed_points().begin(), adv.perturbed_points().end());
  const auto clean = adv.clean().points();
  for (std::size_t k = 0; k < deltas.size(); ++k) deltas[k] -= clean[k];
  return {std::move(deltas), AttackBudget(adv.epsilon()), adv.generator_id()};
}

}  // namespace

GameTrace best_response_solve(const GameConfig& cfg) {
  cfg.validate();
  const auto* br = std::get_if<BestResponseSettings>(&cfg.solver);
  if (!br) throw InvalidArgument("best_response_solve: solver settings must be BestResponse");
  if (br->iterations < 1) throw InvalidArgument("best_response_solve: iterations must be >= 1");
  if (br->max_step == BestResponseSettings::MaxStep::Grid && cfg.feature_map.input_dim() != 2) {
    throw InvalidArgument("best_response_solve: grid maximization needs 2D inputs");
  }

  const LabeledDataset& D = cfg.target_data;
  AdversarialDataset adv(D, std::vector<double>(D.points().begin(), D.points().end()), "identity", cfg.budget.epsilon);
  GameTrace trace;
  std::optional<LinearClassifier> f;
  for (long t = 1; t <= br->iterations; ++t) {
    const Mixture mix = make_mixture(adv.perturbed(), cfg.reference_data, cfg.lambda);
    TrainResult res = [&] {
      try {
        return train_logreg(cfg.feature_map, mix.data, br->l2_reg, br->train, mix.weights, f ? &*f : nullptr);
      } catch (const NumericalFailure& e) {
        throw NumericalFailure(std::string("best-response min step ") + std::to_string(t) + ": " + e.what(), t);
      }
    }();
    f = std::move(res.classifier);

    GameRecord rec;
    rec.iteration = t;
    rec.f_entropy = br->l2_reg == 0.0 ? res.report.final_objective : cross_entropy(*f, mix.data, mix.weights);
    const double ref = cross_entropy(*f, cfg.reference_data);
    rec.phi_after_min = cross_entropy(*f, adv.perturbed());
    rec.phi_lambda_after_min = rec.phi_after_min + cfg.lambda * ref;

    adv = max_step(*f, adv, *br, cfg.budget, t);
    rec.phi_after_max = cross_entropy(*f, adv.perturbed());
    rec.phi_lambda_after_max = rec.phi_after_max + cfg.lambda * ref;

    trace.classifiers.push_back(*f);
    trace.generators.emplace_back(tabulate(adv));
    rec.classifier_snapshot = trace.classifiers.size() - 1;
    rec.generator_snapshot = trace.generators.size() - 1;
    trace.records.push_back(rec);
  }
  return trace;
}

void write_trace_csv(const GameTrace& trace, std::ostream& out) {
  out << "iter,phi_after_min,phi_after_max,phi_lambda_after_min,phi_lambda_after_max,f_entropy\n";
  for (const auto& r : trace.records) {
    out << r.iteration << ',' << io::format_double(r.phi_after_min) << ',' << io::format_double(r.phi_after_max)
        << ',' << io::format_double(r.phi_lambda_after_min) << ',' << io::format_double(r.phi_lambda_after_max) << ','
        << io::format_double(r.f_entropy) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Extrapolated descent-ascent

ExtraAdam::ExtraAdam(std::size_t size, Config cfg) : cfg_(cfg), m_(size, 0.0), v_(size, 0.0) {}

void ExtraAdam::direction(std::span<const double> grad, std::span<double> out) {
  if (!cfg_.moments) {
    std::copy(grad.begin(), grad.end(), out.begin());
    return;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < grad.size(); ++k) {
    m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * grad[k];
    v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * grad[k] * grad[k];
    out[k] = (m_[k] / c1) / (std::sqrt(v_[k] / c2) + cfg_.epsilon);
  }
}

void extragradient_step(std::span<double> min_params, std::span<double> max_params, const SaddleGradient& grad,
                        double lr_min, double lr_max, ExtraAdam& opt_min, ExtraAdam& opt_max) {
  std::vector<double> g_min(min_params.size());
  std::vector<double> g_max(max_params.size());
  std::vector<double> dir_min(min_params.size());
  std::vector<double> dir_max(max_params.size());

  grad(min_params, max_params, g_min, g_max);
  opt_min.direction(g_min, dir_min);
  opt_max.direction(g_max, dir_max);
  std::vector<double> half_min(min_params.begin(), min_params.end());
  std::vector<double> half_max(max_params.begin(), max_params.end());
  for (std::size_t k = 0; k < half_min.size(); ++k) half_min[k] -= lr_min * dir_min[k];
  for (std::size_t k = 0; k < half_max.size(); ++k) half_max[k] += lr_max * dir_max[k];

  grad(half_min, half_max, g_min, g_max);
  opt_min.direction(g_min, dir_min);
  opt_max.direction(g_max, dir_max);
  for (std::size_t k = 0; k < min_params.size(); ++k) min_params[k] -= lr_min * dir_min[k];
  for (std::size_t k = 0; k < max_params.size(); ++k) max_params[k] += lr_max * dir_max[k];
}

void gda_step(std::span<double> min_params, std::span<double> max_params, const SaddleGradient& grad, double lr_min,
              double lr_max) {
  std::vector<double> g_min(min_params.size());
  std::vector<double> g_max(max_params.size());
  grad(min_params, max_params, g_min, g_max);
  for (std::size_t k = 0; k < min_params.size(); ++k) min_params[k] -= lr_min * g_min[k];
  for (std::size_t k = 0; k < max_params.size(); ++k) max_params[k] += lr_max * g_max[k];
}

namespace {

// The parametric AEG payoff over a fixed (mini-)batch with fresh Gumbel noise
// per evaluation. Classifier parameters are the weight matrix, generator
// parameters are [logits | shifts].
class ParametricGame {
public:
  ParametricGame(const GameConfig& cfg, ParametricGenerator shape, int num_classes)
      : cfg_(cfg), shape_(std::move(shape)), num_classes_(num_classes) {}

  std::size_t generator_size() const { return shape_.logits().size() + shape_.shifts().size(); }

  ParametricGenerator unpack(std::span<const double> theta) const {
    ParametricGenerator g = shape_;
    const std::size_t nl = g.logits().size();
    std::copy_n(theta.begin(), nl, g.logits().begin());
    std::copy(theta.begin() + static_cast<std::ptrdiff_t>(nl), theta.end(), g.shifts().begin());
    return g;
  }

  static std::vector<double> pack(const ParametricGenerator& g) {
    std::vector<double> theta(g.logits().begin(), g.logits().end());
    theta.insert(theta.end(), g.shifts().begin(), g.shifts().end());
    return theta;
  }

  LinearClassifier classifier(std::span<const double> w) const {
    return LinearClassifier(cfg_.feature_map, num_classes_, std::vector<double>(w.begin(), w.end()));
  }

  void set_batch(std::vector<std::size_t> batch) { batch_ = std::move(batch); }

  // Gradient of phi_lambda in w (descent) and in theta (ascent). Returns the
  // mean relaxed adversarial loss on the batch.
  double gradients(std::span<const double> w, std::span<const double> theta, std::span<double> g_w,
                   std::span<double> g_theta, Rng& rng) const {
    const LinearClassifier f = classifier(w);
    const ParametricGenerator gen = unpack(theta);
    const std::size_t nl = gen.logits().size();
    std::fill(g_w.begin(), g_w.end(), 0.0);
    std::fill(g_theta.begin(), g_theta.end(), 0.0);
    std::span<double> g_logits = g_theta.subspan(0, nl);
    std::span<double> g_shifts = g_theta.subspan(nl);

    const LabeledDataset& D = cfg_.target_data;
    const double inv_b = 1.0 / static_cast<double>(batch_.size());
    const std::size_t p = f.cols();
    std::vector<double> noise(gen.num_latent());
    std::vector<double> phi(p);
    std::vector<double> s(f.rows());
    double total = 0.0;
    for (std::size_t i : batch_) {
      for (double& z : noise) z = rng.gumbel();
      const int y = D.label(i);
      const RelaxedSample rs = parametric_relaxed(gen, D.point(i), y, noise);
      total += example_loss(f, rs.x_adv, y);
      // Weight gradient of this example's loss, through a one-example dataset.
      const LabeledDataset one(rs.x_adv, D.dim(), {y}, D.num_classes());
      const LossGradient lg = loss_gradient(f, one);
      simd::axpy(inv_b, lg.weights, g_w);
      const std::vector<double> gx = input_gradient(f, rs.x_adv, y);
      accumulate_relaxed_gradient(gen, rs, y, gx, inv_b, g_logits, g_shifts);
    }
    if (cfg_.lambda > 0.0) {
      const LossGradient ref = loss_gradient(f, cfg_.reference_data);
      simd::axpy(cfg_.lambda, ref.weights, g_w);
    }
    return total * inv_b;
  }

private:
  const GameConfig& cfg_;
  ParametricGenerator shape_;
  int num_classes_;
  std::vector<std::size_t> batch_;
};

}  // namespace

GameTrace extragradient_solve(const GameConfig& cfg) {
  cfg.validate();
  const auto* eg = std::get_if<ExtraGradientSettings>(&cfg.solver);
  if (!eg) throw InvalidArgument("extragradient_solve: solver settings must be ExtraGradient");
  if (eg->steps < 1 || eg->generator_inner_cap < 1 || eg->record_every < 1) {
    throw InvalidArgument("extragradient_solve: steps, inner cap and record interval must be >= 1");
  }
  const LabeledDataset& D = cfg.target_data;
  const int K = std::max(D.num_classes(), cfg.reference_data.num_classes());
  Rng rng(cfg.seed);
  Rng init_rng = rng.fork();
  ParametricGenerator gen0 = ParametricGenerator::random_init(cfg.budget, K, eg->num_latent, D.dim(), eg->temperature,
                                                              eg->init_scale, init_rng);
  ParametricGame game(cfg, gen0, K);
  std::vector<double> w(LinearClassifier::zeros(cfg.feature_map, K).weights().size(), 0.0);
  std::vector<double> theta = ParametricGame::pack(gen0);

  const ExtraAdam::Config adam{eg->beta1, eg->beta2, eg->adam_epsilon, true};
  ExtraAdam opt_w(w.size(), adam);
  ExtraAdam opt_theta(theta.size(), adam);
  ExtraAdam opt_theta_inner(theta.size(), adam);
  Rng noise_rng = rng.fork();
  Rng batch_rng = rng.fork();
  const double fooled = std::log(static_cast<double>(K));

  std::vector<std::size_t> order(D.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = eg->batch_size == 0 ? D.size() : std::min(eg->batch_size, D.size());
  std::size_t cursor = D.size();
  auto next_batch = [&] {
    if (batch == D.size()) return order;
    if (cursor + batch > D.size()) {
      batch_rng.shuffle(std::span<std::size_t>(order));
      cursor = 0;
    }
    std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                               order.begin() + static_cast<std::ptrdiff_t>(cursor + batch));
    cursor += batch;
    return b;
  };

  double last_adv_loss = 0.0;
  const SaddleGradient joint = [&](std::span<const double> wv, std::span<const double> th, std::span<double> gw,
                                   std::span<double> gth) {
    last_adv_loss = game.gradients(wv, th, gw, gth, noise_rng);
  };
  std::vector<double> no_min;
  std::vector<double> scratch_w(w.size());

  GameTrace trace;
  auto evaluate = [&](const std::vector<double>& wv, const std::vector<double>& th) {
    return payoff(game.classifier(wv), Generator(game.unpack(th)), cfg, eg->num_z_samples);
  };
  const double initial = evaluate(w, theta).phi_lambda;
  const double limit = eg->divergence_factor * std::max(initial, 1e-12);
  const double ref_scale = cfg.lambda;

  for (long step = 1; step <= eg->steps; ++step) {
    game.set_batch(next_batch());
    extragradient_step(w, theta, joint, eg->lr_classifier, eg->lr_generator, opt_w, opt_theta);
    const std::vector<double> w_after_min = w;
    const std::vector<double> theta_after_min = theta;

    // Extra generator ascent on the same batch until it fools the critic.
    for (int k = 1; k < eg->generator_inner_cap; ++k) {
      if (last_adv_loss > fooled) break;
      const SaddleGradient gen_only = [&](std::span<const double>, std::span<const double> th, std::span<double>,
                                          std::span<double> gth) {
        last_adv_loss = game.gradients(w, th, scratch_w, gth, noise_rng);
      };
      extragradient_step(no_min, theta, gen_only, 0.0, eg->lr_generator, opt_w, opt_theta_inner);
    }

    for (double v : w) {
      if (!std::isfinite(v)) throw NumericalFailure("extragradient_solve: classifier weights diverged", step);
    }
    for (double v : theta) {
      if (!std::isfinite(v)) throw NumericalFailure("extragradient_solve: generator parameters diverged", step);
    }
    const double estimate = last_adv_loss + ref_scale * cross_entropy(game.classifier(w), cfg.reference_data);
    const bool record = step % eg->record_every == 0 || step == eg->steps;
    if (record || estimate > limit) {
      const PayoffReport after_min = evaluate(w_after_min, theta_after_min);
      const PayoffReport after_max = evaluate(w, theta);
      GameRecord rec;
      rec.iteration = step;
      rec.phi_after_min = after_min.phi;
      rec.phi_after_max = after_max.phi;
      rec.phi_lambda_after_min = after_min.phi_lambda;
      rec.phi_lambda_after_max = after_max.phi_lambda;
      rec.f_entropy = std::numeric_limits<double>::quiet_NaN();
      trace.classifiers.push_back(game.classifier(w));
      trace.generators.emplace_back(game.unpack(theta));
      if (eg->track_entropy) {
        const AdversarialDataset sample = attack_dataset(trace.generators.back(), D, z_seed(cfg.seed, 0));
        rec.f_entropy = mixture_f_entropy(sample, cfg.reference_data, cfg.lambda, cfg.feature_map, eg->entropy_train)
                            .value;
      }
      rec.classifier_snapshot = trace.classifiers.size() - 1;
      rec.generator_snapshot = trace.generators.size() - 1;
      trace.records.push_back(rec);
      if (std::max(after_max.phi_lambda, after_min.phi_lambda) > limit) {
        throw GameDivergence("extragradient_solve: phi_lambda exceeded " + io::format_double(eg->divergence_factor) +
                                 "x its initial value at step " + std::to_string(step),
                             std::move(trace));
      }
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Duality gap and Nash verification

DualityGap duality_gap(const LinearClassifier& f, const Generator& g, const GameConfig& cfg,
                       const InnerSolverOptions& inner) {
  cfg.validate();
  if (!(f.feature_map() == cfg.feature_map)) throw InvalidArgument("duality_gap: classifier must use cfg.feature_map");
  const LabeledDataset& D = cfg.target_data;
  DualityGap gap;
  const double ref = cross_entropy(f, cfg.reference_data);

  // max_{g'} phi(f, g')
  double max_phi = 0.0;
  if (f.is_binary() && f.feature_map().degree() == 1) {
    gap.max_method = "closed-form";
    const auto w_nb = f.non_bias_weights();
    const AdversarialDataset worst =
        attack_dataset(ClosedFormGenerator{w_nb, cfg.budget, "duality-gap"}, D);
    max_phi = cross_entropy(f, worst.perturbed());
  } else if (D.dim() == 2) {
    gap.max_method = "grid";
    max_phi = cross_entropy(f, attack_dataset(GridGenerator{f, cfg.budget, inner.grid_resolution, "duality-gap"}, D)
                                   .perturbed());
  } else {
    gap.max_method = "gradient";
    const GradientGenerator gg{f, cfg.budget, inner.gradient_steps,
                               eps_or_default(inner.gradient_step_size, cfg.budget.epsilon), "duality-gap"};
    max_phi = cross_entropy(f, attack_dataset(gg, D).perturbed());
  }
  gap.max_side = max_phi + cfg.lambda * ref;

  // min_{f'} phi_lambda(f', g) = (1 + lambda) * H_F(mixture)
  const int samples = is_stochastic(g) ? std::max(1, inner.num_z_samples) : 1;
  std::optional<LabeledDataset> generated;
  for (int s = 0; s < samples; ++s) {
    LabeledDataset pts = attack_dataset(g, D, z_seed(cfg.seed, s)).perturbed();
    generated = generated ? concat(*generated, pts) : std::move(pts);
  }
  const Mixture mix = make_mixture(*generated, cfg.reference_data, cfg.lambda);
  const TrainResult best = train_logreg(cfg.feature_map, mix.data, 0.0, inner.train, mix.weights, &f);
  gap.min_side = (1.0 + cfg.lambda) * best.report.final_objective;
  gap.value = gap.max_side - gap.min_side;
  return gap;
}

double nash_generator_violation(const LinearClassifier& f_star, const AdversarialDataset& at_star,
                                const AdversarialDataset& deviation) {
  return cross_entropy(f_star, deviation.perturbed()) - cross_entropy(f_star, at_star.perturbed());
}

double nash_classifier_violation(const LinearClassifier& f_star, const AdversarialDataset& at_star,
                                 std::span<const double> eta) {
  if (eta.size() != f_star.weights().size()) throw InvalidArgument("nash_classifier_violation: eta has wrong size");
  std::vector<double> w(f_star.weights().begin(), f_star.weights().end());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] += eta[k];
  const LinearClassifier moved(f_star.feature_map(), f_star.num_classes(), std::move(w));
  const LabeledDataset pts = at_star.perturbed();
  return cross_entropy(f_star, pts) - cross_entropy(moved, pts);
}

NashReport verify_nash_prop2(const LabeledDataset& ds, double epsilon, int num_deviations, std::uint64_t seed,
                             const NashOptions& opts) {
  if (ds.num_classes() != 2) throw InvalidArgument("verify_nash_prop2: binary data required");
  if (num_deviations < 1) throw InvalidArgument("verify_nash_prop2: num_deviations must be >= 1");
  const AttackBudget budget(epsilon);
  TrainResult robust = train_robust_logreg_l1(ds, epsilon, opts.robust);
  // The game payoff has no ridge term; evaluate f* as a plain linear classifier.
  const LinearClassifier f_star(robust.classifier.feature_map(), 2,
                                std::vector<double>(robust.classifier.weights().begin(),
                                                    robust.classifier.weights().end()),
                                0.0, robust.classifier.trained_with());
  NashReport rep{.classifier = robust.classifier, .train_report = robust.report, .message = {}};

  const std::vector<double> w_nb = f_star.non_bias_weights();
  for (double v : w_nb) {
    if (std::fabs(v) < opts.zero_weight_threshold) {
      rep.inconclusive = true;
      rep.message = "w* has a coordinate below " + io::format_double(opts.zero_weight_threshold) +
                    " in magnitude; the equilibrium statement does not apply";
      return rep;
    }
  }

  const ClosedFormGenerator g_star{w_nb, budget, "nash-star"};
  const AdversarialDataset at_star = attack_dataset(g_star, ds);
  rep.phi_star = cross_entropy(f_star, at_star.perturbed());

  // Optimizer slack: how far f* is from the exact best response to g*.
  const TrainResult retrained = train_logreg(f_star.feature_map(), at_star.perturbed(), 0.0, opts.retrain, std::nullopt,
                                             &f_star);
  rep.slack = std::max(0.0, rep.phi_star - retrained.report.final_objective);

  GameConfig cfg{budget, 0.0, ds, ds, f_star.feature_map(), BestResponseSettings{}, seed};
  rep.duality_gap = duality_gap(f_star, g_star, cfg, InnerSolverOptions{opts.retrain, 41, 50, 0.0, 1}).value;

  Rng rng(seed);
  const std::size_t n = ds.size();
  const std::size_t d = ds.dim();
  rep.worst_generator_violation = -std::numeric_limits<double>::infinity();
  rep.worst_classifier_violation = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < num_deviations; ++k) {
    std::vector<double> deltas(n * d);
    for (std::size_t i = 0; i < n; ++i) {
      const bool vertex = rng.uniform() < 0.5;
      for (std::size_t j = 0; j < d; ++j) {
        deltas[i * d + j] = vertex ? rng.sign() * epsilon : rng.uniform(-epsilon, epsilon);
      }
    }
    const AdversarialDataset dev =
        attack_dataset(TabulatedGenerator{std::move(deltas), budget, "nash-deviation"}, ds);
    rep.worst_generator_violation = std::max(rep.worst_generator_violation, nash_generator_violation(f_star, at_star, dev));
  }
  const double w_scale = std::max(1.0, std::sqrt(simd::dot(f_star.weights(), f_star.weights())));
  for (int k = 0; k < num_deviations; ++k) {
    // Radii spread log-uniformly over [1e-4, 1] times the weight scale.
    const double radius = w_scale * std::pow(10.0, rng.uniform(-4.0, 0.0));
    std::vector<double> eta(f_star.weights().size());
    double norm = 0.0;
    for (double& e : eta) {
      e = rng.normal();
      norm += e * e;
    }
    norm = std::sqrt(norm);
    for (double& e : eta) e *= radius / norm;
    rep.worst_classifier_violation =
        std::max(rep.worst_classifier_violation, nash_classifier_violation(f_star, at_star, eta));
  }
  rep.generator_deviations = num_deviations;
  rep.classifier_deviations = num_deviations;
  rep.worst_violation = std::max(rep.worst_generator_violation, rep.worst_classifier_violation);
  rep.passed = rep.worst_generator_violation <= opts.tol && rep.worst_classifier_violation <= opts.tol + rep.slack;
  rep.message = rep.passed ? "no profitable unilateral deviation found" : "a profitable deviation exists";
  return rep;
}

}  // namespace aeg
