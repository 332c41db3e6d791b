#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "aeg/classifier.hpp"
#include "aeg/data.hpp"
#include "aeg/features.hpp"
#include "aeg/generator.hpp"

namespace aeg {

/// Alternating best responses: train the classifier to convergence, then
/// rebuild the adversarial set by per-example inner maximization.
struct BestResponseSettings {
  enum class MaxStep { Grid, Gradient };
  int iterations = 10;
  MaxStep max_step = MaxStep::Grid;
  int grid_resolution = 41;
  int gradient_steps = 50;
  double gradient_step_size = 0.0;  // 0 means eps / 10
  double l2_reg = 0.0;
  TrainOptions train{};
};

/// Simultaneous descent-ascent with extrapolation and Adam-style moments.
struct ExtraGradientSettings {
  int steps = 500;
  double lr_classifier = 1e-3;
  double lr_generator = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int generator_inner_cap = 20;
  std::size_t num_latent = 4;
  double temperature = 0.5;
  double init_scale = 0.1;
  std::size_t batch_size = 0;  // 0 = full batch
  int record_every = 10;
  int num_z_samples = 1;
  bool track_entropy = true;
  TrainOptions entropy_train{500, 1e-8, 1.0, false};
  double divergence_factor = 10.0;
};

using SolverSettings = std::variant<BestResponseSettings, ExtraGradientSettings>;

struct GameConfig {
  AttackBudget budget;
  double lambda = 0.0;
  LabeledDataset target_data;
  LabeledDataset reference_data;
  FeatureMap feature_map;
  SolverSettings solver;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument on negative lambda or incompatible datasets.
  void validate() const;
};

struct PayoffReport {
  double phi = 0.0;       // adversarial term
  double ref_term = 0.0;  // clean loss on the reference data
  double phi_lambda = 0.0;
  std::vector<double> per_example;  // mean loss per target example over z samples
};

/// phi = mean over D and z samples of loss(f(g(x, y, z)), y); ref_term = mean
/// cross-entropy on D_ref; phi_lambda = phi + lambda * ref_term. z samples are
/// drawn from streams derived from cfg.seed; deterministic generators ignore
/// num_z_samples.
PayoffReport payoff(const LinearClassifier& f, const Generator& g, const GameConfig& cfg, int num_z_samples = 1);

struct GameRecord {
  long iteration = 0;
  double phi_after_min = 0.0;
  double phi_after_max = 0.0;
  double phi_lambda_after_min = 0.0;
  double phi_lambda_after_max = 0.0;
  double f_entropy = 0.0;  // NaN when not tracked
  std::size_t classifier_snapshot = 0;
  std::size_t generator_snapshot = 0;
};

struct GameTrace {
  std::vector<GameRecord> records;
  std::vector<LinearClassifier> classifiers;  // snapshots referenced by records
  std::vector<Generator> generators;          // snapshots referenced by records

  const LinearClassifier& final_classifier() const { return classifiers.back(); }
  const Generator& final_generator() const { return generators.back(); }
};

/// Thrown when phi_lambda exceeds divergence_factor times its initial value.
class GameDivergence : public std::runtime_error {
public:
  GameDivergence(const std::string& what, GameTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const GameTrace& trace() const noexcept { return trace_; }

private:
  GameTrace trace_;
};

GameTrace best_response_solve(const GameConfig& cfg);
GameTrace extragradient_solve(const GameConfig& cfg);

/// CSV: `iter,phi_after_min,phi_after_max,phi_lambda_after_min,phi_lambda_after_max,f_entropy`.
void write_trace_csv(const GameTrace& trace, std::ostream& out);

/// Per-parameter-block optimizer state for extrapolated descent-ascent.
/// With moments disabled the direction is the raw gradient, which gives the
/// plain extragradient method.
class ExtraAdam {
public:
  struct Config {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    bool moments = true;
  };

  ExtraAdam(std::size_t size, Config cfg);

  /// Folds `grad` into the moment estimates and writes the bias-corrected
  /// step direction m_hat / (sqrt(v_hat) + epsilon).
  void direction(std::span<const double> grad, std::span<double> out);

private:
  Config cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

/// Gradients of the payoff at (min_params, max_params).
using SaddleGradient = std::function<void(std::span<const double> min_params, std::span<const double> max_params,
                                          std::span<double> grad_min, std::span<double> grad_max)>;

/// One extrapolated step: gradients at the current point give an extrapolated
/// point, gradients there give the update applied to the current point.
void extragradient_step(std::span<double> min_params, std::span<double> max_params, const SaddleGradient& grad,
                        double lr_min, double lr_max, ExtraAdam& opt_min, ExtraAdam& opt_max);

/// Simultaneous gradient descent-ascent step.
void gda_step(std::span<double> min_params, std::span<double> max_params, const SaddleGradient& grad, double lr_min,
              double lr_max);

struct InnerSolverOptions {
  TrainOptions train{20000, 1e-10, 1.0, false};
  int grid_resolution = 41;
  int gradient_steps = 50;
  double gradient_step_size = 0.0;  // 0 means eps / 10
  int num_z_samples = 1;
};

struct DualityGap {
  double value = 0.0;     // max_side - min_side
  double max_side = 0.0;  // max_{g'} phi_lambda(f, g')
  double min_side = 0.0;  // min_{f'} phi_lambda(f', g)
  std::string max_method;  // "closed-form", "grid" or "gradient"
};

/// [max_{g'} phi_lambda(f, g')] - [min_{f'} phi_lambda(f', g)]. The max side is
/// exact (eps * ||w||_1) for binary classifiers over linear features and uses
/// grid (2D) or gradient attacks otherwise; the min side retrains over
/// cfg.feature_map, warm-started from f.
DualityGap duality_gap(const LinearClassifier& f, const Generator& g, const GameConfig& cfg,
                       const InnerSolverOptions& inner = {});

struct NashOptions {
  RobustTrainOptions robust{};
  TrainOptions retrain{20000, 1e-10, 1.0, false};
  double tol = 1e-6;
  double zero_weight_threshold = 1e-8;
};

struct NashReport {
  bool passed = false;
  bool inconclusive = false;
  double worst_violation = 0.0;
  double worst_generator_violation = 0.0;
  double worst_classifier_violation = 0.0;
  double slack = 0.0;  // phi(f*, g*) - min_f phi(f, g*)
  double phi_star = 0.0;
  double duality_gap = 0.0;
  int generator_deviations = 0;
  int classifier_deviations = 0;
  LinearClassifier classifier;
  TrainReport train_report;
  std::string message;
};

/// phi(f*, g') - phi(f*, g*) for a generator deviation realized on the same examples.
double nash_generator_violation(const LinearClassifier& f_star, const AdversarialDataset& at_star,
                                const AdversarialDataset& deviation);

/// phi(f*, g*) - phi(f* + eta, g*).
double nash_classifier_violation(const LinearClassifier& f_star, const AdversarialDataset& at_star,
                                 std::span<const double> eta);

/// Checks that the l1-robust logistic solution and its closed-form generator
/// form a Nash equilibrium: sampled feasible generator deviations must not
/// raise phi, sampled classifier deviations must not lower it beyond
/// tol + slack. Inconclusive when some non-bias weight is near zero.
NashReport verify_nash_prop2(const LabeledDataset& ds, double epsilon, int num_deviations, std::uint64_t seed,
                             const NashOptions& opts = {});

}  // namespace aeg
