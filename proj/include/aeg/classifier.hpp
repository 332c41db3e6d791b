#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aeg/data.hpp"
#include "aeg/features.hpp"

namespace aeg {

/// Where a classifier's weights came from; carried into the model JSON.
struct TrainedWith {
  std::string algorithm = "none";
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;

  bool operator==(const TrainedWith&) const = default;
};

/// Linear classifier w^T psi(x) over a fixed feature map.
///
/// Binary problems (num_classes == 2) keep a single weight row w: label 1 maps
/// to y = +1, label 0 to y = -1, and the score is w^T psi(x). With K >= 3
/// classes there is one row per class and the loss is softmax cross-entropy.
class LinearClassifier {
public:
  LinearClassifier(FeatureMap map, int num_classes, std::vector<double> weights, double l2_reg = 0.0,
                   TrainedWith trained_with = {});

  static LinearClassifier zeros(FeatureMap map, int num_classes);

  const FeatureMap& feature_map() const noexcept { return map_; }
  int num_classes() const noexcept { return num_classes_; }
  bool is_binary() const noexcept { return num_classes_ == 2; }
  std::size_t rows() const noexcept { return is_binary() ? 1 : static_cast<std::size_t>(num_classes_); }
  std::size_t cols() const noexcept { return map_.output_dim(); }

  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> row(std::size_t r) const { return {weights_.data() + r * cols(), cols()}; }
  double l2_reg() const noexcept { return l2_reg_; }
  const TrainedWith& trained_with() const noexcept { return trained_with_; }

  /// Weights of the non-bias features (binary only).
  std::vector<double> non_bias_weights() const;

  /// Class scores for one input (one value for binary).
  void scores(std::span<const double> x, std::span<double> out) const;

  /// Same weights over a larger nested feature map, zero-padded.
  LinearClassifier embed_into(const FeatureMap& larger) const;

  bool operator==(const LinearClassifier&) const = default;

private:
  FeatureMap map_;
  int num_classes_;
  std::vector<double> weights_;
  double l2_reg_;
  TrainedWith trained_with_;
};

/// log(1 + exp(t)) without overflow or cancellation.
double log1p_exp(double t) noexcept;
/// 1 / (1 + exp(-t)).
double sigmoid(double t) noexcept;

/// Label in {0,1} as y in {-1,+1}.
inline double signed_label(int label) noexcept { return label == 1 ? 1.0 : -1.0; }

/// Cross-entropy of one example.
double example_loss(const LinearClassifier& f, std::span<const double> x, int label);

/// d loss / d x for one example, via the feature Jacobian.
std::vector<double> input_gradient(const LinearClassifier& f, std::span<const double> x, int label);

/// Mean (or weighted mean) cross-entropy. Weights, when given, must be
/// non-negative and sum to 1 within 1e-9. Uniform weights give exactly the
/// unweighted value.
double cross_entropy(const LinearClassifier& f, const LabeledDataset& ds,
                     std::optional<std::span<const double>> weights = std::nullopt);

/// Per-example losses, aligned with ds.
std::vector<double> example_losses(const LinearClassifier& f, const LabeledDataset& ds);

struct LossGradient {
  std::vector<double> weights;  // rows() x cols(), row-major
  std::vector<double> inputs;   // size() x dim() per-example d loss_i / d x_i; empty unless requested
};

/// Gradient of cross_entropy in the weights; optionally also each example's input gradient.
LossGradient loss_gradient(const LinearClassifier& f, const LabeledDataset& ds,
                           std::optional<std::span<const double>> weights = std::nullopt,
                           bool with_inputs = false);

int predict(const LinearClassifier& f, std::span<const double> x);
double error_rate(const LinearClassifier& f, const LabeledDataset& ds);

struct TrainReport {
  double final_objective = 0.0;
  long iterations = 0;
  double grad_norm_or_subgrad_gap = 0.0;
  bool converged = false;
  double best_objective = 0.0;
  std::vector<double> objective_trace;  // filled when requested
};

struct TrainOptions {
  long max_iter = 5000;
  double tol = 1e-8;
  double step = 1.0;  // first trial step; later trials use the Barzilai-Borwein estimate
  bool record_trace = false;
};

struct TrainResult {
  LinearClassifier classifier;
  TrainReport report;
};

/// Minimizes cross_entropy + (l2_reg / 2) ||W||_F^2 by full-batch gradient
/// descent with Armijo backtracking. Accepted steps never increase the
/// objective. Deterministic.
TrainResult train_logreg(const FeatureMap& map, const LabeledDataset& ds, double l2_reg,
                         const TrainOptions& opts = {},
                         std::optional<std::span<const double>> example_weights = std::nullopt,
                         const LinearClassifier* warm_start = nullptr);

struct RobustTrainOptions {
  long max_iter = 20000;
  double step = 1.0;  // subgradient step is step / sqrt(t)
  double l2_reg = 1e-6;
  bool include_bias = true;
  double tol = 1e-6;  // on the minimum-norm subgradient at the returned iterate
};

/// The l1-robust logistic objective
///   mean_i log(1 + exp(-y_i w^T psi(x_i) + eps ||w_nb||_1)) + (l2_reg / 2) ||w||^2
/// for binary data over linear features. w_nb excludes the bias coordinate.
double robust_objective(const LinearClassifier& f, const LabeledDataset& ds, double epsilon);

/// Averaged subgradient descent on robust_objective with steps c / sqrt(t).
/// Returns the average of the second half of the iterates; the report's
/// best_objective is the lowest objective seen along the way. Throws
/// UnboundedMinimizer when an iterate passes norm 1e6, or, with l2_reg == 0,
/// when every robust margin along the returned direction is <= 0 and one is < 0.
TrainResult train_robust_logreg_l1(const LabeledDataset& ds, double epsilon,
                                   const RobustTrainOptions& opts = {});

}  // namespace aeg
