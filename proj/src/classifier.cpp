#include "aeg/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aeg/error.hpp"
#include "aeg/kernels.hpp"

namespace aeg {

LinearClassifier::LinearClassifier(FeatureMap map, int num_classes, std::vector<double> weights,
                                   double l2_reg, TrainedWith trained_with)
    : map_(std::move(map)),
      num_classes_(num_classes),
      weights_(std::move(weights)),
      l2_reg_(l2_reg),
      trained_with_(std::move(trained_with)) {
  if (num_classes_ < 2) throw InvalidArgument("classifier needs num_classes >= 2");
  if (weights_.size() != rows() * cols()) {
    throw InvalidArgument("classifier weights have " + std::to_string(weights_.size()) + " entries, expected " +
                          std::to_string(rows() * cols()));
  }
  for (double w : weights_) {
    if (!std::isfinite(w)) throw InvalidArgument("classifier weights must be finite");
  }
  if (!(l2_reg_ >= 0.0) || !std::isfinite(l2_reg_)) throw InvalidArgument("l2_reg must be finite and >= 0");
}

LinearClassifier LinearClassifier::zeros(FeatureMap map, int num_classes) {
  const std::size_t rows = num_classes == 2 ? 1 : static_cast<std::size_t>(std::max(num_classes, 0));
  const std::size_t n = rows * map.output_dim();
  return LinearClassifier(std::move(map), num_classes, std::vector<double>(n, 0.0));
}

std::vector<double> LinearClassifier::non_bias_weights() const {
  if (!is_binary()) throw InvalidArgument("non_bias_weights: binary classifiers only");
  const std::size_t skip = map_.include_bias() ? 1 : 0;
  return {weights_.begin() + static_cast<std::ptrdiff_t>(skip), weights_.end()};
}

void LinearClassifier::scores(std::span<const double> x, std::span<double> out) const {
  thread_local std::vector<double> phi;
  phi.resize(cols());
  map_.featurize(x, phi);
  if (out.size() != rows()) throw InvalidArgument("scores: output buffer has wrong size");
  simd::gemv(weights_, rows(), cols(), phi, out);
}

LinearClassifier LinearClassifier::embed_into(const FeatureMap& larger) const {
  if (larger.input_dim() != map_.input_dim() || larger.include_bias() != map_.include_bias() ||
      larger.degree() < map_.degree()) {
    throw InvalidArgument("embed_into: target feature map does not contain " + map_.name());
  }
  const std::size_t p_small = cols();
  const std::size_t p_large = larger.output_dim();
  std::vector<double> w(rows() * p_large, 0.0);
  for (std::size_t r = 0; r < rows(); ++r) {
    std::copy_n(weights_.begin() + static_cast<std::ptrdiff_t>(r * p_small), p_small,
                w.begin() + static_cast<std::ptrdiff_t>(r * p_large));
  }
  return LinearClassifier(larger, num_classes_, std::move(w), l2_reg_, trained_with_);
}

double log1p_exp(double t) noexcept {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

// Loss and score-derivative of one example from its class scores. coef receives
// d loss / d score (one entry for binary, K for multiclass).
double loss_from_scores(std::span<const double> s, int label, bool binary, double* coef) {
  if (binary) {
    const double y = signed_label(label);
    const double margin = -y * s[0];
    if (coef) coef[0] = -y * sigmoid(margin);
    return log1p_exp(margin);
  }
  const double smax = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (double v : s) z += std::exp(v - smax);
  const double lse = smax + std::log(z);
  if (coef) {
    for (std::size_t r = 0; r < s.size(); ++r) coef[r] = std::exp(s[r] - lse) - (static_cast<int>(r) == label ? 1.0 : 0.0);
  }
  return lse - s[static_cast<std::size_t>(label)];
}

void check_compatible(const LinearClassifier& f, const LabeledDataset& ds) {
  if (ds.dim() != f.feature_map().input_dim()) {
    throw InvalidArgument("dataset dim " + std::to_string(ds.dim()) + " does not match classifier input dim " +
                          std::to_string(f.feature_map().input_dim()));
  }
  if (ds.num_classes() > f.num_classes()) throw InvalidArgument("dataset has more classes than the classifier");
}

std::vector<double> resolve_weights(std::optional<std::span<const double>> weights, std::size_t n) {
  if (!weights) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  if (weights->size() != n) throw InvalidArgument("example weights size does not match dataset");
  double total = 0.0;
  for (double w : *weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("example weights must be finite and >= 0");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw InvalidArgument("example weights must sum to 1");
  return {weights->begin(), weights->end()};
}

// Pre-featurized training problem.
struct Problem {
  std::vector<double> phi;  // n x p
  std::vector<int> labels;
  std::vector<double> example_weights;
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t rows = 0;
  bool binary = true;

  Problem(const FeatureMap& map, const LabeledDataset& ds, int num_classes,
          std::optional<std::span<const double>> weights)
      : phi(map.featurize_all(ds)),
        labels(ds.labels().begin(), ds.labels().end()),
        example_weights(resolve_weights(weights, ds.size())),
        n(ds.size()),
        p(map.output_dim()),
        rows(num_classes == 2 ? 1 : static_cast<std::size_t>(num_classes)),
        binary(num_classes == 2) {}

  // Weighted mean loss at W; if grad is non-null it receives the gradient.
  double evaluate(std::span<const double> w, std::vector<double>* grad,
                  std::vector<double>* losses_out = nullptr) const {
    const auto& k = simd::active_kernels();
    std::vector<double> losses(n);
    std::vector<double> s(rows);
    std::vector<double> coef(rows);
    if (grad) grad->assign(rows * p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = phi.data() + i * p;
      k.gemv(w.data(), rows, p, row, s.data());
      losses[i] = loss_from_scores(s, labels[i], binary, grad ? coef.data() : nullptr);
      if (grad && example_weights[i] != 0.0) {
        for (std::size_t r = 0; r < rows; ++r) k.axpy(example_weights[i] * coef[r], row, grad->data() + r * p, p);
      }
    }
    const double total = k.dot(example_weights.data(), losses.data(), n);
    if (losses_out) *losses_out = std::move(losses);
    return total;
  }
};

double squared_norm(std::span<const double> v) { return simd::dot(v, v); }

}  // namespace

double example_loss(const LinearClassifier& f, std::span<const double> x, int label) {
  std::vector<double> s(f.rows());
  f.scores(x, s);
  return loss_from_scores(s, label, f.is_binary(), nullptr);
}

std::vector<double> input_gradient(const LinearClassifier& f, std::span<const double> x, int label) {
  const std::size_t p = f.cols();
  const std::size_t d = f.feature_map().input_dim();
  std::vector<double> s(f.rows());
  std::vector<double> coef(f.rows());
  f.scores(x, s);
  loss_from_scores(s, label, f.is_binary(), coef.data());
  // dl/dpsi = W^T coef, then dl/dx = J^T dl/dpsi.
  std::vector<double> dpsi(p, 0.0);
  for (std::size_t r = 0; r < f.rows(); ++r) simd::axpy(coef[r], f.row(r), dpsi);
  const std::vector<double> jac = f.feature_map().jacobian(x);
  std::vector<double> g(d, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    if (dpsi[k] == 0.0) continue;
    simd::axpy(dpsi[k], std::span<const double>(jac.data() + k * d, d), g);
  }
  return g;
}

double cross_entropy(const LinearClassifier& f, const LabeledDataset& ds,
                     std::optional<std::span<const double>> weights) {
  check_compatible(f, ds);
  const Problem prob(f.feature_map(), ds, f.num_classes(), weights);
  return prob.evaluate(f.weights(), nullptr);
}

std::vector<double> example_losses(const LinearClassifier& f, const LabeledDataset& ds) {
  check_compatible(f, ds);
  const Problem prob(f.feature_map(), ds, f.num_classes(), std::nullopt);
  std::vector<double> losses;
  prob.evaluate(f.weights(), nullptr, &losses);
  return losses;
}

LossGradient loss_gradient(const LinearClassifier& f, const LabeledDataset& ds,
                           std::optional<std::span<const double>> weights, bool with_inputs) {
  check_compatible(f, ds);
  const Problem prob(f.feature_map(), ds, f.num_classes(), weights);
  LossGradient out;
  prob.evaluate(f.weights(), &out.weights);
  if (with_inputs) {
    const std::size_t d = ds.dim();
    out.inputs.resize(ds.size() * d);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto g = input_gradient(f, ds.point(i), ds.label(i));
      std::copy(g.begin(), g.end(), out.inputs.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
  }
  return out;
}

int predict(const LinearClassifier& f, std::span<const double> x) {
  std::vector<double> s(f.rows());
  f.scores(x, s);
  if (f.is_binary()) return s[0] > 0.0 ? 1 : 0;
  // max_element returns the first maximum, i.e. the lowest class index on ties.
  return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

double error_rate(const LinearClassifier& f, const LabeledDataset& ds) {
  check_compatible(f, ds);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (predict(f, ds.point(i)) != ds.label(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(ds.size());
}

TrainResult train_logreg(const FeatureMap& map, const LabeledDataset& ds, double l2_reg, const TrainOptions& opts,
                         std::optional<std::span<const double>> example_weights,
                         const LinearClassifier* warm_start) {
  if (!(l2_reg >= 0.0) || !std::isfinite(l2_reg)) throw InvalidArgument("train_logreg: l2_reg must be >= 0");
  if (opts.max_iter < 0 || !(opts.step > 0.0)) throw InvalidArgument("train_logreg: bad options");
  if (ds.dim() != map.input_dim()) throw InvalidArgument("train_logreg: dataset dim does not match feature map");
  const int num_classes = warm_start ? std::max(warm_start->num_classes(), ds.num_classes()) : ds.num_classes();
  const Problem prob(map, ds, num_classes, example_weights);

  std::vector<double> w(prob.rows * prob.p, 0.0);
  if (warm_start) {
    if (!(warm_start->feature_map() == map) || warm_start->num_classes() != num_classes) {
      throw InvalidArgument("train_logreg: warm start does not match the feature map");
    }
    w.assign(warm_start->weights().begin(), warm_start->weights().end());
  }

  auto objective = [&](std::span<const double> v, std::vector<double>* g) {
    double val = prob.evaluate(v, g);
    if (l2_reg > 0.0) {
      val += 0.5 * l2_reg * squared_norm(v);
      if (g) simd::axpy(l2_reg, v, *g);
    }
    return val;
  };

  std::vector<double> grad;
  double obj = objective(w, &grad);
  if (!std::isfinite(obj)) throw NumericalFailure("train_logreg: non-finite initial loss", 0);

  TrainReport report;
  if (opts.record_trace) report.objective_trace.push_back(obj);
  constexpr double kArmijo = 1e-4;
  double step = opts.step;
  std::vector<double> w_prev;
  std::vector<double> grad_prev;
  std::vector<double> trial(w.size());
  std::vector<double> trial_grad;
  long it = 0;
  double gnorm = std::sqrt(squared_norm(grad));
  for (; it < opts.max_iter; ++it) {
    if (gnorm <= opts.tol) {
      report.converged = true;
      break;
    }
    if (!w_prev.empty()) {
      // Barzilai-Borwein trial step s's / s'y from the last accepted move.
      double ss = 0.0;
      double sy = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double s = w[j] - w_prev[j];
        ss += s * s;
        sy += s * (grad[j] - grad_prev[j]);
      }
      step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : opts.step;
    }
    const double g2 = gnorm * gnorm;
    bool accepted = false;
    double trial_obj = obj;
    while (step > 1e-20) {
      for (std::size_t j = 0; j < w.size(); ++j) trial[j] = w[j] - step * grad[j];
      trial_obj = objective(trial, &trial_grad);
      if (std::isfinite(trial_obj) && trial_obj <= obj - kArmijo * step * g2 && trial_obj < obj) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no decrease representable in double precision
    w_prev = w;
    grad_prev = grad;
    w.swap(trial);
    grad.swap(trial_grad);
    obj = trial_obj;
    gnorm = std::sqrt(squared_norm(grad));
    if (!std::isfinite(gnorm)) throw NumericalFailure("train_logreg: non-finite gradient", it + 1);
    if (opts.record_trace) report.objective_trace.push_back(obj);
  }
  if (!report.converged && gnorm <= opts.tol) report.converged = true;
  report.final_objective = obj;
  report.best_objective = obj;
  report.iterations = it;
  report.grad_norm_or_subgrad_gap = gnorm;
  TrainedWith provenance{"gd-backtracking", std::nullopt, std::nullopt};
  return {LinearClassifier(map, num_classes, std::move(w), l2_reg, provenance), report};
}

namespace {

struct RobustProblem {
  std::vector<double> phi;
  std::vector<double> y;
  std::size_t n;
  std::size_t p;
  std::size_t first_penalized;  // 1 when the bias feature is present
  double epsilon;
  double l2;

  // Objective at w; fills a subgradient (sign(0) = 0) and the mean sigmoid
  // weight that multiplies eps in the l1 part.
  double evaluate(std::span<const double> w, std::vector<double>* sub, std::vector<double>* smooth,
                  double* mean_sigma) const {
    const auto& k = simd::active_kernels();
    const double l1 = k.asum(w.data() + first_penalized, p - first_penalized);
    std::vector<double> losses(n);
    std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
    double sig_total = 0.0;
    if (smooth) smooth->assign(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = phi.data() + i * p;
      const double m = -y[i] * k.dot(w.data(), row, p) + epsilon * l1;
      losses[i] = log1p_exp(m);
      if (smooth) {
        const double sg = sigmoid(m) / static_cast<double>(n);
        sig_total += sg;
        k.axpy(-y[i] * sg, row, smooth->data(), p);
      }
    }
    double val = k.dot(uniform.data(), losses.data(), n);
    if (l2 > 0.0) val += 0.5 * l2 * k.dot(w.data(), w.data(), p);
    if (smooth) {
      if (l2 > 0.0) k.axpy(l2, w.data(), smooth->data(), p);
      if (mean_sigma) *mean_sigma = sig_total;
      if (sub) {
        *sub = *smooth;
        for (std::size_t j = first_penalized; j < p; ++j) {
          const double sgn = w[j] > 0.0 ? 1.0 : (w[j] < 0.0 ? -1.0 : 0.0);
          (*sub)[j] += epsilon * sig_total * sgn;
        }
      }
    }
    return val;
  }

  // Norm of the minimum-norm element of the subdifferential.
  double subgradient_gap(std::span<const double> w) const {
    std::vector<double> smooth;
    double s = 0.0;
    evaluate(w, nullptr, &smooth, &s);
    double total = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      double g = smooth[j];
      if (j >= first_penalized) {
        if (w[j] > 0.0) g += epsilon * s;
        else if (w[j] < 0.0) g -= epsilon * s;
        else g = std::max(std::fabs(g) - epsilon * s, 0.0);
      }
      total += g * g;
    }
    return std::sqrt(total);
  }
};

}  // namespace

double robust_objective(const LinearClassifier& f, const LabeledDataset& ds, double epsilon) {
  if (!f.is_binary() || f.feature_map().degree() != 1) {
    throw InvalidArgument("robust_objective: binary classifier over linear features required");
  }
  check_compatible(f, ds);
  const FeatureMap& map = f.feature_map();
  RobustProblem prob{map.featurize_all(ds), {}, ds.size(), map.output_dim(), map.include_bias() ? 1u : 0u,
                     epsilon, f.l2_reg()};
  for (int l : ds.labels()) prob.y.push_back(signed_label(l));
  return prob.evaluate(f.weights(), nullptr, nullptr, nullptr);
}

TrainResult train_robust_logreg_l1(const LabeledDataset& ds, double epsilon, const RobustTrainOptions& opts) {
  if (ds.num_classes() != 2) throw InvalidArgument("train_robust_logreg_l1: binary labels required");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("train_robust_logreg_l1: epsilon must be >= 0");
  if (opts.max_iter < 2 || !(opts.step > 0.0) || !(opts.l2_reg >= 0.0)) {
    throw InvalidArgument("train_robust_logreg_l1: bad options");
  }
  const FeatureMap map = FeatureMap::linear(ds.dim(), opts.include_bias);
  RobustProblem prob{map.featurize_all(ds), {}, ds.size(), map.output_dim(), opts.include_bias ? 1u : 0u,
                     epsilon, opts.l2_reg};
  for (int l : ds.labels()) prob.y.push_back(signed_label(l));

  const std::size_t p = prob.p;
  std::vector<double> w(p, 0.0);
  std::vector<double> avg(p, 0.0);
  std::vector<double> sub;
  std::vector<double> smooth;
  const long tail_start = opts.max_iter / 2;
  long averaged = 0;
  double best = std::numeric_limits<double>::infinity();
  for (long t = 1; t <= opts.max_iter; ++t) {
    const double obj = prob.evaluate(w, &sub, &smooth, nullptr);
    if (!std::isfinite(obj)) throw NumericalFailure("train_robust_logreg_l1: non-finite objective", t);
    best = std::min(best, obj);
    const double step = opts.step / std::sqrt(static_cast<double>(t));
    for (std::size_t j = 0; j < p; ++j) w[j] -= step * sub[j];
    if (std::sqrt(squared_norm(w)) > 1e6) {
      throw UnboundedMinimizer("robust objective keeps decreasing as ||w|| grows past 1e6; use l2_reg > 0 or less separable data");
    }
    if (t > tail_start) {
      ++averaged;
      const double a = 1.0 / static_cast<double>(averaged);
      for (std::size_t j = 0; j < p; ++j) avg[j] += a * (w[j] - avg[j]);
    }
  }

  const double final_obj = prob.evaluate(avg, nullptr, nullptr, nullptr);
  best = std::min(best, final_obj);

  // Recession check: with no ridge the infimum can sit at infinity. If every
  // robust margin along the returned direction is <= 0 and one is < 0, moving
  // further along it lowers the objective from any starting point.
  const double norm = std::sqrt(squared_norm(avg));
  if (opts.l2_reg == 0.0 && norm > 0.0) {
    const auto& k = simd::active_kernels();
    const double l1 = k.asum(avg.data() + prob.first_penalized, p - prob.first_penalized);
    bool any_negative = false;
    bool all_nonpositive = true;
    for (std::size_t i = 0; i < prob.n && all_nonpositive; ++i) {
      const double m = -prob.y[i] * k.dot(avg.data(), prob.phi.data() + i * p, p) + epsilon * l1;
      all_nonpositive = m <= 0.0;
      any_negative = any_negative || m < 0.0;
    }
    if (all_nonpositive && any_negative) {
      throw UnboundedMinimizer("robust objective has no finite minimizer (it decreases without bound along the solution direction); use l2_reg > 0 or less separable data");
    }
  }

  TrainReport report;
  report.final_objective = final_obj;
  report.best_objective = best;
  report.iterations = opts.max_iter;
  report.grad_norm_or_subgrad_gap = prob.subgradient_gap(avg);
  report.converged = report.grad_norm_or_subgrad_gap <= opts.tol;
  TrainedWith provenance{"robust-l1-subgradient", epsilon, std::nullopt};
  return {LinearClassifier(map, 2, std::move(avg), opts.l2_reg, provenance), report};
}

}  // namespace aeg
