#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "aeg/classifier.hpp"
#include "aeg/data.hpp"
#include "aeg/rng.hpp"

namespace aeg {

/// l-infinity perturbation budget.
struct AttackBudget {
  double epsilon = 0.0;

  explicit AttackBudget(double eps);
  AttackBudget() = default;

  bool operator==(const AttackBudget&) const = default;
};

/// x' = x - y * eps * sign(w), coordinate-wise, with sign(0) = 0.
/// `w` holds the non-bias weights of a binary linear classifier; y is +1 or -1.
std::vector<double> closed_form_attack(std::span<const double> w, AttackBudget budget,
                                       std::span<const double> x, double y);

/// max over ||delta||_inf <= eps of y * w^T delta, i.e. eps * ||w||_1.
double inner_max_value(std::span<const double> w, AttackBudget budget);

/// Exhaustive search over the grid x + (i * step, j * step), step = 2 eps / (r - 1),
/// i, j in [-(r-1)/2, (r-1)/2], for the point of largest loss. Grid coordinates
/// are computed as x[k] + static_cast<double>(i) * step. Ties keep the smallest
/// (i, j) in lexicographic order. Requires a 2D input and odd r >= 3.
std::vector<double> grid_attack(const LinearClassifier& f, AttackBudget budget,
                                std::span<const double> x, int label, int resolution);

/// Signed-gradient ascent projected on the eps-box:
/// x <- clip(x + step_size * sign(d loss / d x)). Returns the best iterate seen,
/// or x itself if no iterate beats the clean loss.
std::vector<double> gradient_attack(const LinearClassifier& f, AttackBudget budget,
                                    std::span<const double> x, int label, int steps, double step_size);

/// Stochastic generator with a class-conditional categorical latent z.
///
/// For label y, z ~ Categorical(softmax(logits[y])) and the perturbation is
/// eps * tanh(u[y][z]). The relaxed path replaces the one-hot z by
/// s = softmax((logits[y] + gumbel) / tau) and uses eps * tanh(sum_z s_z u[y][z]).
/// Perturbations are strictly inside the budget.
class ParametricGenerator {
public:
  ParametricGenerator(AttackBudget budget, int num_classes, std::size_t num_latent, std::size_t dim,
                      double temperature);

  /// Zero logits and u ~ N(0, init_scale^2).
  static ParametricGenerator random_init(AttackBudget budget, int num_classes, std::size_t num_latent,
                                         std::size_t dim, double temperature, double init_scale, Rng& rng);

  AttackBudget budget() const noexcept { return budget_; }
  int num_classes() const noexcept { return num_classes_; }
  std::size_t num_latent() const noexcept { return num_latent_; }
  std::size_t dim() const noexcept { return dim_; }
  double temperature() const noexcept { return temperature_; }

  /// num_classes x num_latent, row-major.
  std::span<double> logits() noexcept { return logits_; }
  std::span<const double> logits() const noexcept { return logits_; }
  std::span<const double> logits(int label) const {
    return {logits_.data() + static_cast<std::size_t>(label) * num_latent_, num_latent_};
  }
  /// num_classes x num_latent x dim, row-major.
  std::span<double> shifts() noexcept { return shifts_; }
  std::span<const double> shifts() const noexcept { return shifts_; }
  std::span<const double> shift(int label, std::size_t z) const {
    return {shifts_.data() + (static_cast<std::size_t>(label) * num_latent_ + z) * dim_, dim_};
  }

  /// p(z | y).
  std::vector<double> latent_probabilities(int label) const;

  bool operator==(const ParametricGenerator&) const = default;

private:
  AttackBudget budget_;
  int num_classes_;
  std::size_t num_latent_;
  std::size_t dim_;
  double temperature_;
  std::vector<double> logits_;
  std::vector<double> shifts_;
};

/// eps * tanh(v), pulled strictly inside (-eps, eps) when tanh rounds to +-1.
double bounded_tanh(double v, double epsilon) noexcept;

/// Hard sample: draws z, returns x + eps * tanh(u[y][z]).
std::vector<double> parametric_sample(const ParametricGenerator& gen, std::span<const double> x, int label,
                                      Rng& rng);
std::vector<double> parametric_sample(const ParametricGenerator& gen, std::span<const double> x, int label,
                                      std::uint64_t seed);

struct RelaxedSample {
  std::vector<double> x_adv;
  std::vector<double> delta;
  std::vector<double> soft;          // s, length m
  std::vector<double> jac_logits;    // d x m: d delta_j / d logits[y][z]
  std::vector<double> jac_shifts;    // d x m: d delta_j / d u[y][z][j] (other entries are zero)
};

/// Relaxed (Gumbel-softmax) sample with exact Jacobians w.r.t. the parameters of row y.
RelaxedSample parametric_relaxed(const ParametricGenerator& gen, std::span<const double> x, int label,
                                 std::span<const double> gumbel_noise);

/// Adds upstream^T (d delta / d theta) into full-size gradient buffers shaped like
/// logits() and shifts().
void accumulate_relaxed_gradient(const ParametricGenerator& gen, const RelaxedSample& sample, int label,
                                 std::span<const double> upstream, double scale, std::span<double> grad_logits,
                                 std::span<double> grad_shifts);

// Generators realizing g in G_eps. Attacks built from a classifier record the
// classifier's provenance in `source`.

struct IdentityGenerator {
  bool operator==(const IdentityGenerator&) const = default;
};

struct ClosedFormGenerator {
  std::vector<double> weights;  // non-bias weights of the binary linear source classifier
  AttackBudget budget;
  std::string source;
  bool operator==(const ClosedFormGenerator&) const = default;
};

struct GridGenerator {
  LinearClassifier target;
  AttackBudget budget;
  int resolution = 41;
  std::string source;
  bool operator==(const GridGenerator&) const = default;
};

struct GradientGenerator {
  LinearClassifier target;
  AttackBudget budget;
  int steps = 50;
  double step_size = 0.0;
  std::string source;
  bool operator==(const GradientGenerator&) const = default;
};

/// Per-coordinate uniform on {-eps, +eps}.
struct NoiseGenerator {
  AttackBudget budget;
  bool operator==(const NoiseGenerator&) const = default;
};

/// Fixed per-example perturbations aligned with one dataset.
struct TabulatedGenerator {
  std::vector<double> deltas;  // n x d
  AttackBudget budget;
  std::string source;
  bool operator==(const TabulatedGenerator&) const = default;
};

using Generator = std::variant<IdentityGenerator, ClosedFormGenerator, GridGenerator, GradientGenerator,
                               NoiseGenerator, TabulatedGenerator, ParametricGenerator>;

std::string generator_kind(const Generator& g);
/// Provenance string, e.g. "closed-form:eps=0.3:rep-split-5".
std::string generator_id(const Generator& g);
double generator_epsilon(const Generator& g);
bool is_stochastic(const Generator& g);

/// Dataset with aligned perturbed points; labels are those of `clean`.
class AdversarialDataset {
public:
  /// Throws InternalError if any perturbation exceeds eps + 1e-12 in l-infinity.
  AdversarialDataset(LabeledDataset clean, std::vector<double> perturbed, std::string generator_id, double epsilon);

  const LabeledDataset& clean() const noexcept { return clean_; }
  std::span<const double> perturbed_points() const noexcept { return perturbed_; }
  std::span<const double> perturbed_point(std::size_t i) const {
    return {perturbed_.data() + i * clean_.dim(), clean_.dim()};
  }
  const std::string& generator_id() const noexcept { return generator_id_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t size() const noexcept { return clean_.size(); }

  /// Perturbed points with the clean labels.
  LabeledDataset perturbed() const;

  bool operator==(const AdversarialDataset&) const = default;

private:
  LabeledDataset clean_;
  std::vector<double> perturbed_;
  std::string generator_id_;
  double epsilon_;
};

/// Applies g to every example. Stochastic generators draw from a stream seeded by `seed`.
AdversarialDataset attack_dataset(const Generator& g, const LabeledDataset& ds, std::uint64_t seed = 0);

// CSV: columns x0..x{d-1},y,adv_x0..adv_x{d-1}.
void write_adversarial_csv(const AdversarialDataset& adv, std::ostream& out);
AdversarialDataset read_adversarial_csv(std::istream& in, const std::string& source_name,
                                        const std::string& generator_id, double epsilon);

}  // namespace aeg
