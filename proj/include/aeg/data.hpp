#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aeg {

/// Points with integer class labels, stored row-major.
///
/// Invariants (checked on construction): at least one point, dim >= 1,
/// num_classes >= 2, every label in [0, num_classes).
class LabeledDataset {
public:
  LabeledDataset(std::vector<double> points, std::size_t dim, std::vector<int> labels,
                 int num_classes);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  int num_classes() const noexcept { return num_classes_; }

  std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim_, dim_}; }
  int label(std::size_t i) const { return labels_[i]; }

  std::span<const double> points() const noexcept { return points_; }
  std::span<const int> labels() const noexcept { return labels_; }

  /// Same labels, new coordinates. Throws if the shape differs.
  LabeledDataset with_points(std::vector<double> points) const;

  bool operator==(const LabeledDataset&) const = default;

private:
  std::vector<double> points_;
  std::size_t dim_;
  std::vector<int> labels_;
  int num_classes_;
};

/// Row subset in the given order.
LabeledDataset subset(const LabeledDataset& ds, std::span<const std::size_t> indices);

/// Rows of `a` followed by rows of `b`; dims must agree. num_classes is the max of both.
LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

/// Two interleaving half circles: class 0 on (cos t, sin t), class 1 on
/// (1 - cos t, 0.5 - sin t), t ~ U[0, pi], plus N(0, noise^2) per coordinate.
/// Class 0 rows come first.
LabeledDataset make_two_moons(std::size_t n, double noise, std::uint64_t seed);

/// Balanced binary Gaussians N(-mu e1, sigma^2 I) (label 0) and N(+mu e1, sigma^2 I) (label 1).
LabeledDataset make_gaussian_pair(std::size_t n, double mean_separation, double sigma,
                                  std::size_t dim, std::uint64_t seed);

/// Random partition into num_splits parts whose sizes differ by at most one.
struct SplitPlan {
  std::size_t num_splits = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignment;  // split index per example

  std::vector<std::size_t> indices_of(std::size_t split_id) const;
  std::vector<std::size_t> sizes() const;

  bool operator==(const SplitPlan&) const = default;
};

SplitPlan split(const LabeledDataset& ds, std::size_t num_splits, std::uint64_t seed);

/// Finite joint distribution with known conditionals p(y | x).
class DiscreteJointDistribution {
public:
  /// `conditional` is row-major (support size) x num_classes.
  DiscreteJointDistribution(std::vector<std::vector<double>> support_points,
                            std::vector<double> conditional, std::vector<double> marginal,
                            int num_classes);

  std::size_t support_size() const noexcept { return marginal_.size(); }
  int num_classes() const noexcept { return num_classes_; }
  std::span<const double> conditional(std::size_t i) const {
    return {conditional_.data() + i * static_cast<std::size_t>(num_classes_),
            static_cast<std::size_t>(num_classes_)};
  }
  double marginal(std::size_t i) const { return marginal_[i]; }
  const std::vector<double>& support_point(std::size_t i) const { return support_[i]; }

private:
  std::vector<std::vector<double>> support_;
  std::vector<double> conditional_;
  std::vector<double> marginal_;
  int num_classes_;
};

// CSV: header `x0,...,x{d-1},y`, one row per example, labels as base-10 integers.

void write_csv(const LabeledDataset& ds, std::ostream& out);
void save_csv(const LabeledDataset& ds, const std::string& path);

/// Parses a dataset file. If num_classes is given, labels must lie below it;
/// otherwise it is max(label) + 1, at least 2.
LabeledDataset read_csv(std::istream& in, const std::string& source_name,
                        std::optional<int> num_classes = std::nullopt);
LabeledDataset load_csv(const std::string& path, std::optional<int> num_classes = std::nullopt);

}  // namespace aeg
