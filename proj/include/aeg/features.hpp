#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace aeg {

class LabeledDataset;

/// Fixed monomial feature map psi: R^d -> R^p.
///
/// Features are all monomials of total degree 1..degree in graded
/// lexicographic order, preceded by the constant 1 when include_bias is set.
/// For equal (input_dim, include_bias) the features of a lower degree are a
/// prefix of those of any higher degree, so a classifier over Poly(g1) embeds
/// into Poly(g2) by zero-padding its weights.
class FeatureMap {
public:
  enum class Kind { Linear, Polynomial };

  static FeatureMap linear(std::size_t input_dim, bool include_bias = true);
  static FeatureMap polynomial(std::size_t input_dim, int degree, bool include_bias = true);

  /// "linear" or "poly<g>"; parse accepts the same spellings plus "poly:<g>".
  std::string name() const;
  static FeatureMap parse(const std::string& name, std::size_t input_dim, bool include_bias = true);

  Kind kind() const noexcept { return degree_ == 1 ? Kind::Linear : Kind::Polynomial; }
  int degree() const noexcept { return degree_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return exponents_.size() / input_dim_ + (bias_ ? 1 : 0); }
  bool include_bias() const noexcept { return bias_; }

  /// Exponent vector of the k-th non-bias feature.
  std::span<const int> exponents(std::size_t k) const { return {exponents_.data() + k * input_dim_, input_dim_}; }

  void featurize(std::span<const double> x, std::span<double> out) const;
  std::vector<double> featurize(std::span<const double> x) const;

  /// Row-major output_dim x input_dim matrix of d psi_k / d x_j.
  void jacobian(std::span<const double> x, std::span<double> out) const;
  std::vector<double> jacobian(std::span<const double> x) const;

  /// Feature matrix of a whole dataset, row-major size() x output_dim().
  std::vector<double> featurize_all(const LabeledDataset& ds) const;

  bool operator==(const FeatureMap& o) const {
    return degree_ == o.degree_ && input_dim_ == o.input_dim_ && bias_ == o.bias_;
  }

private:
  FeatureMap(std::size_t input_dim, int degree, bool include_bias);
  void check_input(std::span<const double> x) const;
  void fill_powers(std::span<const double> x, std::vector<double>& powers) const;

  std::size_t input_dim_;
  int degree_;
  bool bias_;
  std::vector<int> exponents_;  // row-major (#monomials) x input_dim
};

/// Per-coordinate affine standardization (x - mean) / scale, fitted on a dataset.
/// Kept outside FeatureMap: rescaling inputs per class would break exact
/// class inclusion between nested maps.
struct AffineStandardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static AffineStandardizer fit(const LabeledDataset& ds);
  LabeledDataset apply(const LabeledDataset& ds) const;
};

}  // namespace aeg
