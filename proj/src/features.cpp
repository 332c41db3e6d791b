#include "aeg/features.hpp"

#include <algorithm>
#include <cmath>

#include "aeg/data.hpp"
#include "aeg/error.hpp"

namespace aeg {
namespace {

// Multi-indices of total degree `total` in lexicographic order, largest
// exponent of x0 first: (2,0), (1,1), (0,2) for d = 2.
void append_degree(std::size_t dim, int total, std::vector<int>& current, std::size_t pos,
                   std::vector<int>& out) {
  if (pos + 1 == dim) {
    current[pos] = total;
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int a = total; a >= 0; --a) {
    current[pos] = a;
    append_degree(dim, total - a, current, pos + 1, out);
  }
}

}  // namespace

FeatureMap::FeatureMap(std::size_t input_dim, int degree, bool include_bias)
    : input_dim_(input_dim), degree_(degree), bias_(include_bias) {
  if (input_dim_ == 0) throw InvalidArgument("feature map input_dim must be >= 1");
  if (degree_ < 1) throw InvalidArgument("feature map degree must be >= 1");
  if (degree_ > 32) throw InvalidArgument("feature map degree too large");
  std::vector<int> current(input_dim_, 0);
  for (int g = 1; g <= degree_; ++g) append_degree(input_dim_, g, current, 0, exponents_);
}

FeatureMap FeatureMap::linear(std::size_t input_dim, bool include_bias) {
  return FeatureMap(input_dim, 1, include_bias);
}

FeatureMap FeatureMap::polynomial(std::size_t input_dim, int degree, bool include_bias) {
  return FeatureMap(input_dim, degree, include_bias);
}

std::string FeatureMap::name() const {
  return degree_ == 1 ? std::string("linear") : "poly" + std::to_string(degree_);
}

FeatureMap FeatureMap::parse(const std::string& name, std::size_t input_dim, bool include_bias) {
  if (name == "linear") return linear(input_dim, include_bias);
  std::string digits;
  if (name.rfind("poly:", 0) == 0) digits = name.substr(5);
  else if (name.rfind("poly", 0) == 0) digits = name.substr(4);
  else throw InvalidArgument("unknown feature map '" + name + "'");
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
    throw InvalidArgument("bad polynomial degree in '" + name + "'");
  }
  return polynomial(input_dim, std::stoi(digits), include_bias);
}

void FeatureMap::check_input(std::span<const double> x) const {
  if (x.size() != input_dim_) {
    throw InvalidArgument("feature map expects input of dim " + std::to_string(input_dim_) + ", got " +
                          std::to_string(x.size()));
  }
}

void FeatureMap::fill_powers(std::span<const double> x, std::vector<double>& powers) const {
  const std::size_t stride = static_cast<std::size_t>(degree_) + 1;
  powers.assign(input_dim_ * stride, 1.0);
  for (std::size_t j = 0; j < input_dim_; ++j) {
    for (int k = 1; k <= degree_; ++k) powers[j * stride + k] = powers[j * stride + k - 1] * x[j];
  }
}

void FeatureMap::featurize(std::span<const double> x, std::span<double> out) const {
  check_input(x);
  if (out.size() != output_dim()) throw InvalidArgument("featurize: output buffer has wrong size");
  const std::size_t stride = static_cast<std::size_t>(degree_) + 1;
  std::size_t k = 0;
  if (bias_) out[k++] = 1.0;
  if (degree_ == 1) {
    for (std::size_t j = 0; j < input_dim_; ++j) out[k++] = x[j];
    return;
  }
  thread_local std::vector<double> powers;
  fill_powers(x, powers);
  const std::size_t monomials = exponents_.size() / input_dim_;
  for (std::size_t m = 0; m < monomials; ++m) {
    const int* a = exponents_.data() + m * input_dim_;
    double v = 1.0;
    for (std::size_t j = 0; j < input_dim_; ++j) {
      if (a[j] != 0) v *= powers[j * stride + static_cast<std::size_t>(a[j])];
    }
    out[k++] = v;
  }
}

std::vector<double> FeatureMap::featurize(std::span<const double> x) const {
  std::vector<double> out(output_dim());
  featurize(x, out);
  return out;
}

void FeatureMap::jacobian(std::span<const double> x, std::span<double> out) const {
  check_input(x);
  if (out.size() != output_dim() * input_dim_) throw InvalidArgument("jacobian: output buffer has wrong size");
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t stride = static_cast<std::size_t>(degree_) + 1;
  std::vector<double> powers;
  fill_powers(x, powers);
  const std::size_t offset = bias_ ? 1 : 0;
  const std::size_t monomials = exponents_.size() / input_dim_;
  for (std::size_t m = 0; m < monomials; ++m) {
    const int* a = exponents_.data() + m * input_dim_;
    double* row = out.data() + (m + offset) * input_dim_;
    for (std::size_t j = 0; j < input_dim_; ++j) {
      if (a[j] == 0) continue;
      double v = static_cast<double>(a[j]);
      for (std::size_t i = 0; i < input_dim_; ++i) {
        const int e = i == j ? a[i] - 1 : a[i];
        if (e != 0) v *= powers[i * stride + static_cast<std::size_t>(e)];
      }
      row[j] = v;
    }
  }
}

std::vector<double> FeatureMap::jacobian(std::span<const double> x) const {
  std::vector<double> out(output_dim() * input_dim_);
  jacobian(x, out);
  return out;
}

std::vector<double> FeatureMap::featurize_all(const LabeledDataset& ds) const {
  if (ds.dim() != input_dim_) throw InvalidArgument("featurize_all: dataset dim does not match feature map");
  const std::size_t p = output_dim();
  std::vector<double> out(ds.size() * p);
  for (std::size_t i = 0; i < ds.size(); ++i) featurize(ds.point(i), std::span<double>(out.data() + i * p, p));
  return out;
}

AffineStandardizer AffineStandardizer::fit(const LabeledDataset& ds) {
  const std::size_t d = ds.dim();
  AffineStandardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += ds.point(i)[j];
  }
  for (double& m : s.mean) m /= static_cast<double>(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = ds.point(i)[j] - s.mean[j];
      s.scale[j] += c * c;
    }
  }
  for (double& v : s.scale) {
    v = std::sqrt(v / static_cast<double>(ds.size()));
    if (v == 0.0) v = 1.0;
  }
  return s;
}

LabeledDataset AffineStandardizer::apply(const LabeledDataset& ds) const {
  if (ds.dim() != mean.size()) throw InvalidArgument("standardizer: dimension mismatch");
  std::vector<double> pts(ds.points().begin(), ds.points().end());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dim(); ++j) {
      double& v = pts[i * ds.dim() + j];
      v = (v - mean[j]) / scale[j];
    }
  }
  return ds.with_points(std::move(pts));
}

}  // namespace aeg
