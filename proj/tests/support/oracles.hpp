#pragma once

// Reference computations the tests compare against. Each one is written
// independently of the library code it checks: plain loops, no kernels, and
// brute force wherever the search space is small enough.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "aeg/classifier.hpp"
#include "aeg/data.hpp"
#include "aeg/features.hpp"
#include "aeg/rng.hpp"

namespace oracle {

// Values computed with mpmath at 50 significant digits.
inline constexpr double kLn2 = 0.69314718055994530942;
inline constexpr double kLn3 = 1.0986122886681098;
inline constexpr double kLog1pExpMinus01 = 0.64439666007357089219;  // log(1 + e^-0.1)
inline constexpr double kLog1pExp01 = 0.74439666007357089774;       // log(1 + e^0.1)
inline constexpr double kEntropy0703 = 0.61086430205489346303;      // -0.7 ln 0.7 - 0.3 ln 0.3

inline double rel_err(double a, double b) { return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)}); }

/// Plain left-to-right dot product in long double.
inline double naive_dot(std::span<const double> a, std::span<const double> b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

/// max over the 2^d vertices s in {-eps, +eps}^d of w^T s.
inline double vertex_max(std::span<const double> w, double eps) {
  const std::size_t d = w.size();
  double best = -INFINITY;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
    double v = 0.0;
    for (std::size_t j = 0; j < d; ++j) v += ((mask >> j) & 1 ? eps : -eps) * w[j];
    best = std::max(best, v);
  }
  return best;
}

/// Binary logistic loss of w^T [1, x] (bias first) written out directly.
inline double logistic_loss(std::span<const double> w, std::span<const double> x, int label) {
  double s = w[0];
  for (std::size_t j = 0; j < x.size(); ++j) s += w[j + 1] * x[j];
  const double m = (label == 1 ? -1.0 : 1.0) * s;
  return m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
}

/// Monomial exponents of total degree 1..g in d variables, graded, then
/// lexicographically decreasing in the leading exponents (x1^2 before x1 x2).
inline std::vector<std::vector<int>> graded_lex_monomials(std::size_t d, int g) {
  std::vector<std::vector<int>> out;
  for (int deg = 1; deg <= g; ++deg) {
    std::vector<int> e(d, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t k, int left) {
      if (k + 1 == d) {
        e[k] = left;
        out.push_back(e);
        return;
      }
      for (int a = left; a >= 0; --a) {
        e[k] = a;
        rec(k + 1, left - a);
      }
    };
    rec(0, deg);
  }
  return out;
}

/// Central differences of a scalar function.
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& fn,
                                       std::span<const double> at, double h = 1e-5) {
  std::vector<double> x(at.begin(), at.end());
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double x0 = x[k];
    x[k] = x0 + h;
    const double up = fn(x);
    x[k] = x0 - h;
    const double down = fn(x);
    x[k] = x0;
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

inline std::vector<double> random_vector(aeg::Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal(0.0, scale);
  return v;
}

inline aeg::LinearClassifier random_classifier(aeg::Rng& rng, const aeg::FeatureMap& map, int K, double scale = 1.0) {
  const std::size_t rows = K == 2 ? 1 : static_cast<std::size_t>(K);
  return aeg::LinearClassifier(map, K, random_vector(rng, rows * map.output_dim(), scale));
}

inline aeg::LabeledDataset random_dataset(aeg::Rng& rng, std::size_t n, std::size_t d, int K, double scale = 1.0) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % static_cast<std::size_t>(K));
  return aeg::LabeledDataset(random_vector(rng, n * d, scale), d, labels, K);
}

/// Twelve 2D points, labels mixed so no line separates them.
inline aeg::LabeledDataset small_overlap() {
  return aeg::LabeledDataset({0.0, 0.5, 1.0, 1.5, -0.5, -1.0, 2.0, 0.3, -1.5, 0.2, 0.7, -0.8,
                              1.2, 2.2, -0.3, 0.9, 0.4, -0.2, -1.1, -0.6, 1.0, 1.0, -1.0, -0.5},
                             2, {1, 1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1}, 2);
}

}  // namespace oracle
