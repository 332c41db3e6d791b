#include "aeg/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "aeg/error.hpp"
#include "aeg/io.hpp"
#include "aeg/rng.hpp"

namespace aeg {

LabeledDataset::LabeledDataset(std::vector<double> points, std::size_t dim,
                               std::vector<int> labels, int num_classes)
    : points_(std::move(points)), dim_(dim), labels_(std::move(labels)), num_classes_(num_classes) {
  if (dim_ == 0) throw InvalidArgument("dataset dimension must be >= 1");
  if (num_classes_ < 2) throw InvalidArgument("num_classes must be >= 2");
  if (labels_.empty()) throw InvalidArgument("dataset must contain at least one point");
  if (points_.size() != labels_.size() * dim_) {
    throw InvalidArgument("points and labels disagree: " + std::to_string(points_.size()) +
                          " coordinates for " + std::to_string(labels_.size()) + " labels of dim " +
                          std::to_string(dim_));
  }
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (!std::isfinite(points_[k])) {
      throw InvalidArgument("non-finite coordinate in point " + std::to_string(k / dim_));
    }
  }
  for (int y : labels_) {
    if (y < 0 || y >= num_classes_) {
      throw InvalidArgument("label " + std::to_string(y) + " outside [0, " +
                            std::to_string(num_classes_) + ")");
    }
  }
}

LabeledDataset LabeledDataset::with_points(std::vector<double> points) const {
  if (points.size() != points_.size()) throw InvalidArgument("with_points: shape mismatch");
  return LabeledDataset(std::move(points), dim_, labels_, num_classes_);
}

LabeledDataset subset(const LabeledDataset& ds, std::span<const std::size_t> indices) {
  std::vector<double> pts;
  std::vector<int> labels;
  pts.reserve(indices.size() * ds.dim());
  labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= ds.size()) throw InvalidArgument("subset index out of range");
    auto p = ds.point(i);
    pts.insert(pts.end(), p.begin(), p.end());
    labels.push_back(ds.label(i));
  }
  return LabeledDataset(std::move(pts), ds.dim(), std::move(labels), ds.num_classes());
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("concat: dimension mismatch");
  std::vector<double> pts(a.points().begin(), a.points().end());
  pts.insert(pts.end(), b.points().begin(), b.points().end());
  std::vector<int> labels(a.labels().begin(), a.labels().end());
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  return LabeledDataset(std::move(pts), a.dim(), std::move(labels),
                        std::max(a.num_classes(), b.num_classes()));
}

LabeledDataset make_two_moons(std::size_t n, double noise, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw InvalidArgument("make_two_moons: n must be even and >= 2");
  if (!std::isfinite(noise) || noise < 0.0) throw InvalidArgument("make_two_moons: noise must be finite and >= 0");
  Rng rng(seed);
  const std::size_t half = n / 2;
  std::vector<double> pts(2 * n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::numbers::pi * rng.uniform();
    const bool upper = i < half;
    double x = upper ? std::cos(t) : 1.0 - std::cos(t);
    double y = upper ? std::sin(t) : 0.5 - std::sin(t);
    if (noise > 0.0) {
      x += noise * rng.normal();
      y += noise * rng.normal();
    }
    pts[2 * i] = x;
    pts[2 * i + 1] = y;
    labels[i] = upper ? 0 : 1;
  }
  return LabeledDataset(std::move(pts), 2, std::move(labels), 2);
}

LabeledDataset make_gaussian_pair(std::size_t n, double mean_separation, double sigma,
                                  std::size_t dim, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw InvalidArgument("make_gaussian_pair: n must be even and >= 2");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("make_gaussian_pair: sigma must be > 0");
  if (dim == 0) throw InvalidArgument("make_gaussian_pair: dim must be >= 1");
  if (!std::isfinite(mean_separation)) throw InvalidArgument("make_gaussian_pair: mean must be finite");
  Rng rng(seed);
  std::vector<double> pts(n * dim);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i < n / 2 ? 0 : 1;
    labels[i] = y;
    for (std::size_t j = 0; j < dim; ++j) {
      const double mean = j == 0 ? (y == 0 ? -mean_separation : mean_separation) : 0.0;
      pts[i * dim + j] = mean + sigma * rng.normal();
    }
  }
  return LabeledDataset(std::move(pts), dim, std::move(labels), 2);
}

std::vector<std::size_t> SplitPlan::indices_of(std::size_t split_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == split_id) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SplitPlan::sizes() const {
  std::vector<std::size_t> out(num_splits, 0);
  for (std::size_t s : assignment) ++out[s];
  return out;
}

SplitPlan split(const LabeledDataset& ds, std::size_t num_splits, std::uint64_t seed) {
  if (num_splits < 2) throw InvalidArgument("split: need at least 2 splits");
  if (num_splits > ds.size()) throw InvalidArgument("split: more splits than examples");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  SplitPlan plan{num_splits, seed, std::vector<std::size_t>(ds.size())};
  for (std::size_t pos = 0; pos < order.size(); ++pos) plan.assignment[order[pos]] = pos % num_splits;
  return plan;
}

DiscreteJointDistribution::DiscreteJointDistribution(std::vector<std::vector<double>> support_points,
                                                     std::vector<double> conditional,
                                                     std::vector<double> marginal, int num_classes)
    : support_(std::move(support_points)),
      conditional_(std::move(conditional)),
      marginal_(std::move(marginal)),
      num_classes_(num_classes) {
  constexpr double kTol = 1e-12;
  if (num_classes_ < 2) throw InvalidArgument("distribution: num_classes must be >= 2");
  if (marginal_.empty() || support_.size() != marginal_.size() ||
      conditional_.size() != marginal_.size() * static_cast<std::size_t>(num_classes_)) {
    throw InvalidArgument("distribution: inconsistent sizes");
  }
  auto check_simplex = [&](std::span<const double> p, const char* what) {
    double total = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " has a negative or non-finite entry");
      total += v;
    }
    if (std::fabs(total - 1.0) > kTol) throw InvalidArgument(std::string(what) + " does not sum to 1");
  };
  check_simplex(marginal_, "marginal");
  for (std::size_t i = 0; i < marginal_.size(); ++i) check_simplex(this->conditional(i), "conditional");
}

void write_csv(const LabeledDataset& ds, std::ostream& out) {
  for (std::size_t j = 0; j < ds.dim(); ++j) out << 'x' << j << ',';
  out << "y\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.point(i)) out << io::format_double(v) << ',';
    out << ds.label(i) << '\n';
  }
}

void save_csv(const LabeledDataset& ds, const std::string& path) {
  std::ostringstream ss;
  write_csv(ds, ss);
  io::write_file_atomic(path, ss.str());
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

LabeledDataset read_csv(std::istream& in, const std::string& source_name, std::optional<int> num_classes) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(source_name, 1, "empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  if (header.size() < 2 || header.back() != "y") throw ParseError(source_name, line_no, "header must be x0,...,x{d-1},y");
  const std::size_t dim = header.size() - 1;
  for (std::size_t j = 0; j < dim; ++j) {
    if (header[j] != "x" + std::to_string(j)) throw ParseError(source_name, line_no, "unexpected column '" + std::string(header[j]) + "'");
  }
  std::vector<double> pts;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != dim + 1) {
      throw ParseError(source_name, line_no, "expected " + std::to_string(dim + 1) + " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < dim; ++j) {
      double v;
      if (!io::parse_double(fields[j], v) || !std::isfinite(v)) {
        throw ParseError(source_name, line_no, "bad number '" + std::string(fields[j]) + "'");
      }
      pts.push_back(v);
    }
    long long y;
    if (!io::parse_int(fields[dim], y) || y < 0 || y > 1'000'000) {
      throw ParseError(source_name, line_no, "label must be a non-negative integer, got '" + std::string(fields[dim]) + "'");
    }
    if (num_classes && y >= *num_classes) {
      throw ParseError(source_name, line_no, "label " + std::to_string(y) + " not below declared class count " + std::to_string(*num_classes));
    }
    labels.push_back(static_cast<int>(y));
  }
  if (labels.empty()) throw ParseError(source_name, line_no, "no data rows");
  const int k = num_classes ? *num_classes : std::max(2, *std::max_element(labels.begin(), labels.end()) + 1);
  return LabeledDataset(std::move(pts), dim, std::move(labels), k);
}

LabeledDataset load_csv(const std::string& path, std::optional<int> num_classes) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return read_csv(in, path, num_classes);
}

}  // namespace aeg
