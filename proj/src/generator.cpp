#include "aeg/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "aeg/error.hpp"
#include "aeg/io.hpp"
#include "aeg/kernels.hpp"

namespace aeg {

AttackBudget::AttackBudget(double eps) : epsilon(eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("epsilon must be finite and >= 0");
}

namespace {

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" + std::to_string(got) + " vs " +
                          std::to_string(want) + ")");
  }
}

// Scores-to-loss evaluator with reusable buffers for tight attack loops.
class PointLoss {
public:
  explicit PointLoss(const LinearClassifier& f) : f_(f), phi_(f.cols()), s_(f.rows()) {}

  double operator()(std::span<const double> x, int label) {
    f_.feature_map().featurize(x, phi_);
    simd::gemv(f_.weights(), f_.rows(), f_.cols(), phi_, s_);
    if (f_.is_binary()) return log1p_exp(-signed_label(label) * s_[0]);
    const double smax = *std::max_element(s_.begin(), s_.end());
    double z = 0.0;
    for (double v : s_) z += std::exp(v - smax);
    return smax + std::log(z) - s_[static_cast<std::size_t>(label)];
  }

private:
  const LinearClassifier& f_;
  std::vector<double> phi_;
  std::vector<double> s_;
};

std::vector<double> softmax(std::span<const double> a) {
  const double amax = *std::max_element(a.begin(), a.end());
  std::vector<double> out(a.size());
  double z = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    out[k] = std::exp(a[k] - amax);
    z += out[k];
  }
  for (double& v : out) v /= z;
  return out;
}

}  // namespace

std::vector<double> closed_form_attack(std::span<const double> w, AttackBudget budget, std::span<const double> x,
                                       double y) {
  check_dim(w.size(), x.size(), "closed_form_attack");
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] - y * budget.epsilon * sign_of(w[j]);
  return out;
}

double inner_max_value(std::span<const double> w, AttackBudget budget) { return budget.epsilon * simd::asum(w); }

std::vector<double> grid_attack(const LinearClassifier& f, AttackBudget budget, std::span<const double> x, int label,
                                int resolution) {
  if (x.size() != 2 || f.feature_map().input_dim() != 2) throw InvalidArgument("grid_attack: 2D inputs only");
  if (resolution < 3 || resolution % 2 == 0) throw InvalidArgument("grid_attack: resolution must be odd and >= 3");
  const int half = (resolution - 1) / 2;
  const double step = 2.0 * budget.epsilon / static_cast<double>(resolution - 1);
  PointLoss loss(f);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> best_point(x.begin(), x.end());
  double pt[2];
  for (int i = -half; i <= half; ++i) {
    pt[0] = x[0] + static_cast<double>(i) * step;
    for (int j = -half; j <= half; ++j) {
      pt[1] = x[1] + static_cast<double>(j) * step;
      const double v = loss(std::span<const double>(pt, 2), label);
      if (v > best) {
        best = v;
        best_point.assign(pt, pt + 2);
      }
    }
  }
  return best_point;
}

std::vector<double> gradient_attack(const LinearClassifier& f, AttackBudget budget, std::span<const double> x,
                                    int label, int steps, double step_size) {
  if (steps < 1) throw InvalidArgument("gradient_attack: steps must be >= 1");
  if (!(step_size >= 0.0)) throw InvalidArgument("gradient_attack: step_size must be >= 0");
  check_dim(x.size(), f.feature_map().input_dim(), "gradient_attack");
  PointLoss loss(f);
  const double eps = budget.epsilon;
  const double clean = loss(x, label);
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> best(x.begin(), x.end());
  double best_loss = clean;
  for (int t = 0; t < steps; ++t) {
    const std::vector<double> g = input_gradient(f, cur, label);
    for (std::size_t j = 0; j < cur.size(); ++j) {
      const double moved = cur[j] + step_size * sign_of(g[j]);
      cur[j] = std::min(std::max(moved, x[j] - eps), x[j] + eps);
    }
    const double v = loss(cur, label);
    if (v > best_loss) {
      best_loss = v;
      best = cur;
    }
  }
  return best;
}

ParametricGenerator::ParametricGenerator(AttackBudget budget, int num_classes, std::size_t num_latent,
                                         std::size_t dim, double temperature)
    : budget_(budget),
      num_classes_(num_classes),
      num_latent_(num_latent),
      dim_(dim),
      temperature_(temperature),
      logits_(static_cast<std::size_t>(std::max(num_classes, 0)) * num_latent, 0.0),
      shifts_(static_cast<std::size_t>(std::max(num_classes, 0)) * num_latent * dim, 0.0) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw InvalidArgument("generator temperature must be > 0");
  if (num_classes < 2 || num_latent < 1 || dim < 1) throw InvalidArgument("generator shape must be positive");
}

ParametricGenerator ParametricGenerator::random_init(AttackBudget budget, int num_classes, std::size_t num_latent,
                                                     std::size_t dim, double temperature, double init_scale,
                                                     Rng& rng) {
  ParametricGenerator g(budget, num_classes, num_latent, dim, temperature);
  for (double& u : g.shifts_) u = init_scale * rng.normal();
  return g;
}

std::vector<double> ParametricGenerator::latent_probabilities(int label) const { return softmax(logits(label)); }

double bounded_tanh(double v, double epsilon) noexcept {
  const double d = epsilon * std::tanh(v);
  if (epsilon > 0.0 && std::fabs(d) >= epsilon) return std::copysign(std::nextafter(epsilon, 0.0), d);
  return d;
}

std::vector<double> parametric_sample(const ParametricGenerator& gen, std::span<const double> x, int label, Rng& rng) {
  check_dim(x.size(), gen.dim(), "parametric_sample");
  if (label < 0 || label >= gen.num_classes()) throw InvalidArgument("parametric_sample: label out of range");
  const std::vector<double> p = gen.latent_probabilities(label);
  const double u = rng.uniform();
  std::size_t z = 0;
  double acc = p[0];
  while (u >= acc && z + 1 < p.size()) acc += p[++z];
  const auto shift = gen.shift(label, z);
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += bounded_tanh(shift[j], gen.budget().epsilon);
  return out;
}

std::vector<double> parametric_sample(const ParametricGenerator& gen, std::span<const double> x, int label,
                                      std::uint64_t seed) {
  Rng rng(seed);
  return parametric_sample(gen, x, label, rng);
}

RelaxedSample parametric_relaxed(const ParametricGenerator& gen, std::span<const double> x, int label,
                                 std::span<const double> gumbel_noise) {
  const std::size_t m = gen.num_latent();
  const std::size_t d = gen.dim();
  check_dim(x.size(), d, "parametric_relaxed");
  check_dim(gumbel_noise.size(), m, "parametric_relaxed noise");
  if (label < 0 || label >= gen.num_classes()) throw InvalidArgument("parametric_relaxed: label out of range");
  const double tau = gen.temperature();
  const double eps = gen.budget().epsilon;
  const auto logits = gen.logits(label);
  std::vector<double> a(m);
  for (std::size_t z = 0; z < m; ++z) a[z] = (logits[z] + gumbel_noise[z]) / tau;

  RelaxedSample out;
  out.soft = softmax(a);
  out.delta.assign(d, 0.0);
  out.x_adv.assign(x.begin(), x.end());
  out.jac_logits.assign(d * m, 0.0);
  out.jac_shifts.assign(d * m, 0.0);
  std::vector<double> v(d, 0.0);
  for (std::size_t z = 0; z < m; ++z) simd::axpy(out.soft[z], gen.shift(label, z), v);
  for (std::size_t j = 0; j < d; ++j) {
    const double t = std::tanh(v[j]);
    const double c = eps * (1.0 - t * t);
    out.delta[j] = bounded_tanh(v[j], eps);
    out.x_adv[j] += out.delta[j];
    for (std::size_t z = 0; z < m; ++z) {
      const double s = out.soft[z];
      out.jac_shifts[j * m + z] = c * s;
      out.jac_logits[j * m + z] = c * s * (gen.shift(label, z)[j] - v[j]) / tau;
    }
  }
  return out;
}

void accumulate_relaxed_gradient(const ParametricGenerator& gen, const RelaxedSample& sample, int label,
                                 std::span<const double> upstream, double scale, std::span<double> grad_logits,
                                 std::span<double> grad_shifts) {
  const std::size_t m = gen.num_latent();
  const std::size_t d = gen.dim();
  const std::size_t y = static_cast<std::size_t>(label);
  for (std::size_t j = 0; j < d; ++j) {
    const double a = scale * upstream[j];
    if (a == 0.0) continue;
    for (std::size_t z = 0; z < m; ++z) {
      grad_logits[y * m + z] += a * sample.jac_logits[j * m + z];
      grad_shifts[(y * m + z) * d + j] += a * sample.jac_shifts[j * m + z];
    }
  }
}

std::string generator_kind(const Generator& g) {
  struct V {
    std::string operator()(const IdentityGenerator&) const { return "identity"; }
    std::string operator()(const ClosedFormGenerator&) const { return "closed-form"; }
    std::string operator()(const GridGenerator&) const { return "grid"; }
    std::string operator()(const GradientGenerator&) const { return "gradient"; }
    std::string operator()(const NoiseGenerator&) const { return "noise"; }
    std::string operator()(const TabulatedGenerator&) const { return "tabulated"; }
    std::string operator()(const ParametricGenerator&) const { return "parametric"; }
  };
  return std::visit(V{}, g);
}

double generator_epsilon(const Generator& g) {
  struct V {
    double operator()(const IdentityGenerator&) const { return 0.0; }
    double operator()(const ClosedFormGenerator& c) const { return c.budget.epsilon; }
    double operator()(const GridGenerator& c) const { return c.budget.epsilon; }
    double operator()(const GradientGenerator& c) const { return c.budget.epsilon; }
    double operator()(const NoiseGenerator& c) const { return c.budget.epsilon; }
    double operator()(const TabulatedGenerator& c) const { return c.budget.epsilon; }
    double operator()(const ParametricGenerator& c) const { return c.budget().epsilon; }
  };
  return std::visit(V{}, g);
}

std::string generator_id(const Generator& g) {
  struct V {
    std::string operator()(const IdentityGenerator&) const { return ""; }
    std::string operator()(const ClosedFormGenerator& c) const { return c.source; }
    std::string operator()(const GridGenerator& c) const { return c.source; }
    std::string operator()(const GradientGenerator& c) const { return c.source; }
    std::string operator()(const NoiseGenerator&) const { return "random"; }
    std::string operator()(const TabulatedGenerator& c) const { return c.source; }
    std::string operator()(const ParametricGenerator&) const { return ""; }
  };
  std::string id = generator_kind(g) + ":eps=" + io::format_double(generator_epsilon(g));
  const std::string src = std::visit(V{}, g);
  if (!src.empty()) id += ":" + src;
  return id;
}

bool is_stochastic(const Generator& g) {
  return std::holds_alternative<NoiseGenerator>(g) || std::holds_alternative<ParametricGenerator>(g);
}

AdversarialDataset::AdversarialDataset(LabeledDataset clean, std::vector<double> perturbed, std::string generator_id,
                                       double epsilon)
    : clean_(std::move(clean)), perturbed_(std::move(perturbed)), generator_id_(std::move(generator_id)), epsilon_(epsilon) {
  if (perturbed_.size() != clean_.points().size()) throw InvalidArgument("adversarial points do not align with the clean data");
  const auto pts = clean_.points();
  for (std::size_t k = 0; k < perturbed_.size(); ++k) {
    if (!std::isfinite(perturbed_[k]) || std::fabs(perturbed_[k] - pts[k]) > epsilon_ + 1e-12) {
      throw InternalError("perturbation exceeds the budget at example " + std::to_string(k / clean_.dim()) + " (" +
                          generator_id_ + ")");
    }
  }
}

LabeledDataset AdversarialDataset::perturbed() const { return clean_.with_points(perturbed_); }

AdversarialDataset attack_dataset(const Generator& g, const LabeledDataset& ds, std::uint64_t seed) {
  const std::size_t n = ds.size();
  const std::size_t d = ds.dim();
  std::vector<double> out(ds.points().begin(), ds.points().end());
  auto put = [&](std::size_t i, const std::vector<double>& v) {
    std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(i * d));
  };
  Rng rng(seed);

  if (const auto* c = std::get_if<ClosedFormGenerator>(&g)) {
    check_dim(c->weights.size(), d, "attack_dataset closed-form");
    for (std::size_t i = 0; i < n; ++i) put(i, closed_form_attack(c->weights, c->budget, ds.point(i), signed_label(ds.label(i))));
  } else if (const auto* gr = std::get_if<GridGenerator>(&g)) {
    for (std::size_t i = 0; i < n; ++i) put(i, grid_attack(gr->target, gr->budget, ds.point(i), ds.label(i), gr->resolution));
  } else if (const auto* gd = std::get_if<GradientGenerator>(&g)) {
    for (std::size_t i = 0; i < n; ++i) {
      put(i, gradient_attack(gd->target, gd->budget, ds.point(i), ds.label(i), gd->steps, gd->step_size));
    }
  } else if (const auto* nz = std::get_if<NoiseGenerator>(&g)) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += rng.sign() * nz->budget.epsilon;
  } else if (const auto* tab = std::get_if<TabulatedGenerator>(&g)) {
    check_dim(tab->deltas.size(), n * d, "attack_dataset tabulated");
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += tab->deltas[k];
  } else if (const auto* pg = std::get_if<ParametricGenerator>(&g)) {
    check_dim(pg->dim(), d, "attack_dataset parametric");
    for (std::size_t i = 0; i < n; ++i) put(i, parametric_sample(*pg, ds.point(i), ds.label(i), rng));
  }
  return AdversarialDataset(ds, std::move(out), generator_id(g), generator_epsilon(g));
}

void write_adversarial_csv(const AdversarialDataset& adv, std::ostream& out) {
  const std::size_t d = adv.clean().dim();
  for (std::size_t j = 0; j < d; ++j) out << 'x' << j << ',';
  out << 'y';
  for (std::size_t j = 0; j < d; ++j) out << ",adv_x" << j;
  out << '\n';
  for (std::size_t i = 0; i < adv.size(); ++i) {
    for (double v : adv.clean().point(i)) out << io::format_double(v) << ',';
    out << adv.clean().label(i);
    for (double v : adv.perturbed_point(i)) out << ',' << io::format_double(v);
    out << '\n';
  }
}

AdversarialDataset read_adversarial_csv(std::istream& in, const std::string& source_name,
                                        const std::string& generator_id, double epsilon) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(source_name, 1, "empty file");
  const std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (cols < 3 || cols % 2 == 0) throw ParseError(source_name, 1, "header must be x0..,y,adv_x0..");
  const std::size_t d = (cols - 1) / 2;
  std::vector<double> clean;
  std::vector<double> adv;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != cols) throw ParseError(source_name, line_no, "wrong number of fields");
    for (std::size_t j = 0; j < cols; ++j) {
      if (j == d) {
        long long y;
        if (!io::parse_int(f[j], y) || y < 0) throw ParseError(source_name, line_no, "bad label");
        labels.push_back(static_cast<int>(y));
        continue;
      }
      double v;
      if (!io::parse_double(f[j], v)) throw ParseError(source_name, line_no, "bad number '" + f[j] + "'");
      (j < d ? clean : adv).push_back(v);
    }
  }
  if (labels.empty()) throw ParseError(source_name, line_no, "no data rows");
  const int k = std::max(2, *std::max_element(labels.begin(), labels.end()) + 1);
  return AdversarialDataset(LabeledDataset(std::move(clean), d, std::move(labels), k), std::move(adv), generator_id,
                            epsilon);
}

}  // namespace aeg
