#include "aeg/entropy.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "aeg/error.hpp"
#include "aeg/io.hpp"

namespace aeg {

FEntropy f_entropy(const LabeledDataset& ds, const FeatureMap& map, const TrainOptions& opts,
                   const LinearClassifier* warm_start, std::optional<std::span<const double>> weights) {
  auto result = train_logreg(map, ds, 0.0, opts, weights, warm_start);
  return {result.report.final_objective, result.report, std::move(result.classifier)};
}

FEntropy f_entropy(const AdversarialDataset& adv, const FeatureMap& map, const TrainOptions& opts,
                   const LinearClassifier* warm_start) {
  return f_entropy(adv.perturbed(), map, opts, warm_start);
}

Mixture make_mixture(const LabeledDataset& generated, const LabeledDataset& reference, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
  const double gen_share = 1.0 / (1.0 + lambda);
  const double ref_share = lambda / (1.0 + lambda);
  std::vector<double> w;
  w.reserve(generated.size() + reference.size());
  for (std::size_t i = 0; i < generated.size(); ++i) w.push_back(gen_share / static_cast<double>(generated.size()));
  for (std::size_t i = 0; i < reference.size(); ++i) w.push_back(ref_share / static_cast<double>(reference.size()));
  return {concat(generated, reference), std::move(w)};
}

FEntropy mixture_f_entropy(const AdversarialDataset& adv, const LabeledDataset& reference, double lambda,
                           const FeatureMap& map, const TrainOptions& opts, const LinearClassifier* warm_start) {
  const Mixture mix = make_mixture(adv.perturbed(), reference, lambda);
  return f_entropy(mix.data, map, opts, warm_start, mix.weights);
}

double conditional_entropy(const DiscreteJointDistribution& dist) {
  double total = 0.0;
  for (std::size_t i = 0; i < dist.support_size(); ++i) {
    double h = 0.0;
    for (double p : dist.conditional(i)) {
      if (p > 0.0) h -= p * std::log(p);
    }
    total += dist.marginal(i) * h;
  }
  return total;
}

namespace {

// Visits every composition k_0 + ... + k_{K-1} = R in lexicographic order
// (largest k_0 first).
template <class Visit>
void for_each_composition(int parts, int total, std::vector<int>& k, int pos, Visit&& visit) {
  if (pos + 1 == parts) {
    k[static_cast<std::size_t>(pos)] = total;
    visit(k);
    return;
  }
  for (int a = total; a >= 0; --a) {
    k[static_cast<std::size_t>(pos)] = a;
    for_each_composition(parts, total - a, k, pos + 1, visit);
  }
}

}  // namespace

CeMinimizer brute_force_ce_minimizer(const DiscreteJointDistribution& dist, int grid_resolution) {
  const int K = dist.num_classes();
  if (K > 4) throw Unsupported("brute_force_ce_minimizer: at most 4 classes");
  if (grid_resolution < 50) throw InvalidArgument("brute_force_ce_minimizer: grid_resolution must be >= 50");
  const double R = static_cast<double>(grid_resolution);
  std::vector<double> log_q(static_cast<std::size_t>(grid_resolution) + 1);
  log_q[0] = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= grid_resolution; ++k) log_q[static_cast<std::size_t>(k)] = std::log(static_cast<double>(k) / R);

  CeMinimizer out;
  out.minimizers.assign(dist.support_size() * static_cast<std::size_t>(K), 0.0);
  std::vector<int> k(static_cast<std::size_t>(K));
  for (std::size_t x = 0; x < dist.support_size(); ++x) {
    const auto p = dist.conditional(x);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_k(static_cast<std::size_t>(K), 0);
    for_each_composition(K, grid_resolution, k, 0, [&](const std::vector<int>& comp) {
      double v = 0.0;
      for (std::size_t c = 0; c < comp.size(); ++c) {
        if (p[c] == 0.0) continue;
        if (comp[c] == 0) return;
        v -= p[c] * log_q[static_cast<std::size_t>(comp[c])];
      }
      if (v < best) {
        best = v;
        best_k = comp;
      }
    });
    for (std::size_t c = 0; c < best_k.size(); ++c) {
      out.minimizers[x * static_cast<std::size_t>(K) + c] = static_cast<double>(best_k[c]) / R;
    }
    out.value += dist.marginal(x) * best;
  }
  return out;
}

EntropyReport entropy_chain(const LabeledDataset& ds, std::span<const FeatureMap> nested_maps, const TrainOptions& opts,
                            std::string provenance) {
  EntropyReport report;
  report.provenance = std::move(provenance);
  std::optional<LinearClassifier> previous;
  for (const FeatureMap& map : nested_maps) {
    std::optional<LinearClassifier> start;
    if (previous) start = previous->embed_into(map);
    FEntropy est = f_entropy(ds, map, opts, start ? &*start : nullptr);
    previous = est.classifier;
    report.entries.push_back({map.name(), std::move(est)});
  }
  return report;
}

void write_entropy_csv(const EntropyReport& report, std::ostream& out) {
  out << "class,H_F,iterations,converged\n";
  for (const auto& e : report.entries) {
    out << e.class_name << ',' << io::format_double(e.estimate.value) << ',' << e.estimate.report.iterations << ','
        << (e.estimate.report.converged ? "true" : "false") << '\n';
  }
}

}  // namespace aeg
