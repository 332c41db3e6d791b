#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aeg/classifier.hpp"
#include "aeg/data.hpp"
#include "aeg/features.hpp"
#include "aeg/generator.hpp"

namespace aeg {

/// Converged-training estimate of min_{f in F} E[cross-entropy], with the
/// training report attached. It upper-bounds the true F-entropy and tightens
/// with the tolerance.
struct FEntropy {
  double value = 0.0;
  TrainReport report;
  LinearClassifier classifier;
};

/// Trains an unregularized linear classifier over `map` and returns its final
/// mean (or weighted) cross-entropy. A warm start is used as the initial point.
FEntropy f_entropy(const LabeledDataset& ds, const FeatureMap& map, const TrainOptions& opts = {},
                   const LinearClassifier* warm_start = nullptr,
                   std::optional<std::span<const double>> weights = std::nullopt);
FEntropy f_entropy(const AdversarialDataset& adv, const FeatureMap& map, const TrainOptions& opts = {},
                   const LinearClassifier* warm_start = nullptr);

/// Weighted union of generated and reference examples: generated rows first,
/// each weighted 1 / ((1 + lambda) n_gen), then reference rows weighted
/// lambda / ((1 + lambda) n_ref).
struct Mixture {
  LabeledDataset data;
  std::vector<double> weights;
};

Mixture make_mixture(const LabeledDataset& generated, const LabeledDataset& reference, double lambda);

/// F-entropy of the lambda-mixture of an adversarial dataset and reference data.
FEntropy mixture_f_entropy(const AdversarialDataset& adv, const LabeledDataset& reference, double lambda,
                           const FeatureMap& map, const TrainOptions& opts = {},
                           const LinearClassifier* warm_start = nullptr);

/// sum_x p(x) * (-sum_y p(y|x) ln p(y|x)), with 0 ln 0 = 0.
double conditional_entropy(const DiscreteJointDistribution& dist);

struct CeMinimizer {
  std::vector<double> minimizers;  // support_size x K, each row a grid point of the simplex
  double value = 0.0;              // expected cross-entropy at the grid optimum
};

/// Exhaustive search over the uniform simplex grid {k / R : sum k = R} at each
/// support point for the prediction minimizing expected cross-entropy. Terms
/// with p(y|x) = 0 contribute 0; a grid point putting 0 mass on a label with
/// positive probability is infeasible. Requires K <= 4 and R >= 50.
CeMinimizer brute_force_ce_minimizer(const DiscreteJointDistribution& dist, int grid_resolution);

struct EntropyEntry {
  std::string class_name;
  FEntropy estimate;
};

struct EntropyReport {
  std::vector<EntropyEntry> entries;
  std::optional<double> conditional_entropy;
  std::string provenance;
};

/// F-entropy along nested feature maps (ordered smallest first). Each larger
/// class is warm-started from the zero-padded solution of the previous one, so
/// the reported values are non-increasing along the chain.
EntropyReport entropy_chain(const LabeledDataset& ds, std::span<const FeatureMap> nested_maps,
                            const TrainOptions& opts = {}, std::string provenance = {});

/// CSV: `class,H_F,iterations,converged`.
void write_entropy_csv(const EntropyReport& report, std::ostream& out);

}  // namespace aeg
