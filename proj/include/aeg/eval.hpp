#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aeg/classifier.hpp"
#include "aeg/data.hpp"
#include "aeg/features.hpp"
#include "aeg/generator.hpp"

namespace aeg {

struct TargetProvenance {
  std::string id;  // "pool/split-<k>"
  std::size_t split_id = 0;
  std::uint64_t seed = 0;
  std::string feature_class;

  bool operator==(const TargetProvenance&) const = default;
};

struct PoolOptions {
  std::vector<std::size_t> splits;  // empty: every split of the plan
  double l2_reg = 0.0;
  TrainOptions train{};
};

class TargetPool;

/// One target per split, trained to convergence on that split only.
TargetPool train_pool(const LabeledDataset& ds, const SplitPlan& plan, const FeatureMap& map,
                      std::span<const std::uint64_t> seeds, const PoolOptions& opts = {});

/// Trained targets behind an evaluation-only interface. Weights never leave
/// the pool, so attacks cannot be built from its members.
class TargetPool {
public:
  std::size_t size() const noexcept { return targets_.size(); }
  const TargetProvenance& provenance(std::size_t k) const { return provenance_.at(k); }
  const std::string& hypothesis_class() const noexcept { return hypothesis_class_; }

  double error_rate(std::size_t k, const LabeledDataset& ds) const;
  double error_rate(std::size_t k, const AdversarialDataset& adv) const;

  /// True when `text` mentions the id of any member.
  bool names_member(std::string_view text) const;

  bool operator==(const TargetPool&) const = default;

private:
  friend TargetPool train_pool(const LabeledDataset&, const SplitPlan&, const FeatureMap&,
                               std::span<const std::uint64_t>, const PoolOptions&);
  std::vector<LinearClassifier> targets_;
  std::vector<TargetProvenance> provenance_;
  std::string hypothesis_class_;
};

struct TargetResult {
  std::string target_id;
  double clean_err = 0.0;
  double adv_err = 0.0;
};

struct TransferReport {
  std::string source;
  std::string generator_id;
  std::vector<TargetResult> targets;
  double macro_clean = 0.0;
  double macro_adv = 0.0;
  double two_sigma = 0.0;        // of adv_err across targets
  double two_sigma_clean = 0.0;  // of clean_err across targets
};

/// Mean and twice the sample standard deviation; the dispersion of fewer than
/// two values is 0.
struct MeanTwoSigma {
  double mean = 0.0;
  double two_sigma = 0.0;
};
MeanTwoSigma mean_two_sigma(std::span<const double> values);

/// Clean and adversarial error of every target on the same examples.
/// `clean_eval` must be the clean side of `adv`. Throws ContractViolation when
/// the adversarial dataset's provenance names a pool member.
TransferReport evaluate_transfer(const AdversarialDataset& adv, const TargetPool& pool,
                                 const LabeledDataset& clean_eval);

struct SourceAggregate {
  double macro_clean = 0.0;
  double macro_adv = 0.0;
  double two_sigma = 0.0;  // of the per-source macro adversarial errors
  std::size_t num_sources = 0;
};

/// Macro average over several sources' reports.
SourceAggregate aggregate_sources(std::span<const TransferReport> reports);

/// Per-coordinate i.i.d. uniform on {-eps, +eps}.
AdversarialDataset random_noise_baseline(AttackBudget budget, const LabeledDataset& ds, std::uint64_t seed);

/// CSV: `target_id,clean_err,adv_err`.
void write_transfer_csv(const TransferReport& report, std::ostream& out);
/// {macro_clean, macro_adv, two_sigma, source, generator_id}
std::string transfer_summary_json(const TransferReport& report);

}  // namespace aeg
