#include "aeg/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "aeg/error.hpp"
#include "aeg/io.hpp"

namespace aeg {

TargetPool train_pool(const LabeledDataset& ds, const SplitPlan& plan, const FeatureMap& map,
                      std::span<const std::uint64_t> seeds, const PoolOptions& opts) {
  if (plan.assignment.size() != ds.size()) throw InvalidArgument("train_pool: split plan does not match the dataset");
  std::vector<std::size_t> splits = opts.splits;
  if (splits.empty()) {
    splits.resize(plan.num_splits);
    for (std::size_t k = 0; k < splits.size(); ++k) splits[k] = k;
  }
  if (seeds.size() != splits.size()) throw InvalidArgument("train_pool: need one seed per target");

  TargetPool pool;
  pool.hypothesis_class_ = map.name();
  for (std::size_t t = 0; t < splits.size(); ++t) {
    const std::size_t s = splits[t];
    if (s >= plan.num_splits) throw InvalidArgument("train_pool: split id out of range");
    const std::string id = "pool/split-" + std::to_string(s);
    const std::vector<std::size_t> idx = plan.indices_of(s);
    if (idx.empty()) throw InvalidArgument("train_pool: " + id + " is empty");
    try {
      TrainResult res = train_logreg(map, subset(ds, idx), opts.l2_reg, opts.train);
      pool.targets_.emplace_back(res.classifier.feature_map(), res.classifier.num_classes(),
                                 std::vector<double>(res.classifier.weights().begin(), res.classifier.weights().end()),
                                 opts.l2_reg, TrainedWith{"gd-backtracking", std::nullopt, seeds[t]});
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(id + ": " + e.what(), e.iteration());
    }
    pool.provenance_.push_back({id, s, seeds[t], map.name()});
  }
  return pool;
}

double TargetPool::error_rate(std::size_t k, const LabeledDataset& ds) const {
  return aeg::error_rate(targets_.at(k), ds);
}

double TargetPool::error_rate(std::size_t k, const AdversarialDataset& adv) const {
  return aeg::error_rate(targets_.at(k), adv.perturbed());
}

bool TargetPool::names_member(std::string_view text) const {
  return std::any_of(provenance_.begin(), provenance_.end(), [&](const TargetProvenance& p) {
    for (std::size_t at = text.find(p.id); at != std::string_view::npos; at = text.find(p.id, at + 1)) {
      const std::size_t end = at + p.id.size();
      if (end == text.size() || !std::isdigit(static_cast<unsigned char>(text[end]))) return true;
    }
    return false;
  });
}

MeanTwoSigma mean_two_sigma(std::span<const double> values) {
  MeanTwoSigma r;
  if (values.empty()) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return r;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.two_sigma = 2.0 * std::sqrt(ss / static_cast<double>(values.size() - 1));
  return r;
}

TransferReport evaluate_transfer(const AdversarialDataset& adv, const TargetPool& pool,
                                 const LabeledDataset& clean_eval) {
  if (adv.generator_id().empty()) throw ContractViolation("evaluate_transfer: attack has no provenance");
  if (pool.names_member(adv.generator_id())) {
    throw ContractViolation("evaluate_transfer: attack '" + adv.generator_id() + "' was built from a pool member");
  }
  if (!(adv.clean() == clean_eval)) {
    throw InvalidArgument("evaluate_transfer: adversarial data was not generated from clean_eval");
  }
  if (pool.size() == 0) throw InvalidArgument("evaluate_transfer: empty pool");

  TransferReport rep;
  rep.generator_id = adv.generator_id();
  // Ids read "kind:eps=X[:source]".
  const auto eps_at = rep.generator_id.find(":eps=");
  const auto colon = eps_at == std::string::npos ? eps_at : rep.generator_id.find(':', eps_at + 1);
  rep.source = colon == std::string::npos ? std::string() : rep.generator_id.substr(colon + 1);
  std::vector<double> clean(pool.size());
  std::vector<double> attacked(pool.size());
  const LabeledDataset perturbed = adv.perturbed();
  for (std::size_t k = 0; k < pool.size(); ++k) {
    clean[k] = pool.error_rate(k, clean_eval);
    attacked[k] = pool.error_rate(k, perturbed);
    rep.targets.push_back({pool.provenance(k).id, clean[k], attacked[k]});
  }
  const MeanTwoSigma c = mean_two_sigma(clean);
  const MeanTwoSigma a = mean_two_sigma(attacked);
  rep.macro_clean = c.mean;
  rep.two_sigma_clean = c.two_sigma;
  rep.macro_adv = a.mean;
  rep.two_sigma = a.two_sigma;
  return rep;
}

SourceAggregate aggregate_sources(std::span<const TransferReport> reports) {
  std::vector<double> clean;
  std::vector<double> attacked;
  for (const auto& r : reports) {
    clean.push_back(r.macro_clean);
    attacked.push_back(r.macro_adv);
  }
  const MeanTwoSigma a = mean_two_sigma(attacked);
  return {mean_two_sigma(clean).mean, a.mean, a.two_sigma, reports.size()};
}

AdversarialDataset random_noise_baseline(AttackBudget budget, const LabeledDataset& ds, std::uint64_t seed) {
  return attack_dataset(NoiseGenerator{budget}, ds, seed);
}

void write_transfer_csv(const TransferReport& report, std::ostream& out) {
  out << "target_id,clean_err,adv_err\n";
  for (const auto& t : report.targets) {
    out << t.target_id << ',' << io::format_double(t.clean_err) << ',' << io::format_double(t.adv_err) << '\n';
  }
}

std::string transfer_summary_json(const TransferReport& report) {
  nlohmann::ordered_json j;
  j["macro_clean"] = report.macro_clean;
  j["macro_adv"] = report.macro_adv;
  j["two_sigma"] = report.two_sigma;
  j["source"] = report.source;
  j["generator_id"] = report.generator_id;
  return j.dump(2) + "\n";
}

}  // namespace aeg
