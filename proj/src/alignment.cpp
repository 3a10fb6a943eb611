#include "lalign/alignment.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "lalign/error.hpp"
#include "lalign/features.hpp"
#include "lalign/rng.hpp"

namespace lalign {

Label LabelMapping::target_of(Label source) const {
  for (const auto& [s, t] : pairs)
    if (s == source) return t;
  throw Error(ErrorCode::UnknownLabel, "label " + std::to_string(source) + " is not in the mapping");
}

LabelMapping match_labels(std::vector<Label> source_labels, std::vector<Label> target_labels, std::uint64_t seed) {
  const std::set<Label> src(source_labels.begin(), source_labels.end());
  const std::set<Label> tgt(target_labels.begin(), target_labels.end());
  if (src.size() != source_labels.size() || tgt.size() != target_labels.size()) {
    throw Error(ErrorCode::CardinalityMismatch, "label sets contain duplicates");
  }
  if (src.size() != tgt.size()) {
    throw Error(ErrorCode::CardinalityMismatch, "source has " + std::to_string(src.size()) + " labels, target has " +
                                                    std::to_string(tgt.size()));
  }
  LabelMapping mapping;
  mapping.seed = seed;
  std::vector<Label> src_rest;
  std::vector<Label> tgt_rest;
  for (Label s : src) {
    if (tgt.contains(s)) {
      mapping.pairs.emplace_back(s, s);
    } else {
      src_rest.push_back(s);
    }
  }
  for (Label t : tgt)
    if (!src.contains(t)) tgt_rest.push_back(t);

  CounterRng rng(CounterRng::derive(seed, {0x6c6162656cULL}));
  for (std::size_t i = tgt_rest.size(); i > 1; --i) std::swap(tgt_rest[i - 1], tgt_rest[rng.below(i)]);
  for (std::size_t i = 0; i < src_rest.size(); ++i) mapping.pairs.emplace_back(src_rest[i], tgt_rest[i]);
  std::sort(mapping.pairs.begin(), mapping.pairs.end());
  return mapping;
}

ClassMeans estimate_class_means(std::span<const SpdMatrix> covs, std::span<const Label> labels) {
  if (covs.size() != labels.size()) {
    throw Error(ErrorCode::DimMismatch, "estimate_class_means: " + std::to_string(covs.size()) + " covariances vs " +
                                            std::to_string(labels.size()) + " labels");
  }
  std::map<Label, std::vector<SpdMatrix>> grouped;
  for (std::size_t i = 0; i < covs.size(); ++i) grouped[labels[i]].push_back(covs[i]);
  ClassMeans out;
  for (const auto& [label, group] : grouped) {
    out.means.emplace(label, log_euclidean_mean(group));
    out.support.emplace(label, group.size());
  }
  return out;
}

AlignmentTransform ea_reference(std::span<const Trial> trials, double shrinkage) {
  if (trials.empty()) throw Error(ErrorCode::EmptyInput, "ea_reference: no trials");
  const auto covs = trial_covariances(trials, shrinkage);
  AlignmentTransform t;
  t.kind = AlignKind::Ea;
  t.reference = spd_inv_sqrt(arithmetic_mean_cov(covs)).matrix();
  return t;
}

std::vector<Trial> ea_align(const AlignmentTransform& transform, std::span<const Trial> trials) {
  if (transform.kind != AlignKind::Ea) throw Error(ErrorCode::InvalidConfig, "ea_align needs an EA transform");
  std::vector<Trial> out;
  out.reserve(trials.size());
  for (const auto& t : trials) {
    if (t.channels() != transform.reference.cols()) {
      throw Error(ErrorCode::DimMismatch, "ea_align: trial has " + std::to_string(t.channels()) + " channels, R is " +
                                              std::to_string(transform.reference.cols()) + "-dimensional");
    }
    out.push_back({transform.reference * t.data, t.label});
  }
  return out;
}

std::optional<ClassMeans> target_means_from_labeled(std::span<const SpdMatrix> labeled_covs,
                                                    std::span<const Label> labels, std::size_t num_classes) {
  auto means = estimate_class_means(labeled_covs, labels);
  if (means.means.size() < num_classes) return std::nullopt;
  return means;
}

TargetEstimate select_and_estimate_target_means(std::span<const SpdMatrix> target_covs, const DistanceMatrix& distances,
                                                std::size_t k, const LabelOracle& oracle, std::size_t num_classes) {
  if (distances.size() != target_covs.size()) {
    throw Error(ErrorCode::DimMismatch, "distance matrix does not match the number of target covariances");
  }
  TargetEstimate est;
  est.selected = k_medoids(distances, k).medoids;
  std::vector<SpdMatrix> picked;
  for (auto i : est.selected) {
    est.selected_labels.push_back(oracle(i));
    picked.push_back(target_covs[i]);
  }
  est.means = target_means_from_labeled(picked, est.selected_labels, num_classes);
  return est;
}

TargetEstimate select_and_estimate_target_means(std::span<const Trial> target_trials, std::size_t k,
                                                const LabelOracle& oracle, std::size_t num_classes, double shrinkage) {
  const auto covs = trial_covariances(target_trials, shrinkage);
  return select_and_estimate_target_means(covs, pairwise_distances(covs), k, oracle, num_classes);
}

AlignmentTransform la_fit_from_means(const ClassMeans& source_means, const ClassMeans& target_means,
                                     const LabelMapping& mapping) {
  AlignmentTransform t;
  t.kind = AlignKind::La;
  for (const auto& [src, tgt] : mapping.pairs) {
    auto s = source_means.means.find(src);
    if (s == source_means.means.end()) {
      throw Error(ErrorCode::MissingClass, "source class " + std::to_string(src) + " has no trials");
    }
    auto m = target_means.means.find(tgt);
    if (m == target_means.means.end()) {
      throw Error(ErrorCode::MissingClass, "target class " + std::to_string(tgt) + " has no mean");
    }
    t.class_transforms.emplace(src, spd_sqrt(m->second).matrix() * spd_inv_sqrt(s->second).matrix());
  }
  return t;
}

AlignmentTransform la_fit(const std::map<Label, std::vector<Trial>>& source_trials_by_class,
                          const ClassMeans& target_means, const LabelMapping& mapping, double shrinkage) {
  ClassMeans source_means;
  for (const auto& [src, _] : mapping.pairs) {
    auto it = source_trials_by_class.find(src);
    if (it == source_trials_by_class.end() || it->second.empty()) {
      throw Error(ErrorCode::MissingClass, "source class " + std::to_string(src) + " has no trials");
    }
    const auto covs = trial_covariances(it->second, shrinkage);
    source_means.means.emplace(src, log_euclidean_mean(covs));
    source_means.support.emplace(src, covs.size());
  }
  return la_fit_from_means(source_means, target_means, mapping);
}

std::vector<Trial> la_align(const AlignmentTransform& transform, std::span<const Trial> source_trials,
                            const LabelMapping& mapping) {
  if (transform.kind != AlignKind::La) throw Error(ErrorCode::InvalidConfig, "la_align needs an LA transform");
  std::vector<Trial> out;
  out.reserve(source_trials.size());
  for (const auto& t : source_trials) {
    if (!t.label) throw Error(ErrorCode::UnknownLabel, "la_align: unlabeled source trial");
    auto it = transform.class_transforms.find(*t.label);
    if (it == transform.class_transforms.end()) {
      throw Error(ErrorCode::UnknownLabel, "no LA transform for source label " + std::to_string(*t.label));
    }
    if (t.channels() != it->second.cols()) throw Error(ErrorCode::DimMismatch, "la_align: channel count mismatch");
    out.push_back({it->second * t.data, mapping.target_of(*t.label)});
  }
  return out;
}

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Raw: return "raw";
    case Strategy::Ea: return "ea";
    case Strategy::La: return "la";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "raw") return Strategy::Raw;
  if (name == "ea") return Strategy::Ea;
  if (name == "la") return Strategy::La;
  throw Error(ErrorCode::InvalidConfig, "unknown alignment strategy '" + std::string(name) + "'");
}

namespace {

std::vector<Trial> relabel(std::span<const Trial> trials, const LabelMapping& mapping) {
  std::vector<Trial> out(trials.begin(), trials.end());
  for (auto& t : out) {
    if (!t.label) throw Error(ErrorCode::UnknownLabel, "unlabeled source trial");
    t.label = mapping.target_of(*t.label);
  }
  return out;
}

AlignResult align_ea(const AlignRequest& req) {
  AlignResult out;
  for (const auto& subject : req.source_subjects) {
    auto aligned = ea_align(ea_reference(subject, req.shrinkage), relabel(subject, req.mapping));
    std::move(aligned.begin(), aligned.end(), std::back_inserter(out.source));
  }
  out.target = ea_align(ea_reference(req.target_trials, req.shrinkage), req.target_trials);
  return out;
}

}  // namespace

AlignResult align(const AlignRequest& req) {
  if (req.labeled_target.size() != req.labeled_target_labels.size()) {
    throw Error(ErrorCode::DimMismatch, "labeled target indices and labels differ in length");
  }
  switch (req.strategy) {
    case Strategy::Raw: {
      AlignResult out;
      for (const auto& subject : req.source_subjects) {
        auto r = relabel(subject, req.mapping);
        std::move(r.begin(), r.end(), std::back_inserter(out.source));
      }
      out.target = req.target_trials;
      return out;
    }
    case Strategy::Ea:
      return align_ea(req);
    case Strategy::La: {
      std::vector<Trial> labeled;
      for (auto i : req.labeled_target) labeled.push_back(req.target_trials.at(i));
      const auto labeled_covs = trial_covariances(labeled, req.shrinkage);
      const auto target_means = target_means_from_labeled(labeled_covs, req.labeled_target_labels, req.num_classes);
      if (!target_means) {
        auto out = align_ea(req);
        out.fell_back_to_ea = true;
        return out;
      }
      AlignResult out;
      for (const auto& subject : req.source_subjects) {
        std::map<Label, std::vector<Trial>> by_class;
        for (const auto& t : subject) {
          if (!t.label) throw Error(ErrorCode::UnknownLabel, "unlabeled source trial");
          by_class[*t.label].push_back(t);
        }
        const auto transform = la_fit(by_class, *target_means, req.mapping, req.shrinkage);
        auto aligned = la_align(transform, subject, req.mapping);
        std::move(aligned.begin(), aligned.end(), std::back_inserter(out.source));
      }
      out.target = req.target_trials;
      return out;
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown strategy");
}

}  // namespace lalign
