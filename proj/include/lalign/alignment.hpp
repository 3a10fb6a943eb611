#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lalign/selection.hpp"
#include "lalign/signal.hpp"
#include "lalign/spd.hpp"

namespace lalign {

/// Bijection from source labels to target labels.
struct LabelMapping {
  std::vector<std::pair<Label, Label>> pairs;  // sorted by source label
  std::optional<std::uint64_t> seed;

  /// Throws UnknownLabel.
  Label target_of(Label source) const;
};

/// Common labels map to themselves; the remaining source labels (ascending)
/// are paired with a seeded uniform permutation of the remaining target labels.
/// Throws CardinalityMismatch when the set sizes differ.
LabelMapping match_labels(std::vector<Label> source_labels, std::vector<Label> target_labels, std::uint64_t seed);

enum class AlignKind { Ea, La };

struct AlignmentTransform {
  AlignKind kind = AlignKind::Ea;
  Matrix reference;  // EA: R = Cbar^{-1/2}
  std::map<Label, Matrix> class_transforms;  // LA: source label -> A_m
};

struct ClassMeans {
  std::map<Label, SpdMatrix> means;
  std::map<Label, std::size_t> support;
};

/// Log-Euclidean mean per label. Throws DimMismatch when sizes differ.
ClassMeans estimate_class_means(std::span<const SpdMatrix> covs, std::span<const Label> labels);

AlignmentTransform ea_reference(std::span<const Trial> trials, double shrinkage = 0.0);
/// X -> R X; labels preserved.
std::vector<Trial> ea_align(const AlignmentTransform& transform, std::span<const Trial> trials);

struct TargetEstimate {
  std::optional<ClassMeans> means;  // empty: medoid labels cover fewer than M classes, use EA
  std::vector<std::size_t> selected;  // medoid indices, ascending
  std::vector<Label> selected_labels;

  bool fallback_to_ea() const { return !means.has_value(); }
};

using LabelOracle = std::function<Label(std::size_t)>;

/// k-medoids over the target covariances, query `oracle` for the medoids only,
/// and average each labeled class with the Log-Euclidean mean.
TargetEstimate select_and_estimate_target_means(std::span<const SpdMatrix> target_covs, const DistanceMatrix& distances,
                                                std::size_t k, const LabelOracle& oracle, std::size_t num_classes);
TargetEstimate select_and_estimate_target_means(std::span<const Trial> target_trials, std::size_t k,
                                                const LabelOracle& oracle, std::size_t num_classes,
                                                double shrinkage = 0.0);

/// Target means from an already chosen labeled subset; empty when the labels
/// cover fewer than `num_classes` classes.
std::optional<ClassMeans> target_means_from_labeled(std::span<const SpdMatrix> labeled_covs,
                                                    std::span<const Label> labels, std::size_t num_classes);

/// A_m = Cbar_{T,m}^{1/2} Cbar_{S,m}^{-1/2} for every mapped source class.
/// Throws MissingClass naming the absent label.
AlignmentTransform la_fit(const std::map<Label, std::vector<Trial>>& source_trials_by_class,
                          const ClassMeans& target_means, const LabelMapping& mapping, double shrinkage = 0.0);
AlignmentTransform la_fit_from_means(const ClassMeans& source_means, const ClassMeans& target_means,
                                     const LabelMapping& mapping);

/// X_j -> A_m X_j and relabel to the mapped target label. Throws UnknownLabel.
std::vector<Trial> la_align(const AlignmentTransform& transform, std::span<const Trial> source_trials,
                            const LabelMapping& mapping);

enum class Strategy { Raw, Ea, La };
std::string_view strategy_name(Strategy s);
/// Throws InvalidConfig for unknown names.
Strategy parse_strategy(std::string_view name);

struct AlignRequest {
  Strategy strategy = Strategy::Raw;
  std::vector<std::vector<Trial>> source_subjects;  // labeled with source labels
  std::vector<Trial> target_trials;  // every target trial; labels are not read
  std::vector<std::size_t> labeled_target;  // indices into target_trials with known labels
  std::vector<Label> labeled_target_labels;
  LabelMapping mapping;
  std::size_t num_classes = 2;
  double shrinkage = 0.0;
};

struct AlignResult {
  std::vector<Trial> source;  // aligned, labels in the target label space
  std::vector<Trial> target;  // target trials in the same frame, input order
  bool fell_back_to_ea = false;
};

/// raw: relabel only. ea: whiten every source subject and the target with
/// their own reference. la: per-source-subject class recentering onto the
/// target class means of the labeled trials, falling back to ea when those
/// labels do not cover every class.
AlignResult align(const AlignRequest& request);

}  // namespace lalign
