#pragma once

#include <string>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace mtbo {

enum class SimilarityMeasure { BestNMean, OptimalPoint, BestNPercent, Kendall, KlDivergence };
enum class WeightStrategy { Linear, Exponential, AllOne };

struct SimilarityConfig {
    SimilarityMeasure measure = SimilarityMeasure::BestNMean;
    int n = 5;
    double percent = 0.30;
    WeightStrategy strategy = WeightStrategy::Linear;
    double alpha = 0.5;
    double beta = 0.5;
    int kl_mc_samples = 1024;
    int recompute_interval = 1;  // recompute distances every k iterations
};

/// Per-source-task distances to the target plus the global ascending
/// ordering, frozen at iteration `computed_at_t`.
struct SimilarityState {
    Vec distances;
    std::vector<int> global_order;  // task indices, ascending distance, ties by task id
    std::vector<int> global_rank;   // inverse permutation of global_order
    int computed_at_t = 0;
};

/// Mean x of the best min(N, |D|) samples by y_raw, ties by insertion order.
Vec best_n_mean(const TaskDataset& dataset, int n);

/// Euclidean distance between best-N means in normalized coordinates.
/// N depends on the measure: 1 for optimal_point, config.n for best_n_mean,
/// ceil(percent * |D|) per dataset for best_n_percent.
double distance_points(const TaskDataset& source, const TaskDataset& target,
                       const SimilarityConfig& config);

/// 1 - concordant-pair fraction between true target values and a surrogate
/// fit on the source task; 1 on surrogate failure (maximally dissimilar).
double distance_kendall(const TaskDataset& source, const TaskDataset& target);

/// Concordance core shared with tests: distance given predictions.
double kendall_distance_from_predictions(const Vec& predictions, const Vec& truths);

/// KL(p||q) with p the target and q the source density, both Gaussian KDEs
/// (Scott bandwidth, diagonal) over normalized x, approximated on
/// kl_mc_samples uniform draws with masses floored at 1e-12 and normalized.
double distance_kl(const TaskDataset& source, const TaskDataset& target, int dim,
                   const SimilarityConfig& config, Rng& rng);

/// Weight per strategy from dense 0-indexed local ranks:
/// linear: max(0.1, 1 - r/(alpha*N_m)) if r < alpha*N_m else 0.1;
/// exponential: beta^r; all_one: 1.
Vec assign_weights(const std::vector<int>& local_ranks, int n_m, const SimilarityConfig& config);

/// Distances + global ordering for all source tasks against the target.
/// Degenerate targets (empty, or too small for pairwise measures) give all
/// tasks equal distance, i.e. uniform ranks by task id.
SimilarityState compute_similarity(const std::vector<TaskDataset>& sources,
                                   const TaskDataset& target, const SimilarityConfig& config,
                                   int t, Rng& rng);

/// Weights for a subset of tasks (e.g. those contributing samples to a tree
/// node): the subset is densely re-ranked by the global ordering and the
/// strategy is applied with N_m = subset size. Returned weights align with
/// `subset`.
Vec weights_for_subset(const SimilarityState& state, const std::vector<int>& subset,
                       const SimilarityConfig& config);

}  // namespace mtbo
