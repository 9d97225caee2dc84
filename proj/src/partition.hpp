#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace mtbo {

enum class ClassifierKind { LogisticRegression, LinearSvm };

/// Linear decision boundary between the good and bad clusters. Operates on
/// normalized x only (labels come from clustering, which may use (x, y)).
struct Classifier {
    ClassifierKind kind = ClassifierKind::LogisticRegression;
    Vec weights;
    double bias = 0.0;
    bool good_side_positive = true;
    double train_accuracy = 0.0;

    double score(const Vec& x) const {
        double s = bias;
        for (std::size_t d = 0; d < weights.size(); ++d) s += weights[d] * x[d];
        return s;
    }
    /// true = good side.
    bool decide(const Vec& x) const { return (score(x) >= 0.0) == good_side_positive; }
};

enum class RegionSide { Good, Bad };

struct RegionStep {
    Classifier classifier;
    RegionSide side = RegionSide::Good;
};

/// Conjunction of classifier half-space tests; the empty path is the whole
/// domain.
struct RegionPath {
    std::vector<RegionStep> steps;

    bool contains(const Vec& x) const;
    int violations(const Vec& x) const;
    bool empty() const { return steps.empty(); }
    std::size_t depth() const { return steps.size(); }
};

bool region_contains(const RegionPath& path, const Vec& x);

struct KMeansResult {
    std::vector<int> labels;  // 0 or 1 per feature vector
    Vec centroid[2];
};

/// Two-cluster Lloyd's algorithm with k-means++ style seeding. Returns
/// nullopt when the inputs cannot form two non-empty clusters (fewer than
/// two distinct vectors).
std::optional<KMeansResult> kmeans_two(const std::vector<Vec>& features, std::uint64_t seed);

/// Decides which k-means cluster is "good": larger mean y_norm; ties go to
/// the cluster holding the single best sample.
/// Returns (good_label, bad_label).
std::pair<int, int> label_good_bad(const std::vector<const Sample*>& samples,
                                   const std::vector<int>& labels);

/// Binary classifier fit on x features. labels[i] == 1 marks the good
/// cluster. Logistic regression: gradient ascent on the L2-regularized
/// log-likelihood (strength 1e-4, at most 500 iterations, zero init).
/// Linear SVM: hinge loss by subgradient descent. Imperfect fits are
/// still returned with their training accuracy.
Classifier fit_classifier(const std::vector<Vec>& features, const std::vector<int>& labels,
                          ClassifierKind kind);

/// Three accumulated rounds of 10,000 uniform unit-cube draws filtered by
/// the region predicate. If every round comes back empty, falls back to the
/// 10 drawn points violating the fewest steps so the optimizer always has
/// candidates.
std::vector<Vec> sample_in_region(const SearchDomain& domain, const RegionPath& path, Rng& rng);

/// Same sampling scheme against an arbitrary membership test (used by the
/// geometric transfer-region baselines and the plain GP-EI loop, which uses
/// a single round). `violations` must return 0 for members.
std::vector<Vec> sample_in_membership(int dim, const std::function<int(const Vec&)>& violations,
                                      Rng& rng, int rounds = 3);

}  // namespace mtbo
