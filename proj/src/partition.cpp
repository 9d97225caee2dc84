#include "partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mtbo {

namespace {

double sq_dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double t = a[d] - b[d];
        s += t * t;
    }
    return s;
}

constexpr int kSampleRounds = 3;
constexpr int kSamplesPerRound = 10000;
constexpr int kFallbackCount = 10;

}  // namespace

bool RegionPath::contains(const Vec& x) const {
    for (const auto& step : steps) {
        const bool good = step.classifier.decide(x);
        if (good != (step.side == RegionSide::Good)) return false;
    }
    return true;
}

int RegionPath::violations(const Vec& x) const {
    int n = 0;
    for (const auto& step : steps) {
        const bool good = step.classifier.decide(x);
        if (good != (step.side == RegionSide::Good)) ++n;
    }
    return n;
}

bool region_contains(const RegionPath& path, const Vec& x) { return path.contains(x); }

namespace {

struct LloydOutcome {
    KMeansResult result;
    double sse = 0.0;
};

LloydOutcome lloyd_from_seeding(const std::vector<Vec>& features, Rng& rng) {
    const std::size_t n = features.size();

    // k-means++ seeding: first centroid uniform, second proportional to
    // squared distance from the first.
    Vec c0 = features[rng.index(n)];
    std::vector<double> d2(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = sq_dist(features[i], c0);
        total += d2[i];
    }
    double r = rng.uniform() * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
        r -= d2[i];
        if (r <= 0.0) {
            pick = i;
            break;
        }
    }
    Vec c1 = features[pick];

    LloydOutcome out;
    out.result.labels.assign(n, 0);
    Vec cent[2] = {std::move(c0), std::move(c1)};

    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        std::size_t count[2] = {0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            const int lab = sq_dist(features[i], cent[0]) <= sq_dist(features[i], cent[1]) ? 0 : 1;
            if (lab != out.result.labels[i]) {
                out.result.labels[i] = lab;
                changed = true;
            }
            ++count[lab];
        }
        // an emptied cluster is reseeded with the point farthest from the
        // other centroid
        for (int c = 0; c < 2; ++c) {
            if (count[c] == 0) {
                std::size_t far = 0;
                double best = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = sq_dist(features[i], cent[1 - c]);
                    if (d > best) {
                        best = d;
                        far = i;
                    }
                }
                out.result.labels[far] = c;
                count[c] = 1;
                count[1 - c] -= 1;
                changed = true;
            }
        }
        Vec next[2];
        next[0].assign(features[0].size(), 0.0);
        next[1].assign(features[0].size(), 0.0);
        std::size_t m[2] = {0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            const int lab = out.result.labels[i];
            ++m[lab];
            for (std::size_t d = 0; d < features[i].size(); ++d) next[lab][d] += features[i][d];
        }
        for (int c = 0; c < 2; ++c)
            for (auto& v : next[c]) v /= static_cast<double>(m[c]);
        cent[0] = std::move(next[0]);
        cent[1] = std::move(next[1]);
        if (!changed && iter > 0) break;
    }

    out.result.centroid[0] = cent[0];
    out.result.centroid[1] = cent[1];
    for (std::size_t i = 0; i < n; ++i)
        out.sse += sq_dist(features[i], cent[out.result.labels[i]]);
    return out;
}

}  // namespace

std::optional<KMeansResult> kmeans_two(const std::vector<Vec>& features, std::uint64_t seed) {
    const std::size_t n = features.size();
    if (n < 2) return std::nullopt;

    bool any_distinct = false;
    for (std::size_t i = 1; i < n && !any_distinct; ++i)
        any_distinct = features[i] != features[0];
    if (!any_distinct) return std::nullopt;

    // best of 10 k-means++ restarts by within-cluster SSE; a single unlucky
    // seeding on skewed data can otherwise produce an extreme imbalance
    Rng rng(seed);
    std::optional<LloydOutcome> best;
    for (int restart = 0; restart < 10; ++restart) {
        LloydOutcome out = lloyd_from_seeding(features, rng);
        if (!best || out.sse < best->sse) best = std::move(out);
    }
    return best->result;
}

std::pair<int, int> label_good_bad(const std::vector<const Sample*>& samples,
                                   const std::vector<int>& labels) {
    double sum[2] = {0.0, 0.0};
    std::size_t cnt[2] = {0, 0};
    double best_y = -std::numeric_limits<double>::infinity();
    int best_cluster = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        sum[labels[i]] += samples[i]->y_norm;
        ++cnt[labels[i]];
        if (samples[i]->y_norm > best_y) {
            best_y = samples[i]->y_norm;
            best_cluster = labels[i];
        }
    }
    if (cnt[0] == 0 || cnt[1] == 0)
        throw std::invalid_argument("label_good_bad: both clusters must be non-empty");
    const double mean0 = sum[0] / static_cast<double>(cnt[0]);
    const double mean1 = sum[1] / static_cast<double>(cnt[1]);
    if (mean0 > mean1) return {0, 1};
    if (mean1 > mean0) return {1, 0};
    return {best_cluster, 1 - best_cluster};
}

Classifier fit_classifier(const std::vector<Vec>& features, const std::vector<int>& labels,
                          ClassifierKind kind) {
    if (features.empty() || features.size() != labels.size())
        throw std::invalid_argument("fit_classifier: bad inputs");
    bool has0 = false, has1 = false;
    for (double v : features[0])
        if (!std::isfinite(v)) throw std::invalid_argument("fit_classifier: non-finite feature");
    for (const auto& f : features)
        for (double v : f)
            if (!std::isfinite(v)) throw std::invalid_argument("fit_classifier: non-finite feature");
    for (int l : labels) (l == 1 ? has1 : has0) = true;
    if (!has0 || !has1) throw std::invalid_argument("fit_classifier: both classes required");

    const std::size_t n = features.size();
    const std::size_t dim = features[0].size();

    // standardize features for the fit and absorb the transform into the
    // returned (weights, bias); node sub-regions can be micro-scaled and a
    // raw-coordinate fit would need unreachably large weights there
    Vec mu(dim, 0.0), sigma(dim, 0.0);
    for (const auto& f : features)
        for (std::size_t d = 0; d < dim; ++d) mu[d] += f[d];
    for (auto& v : mu) v /= static_cast<double>(n);
    for (const auto& f : features)
        for (std::size_t d = 0; d < dim; ++d) sigma[d] += (f[d] - mu[d]) * (f[d] - mu[d]);
    for (auto& v : sigma) v = std::sqrt(v / static_cast<double>(n));
    for (auto& v : sigma)
        if (v < 1e-12) v = 1.0;
    std::vector<Vec> scaled(features);
    for (auto& f : scaled)
        for (std::size_t d = 0; d < dim; ++d) f[d] = (f[d] - mu[d]) / sigma[d];

    Classifier clf;
    clf.kind = kind;
    clf.weights.assign(dim, 0.0);
    clf.bias = 0.0;
    clf.good_side_positive = true;

    if (kind == ClassifierKind::LogisticRegression) {
        // gradient ascent on the L2-regularized log-likelihood with Armijo
        // backtracking; a fixed step underfits badly on imbalanced clusters
        const double l2 = 1e-4;
        auto log_likelihood = [&](const Vec& w, double b) {
            double ll = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double s = b;
                for (std::size_t d = 0; d < dim; ++d) s += w[d] * scaled[i][d];
                // log sigma(s) for label 1, log(1 - sigma(s)) for label 0
                const double z = labels[i] == 1 ? s : -s;
                ll += z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
            }
            double reg = 0.0;
            for (double v : w) reg += v * v;
            return ll - 0.5 * l2 * reg;
        };

        double current = log_likelihood(clf.weights, clf.bias);
        double step = 1.0;
        for (int iter = 0; iter < 500; ++iter) {
            Vec grad(dim, 0.0);
            double gb = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double p = 1.0 / (1.0 + std::exp(-clf.score(scaled[i])));
                const double err = static_cast<double>(labels[i]) - p;
                for (std::size_t d = 0; d < dim; ++d) grad[d] += err * scaled[i][d];
                gb += err;
            }
            double g2 = gb * gb;
            for (std::size_t d = 0; d < dim; ++d) {
                grad[d] -= l2 * clf.weights[d];
                g2 += grad[d] * grad[d];
            }
            if (g2 < 1e-12) break;

            step = std::min(step * 2.0, 1e4);
            bool accepted = false;
            while (step > 1e-12) {
                Vec w = clf.weights;
                for (std::size_t d = 0; d < dim; ++d) w[d] += step * grad[d];
                const double b = clf.bias + step * gb;
                const double trial = log_likelihood(w, b);
                if (trial >= current + 1e-4 * step * g2) {
                    clf.weights = std::move(w);
                    clf.bias = b;
                    current = trial;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
        }
    } else {
        // hinge loss, deterministic subgradient descent with 1/t step decay
        const double l2 = 1e-4;
        for (int iter = 1; iter <= 500; ++iter) {
            const double lr = 1.0 / (l2 * static_cast<double>(iter) + 1.0);
            Vec grad(dim, 0.0);
            double gb = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double y = labels[i] == 1 ? 1.0 : -1.0;
                if (y * clf.score(scaled[i]) < 1.0) {
                    for (std::size_t d = 0; d < dim; ++d) grad[d] += y * scaled[i][d];
                    gb += y;
                }
            }
            for (std::size_t d = 0; d < dim; ++d)
                clf.weights[d] += lr * (grad[d] / static_cast<double>(n) - l2 * clf.weights[d]);
            clf.bias += lr * gb / static_cast<double>(n);
        }
    }

    // fold the standardization back so decide() works on raw features
    double shift = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        clf.weights[d] /= sigma[d];
        shift += clf.weights[d] * mu[d];
    }
    clf.bias -= shift;

    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (clf.decide(features[i]) == (labels[i] == 1)) ++correct;
    clf.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return clf;
}

std::vector<Vec> sample_in_membership(int dim, const std::function<int(const Vec&)>& violations,
                                      Rng& rng, int rounds) {
    std::vector<Vec> retained;
    std::vector<std::pair<int, Vec>> near_misses;
    for (int round = 0; round < rounds; ++round) {
        for (int i = 0; i < kSamplesPerRound; ++i) {
            Vec x(dim);
            for (auto& v : x) v = rng.uniform();
            const int viol = violations(x);
            if (viol == 0)
                retained.push_back(std::move(x));
            else
                near_misses.emplace_back(viol, std::move(x));
        }
    }
    if (!retained.empty()) return retained;
    // empty region: hand back the least-violating draws
    std::stable_sort(near_misses.begin(), near_misses.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Vec> fallback;
    for (std::size_t i = 0; i < near_misses.size() && i < kFallbackCount; ++i)
        fallback.push_back(std::move(near_misses[i].second));
    return fallback;
}

std::vector<Vec> sample_in_region(const SearchDomain& domain, const RegionPath& path, Rng& rng) {
    return sample_in_membership(domain.dim, [&path](const Vec& x) { return path.violations(x); },
                                rng, kSampleRounds);
}

}  // namespace mtbo
