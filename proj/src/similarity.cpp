#include "similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "surrogate.hpp"

namespace mtbo {

namespace {

std::vector<std::size_t> best_indices(const TaskDataset& dataset, std::size_t n) {
    std::vector<std::size_t> idx(dataset.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return dataset.samples[a].y_raw > dataset.samples[b].y_raw;
    });
    idx.resize(std::min(n, idx.size()));
    return idx;
}

/// Diagonal Gaussian KDE with Scott's bandwidth over normalized x.
struct Kde {
    const std::vector<Sample>* samples;
    Vec bandwidth;  // per dimension

    static Kde build(const TaskDataset& ds, int dim) {
        Kde kde;
        kde.samples = &ds.samples;
        const double n = static_cast<double>(ds.size());
        const double factor = std::pow(n, -1.0 / (static_cast<double>(dim) + 4.0));
        kde.bandwidth.assign(dim, 0.0);
        for (int d = 0; d < dim; ++d) {
            double mean = 0.0;
            for (const auto& s : ds.samples) mean += s.x[d];
            mean /= n;
            double var = 0.0;
            for (const auto& s : ds.samples) var += (s.x[d] - mean) * (s.x[d] - mean);
            var /= (n - 1.0);
            kde.bandwidth[d] = std::max(factor * std::sqrt(std::max(var, 0.0)), 1e-6);
        }
        return kde;
    }

    double density(const Vec& x) const {
        double acc = 0.0;
        for (const auto& s : *samples) {
            double logk = 0.0;
            for (std::size_t d = 0; d < x.size(); ++d) {
                const double z = (x[d] - s.x[d]) / bandwidth[d];
                logk += -0.5 * z * z - std::log(bandwidth[d] * std::sqrt(2.0 * M_PI));
            }
            acc += std::exp(logk);
        }
        return acc / static_cast<double>(samples->size());
    }
};

}  // namespace

Vec best_n_mean(const TaskDataset& dataset, int n) {
    if (dataset.empty()) throw std::invalid_argument("best_n_mean: empty dataset");
    const auto idx = best_indices(dataset, static_cast<std::size_t>(std::max(n, 1)));
    Vec mean(dataset.samples.front().x.size(), 0.0);
    for (std::size_t i : idx)
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += dataset.samples[i].x[d];
    for (auto& v : mean) v /= static_cast<double>(idx.size());
    return mean;
}

double distance_points(const TaskDataset& source, const TaskDataset& target,
                       const SimilarityConfig& config) {
    if (source.empty() || target.empty())
        throw std::invalid_argument("distance_points: empty dataset");
    auto pick_n = [&config](const TaskDataset& ds) -> int {
        switch (config.measure) {
            case SimilarityMeasure::OptimalPoint: return 1;
            case SimilarityMeasure::BestNPercent:
                return static_cast<int>(
                    std::ceil(config.percent * static_cast<double>(ds.size())));
            default: return config.n;
        }
    };
    const Vec a = best_n_mean(source, pick_n(source));
    const Vec b = best_n_mean(target, pick_n(target));
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return std::sqrt(s);
}

double kendall_distance_from_predictions(const Vec& predictions, const Vec& truths) {
    const std::size_t n = predictions.size();
    if (n < 2 || truths.size() != n)
        throw std::invalid_argument("kendall: need >= 2 paired values");
    std::size_t concordant = 0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k)
            if ((predictions[j] < predictions[k]) == (truths[j] < truths[k])) ++concordant;
    const double c = 2.0 * static_cast<double>(concordant) /
                     (static_cast<double>(n) * static_cast<double>(n - 1));
    return 1.0 - c;
}

double distance_kendall(const TaskDataset& source, const TaskDataset& target) {
    if (target.size() < 2) throw std::invalid_argument("distance_kendall: |target| must be >= 2");
    try {
        std::vector<Vec> xs;
        Vec ys;
        xs.reserve(source.size());
        for (const auto& s : source.samples) {
            xs.push_back(s.x);
            ys.push_back(s.y_norm);
        }
        const GpModel model = GpModel::fit(xs, ys);
        Vec preds, truths;
        preds.reserve(target.size());
        for (const auto& s : target.samples) {
            preds.push_back(model.predict(s.x).first);
            truths.push_back(s.y_raw);
        }
        return kendall_distance_from_predictions(preds, truths);
    } catch (const std::exception&) {
        return 1.0;
    }
}

double distance_kl(const TaskDataset& source, const TaskDataset& target, int dim,
                   const SimilarityConfig& config, Rng& rng) {
    if (source.size() < 2 || target.size() < 2)
        return std::numeric_limits<double>::infinity();
    const Kde q = Kde::build(source, dim);
    const Kde p = Kde::build(target, dim);
    const int s = std::max(config.kl_mc_samples, 1);
    Vec pm(s), qm(s);
    double psum = 0.0, qsum = 0.0;
    for (int i = 0; i < s; ++i) {
        Vec x(dim);
        for (auto& v : x) v = rng.uniform();
        pm[i] = std::max(p.density(x), 1e-12);
        qm[i] = std::max(q.density(x), 1e-12);
        psum += pm[i];
        qsum += qm[i];
    }
    double kl = 0.0;
    for (int i = 0; i < s; ++i) {
        const double pi = pm[i] / psum;
        const double qi = qm[i] / qsum;
        kl += pi * std::log(pi / qi);
    }
    return kl;
}

Vec assign_weights(const std::vector<int>& local_ranks, int n_m, const SimilarityConfig& config) {
    Vec w;
    w.reserve(local_ranks.size());
    if (n_m == 0) return w;
    for (int r : local_ranks) {
        switch (config.strategy) {
            case WeightStrategy::Linear: {
                const double cutoff = config.alpha * static_cast<double>(n_m);
                if (static_cast<double>(r) < cutoff)
                    w.push_back(std::max(0.1, 1.0 - static_cast<double>(r) / cutoff));
                else
                    w.push_back(0.1);
                break;
            }
            case WeightStrategy::Exponential:
                w.push_back(std::pow(config.beta, static_cast<double>(r)));
                break;
            case WeightStrategy::AllOne: w.push_back(1.0); break;
        }
    }
    return w;
}

SimilarityState compute_similarity(const std::vector<TaskDataset>& sources,
                                   const TaskDataset& target, const SimilarityConfig& config,
                                   int t, Rng& rng) {
    const int k = static_cast<int>(sources.size());
    SimilarityState state;
    state.computed_at_t = t;
    state.distances.assign(k, 0.0);

    const bool pairwise = config.measure == SimilarityMeasure::Kendall ||
                          config.measure == SimilarityMeasure::KlDivergence;
    const bool degenerate = target.empty() || (pairwise && target.size() < 2);

    if (!degenerate) {
        for (int i = 0; i < k; ++i) {
            switch (config.measure) {
                case SimilarityMeasure::Kendall:
                    state.distances[i] = distance_kendall(sources[i], target);
                    break;
                case SimilarityMeasure::KlDivergence:
                    state.distances[i] =
                        distance_kl(sources[i], target, sources[i].domain.dim, config, rng);
                    break;
                default: state.distances[i] = distance_points(sources[i], target, config); break;
            }
        }
    }

    state.global_order.resize(k);
    std::iota(state.global_order.begin(), state.global_order.end(), 0);
    std::sort(state.global_order.begin(), state.global_order.end(), [&](int a, int b) {
        if (state.distances[a] != state.distances[b])
            return state.distances[a] < state.distances[b];
        return sources[a].task_id < sources[b].task_id;
    });
    state.global_rank.assign(k, 0);
    for (int r = 0; r < k; ++r) state.global_rank[state.global_order[r]] = r;
    return state;
}

Vec weights_for_subset(const SimilarityState& state, const std::vector<int>& subset,
                       const SimilarityConfig& config) {
    const int n_m = static_cast<int>(subset.size());
    std::vector<int> order(subset.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return state.global_rank[subset[a]] < state.global_rank[subset[b]];
    });
    std::vector<int> local_rank(subset.size());
    for (int r = 0; r < n_m; ++r) local_rank[order[r]] = r;
    return assign_weights(local_rank, n_m, config);
}

}  // namespace mtbo
