#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rng.hpp"
#include "similarity.hpp"

using namespace mtbo;

namespace {

TaskDataset dataset_from(const std::vector<Vec>& xs, const Vec& ys, const std::string& id = "t") {
    TaskDataset ds;
    ds.task_id = id;
    ds.domain = SearchDomain(Vec(xs[0].size(), 0.0), Vec(xs[0].size(), 1.0));
    for (std::size_t i = 0; i < xs.size(); ++i) ds.samples.push_back({xs[i], ys[i], 0.0});
    normalize_objectives(ds);
    return ds;
}

}  // namespace

TEST_CASE("best_n_mean basics") {
    SUBCASE("single sample returns its x") {
        const auto ds = dataset_from({{0.3, 0.4}}, {1.0});
        CHECK(best_n_mean(ds, 5) == Vec{0.3, 0.4});
    }
    SUBCASE("top-2 mean") {
        const auto ds = dataset_from({{0.0, 0.0}, {1.0, 1.0}, {0.5, 0.0}}, {10.0, 9.0, 1.0});
        const Vec m = best_n_mean(ds, 2);
        CHECK(m[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(m[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("N larger than the dataset uses every sample") {
        const auto ds = dataset_from({{0.0}, {0.5}, {1.0}}, {3.0, 2.0, 1.0});
        CHECK(best_n_mean(ds, 5)[0] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("ties broken by insertion order") {
        const auto ds = dataset_from({{0.0}, {1.0}, {0.4}}, {2.0, 2.0, 2.0});
        CHECK(best_n_mean(ds, 1)[0] == 0.0);
    }
}

TEST_CASE("distance_points") {
    SimilarityConfig cfg;

    SUBCASE("identical datasets have distance zero") {
        const auto a = dataset_from({{0.1, 0.9}, {0.4, 0.2}}, {1.0, 2.0});
        CHECK(distance_points(a, a, cfg) == 0.0);
    }
    SUBCASE("3-4-5 triangle") {
        // best means at (0,0) and (0.3,0.4) -> distance 0.5
        const auto a = dataset_from({{0.0, 0.0}}, {1.0});
        const auto b = dataset_from({{0.3, 0.4}}, {1.0});
        CHECK(distance_points(a, b, cfg) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("symmetry") {
        Rng rng(5);
        std::vector<Vec> xa, xb;
        Vec ya, yb;
        for (int i = 0; i < 20; ++i) {
            xa.push_back({rng.uniform(), rng.uniform()});
            ya.push_back(rng.uniform());
            xb.push_back({rng.uniform(), rng.uniform()});
            yb.push_back(rng.uniform());
        }
        const auto a = dataset_from(xa, ya);
        const auto b = dataset_from(xb, yb);
        CHECK(distance_points(a, b, cfg) ==
              doctest::Approx(distance_points(b, a, cfg)).epsilon(1e-15));
    }
    SUBCASE("optimal_point uses the single best sample") {
        cfg.measure = SimilarityMeasure::OptimalPoint;
        const auto a = dataset_from({{0.9, 0.9}, {0.2, 0.2}}, {0.0, 5.0});
        const auto b = dataset_from({{0.2, 0.2}}, {1.0});
        CHECK(distance_points(a, b, cfg) == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("best_n_percent uses ceil(percent * size) per dataset") {
        cfg.measure = SimilarityMeasure::BestNPercent;
        cfg.percent = 0.5;
        // 3 samples -> ceil(1.5) = 2 best
        const auto a = dataset_from({{0.0}, {1.0}, {0.2}}, {5.0, 4.0, 0.0});
        const auto b = dataset_from({{0.5}}, {1.0});
        CHECK(distance_points(a, b, cfg) == doctest::Approx(0.0).epsilon(1e-15));
    }
}

TEST_CASE("kendall concordance core") {
    SUBCASE("perfect predictions give distance 0") {
        CHECK(kendall_distance_from_predictions({1, 2, 3, 4}, {10, 20, 30, 40}) == 0.0);
    }
    SUBCASE("inverted predictions give distance 1") {
        CHECK(kendall_distance_from_predictions({4, 3, 2, 1}, {10, 20, 30, 40}) == 1.0);
    }
    SUBCASE("random predictions hover around 0.5") {
        Rng rng(101);
        double total = 0.0;
        const int trials = 40;
        for (int t = 0; t < trials; ++t) {
            Vec preds(100), ys(100);
            for (int i = 0; i < 100; ++i) {
                preds[i] = rng.uniform();
                ys[i] = rng.uniform();
            }
            total += kendall_distance_from_predictions(preds, ys);
        }
        const double mean = total / trials;
        CHECK(mean > 0.35);
        CHECK(mean < 0.65);
    }
}

TEST_CASE("distance_kendall through the GP surrogate") {
    // source = dense samples of a smooth 1-D function; target points from the
    // same function rank identically -> small distance; negated -> large
    std::vector<Vec> xs;
    Vec ys, ys_neg;
    for (int i = 0; i < 25; ++i) {
        const double t = static_cast<double>(i) / 24.0;
        xs.push_back({t});
        ys.push_back(std::sin(1.5 * t));
        ys_neg.push_back(-std::sin(1.5 * t));
    }
    const auto source = dataset_from(xs, ys, "src");
    std::vector<Vec> tx;
    Vec ty, ty_neg;
    for (int i = 0; i < 10; ++i) {
        const double t = 0.05 + static_cast<double>(i) / 11.0;
        tx.push_back({t});
        ty.push_back(std::sin(1.5 * t));
        ty_neg.push_back(-std::sin(1.5 * t));
    }
    const auto target_same = dataset_from(tx, ty, "tgt");
    const auto target_neg = dataset_from(tx, ty_neg, "tgt");
    const double d_same = distance_kendall(source, target_same);
    const double d_neg = distance_kendall(source, target_neg);
    CHECK(d_same < 0.2);
    CHECK(d_neg > 0.8);
}

TEST_CASE("KL divergence between sample sets") {
    SimilarityConfig cfg;
    Rng data_rng(7);

    SUBCASE("identical datasets give |KL| < 1e-6") {
        std::vector<Vec> xs;
        Vec ys;
        for (int i = 0; i < 30; ++i) {
            xs.push_back({data_rng.uniform(), data_rng.uniform()});
            ys.push_back(data_rng.uniform());
        }
        const auto a = dataset_from(xs, ys);
        Rng rng(1);
        CHECK(std::fabs(distance_kl(a, a, 2, cfg, rng)) < 1e-6);
    }
    SUBCASE("disjoint corner clusters give KL > 1") {
        std::vector<Vec> xa, xb;
        Vec ya, yb;
        for (int i = 0; i < 30; ++i) {
            xa.push_back({0.05 + 0.05 * data_rng.uniform(), 0.05 + 0.05 * data_rng.uniform()});
            ya.push_back(data_rng.uniform());
            xb.push_back({0.9 + 0.05 * data_rng.uniform(), 0.9 + 0.05 * data_rng.uniform()});
            yb.push_back(data_rng.uniform());
        }
        const auto a = dataset_from(xa, ya);
        const auto b = dataset_from(xb, yb);
        Rng rng(2);
        CHECK(distance_kl(a, b, 2, cfg, rng) > 1.0);
    }
    SUBCASE("KL is never negative") {
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<Vec> xa, xb;
            Vec ya, yb;
            const int na = 5 + static_cast<int>(data_rng.index(20));
            const int nb = 5 + static_cast<int>(data_rng.index(20));
            for (int i = 0; i < na; ++i) {
                xa.push_back({data_rng.uniform(), data_rng.uniform()});
                ya.push_back(data_rng.uniform());
            }
            for (int i = 0; i < nb; ++i) {
                xb.push_back({data_rng.uniform(), data_rng.uniform()});
                yb.push_back(data_rng.uniform());
            }
            const auto a = dataset_from(xa, ya);
            const auto b = dataset_from(xb, yb);
            Rng rng(static_cast<std::uint64_t>(trial));
            CHECK(distance_kl(b, a, 2, cfg, rng) >= 0.0);
        }
    }
}

TEST_CASE("assign_weights strategies") {
    SimilarityConfig cfg;

    SUBCASE("linear, alpha 0.5, N_m 10") {
        cfg.strategy = WeightStrategy::Linear;
        cfg.alpha = 0.5;
        const Vec w = assign_weights({0, 2, 5}, 10, cfg);
        CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(w[1] == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(w[2] == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("exponential, beta 0.5") {
        cfg.strategy = WeightStrategy::Exponential;
        cfg.beta = 0.5;
        const Vec w = assign_weights({0, 2}, 3, cfg);
        CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(w[1] == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("all-one") {
        cfg.strategy = WeightStrategy::AllOne;
        for (double w : assign_weights({0, 1, 2, 3}, 4, cfg)) CHECK(w == 1.0);
    }
    SUBCASE("empty when no contributing tasks") { CHECK(assign_weights({}, 0, cfg).empty()); }
    SUBCASE("weights stay within range and non-increasing in rank") {
        for (auto strategy : {WeightStrategy::Linear, WeightStrategy::Exponential}) {
            cfg.strategy = strategy;
            for (int n_m = 1; n_m <= 25; ++n_m) {
                std::vector<int> ranks(n_m);
                for (int r = 0; r < n_m; ++r) ranks[r] = r;
                const Vec w = assign_weights(ranks, n_m, cfg);
                double prev = 2.0;
                for (double v : w) {
                    CHECK(v <= 1.0);
                    CHECK(v > 0.0);
                    if (strategy == WeightStrategy::Linear) CHECK(v >= 0.1);
                    CHECK(v <= prev + 1e-15);
                    prev = v;
                }
            }
        }
    }
}

TEST_CASE("compute_similarity ranks ascending with rank invariance") {
    SimilarityConfig cfg;
    const auto t1 = dataset_from({{0.1, 0.1}}, {1.0}, "near");
    const auto t2 = dataset_from({{0.5, 0.5}}, {1.0}, "mid");
    const auto t3 = dataset_from({{0.9, 0.9}}, {1.0}, "far");
    const auto target = dataset_from({{0.12, 0.12}}, {1.0}, "target");
    Rng rng(0);
    const auto state = compute_similarity({t1, t2, t3}, target, cfg, 1, rng);
    CHECK(state.global_order == std::vector<int>{0, 1, 2});
    CHECK(state.global_rank == std::vector<int>{0, 1, 2});
    CHECK(state.distances[0] < state.distances[1]);
    CHECK(state.distances[1] < state.distances[2]);

    // the ordering depends only on comparisons, so any strictly increasing
    // transform of the distances (here squaring, all positive) preserves it
    std::vector<int> order(state.distances.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return state.distances[a] * state.distances[a] <
               state.distances[b] * state.distances[b];
    });
    CHECK(order == state.global_order);
}

TEST_CASE("empty target gives uniform ranks by task id") {
    SimilarityConfig cfg;
    const auto t1 = dataset_from({{0.1}}, {1.0}, "b_task");
    const auto t2 = dataset_from({{0.9}}, {1.0}, "a_task");
    TaskDataset target;
    target.domain = SearchDomain({0.0}, {1.0});
    Rng rng(0);
    const auto state = compute_similarity({t1, t2}, target, cfg, 0, rng);
    CHECK(state.distances[0] == state.distances[1]);
    // ties broken by task id: "a_task" (index 1) sorts first
    CHECK(state.global_order == std::vector<int>{1, 0});
}

TEST_CASE("weights_for_subset densely re-ranks contributing tasks") {
    SimilarityConfig cfg;  // linear, alpha 0.5
    SimilarityState state;
    state.distances = {0.3, 0.1, 0.9, 0.5};
    state.global_order = {1, 0, 3, 2};
    state.global_rank = {1, 0, 3, 2};

    // subset {0, 2}: local ranks collapse to {0, 1}, N_m = 2
    const Vec w = weights_for_subset(state, {0, 2}, cfg);
    // alpha * N_m = 1 -> r=0 gets 1.0, r=1 falls to the 0.1 floor
    CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(0.1).epsilon(1e-12));

    // the full set reproduces the global ranks
    const Vec wall = weights_for_subset(state, {0, 1, 2, 3}, cfg);
    CHECK(wall[1] == doctest::Approx(1.0).epsilon(1e-12));  // rank 0
    CHECK(wall[0] == doctest::Approx(0.5).epsilon(1e-12));  // rank 1: 1 - 1/2
    CHECK(wall[3] == doctest::Approx(0.1).epsilon(1e-12));  // rank 2 >= alpha N
    CHECK(wall[2] == doctest::Approx(0.1).epsilon(1e-12));  // rank 3
}
