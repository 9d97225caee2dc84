#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bench.hpp"
#include "optimizer.hpp"
#include "rng.hpp"

using namespace mtbo;

namespace {

OptimizerConfig small_config(Method method, int budget, std::uint64_t seed) {
    OptimizerConfig cfg;
    cfg.method = method;
    cfg.eval_budget = budget;
    cfg.seed = seed;
    return cfg;
}

bool incumbent_monotone(const RunTrace& trace) {
    double inc = -std::numeric_limits<double>::infinity();
    for (const auto& it : trace.iterations) {
        if (it.inc_max < inc) return false;
        inc = it.inc_max;
        if (it.y_max > inc + 1e-15) return false;  // incumbent must cover y
    }
    return true;
}

bool traces_equal_xy(const RunTrace& a, const RunTrace& b) {
    if (a.iterations.size() != b.iterations.size()) return false;
    for (std::size_t i = 0; i < a.iterations.size(); ++i) {
        if (a.iterations[i].x != b.iterations[i].x) return false;
        if (a.iterations[i].y_max != b.iterations[i].y_max) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("budget-1 run with no sources takes one uniform sample") {
    const SearchDomain d({-10.0, -10.0}, {10.0, 10.0});
    const auto p = make_sphere({4.0, 4.0}, d);
    const RunTrace trace =
        run_mcts_transfer(p.objective(), d, {}, small_config(Method::MctsTransfer, 1, 7));
    CHECK(trace.iterations.size() == 1);
    CHECK_FALSE(trace.aborted);
    CHECK(trace.iterations[0].leaf_id == 0);  // root
}

TEST_CASE("gamma = 0 kills the source term after the first iteration") {
    const SearchDomain d({-10.0, -10.0}, {10.0, 10.0});
    const auto target = make_sphere({4.0, 4.0}, d);
    // concentrated hill-climb data so pre-learning produces a real split
    const TaskDataset source = generate_source_data(make_sphere({5.0, 5.0}, d),
                                                    Sampler::HillClimb, 60, 1, "s55");

    OptimizerConfig cfg = small_config(Method::MctsTransfer, 5, 5);
    cfg.gamma = 0.0;

    // 0^{t-1} = 0 for t >= 2, so every node potential is its target term
    // alone; nodes without target samples must sit at exactly 0. At t = 1
    // the source term is still alive because 0^0 = 1.
    bool source_term_gone = true;
    bool alive_at_t1 = false;
    bool tree_split = false;
    const RunTrace trace = run_mcts_transfer(
        target.objective(), d, {source}, cfg, [&](const PartitionTree& tree, int t) {
            if (t == 1) tree_split = tree.node_count() > 1;
            tree.for_each([&](const TreeNode& node) {
                if (t >= 2 && node.target_idx.empty() && node.potential != 0.0)
                    source_term_gone = false;
                if (t == 1 && node.target_idx.empty() && node.potential != 0.0)
                    alive_at_t1 = true;
            });
        });
    REQUIRE(trace.iterations.size() == 5);
    REQUIRE(tree_split);
    CHECK(source_term_gone);
    CHECK(alive_at_t1);
}

TEST_CASE("gp_ei is deterministic, improves on a 1-D-style quadratic, monotone") {
    const SearchDomain d({-10.0, -10.0}, {10.0, 10.0});
    const auto p = make_sphere({2.0, -3.0}, d);
    const OptimizerConfig cfg = small_config(Method::GpEi, 30, 11);

    const RunTrace a = run_gp_ei(p.objective(), d, cfg);
    const RunTrace b = run_gp_ei(p.objective(), d, cfg);
    CHECK(traces_equal_xy(a, b));
    CHECK(incumbent_monotone(a));

    // after 30 evaluations the incumbent must beat the initial random design
    const double init_best = a.iterations[cfg.init_points - 1].inc_max;
    CHECK(a.best_y_max > init_best);
    // and land reasonably close to the optimum (regret < 1 on a sphere)
    CHECK(-a.best_y_max < 1.0);
}

TEST_CASE("la_mcts reduces bitwise to mcts_transfer without sources") {
    const SearchDomain d({-5.0, -5.0}, {5.0, 5.0});
    const auto p = make_standard("rastrigin", 2, Vec(2, 0.0));
    const OptimizerConfig cfg = small_config(Method::LaMcts, 50, 3);

    const RunTrace a = run_la_mcts(p.objective(), d, cfg);
    const RunTrace b = run_mcts_transfer(p.objective(), d, {}, cfg);
    CHECK(traces_equal_xy(a, b));
    CHECK(a.method == "la_mcts");
    CHECK(b.method == "mcts_transfer");
    CHECK(incumbent_monotone(a));

    // the tree only grows once a leaf holds more than theta target samples
    bool grew_early = false;
    run_la_mcts(p.objective(), d, cfg, [&](const PartitionTree& tree, int t) {
        if (t <= cfg.theta && tree.node_count() > 1) grew_early = true;
    });
    CHECK_FALSE(grew_early);
}

TEST_CASE("mcts_transfer on the mixed sphere setting identifies the similar task") {
    const SearchDomain d({-10.0, -10.0}, {10.0, 10.0});
    const auto target = make_sphere({4.0, 4.0}, d);
    std::vector<TaskDataset> sources;
    sources.push_back(generate_source_data(make_sphere({5.0, 5.0}, d), Sampler::HillClimb, 100,
                                           21, "d_55"));
    sources.push_back(generate_source_data(make_sphere({5.0, -5.0}, d), Sampler::HillClimb, 100,
                                           22, "d_5m5"));
    sources.push_back(generate_source_data(make_sphere({-5.0, -5.0}, d), Sampler::HillClimb, 100,
                                           23, "d_m5m5"));

    const OptimizerConfig cfg = small_config(Method::MctsTransfer, 50, 1);
    const RunTrace trace = run_mcts_transfer(target.objective(), d, sources, cfg);
    REQUIRE(trace.iterations.size() == 50);
    CHECK(incumbent_monotone(trace));

    // after 50 evaluations the (5,5) task must rank closer than (-5,-5):
    // its weight in the last iteration must be at least as large
    const auto& last = trace.iterations.back();
    REQUIRE(last.weights.size() == 3);
    CHECK(last.weights[0] > last.weights[2]);

    // weight invariants for the linear strategy
    for (const auto& it : trace.iterations)
        for (double w : it.weights) {
            CHECK(w >= 0.1);
            CHECK(w <= 1.0);
        }

    // every evaluated point inside the domain box
    for (const auto& it : trace.iterations)
        for (int c = 0; c < 2; ++c) {
            CHECK(it.x[c] >= d.lower[c]);
            CHECK(it.x[c] <= d.upper[c]);
        }
}

TEST_CASE("evaluation failure is retried once, then aborts with a partial trace") {
    const SearchDomain d({0.0, 0.0}, {1.0, 1.0});

    SUBCASE("always-failing objective aborts at t=1") {
        Objective bad;
        bad.sense = Sense::Minimize;
        bad.fn = [](const Vec&) { return std::nan(""); };
        const RunTrace trace = run_gp_ei(bad, d, small_config(Method::GpEi, 10, 1));
        CHECK(trace.aborted);
        CHECK(trace.iterations.empty());
        CHECK(trace.abort_reason.find("iteration 1") != std::string::npos);
    }
    SUBCASE("single failure recovers via the fresh candidate") {
        int calls = 0;
        Objective flaky;
        flaky.sense = Sense::Minimize;
        flaky.fn = [&calls](const Vec& x) {
            ++calls;
            if (calls == 3) return std::nan("");
            return x[0] * x[0] + x[1] * x[1];
        };
        const RunTrace trace = run_gp_ei(flaky, d, small_config(Method::GpEi, 8, 1));
        CHECK_FALSE(trace.aborted);
        CHECK(trace.iterations.size() == 8);
    }
}

TEST_CASE("transfer regions: box and ellipsoid geometry") {
    const SearchDomain d({-10.0, -10.0}, {10.0, 10.0});

    SUBCASE("box = componentwise extrema of the per-task optima") {
        TaskDataset a, b;
        a.task_id = "a";
        a.domain = d;
        a.samples = {{{0.0, 0.0}, 5.0, 0.0}, {{0.6, 0.6}, 1.0, 0.0}};
        b.task_id = "b";
        b.domain = d;
        b.samples = {{{1.0, 1.0}, 9.0, 0.0}};
        const auto region = derive_transfer_region({a, b}, TransferRegion::Kind::Box);
        CHECK(region.lower == Vec{0.0, 0.0});
        CHECK(region.upper == Vec{1.0, 1.0});
        CHECK(region.contains({0.5, 0.5}));
    }

    SUBCASE("single optimum pads the box") {
        TaskDataset a;
        a.task_id = "a";
        a.domain = d;
        a.samples = {{{0.5, 0.5}, 1.0, 0.0}};
        const auto region = derive_transfer_region({a}, TransferRegion::Kind::Box);
        CHECK(region.upper[0] - region.lower[0] == doctest::Approx(1e-3).epsilon(1e-9));
        CHECK(region.contains({0.5, 0.5}));
    }

    SUBCASE("ellipsoid contains all optima within tolerance") {
        TaskDataset t1, t2, t3;
        for (auto* t : {&t1, &t2, &t3}) t->domain = d;
        t1.samples = {{{0.0, 0.0}, 1.0, 0.0}};
        t2.samples = {{{0.2, 0.0}, 1.0, 0.0}};
        t3.samples = {{{0.0, 0.2}, 1.0, 0.0}};
        const auto region = derive_transfer_region({t1, t2, t3}, TransferRegion::Kind::Ellipsoid);
        for (const Vec& p : {Vec{0.0, 0.0}, Vec{0.2, 0.0}, Vec{0.0, 0.2}})
            CHECK(region.mahalanobis(p) <= 1.0 + 1e-6);
    }

    SUBCASE("minimum enclosing ellipsoid on random point sets") {
        Rng rng(99);
        for (int trial = 0; trial < 50; ++trial) {
            const int dim = 2 + static_cast<int>(rng.index(4));       // 2..5
            const int m = 1 + static_cast<int>(rng.index(10));        // 1..10
            std::vector<Vec> pts;
            for (int i = 0; i < m; ++i) {
                Vec x(dim);
                for (auto& v : x) v = rng.uniform();
                pts.push_back(std::move(x));
            }
            const auto [centre, shape] = minimum_enclosing_ellipsoid(pts);
            TransferRegion probe;
            probe.kind = TransferRegion::Kind::Ellipsoid;
            probe.center = centre;
            probe.shape = shape;
            for (const auto& p : pts) CHECK(probe.mahalanobis(p) <= 1.0 + 1e-6);
        }
    }
}

TEST_CASE("region-restricted GP-EI honors membership and reduces to gp_ei") {
    const SearchDomain d({-10.0, -10.0}, {10.0, 10.0});
    const auto p = make_sphere({4.0, 4.0}, d);
    const OptimizerConfig cfg = small_config(Method::GpEi, 12, 5);

    SUBCASE("full region reduces to gp_ei bitwise") {
        TransferRegion full;  // Kind::Full
        const RunTrace a = run_region_gp_ei(p.objective(), d, full, cfg);
        const RunTrace b = run_gp_ei(p.objective(), d, cfg);
        CHECK(traces_equal_xy(a, b));
    }

    SUBCASE("box region constrains every proposal") {
        TransferRegion box;
        box.kind = TransferRegion::Kind::Box;
        box.lower = {0.2, 0.2};
        box.upper = {0.5, 0.5};
        const RunTrace trace = run_region_gp_ei(p.objective(), d, box, cfg);
        for (const auto& it : trace.iterations) {
            const Vec z = normalize_point(it.x, d);
            for (int c = 0; c < 2; ++c) {
                CHECK(z[c] >= 0.2 - 1e-12);
                CHECK(z[c] <= 0.5 + 1e-12);
            }
        }
    }
}

TEST_CASE("trace CSV and JSON sidecar round out the run record") {
    namespace fs = std::filesystem;
    const SearchDomain d({-10.0, -10.0}, {10.0, 10.0});
    const auto target = make_sphere({4.0, 4.0}, d);
    const TaskDataset source =
        generate_source_data(make_sphere({5.0, 5.0}, d), Sampler::Random, 30, 2, "d_55");
    OptimizerConfig cfg = small_config(Method::MctsTransfer, 6, 9);
    RunTrace trace = run_mcts_transfer(target.objective(), d, {source}, cfg);
    trace.problem = "sphere_test";

    const auto csv_path = (fs::temp_directory_path() / "mtbo_trace.csv").string();
    const auto json_path = (fs::temp_directory_path() / "mtbo_trace.json").string();
    write_trace_csv(trace, csv_path);
    write_trace_json(trace, json_path);

    std::ifstream csv(csv_path);
    std::string header;
    std::getline(csv, header);
    CHECK(header ==
          "t,x_0,x_1,y,incumbent,leaf_id,rebuilds,t_eval,t_backprop,t_reconstruct,w_d_55");
    int rows = 0;
    std::string line;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 6);

    std::ifstream js(json_path);
    std::string all((std::istreambuf_iterator<char>(js)), std::istreambuf_iterator<char>());
    CHECK(all.find("\"tree\"") != std::string::npos);
    CHECK(all.find("\"timings\"") != std::string::npos);
    CHECK(all.find("\"evaluation\"") != std::string::npos);
    CHECK(all.find("mcts_transfer") != std::string::npos);
    fs::remove(csv_path);
    fs::remove(json_path);
}

TEST_CASE("determinism: identical config and seed reproduce the trace exactly") {
    const SearchDomain d({-10.0, -10.0}, {10.0, 10.0});
    const auto target = make_sphere({4.0, 4.0}, d);
    const TaskDataset source =
        generate_source_data(make_sphere({5.0, 5.0}, d), Sampler::Random, 40, 3, "d_55");
    const OptimizerConfig cfg = small_config(Method::MctsTransfer, 15, 4);
    const RunTrace a = run_mcts_transfer(target.objective(), d, {source}, cfg);
    const RunTrace b = run_mcts_transfer(target.objective(), d, {source}, cfg);
    CHECK(traces_equal_xy(a, b));
    REQUIRE(a.iterations.size() == b.iterations.size());
    for (std::size_t i = 0; i < a.iterations.size(); ++i) {
        CHECK(a.iterations[i].weights == b.iterations[i].weights);
        CHECK(a.iterations[i].leaf_id == b.iterations[i].leaf_id);
    }
}
