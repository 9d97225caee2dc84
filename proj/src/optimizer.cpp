#include "optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "partition.hpp"
#include "surrogate.hpp"

namespace mtbo {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct EvalOutcome {
    bool ok = false;
    double y_max = 0.0;
};

EvalOutcome evaluate_at(const Objective& objective, const SearchDomain& domain,
                        const Vec& x_norm) {
    EvalOutcome out;
    try {
        const double y = objective.fn(denormalize_point(x_norm, domain));
        if (!std::isfinite(y)) return out;
        out.ok = true;
        out.y_max = to_max_sense(y, objective.sense);
    } catch (const std::exception&) {
    }
    return out;
}

std::vector<int> all_task_indices(std::size_t k) {
    std::vector<int> v(k);
    for (std::size_t i = 0; i < k; ++i) v[i] = static_cast<int>(i);
    return v;
}

/// Main optimization loop shared by mcts_transfer (with sources) and
/// la_mcts (without); both must consume the RNG identically so that the
/// zero-source reduction is bitwise.
RunTrace run_tree_loop(const Objective& objective, const SearchDomain& domain,
                       std::vector<TaskDataset> sources, const OptimizerConfig& config,
                       const std::string& method, const IterationObserver& observer) {
    if (config.eval_budget < 1) throw std::invalid_argument("eval_budget must be >= 1");

    for (auto& s : sources) {
        if (s.domain.dim != domain.dim)
            throw std::invalid_argument("source dataset dimension disagrees with domain");
        s.role = TaskRole::Source;
        clamp_to_unit(s);
        // normalized values always back the clustering geometry; the
        // normalize_objectives flag picks which scale the potentials use
        normalize_objectives(s, true);
    }

    RunTrace trace;
    trace.method = method;
    trace.sense = objective.sense;
    trace.seed = config.seed;
    trace.config_json = config_to_json(config);
    for (const auto& s : sources) trace.task_ids.push_back(s.task_id);

    TaskDataset target;
    target.task_id = "target";
    target.role = TaskRole::Target;
    target.domain = domain;

    Rng rng(config.seed);
    PartitionTree tree(&sources, &target,
                       SplitConfig{config.theta, config.cluster_with_objective, config.classifier},
                       config.cp, /*literal_objectives=*/!config.normalize_objectives);
    tree.prelearn(rng);

    SimilarityState sim;
    Vec global_weights;
    const auto all_tasks = all_task_indices(sources.size());

    double inc_max = -std::numeric_limits<double>::infinity();

    for (int t = 1; t <= config.eval_budget; ++t) {
        const auto eval_start = std::chrono::steady_clock::now();

        TreeNode& leaf = tree.select_leaf(config.strict_literal_ucb);
        const int leaf_id = leaf.id;

        Vec cand;
        if (target.empty()) {
            cand = sample_in_region(domain, leaf.path, rng).front();
        } else {
            std::vector<Vec> xs;
            Vec ys;
            if (config.local_gp && !leaf.target_idx.empty()) {
                for (std::uint32_t idx : leaf.target_idx) {
                    xs.push_back(target.samples[idx].x);
                    ys.push_back(target.samples[idx].y_raw);
                }
            } else {
                for (const auto& s : target.samples) {
                    xs.push_back(s.x);
                    ys.push_back(s.y_raw);
                }
            }
            const GpModel model = GpModel::fit(xs, ys);
            const double y_best = *std::max_element(ys.begin(), ys.end());
            cand = propose_candidate(model, domain, leaf.path, y_best, rng);
        }

        EvalOutcome out = evaluate_at(objective, domain, cand);
        if (!out.ok) {
            // retry once with a fresh candidate from the same region
            cand = sample_in_region(domain, leaf.path, rng).front();
            out = evaluate_at(objective, domain, cand);
            if (!out.ok) {
                trace.aborted = true;
                trace.abort_reason = "objective evaluation failed twice at iteration " +
                                     std::to_string(t);
                break;
            }
        }
        target.append(cand, out.y_max);
        const auto new_index = static_cast<std::uint32_t>(target.size() - 1);
        const double t_eval = seconds_since(eval_start);

        // the new sample joins the pools before distances, potentials and
        // the expansion check: the equations range over all of D_T and the
        // node clustering is updated with the fresh point
        const auto update_start = std::chrono::steady_clock::now();
        if (!sources.empty() &&
            (t == 1 || (t - 1) % std::max(config.similarity.recompute_interval, 1) == 0)) {
            sim = compute_similarity(sources, target, config.similarity, t, rng);
            global_weights = weights_for_subset(sim, all_tasks, config.similarity);
        }
        const PotentialContext ctx{TreeStage::Optimize, &sim, &config.similarity, config.gamma, t};
        tree.update_all_potentials(ctx);
        if (auto plan = tree.attempt_split(leaf, TreeStage::Optimize, rng.next_u64()))
            tree.expand(leaf, std::move(*plan), ctx, /*order_children=*/true);
        tree.backpropagate(leaf, new_index);
        const double t_backprop = seconds_since(update_start);

        const auto rebuild_start = std::chrono::steady_clock::now();
        const TreeifyStats stats = tree.treeify(TreeStage::Optimize, ctx, rng);
        const double t_reconstruct = seconds_since(rebuild_start);

        if (out.y_max > inc_max) {
            inc_max = out.y_max;
            trace.best_x = denormalize_point(cand, domain);
        }
        trace.best_y_max = inc_max;
        trace.iterations.push_back(IterationRecord{t, denormalize_point(cand, domain), out.y_max,
                                                   inc_max, leaf_id, global_weights,
                                                   stats.subtrees_deleted, t_eval, t_backprop,
                                                   t_reconstruct});
        if (observer) observer(tree, t);
    }

    trace.tree_snapshot_json = tree.snapshot_json();
    return trace;
}

RunTrace run_region_loop(const Objective& objective, const SearchDomain& domain,
                         const TransferRegion& region, const OptimizerConfig& config,
                         const std::string& method) {
    if (config.eval_budget < 1) throw std::invalid_argument("eval_budget must be >= 1");

    RunTrace trace;
    trace.method = method;
    trace.sense = objective.sense;
    trace.seed = config.seed;
    trace.config_json = config_to_json(config);

    TaskDataset target;
    target.task_id = "target";
    target.role = TaskRole::Target;
    target.domain = domain;

    Rng rng(config.seed);
    const auto membership = [&region](const Vec& x) { return region.violations(x); };
    // plain GP-EI proposes from a single 10,000-point batch; the geometric
    // regions use the same 3-round accumulation as the tree methods
    const int rounds = region.kind == TransferRegion::Kind::Full ? 1 : 3;

    double inc_max = -std::numeric_limits<double>::infinity();

    for (int t = 1; t <= config.eval_budget; ++t) {
        const auto eval_start = std::chrono::steady_clock::now();
        Vec cand;
        if (static_cast<int>(target.size()) < config.init_points) {
            cand = sample_in_membership(domain.dim, membership, rng, rounds).front();
        } else {
            std::vector<Vec> xs;
            Vec ys;
            for (const auto& s : target.samples) {
                xs.push_back(s.x);
                ys.push_back(s.y_raw);
            }
            const GpModel model = GpModel::fit(xs, ys);
            const double y_best = *std::max_element(ys.begin(), ys.end());
            const auto candidates = sample_in_membership(domain.dim, membership, rng, rounds);
            cand = candidates[argmax_ei(model, candidates, y_best)];
        }

        EvalOutcome out = evaluate_at(objective, domain, cand);
        if (!out.ok) {
            cand = sample_in_membership(domain.dim, membership, rng, rounds).front();
            out = evaluate_at(objective, domain, cand);
            if (!out.ok) {
                trace.aborted = true;
                trace.abort_reason = "objective evaluation failed twice at iteration " +
                                     std::to_string(t);
                break;
            }
        }
        target.append(cand, out.y_max);
        const double t_eval = seconds_since(eval_start);

        if (out.y_max > inc_max) {
            inc_max = out.y_max;
            trace.best_x = denormalize_point(cand, domain);
        }
        trace.best_y_max = inc_max;
        trace.iterations.push_back(IterationRecord{t, denormalize_point(cand, domain), out.y_max,
                                                   inc_max, -1, {}, 0, t_eval, 0.0, 0.0});
    }
    return trace;
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::MctsTransfer: return "mcts_transfer";
        case Method::GpEi: return "gp_ei";
        case Method::LaMcts: return "la_mcts";
        case Method::BoxGp: return "box_gp";
        case Method::EllipsoidGp: return "ellipsoid_gp";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "mcts_transfer") return Method::MctsTransfer;
    if (name == "gp_ei") return Method::GpEi;
    if (name == "la_mcts") return Method::LaMcts;
    if (name == "box_gp") return Method::BoxGp;
    if (name == "ellipsoid_gp") return Method::EllipsoidGp;
    throw std::invalid_argument("unknown method: " + name);
}

RunTrace run_mcts_transfer(const Objective& objective, const SearchDomain& domain,
                           std::vector<TaskDataset> sources, const OptimizerConfig& config,
                           const IterationObserver& observer) {
    return run_tree_loop(objective, domain, std::move(sources), config, "mcts_transfer",
                         observer);
}

RunTrace run_la_mcts(const Objective& objective, const SearchDomain& domain,
                     const OptimizerConfig& config, const IterationObserver& observer) {
    return run_tree_loop(objective, domain, {}, config, "la_mcts", observer);
}

RunTrace run_gp_ei(const Objective& objective, const SearchDomain& domain,
                   const OptimizerConfig& config) {
    return run_region_loop(objective, domain, TransferRegion{}, config, "gp_ei");
}

RunTrace run_region_gp_ei(const Objective& objective, const SearchDomain& domain,
                          const TransferRegion& region, const OptimizerConfig& config) {
    const std::string name = region.kind == TransferRegion::Kind::Box          ? "box_gp"
                             : region.kind == TransferRegion::Kind::Ellipsoid ? "ellipsoid_gp"
                                                                              : "gp_ei";
    return run_region_loop(objective, domain, region, config, name);
}

int TransferRegion::violations(const Vec& x) const {
    switch (kind) {
        case Kind::Full: return 0;
        case Kind::Box: {
            int v = 0;
            for (std::size_t d = 0; d < lower.size(); ++d)
                if (x[d] < lower[d] || x[d] > upper[d]) ++v;
            return v;
        }
        case Kind::Ellipsoid: return mahalanobis(x) <= 1.0 + 1e-6 ? 0 : 1;
    }
    return 0;
}

double TransferRegion::mahalanobis(const Vec& x) const {
    const std::size_t d = center.size();
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < d; ++j) row += shape[i * d + j] * (x[j] - center[j]);
        s += (x[i] - center[i]) * row;
    }
    return s;
}

namespace {

/// Gauss-Jordan inverse with partial pivoting; returns false on a pivot
/// below eps.
bool invert(std::vector<double> a, std::size_t n, std::vector<double>& out, double eps = 1e-12) {
    out.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) out[i * n + i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        if (std::fabs(a[piv * n + col]) < eps) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a[piv * n + c], a[col * n + c]);
                std::swap(out[piv * n + c], out[col * n + c]);
            }
        }
        const double inv_p = 1.0 / a[col * n + col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col * n + c] *= inv_p;
            out[col * n + c] *= inv_p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r * n + col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a[r * n + c] -= f * a[col * n + c];
                out[r * n + c] -= f * out[col * n + c];
            }
        }
    }
    return true;
}

}  // namespace

std::pair<Vec, std::vector<double>> minimum_enclosing_ellipsoid(const std::vector<Vec>& points,
                                                                double tolerance) {
    if (points.empty()) throw std::invalid_argument("ellipsoid: need at least one point");
    const std::size_t d = points[0].size();
    const std::size_t m = points.size();
    constexpr double kPad = 1e-3;

    if (m == 1) {
        std::vector<double> shape(d * d, 0.0);
        for (std::size_t i = 0; i < d; ++i) shape[i * d + i] = 1.0 / (kPad * kPad);
        return {points[0], shape};
    }

    // Khachiyan iteration on the lifted points q_j = [p_j; 1]
    const std::size_t dl = d + 1;
    std::vector<double> u(m, 1.0 / static_cast<double>(m));
    std::vector<double> x_mat(dl * dl), x_inv;
    for (int iter = 0; iter < 2000; ++iter) {
        std::fill(x_mat.begin(), x_mat.end(), 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t a = 0; a < dl; ++a) {
                const double qa = a < d ? points[j][a] : 1.0;
                for (std::size_t b = 0; b < dl; ++b) {
                    const double qb = b < d ? points[j][b] : 1.0;
                    x_mat[a * dl + b] += u[j] * qa * qb;
                }
            }
        }
        if (!invert(x_mat, dl, x_inv)) {
            // rank-deficient lift: ridge it and continue
            for (std::size_t i = 0; i < dl; ++i) x_mat[i * dl + i] += 1e-10;
            if (!invert(x_mat, dl, x_inv)) break;
        }
        double kappa = -1.0;
        std::size_t jmax = 0;
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t a = 0; a < dl; ++a) {
                const double qa = a < d ? points[j][a] : 1.0;
                double row = 0.0;
                for (std::size_t b = 0; b < dl; ++b) {
                    const double qb = b < d ? points[j][b] : 1.0;
                    row += x_inv[a * dl + b] * qb;
                }
                s += qa * row;
            }
            if (s > kappa) {
                kappa = s;
                jmax = j;
            }
        }
        if (kappa <= static_cast<double>(dl) * (1.0 + tolerance)) break;
        const double step = (kappa - static_cast<double>(dl)) /
                            (static_cast<double>(dl) * (kappa - 1.0));
        for (auto& w : u) w *= (1.0 - step);
        u[jmax] += step;
    }

    Vec center(d, 0.0);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < d; ++i) center[i] += u[j] * points[j][i];

    std::vector<double> scatter(d * d, 0.0);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                scatter[a * d + b] += u[j] * points[j][a] * points[j][b];
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) scatter[a * d + b] -= center[a] * center[b];

    std::vector<double> s_inv;
    if (!invert(scatter, d, s_inv)) {
        // degenerate rank: pad the axes and invert again
        for (std::size_t i = 0; i < d; ++i) scatter[i * d + i] += kPad * kPad;
        if (!invert(scatter, d, s_inv))
            throw std::runtime_error("ellipsoid: scatter inversion failed");
    }
    std::vector<double> shape(d * d);
    for (std::size_t i = 0; i < d * d; ++i) shape[i] = s_inv[i] / static_cast<double>(d);

    // guarantee the membership inequality for every input
    TransferRegion probe;
    probe.kind = TransferRegion::Kind::Ellipsoid;
    probe.center = center;
    probe.shape = shape;
    double worst = 0.0;
    for (const auto& p : points) worst = std::max(worst, probe.mahalanobis(p));
    if (worst > 1.0)
        for (auto& v : shape) v /= worst;
    return {center, shape};
}

TransferRegion derive_transfer_region(const std::vector<TaskDataset>& sources,
                                      TransferRegion::Kind kind) {
    if (sources.empty()) throw std::invalid_argument("derive_transfer_region: no source tasks");
    std::vector<Vec> optima;
    for (const auto& s : sources) {
        if (s.empty()) throw std::invalid_argument("derive_transfer_region: empty source dataset");
        std::size_t best = 0;
        for (std::size_t i = 1; i < s.size(); ++i)
            if (s.samples[i].y_raw > s.samples[best].y_raw) best = i;
        Vec x = s.samples[best].x;
        for (auto& v : x) v = std::clamp(v, 0.0, 1.0);
        optima.push_back(std::move(x));
    }
    const std::size_t d = optima[0].size();
    constexpr double kPad = 1e-3;

    TransferRegion region;
    region.kind = kind;
    if (kind == TransferRegion::Kind::Box) {
        region.lower.assign(d, std::numeric_limits<double>::infinity());
        region.upper.assign(d, -std::numeric_limits<double>::infinity());
        for (const auto& p : optima) {
            for (std::size_t i = 0; i < d; ++i) {
                region.lower[i] = std::min(region.lower[i], p[i]);
                region.upper[i] = std::max(region.upper[i], p[i]);
            }
        }
        // zero-width axes (single optimum or aligned optima) get padded so
        // the region keeps positive volume
        for (std::size_t i = 0; i < d; ++i) {
            if (region.upper[i] - region.lower[i] < kPad) {
                const double mid = 0.5 * (region.upper[i] + region.lower[i]);
                region.lower[i] = mid - 0.5 * kPad;
                region.upper[i] = mid + 0.5 * kPad;
            }
        }
    } else if (kind == TransferRegion::Kind::Ellipsoid) {
        auto [center, shape] = minimum_enclosing_ellipsoid(optima);
        region.center = std::move(center);
        region.shape = std::move(shape);
    }
    return region;
}

RunTrace run(const Objective& objective, const SearchDomain& domain,
             std::vector<TaskDataset> sources, const OptimizerConfig& config,
             const std::string& problem_name) {
    RunTrace trace;
    switch (config.method) {
        case Method::MctsTransfer:
            trace = run_mcts_transfer(objective, domain, std::move(sources), config);
            break;
        case Method::LaMcts: trace = run_la_mcts(objective, domain, config); break;
        case Method::GpEi: trace = run_gp_ei(objective, domain, config); break;
        case Method::BoxGp:
            trace = run_region_gp_ei(objective, domain,
                                     derive_transfer_region(sources, TransferRegion::Kind::Box),
                                     config);
            break;
        case Method::EllipsoidGp:
            trace = run_region_gp_ei(
                objective, domain,
                derive_transfer_region(sources, TransferRegion::Kind::Ellipsoid), config);
            break;
    }
    trace.problem = problem_name;
    return trace;
}

void write_trace_csv(const RunTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace: " + path);
    const int dim = trace.iterations.empty() ? 0 : static_cast<int>(trace.iterations[0].x.size());
    out << "t";
    for (int d = 0; d < dim; ++d) out << ",x_" << d;
    out << ",y,incumbent,leaf_id,rebuilds,t_eval,t_backprop,t_reconstruct";
    for (const auto& id : trace.task_ids) out << ",w_" << id;
    out << "\n";
    for (const auto& it : trace.iterations) {
        out << it.t;
        for (double v : it.x) out << "," << fmt(v);
        out << "," << fmt(from_max_sense(it.y_max, trace.sense)) << ","
            << fmt(from_max_sense(it.inc_max, trace.sense)) << "," << it.leaf_id << ","
            << it.rebuilds << "," << fmt(it.t_eval) << "," << fmt(it.t_backprop) << ","
            << fmt(it.t_reconstruct);
        for (std::size_t k = 0; k < trace.task_ids.size(); ++k)
            out << "," << fmt(k < it.weights.size() ? it.weights[k] : 0.0);
        out << "\n";
    }
}

void write_trace_json(const RunTrace& trace, const std::string& path) {
    json j;
    j["method"] = trace.method;
    j["problem"] = trace.problem;
    j["sense"] = trace.sense == Sense::Minimize ? "min" : "max";
    j["seed"] = trace.seed;
    j["task_ids"] = trace.task_ids;
    j["config"] = json::parse(trace.config_json);
    j["aborted"] = trace.aborted;
    if (trace.aborted) j["abort_reason"] = trace.abort_reason;
    j["iterations"] = trace.iterations.size();
    j["best_x"] = trace.best_x;
    j["best_y"] = trace.best_y_original();
    double te = 0.0, tb = 0.0, tr = 0.0;
    int rebuilds = 0;
    for (const auto& it : trace.iterations) {
        te += it.t_eval;
        tb += it.t_backprop;
        tr += it.t_reconstruct;
        rebuilds += it.rebuilds;
    }
    j["timings"] = {{"evaluation", te}, {"backpropagation", tb}, {"reconstruction", tr}};
    j["total_rebuilds"] = rebuilds;
    j["tree"] = trace.tree_snapshot_json.empty() ? json(nullptr)
                                                 : json::parse(trace.tree_snapshot_json);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace sidecar: " + path);
    out << j.dump(2) << "\n";
}

std::string config_to_json(const OptimizerConfig& c) {
    const char* measure = nullptr;
    switch (c.similarity.measure) {
        case SimilarityMeasure::BestNMean: measure = "best_n_mean"; break;
        case SimilarityMeasure::OptimalPoint: measure = "optimal_point"; break;
        case SimilarityMeasure::BestNPercent: measure = "best_n_percent"; break;
        case SimilarityMeasure::Kendall: measure = "kendall"; break;
        case SimilarityMeasure::KlDivergence: measure = "kl_divergence"; break;
    }
    const char* strategy = nullptr;
    switch (c.similarity.strategy) {
        case WeightStrategy::Linear: strategy = "linear"; break;
        case WeightStrategy::Exponential: strategy = "exponential"; break;
        case WeightStrategy::AllOne: strategy = "all_one"; break;
    }
    json j = {{"method", method_name(c.method)},
              {"gamma", c.gamma},
              {"cp", c.cp},
              {"theta", c.theta},
              {"eval_budget", c.eval_budget},
              {"seed", c.seed},
              {"normalize_objectives", c.normalize_objectives},
              {"cluster_with_objective", c.cluster_with_objective},
              {"classifier", c.classifier == ClassifierKind::LogisticRegression
                                 ? "logistic_regression"
                                 : "linear_svm"},
              {"local_gp", c.local_gp},
              {"strict_literal_ucb", c.strict_literal_ucb},
              {"init_points", c.init_points},
              {"similarity",
               {{"measure", measure},
                {"n", c.similarity.n},
                {"percent", c.similarity.percent},
                {"strategy", strategy},
                {"alpha", c.similarity.alpha},
                {"beta", c.similarity.beta},
                {"kl_mc_samples", c.similarity.kl_mc_samples},
                {"recompute_interval", c.similarity.recompute_interval}}}};
    return j.dump();
}

}  // namespace mtbo
