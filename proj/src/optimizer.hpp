#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core.hpp"
#include "similarity.hpp"
#include "tree.hpp"

namespace mtbo {

enum class Method { MctsTransfer, GpEi, LaMcts, BoxGp, EllipsoidGp };

std::string method_name(Method m);
Method parse_method(const std::string& name);

/// Objective in original coordinates and original sense; the run loop
/// negates minimization problems internally so larger is always better.
struct Objective {
    std::function<double(const Vec&)> fn;
    Sense sense = Sense::Minimize;
};

struct OptimizerConfig {
    Method method = Method::MctsTransfer;
    double gamma = 0.99;
    double cp = 0.1;
    int theta = 10;
    SimilarityConfig similarity;
    int eval_budget = 100;
    std::uint64_t seed = 0;
    bool normalize_objectives = true;
    bool cluster_with_objective = true;
    ClassifierKind classifier = ClassifierKind::LogisticRegression;
    bool local_gp = false;            // fit on the leaf pool instead of all of D_T
    bool strict_literal_ucb = false;  // score p_m / n_m instead of p_m in the UCB
    int init_points = 5;              // initial design for gp_ei-family methods
};

struct IterationRecord {
    int t = 0;
    Vec x;                   // original coordinates
    double y_max = 0.0;      // maximization sense
    double inc_max = 0.0;    // best so far, maximization sense
    int leaf_id = -1;        // -1 for non-tree methods
    Vec weights;             // global per-task weights this iteration
    int rebuilds = 0;        // subtrees deleted by reconstruction
    double t_eval = 0.0, t_backprop = 0.0, t_reconstruct = 0.0;  // seconds
};

struct RunTrace {
    std::string method;
    std::string problem;
    Sense sense = Sense::Minimize;
    std::uint64_t seed = 0;
    std::vector<std::string> task_ids;
    std::vector<IterationRecord> iterations;
    Vec best_x;  // original coordinates
    double best_y_max = 0.0;
    bool aborted = false;
    std::string abort_reason;
    std::string tree_snapshot_json;  // empty for non-tree methods
    std::string config_json;

    double best_y_original() const { return from_max_sense(best_y_max, sense); }
};

/// Test/diagnostic hook called at the end of every completed iteration.
using IterationObserver = std::function<void(PartitionTree&, int t)>;

RunTrace run_mcts_transfer(const Objective& objective, const SearchDomain& domain,
                           std::vector<TaskDataset> sources, const OptimizerConfig& config,
                           const IterationObserver& observer = {});

/// Identical loop with no source data: root-only start, target-only
/// potentials. Reduces bitwise to run_mcts_transfer with zero source tasks.
RunTrace run_la_mcts(const Objective& objective, const SearchDomain& domain,
                     const OptimizerConfig& config, const IterationObserver& observer = {});

RunTrace run_gp_ei(const Objective& objective, const SearchDomain& domain,
                   const OptimizerConfig& config);

/// Geometric search-space transfer: the smallest box or ellipsoid around the
/// per-task best points (normalized coordinates). Membership is closed-form;
/// degenerate point sets get a 1e-3 axis padding.
struct TransferRegion {
    enum class Kind { Full, Box, Ellipsoid };
    Kind kind = Kind::Full;
    Vec lower, upper;        // box
    Vec center;              // ellipsoid
    std::vector<double> shape;  // ellipsoid matrix A, row-major dim x dim

    bool contains(const Vec& x) const { return violations(x) == 0; }
    int violations(const Vec& x) const;
    /// (x-c)^T A (x-c) for ellipsoids.
    double mahalanobis(const Vec& x) const;
};

TransferRegion derive_transfer_region(const std::vector<TaskDataset>& sources,
                                      TransferRegion::Kind kind);

RunTrace run_region_gp_ei(const Objective& objective, const SearchDomain& domain,
                          const TransferRegion& region, const OptimizerConfig& config);

/// Dispatch on config.method; sources are ignored by gp_ei and la_mcts.
RunTrace run(const Objective& objective, const SearchDomain& domain,
             std::vector<TaskDataset> sources, const OptimizerConfig& config,
             const std::string& problem_name = "");

// Trace persistence: CSV with one row per iteration plus a JSON sidecar
// carrying the config echo, the final tree snapshot and timing totals.
void write_trace_csv(const RunTrace& trace, const std::string& path);
void write_trace_json(const RunTrace& trace, const std::string& path);
std::string config_to_json(const OptimizerConfig& config);

/// Minimum-volume enclosing ellipsoid (Khachiyan iteration, tolerance 1e-6)
/// of a point set; returns (center, shape matrix A) with membership
/// (x-c)^T A (x-c) <= 1 for every input within 1e-6.
std::pair<Vec, std::vector<double>> minimum_enclosing_ellipsoid(const std::vector<Vec>& points,
                                                                double tolerance = 1e-6);

}  // namespace mtbo
