#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "partition.hpp"
#include "rng.hpp"
#include "similarity.hpp"

namespace mtbo {

enum class TreeStage { Prelearn, Optimize };

struct TreeNode {
    int id = 0;
    TreeNode* parent = nullptr;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;
    std::optional<Classifier> classifier;  // present iff internal
    RegionPath path;
    RegionSide side_in_parent = RegionSide::Good;
    std::vector<std::vector<std::uint32_t>> source_idx;  // per source task
    std::vector<std::uint32_t> target_idx;
    int n_visits = 0;  // contained samples, source + target
    double potential = 0.0;

    bool is_leaf() const { return !classifier.has_value(); }
    int depth() const { return static_cast<int>(path.depth()); }
    std::size_t source_count() const {
        std::size_t n = 0;
        for (const auto& pool : source_idx) n += pool.size();
        return n;
    }
    std::size_t total_count() const { return source_count() + target_idx.size(); }
};

/// Inputs to the per-node potential: pre-learning uses the pooled source
/// mean; the optimizing stage uses the decayed, weighted source means plus
/// the target mean, with weights re-ranked per node from the global order.
struct PotentialContext {
    TreeStage stage = TreeStage::Prelearn;
    const SimilarityState* similarity = nullptr;
    const SimilarityConfig* config = nullptr;
    double gamma = 0.99;
    int t = 0;  // completed target evaluations
};

struct SplitConfig {
    int theta = 10;
    bool cluster_with_objective = true;  // k-means features are (x, y_norm)
    ClassifierKind classifier = ClassifierKind::LogisticRegression;
};

struct SplitPlan {
    Classifier classifier;
    std::vector<std::vector<std::uint32_t>> src_good, src_bad;
    std::vector<std::uint32_t> tgt_good, tgt_bad;
};

struct TreeifyStats {
    int subtrees_deleted = 0;
    int nodes_expanded = 0;
};

/// The optimizing-stage potential in closed form:
/// gamma^{t-1} * (sum_i w_i ybar_i) / (sum_i w_i) + target_mean,
/// with the source fraction taken as 0 when no task contributes.
double potential_formula(double gamma, int t, const Vec& weights, const Vec& task_means,
                         double target_mean);

/// The MCTS partition tree. Nodes reference samples by index into the run's
/// source datasets and target dataset; the tree never owns sample data.
///
/// Potential means are computed on per-task min-max-normalized objectives by
/// default, with the *target* mean entering as its shortfall below the task
/// best (mean - 1 in [-1, 0]) so the empty-pool default of 0 stays the
/// optimistic ceiling, exactly as with raw maximization values whose best is
/// ~0. `literal_objectives` instead feeds raw y into the equations (the
/// paper-literal mode for tasks sharing one scale). Clustering geometry
/// always uses the normalized values.
class PartitionTree {
public:
    PartitionTree(const std::vector<TaskDataset>* sources, const TaskDataset* target,
                  SplitConfig split, double cp, bool literal_objectives = false);

    /// Builds the pre-learned tree: root takes every source sample and nodes
    /// are split recursively while they hold more than theta source samples
    /// and remain clusterable. Empty sources leave a root-only tree.
    void prelearn(Rng& rng);

    /// UCB score of a node; the root is never scored. `strict_literal`
    /// divides the potential by n_m instead of using it whole.
    double ucb(const TreeNode& node, bool strict_literal = false) const;

    /// Descends from the root to the child with the larger UCB (ties left)
    /// until a leaf.
    TreeNode& select_leaf(bool strict_literal = false);

    /// Clusters the stage-appropriate samples, labels good/bad, fits the
    /// classifier and routes every sample; nullopt when the node has too few
    /// stage samples (<= theta), is not clusterable, the classifier fails to
    /// beat 0.5 training accuracy, or routing would empty a child.
    std::optional<SplitPlan> attempt_split(const TreeNode& node, TreeStage stage,
                                           std::uint64_t seed) const;

    bool is_splitable(const TreeNode& node, TreeStage stage, std::uint64_t seed) const;

    /// Applies a split plan: children extend the parent path on the good and
    /// bad classifier sides and potentials are computed for the stage.
    /// During pre-learning the children are ordered so that
    /// potential(left) >= potential(right) (the construction rule); during
    /// optimization the good side stays left and a violated ordering is the
    /// reconstruction trigger.
    std::pair<TreeNode*, TreeNode*> expand(TreeNode& node, SplitPlan plan,
                                           const PotentialContext& ctx,
                                           bool order_children = false);

    /// Appends target sample `index` to the selected leaf and every ancestor
    /// up to the root.
    void backpropagate(TreeNode& selected, std::uint32_t index);

    void update_all_potentials(const PotentialContext& ctx);

    /// Reconstruction: breadth-first scans delete subtrees whose right child
    /// outranks the left and the deleted nodes are re-expanded recursively
    /// while splitable, repeating until no violation survives (bounded
    /// passes; stubborn nodes are ordered directly). The resulting tree
    /// satisfies potential(left) >= potential(right) everywhere.
    TreeifyStats treeify(TreeStage stage, const PotentialContext& ctx, Rng& rng);

    double node_potential(const TreeNode& node, const PotentialContext& ctx) const;
    /// Pooled mean of source y_norm in the node (pre-learning potential);
    /// 0 for nodes without source samples.
    double potential_prelearn(const TreeNode& node) const;

    TreeNode& root() { return *root_; }
    const TreeNode& root() const { return *root_; }
    const SplitConfig& split_config() const { return split_; }
    double exploration() const { return cp_; }
    int node_count() const;
    std::string snapshot_json() const;

    template <typename F>
    void for_each(F&& fn) const {
        for_each_impl(root_.get(), fn);
    }

private:
    template <typename F>
    static void for_each_impl(const TreeNode* node, F& fn) {
        if (!node) return;
        fn(*node);
        for_each_impl(node->left.get(), fn);
        for_each_impl(node->right.get(), fn);
    }

    void prelearn_recurse(TreeNode& node, Rng& rng);
    void expand_recursively(TreeNode& node, TreeStage stage, const PotentialContext& ctx,
                            Rng& rng, TreeifyStats& stats);
    const Sample& source_sample(int task, std::uint32_t idx) const {
        return (*sources_)[task].samples[idx];
    }
    const Sample& target_sample(std::uint32_t idx) const { return target_->samples[idx]; }

    double source_level(const Sample& s) const { return literal_ ? s.y_raw : s.y_norm; }
    double target_level(const Sample& s) const { return literal_ ? s.y_raw : s.y_norm - 1.0; }

    const std::vector<TaskDataset>* sources_;
    const TaskDataset* target_;
    SplitConfig split_;
    double cp_;
    bool literal_;
    std::unique_ptr<TreeNode> root_;
    int next_id_ = 0;
};

}  // namespace mtbo
