#include "tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <json.hpp>

namespace mtbo {

using nlohmann::json;

PartitionTree::PartitionTree(const std::vector<TaskDataset>* sources, const TaskDataset* target,
                             SplitConfig split, double cp, bool literal_objectives)
    : sources_(sources), target_(target), split_(split), cp_(cp), literal_(literal_objectives) {
    root_ = std::make_unique<TreeNode>();
    root_->id = next_id_++;
    root_->source_idx.resize(sources_->size());
}

double PartitionTree::potential_prelearn(const TreeNode& node) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t task = 0; task < node.source_idx.size(); ++task) {
        for (std::uint32_t idx : node.source_idx[task]) {
            sum += source_level(source_sample(static_cast<int>(task), idx));
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double potential_formula(double gamma, int t, const Vec& weights, const Vec& task_means,
                         double target_mean) {
    double source_term = 0.0;
    if (!weights.empty()) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            num += weights[i] * task_means[i];
            den += weights[i];
        }
        source_term = num / den;
    }
    const double decay = std::pow(gamma, static_cast<double>(t - 1));
    return decay * source_term + target_mean;
}

double PartitionTree::node_potential(const TreeNode& node, const PotentialContext& ctx) const {
    if (ctx.stage == TreeStage::Prelearn) return potential_prelearn(node);

    // Source term: weighted mean of per-task means over the tasks that have
    // samples in this node, re-ranked densely from the global ordering.
    std::vector<int> contributing;
    Vec task_means;
    for (std::size_t task = 0; task < node.source_idx.size(); ++task) {
        const auto& pool = node.source_idx[task];
        if (pool.empty()) continue;
        double m = 0.0;
        for (std::uint32_t idx : pool)
            m += source_level(source_sample(static_cast<int>(task), idx));
        contributing.push_back(static_cast<int>(task));
        task_means.push_back(m / static_cast<double>(pool.size()));
    }

    // the target mean enters as its shortfall below the task best so the
    // empty-pool default of 0 stays optimistic under [0,1] normalization
    double target_term = 0.0;
    if (!node.target_idx.empty()) {
        for (std::uint32_t idx : node.target_idx) target_term += target_level(target_sample(idx));
        target_term /= static_cast<double>(node.target_idx.size());
    }

    const Vec w = contributing.empty() ? Vec{}
                                       : weights_for_subset(*ctx.similarity, contributing,
                                                            *ctx.config);
    return potential_formula(ctx.gamma, ctx.t, w, task_means, target_term);
}

void PartitionTree::prelearn(Rng& rng) {
    for (std::size_t task = 0; task < sources_->size(); ++task) {
        auto& pool = root_->source_idx[task];
        pool.resize((*sources_)[task].size());
        for (std::uint32_t i = 0; i < pool.size(); ++i) pool[i] = i;
    }
    root_->n_visits = static_cast<int>(root_->total_count());
    root_->potential = potential_prelearn(*root_);
    if (root_->source_count() > 0) prelearn_recurse(*root_, rng);
}

void PartitionTree::prelearn_recurse(TreeNode& node, Rng& rng) {
    auto plan = attempt_split(node, TreeStage::Prelearn, rng.next_u64());
    if (!plan) return;
    PotentialContext ctx;  // prelearn stage defaults
    auto [left, right] = expand(node, std::move(*plan), ctx, /*order_children=*/true);
    prelearn_recurse(*left, rng);
    prelearn_recurse(*right, rng);
}

double PartitionTree::ucb(const TreeNode& node, bool strict_literal) const {
    const TreeNode* parent = node.parent;
    if (!parent) throw std::invalid_argument("ucb: the root is never scored");
    const double n_m = static_cast<double>(node.n_visits);
    const double n_p = static_cast<double>(parent->n_visits);
    const double exploit = strict_literal ? node.potential / n_m : node.potential;
    return exploit + 2.0 * cp_ * std::sqrt(2.0 * std::log(n_p) / n_m);
}

TreeNode& PartitionTree::select_leaf(bool strict_literal) {
    TreeNode* cur = root_.get();
    while (!cur->is_leaf()) {
        const double ul = ucb(*cur->left, strict_literal);
        const double ur = ucb(*cur->right, strict_literal);
        cur = ul >= ur ? cur->left.get() : cur->right.get();
    }
    return *cur;
}

std::optional<SplitPlan> PartitionTree::attempt_split(const TreeNode& node, TreeStage stage,
                                                      std::uint64_t seed) const {
    // stage-appropriate samples: source points while pre-learning, target
    // points only during optimization
    std::vector<const Sample*> stage_samples;
    if (stage == TreeStage::Prelearn) {
        for (std::size_t task = 0; task < node.source_idx.size(); ++task)
            for (std::uint32_t idx : node.source_idx[task])
                stage_samples.push_back(&source_sample(static_cast<int>(task), idx));
    } else {
        for (std::uint32_t idx : node.target_idx) stage_samples.push_back(&target_sample(idx));
    }
    if (static_cast<int>(stage_samples.size()) <= split_.theta) return std::nullopt;

    std::vector<Vec> cluster_features;
    cluster_features.reserve(stage_samples.size());
    for (const Sample* s : stage_samples) {
        Vec f = s->x;
        // the objective feature follows the potential scale: literal mode
        // clusters on raw values, so splits are value-dominated
        if (split_.cluster_with_objective) f.push_back(literal_ ? s->y_raw : s->y_norm);
        cluster_features.push_back(std::move(f));
    }
    const auto km = kmeans_two(cluster_features, seed);
    if (!km) return std::nullopt;

    const auto [good_label, bad_label] = label_good_bad(stage_samples, km->labels);

    std::vector<Vec> clf_features;
    std::vector<int> clf_labels;
    clf_features.reserve(stage_samples.size());
    for (std::size_t i = 0; i < stage_samples.size(); ++i) {
        clf_features.push_back(stage_samples[i]->x);
        clf_labels.push_back(km->labels[i] == good_label ? 1 : 0);
    }
    Classifier clf = fit_classifier(clf_features, clf_labels, split_.classifier);
    if (clf.train_accuracy <= 0.5) return std::nullopt;

    // route every sample, source and target, through the new boundary
    SplitPlan plan;
    plan.classifier = clf;
    plan.src_good.resize(node.source_idx.size());
    plan.src_bad.resize(node.source_idx.size());
    std::size_t n_good = 0, n_bad = 0;
    for (std::size_t task = 0; task < node.source_idx.size(); ++task) {
        for (std::uint32_t idx : node.source_idx[task]) {
            if (clf.decide(source_sample(static_cast<int>(task), idx).x)) {
                plan.src_good[task].push_back(idx);
                ++n_good;
            } else {
                plan.src_bad[task].push_back(idx);
                ++n_bad;
            }
        }
    }
    for (std::uint32_t idx : node.target_idx) {
        if (clf.decide(target_sample(idx).x)) {
            plan.tgt_good.push_back(idx);
            ++n_good;
        } else {
            plan.tgt_bad.push_back(idx);
            ++n_bad;
        }
    }
    if (n_good == 0 || n_bad == 0) return std::nullopt;  // degenerate boundary
    return plan;
}

bool PartitionTree::is_splitable(const TreeNode& node, TreeStage stage, std::uint64_t seed) const {
    return attempt_split(node, stage, seed).has_value();
}

std::pair<TreeNode*, TreeNode*> PartitionTree::expand(TreeNode& node, SplitPlan plan,
                                                      const PotentialContext& ctx,
                                                      bool order_children) {
    auto good = std::make_unique<TreeNode>();
    auto bad = std::make_unique<TreeNode>();
    good->parent = &node;
    bad->parent = &node;
    good->path = node.path;
    good->path.steps.push_back({plan.classifier, RegionSide::Good});
    good->side_in_parent = RegionSide::Good;
    bad->path = node.path;
    bad->path.steps.push_back({plan.classifier, RegionSide::Bad});
    bad->side_in_parent = RegionSide::Bad;
    good->source_idx = std::move(plan.src_good);
    bad->source_idx = std::move(plan.src_bad);
    good->target_idx = std::move(plan.tgt_good);
    bad->target_idx = std::move(plan.tgt_bad);
    good->n_visits = static_cast<int>(good->total_count());
    bad->n_visits = static_cast<int>(bad->total_count());
    good->potential = node_potential(*good, ctx);
    bad->potential = node_potential(*bad, ctx);

    node.classifier = std::move(plan.classifier);
    // pre-learning keeps the stronger pool on the left even when an
    // imperfect boundary routed it to the bad side
    if (!order_children || good->potential >= bad->potential) {
        node.left = std::move(good);
        node.right = std::move(bad);
    } else {
        node.left = std::move(bad);
        node.right = std::move(good);
    }
    node.left->id = next_id_++;
    node.right->id = next_id_++;
    return {node.left.get(), node.right.get()};
}

void PartitionTree::backpropagate(TreeNode& selected, std::uint32_t index) {
    for (TreeNode* cur = &selected; cur; cur = cur->parent) {
        cur->target_idx.push_back(index);
        cur->n_visits += 1;
    }
    // when the selected node is already internal (expanded this iteration),
    // the sample also belongs to the leaf below it
    TreeNode* cur = &selected;
    const Vec& x = target_sample(index).x;
    while (!cur->is_leaf()) {
        const bool good = cur->classifier->decide(x);
        TreeNode* next = (cur->left->side_in_parent == RegionSide::Good) == good
                             ? cur->left.get()
                             : cur->right.get();
        next->target_idx.push_back(index);
        next->n_visits += 1;
        cur = next;
    }
}

void PartitionTree::update_all_potentials(const PotentialContext& ctx) {
    std::deque<TreeNode*> queue{root_.get()};
    while (!queue.empty()) {
        TreeNode* node = queue.front();
        queue.pop_front();
        node->potential = node_potential(*node, ctx);
        if (!node->is_leaf()) {
            queue.push_back(node->left.get());
            queue.push_back(node->right.get());
        }
    }
}

TreeifyStats PartitionTree::treeify(TreeStage stage, const PotentialContext& ctx, Rng& rng) {
    TreeifyStats stats;
    for (int pass = 0; pass < 4; ++pass) {
        std::deque<TreeNode*> scan{root_.get()};
        std::deque<TreeNode*> rebuild;
        while (!scan.empty()) {
            TreeNode* node = scan.front();
            scan.pop_front();
            if (node->is_leaf()) continue;
            if (node->left->potential < node->right->potential) {
                // delete the subtree: the node keeps its pools (they are the
                // union of the subtree's leaves) and becomes a leaf
                node->left.reset();
                node->right.reset();
                node->classifier.reset();
                rebuild.push_back(node);
                ++stats.subtrees_deleted;
            } else {
                scan.push_back(node->left.get());
                scan.push_back(node->right.get());
            }
        }
        if (rebuild.empty()) return stats;
        for (TreeNode* node : rebuild) expand_recursively(*node, stage, ctx, rng, stats);
    }
    // a rebuild that keeps violating after the bounded passes gets its
    // children ordered directly so left >= right holds tree-wide
    std::deque<TreeNode*> scan{root_.get()};
    while (!scan.empty()) {
        TreeNode* node = scan.front();
        scan.pop_front();
        if (node->is_leaf()) continue;
        if (node->left->potential < node->right->potential) std::swap(node->left, node->right);
        scan.push_back(node->left.get());
        scan.push_back(node->right.get());
    }
    return stats;
}

void PartitionTree::expand_recursively(TreeNode& node, TreeStage stage,
                                       const PotentialContext& ctx, Rng& rng,
                                       TreeifyStats& stats) {
    auto plan = attempt_split(node, stage, rng.next_u64());
    if (!plan) return;
    auto [left, right] = expand(node, std::move(*plan), ctx, /*order_children=*/true);
    ++stats.nodes_expanded;
    expand_recursively(*left, stage, ctx, rng, stats);
    expand_recursively(*right, stage, ctx, rng, stats);
}

int PartitionTree::node_count() const {
    int n = 0;
    for_each([&n](const TreeNode&) { ++n; });
    return n;
}

std::string PartitionTree::snapshot_json() const {
    json nodes = json::array();
    for_each([&nodes](const TreeNode& node) {
        json j = {{"id", node.id},
                  {"parent", node.parent ? json(node.parent->id) : json(nullptr)},
                  {"left", node.left ? json(node.left->id) : json(nullptr)},
                  {"right", node.right ? json(node.right->id) : json(nullptr)},
                  {"potential", node.potential},
                  {"n_visits", node.n_visits},
                  {"n_target", node.target_idx.size()},
                  {"n_source", node.source_count()},
                  {"depth", node.depth()}};
        if (node.classifier) {
            j["classifier"] = {{"kind", node.classifier->kind == ClassifierKind::LogisticRegression
                                            ? "logistic_regression"
                                            : "linear_svm"},
                               {"weights", node.classifier->weights},
                               {"bias", node.classifier->bias},
                               {"good_side_positive", node.classifier->good_side_positive}};
        }
        if (node.parent)
            j["side"] = node.side_in_parent == RegionSide::Good ? "good" : "bad";
        nodes.push_back(std::move(j));
    });
    return json{{"nodes", nodes}}.dump();
}

}  // namespace mtbo
