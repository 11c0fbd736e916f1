#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "amipred/learners/base.hpp"

namespace amipred {

// Binary decision tree with information-gain-ratio splits. Grown without
// post-pruning; ties on gain ratio break toward the lowest column index.
class TreeModel : public Model {
public:
    struct Node {
        bool leaf = true;
        std::size_t feature = 0;
        double threshold = 0.0;  // value < threshold goes left
        std::int32_t left = -1, right = -1;
        double pos = 0.0, neg = 0.0;  // training mass at the node
    };

    explicit TreeModel(std::vector<Node> nodes, LearnerFamily family = LearnerFamily::tree)
        : nodes_(std::move(nodes)), family_(family) {}

    LearnerFamily family() const override { return family_; }

    const Node& leaf_for(std::span<const double> row) const {
        std::size_t idx = 0;
        while (!nodes_[idx].leaf) {
            const Node& n = nodes_[idx];
            if (n.feature >= row.size()) throw ContractError("tree: row dimension mismatch");
            idx = static_cast<std::size_t>(row[n.feature] < n.threshold ? n.left : n.right);
        }
        return nodes_[idx];
    }

    double predict_proba(std::span<const double> row) const override {
        const Node& leaf = leaf_for(row);
        const double total = leaf.pos + leaf.neg;
        return total > 0.0 ? leaf.pos / total : 0.5;
    }

    const std::vector<Node>& nodes() const { return nodes_; }

    void save(std::ostream& out) const override {
        out.precision(17);
        out << "nodes " << nodes_.size() << "\n";
        for (const auto& n : nodes_) {
            if (n.leaf)
                out << "leaf " << n.pos << " " << n.neg << "\n";
            else
                out << "split " << n.feature << " " << n.threshold << " " << n.left << " "
                    << n.right << "\n";
        }
    }
    static std::unique_ptr<TreeModel> load(std::istream& in, LearnerFamily family = LearnerFamily::tree) {
        detail::expect_token(in, "nodes");
        std::size_t count = 0;
        in >> count;
        std::vector<Node> nodes(count);
        for (auto& n : nodes) {
            std::string kind;
            in >> kind;
            if (kind == "leaf") {
                n.leaf = true;
                in >> n.pos >> n.neg;
            } else if (kind == "split") {
                n.leaf = false;
                in >> n.feature >> n.threshold >> n.left >> n.right;
            } else {
                throw DataError("tree model: unknown node kind '" + kind + "'");
            }
        }
        if (!in) throw DataError("truncated tree model");
        return std::make_unique<TreeModel>(std::move(nodes), family);
    }

private:
    std::vector<Node> nodes_;
    LearnerFamily family_;
};

namespace detail {

struct TreeParams {
    std::size_t max_depth = 0;  // 0 = unlimited
    std::size_t min_leaf = 1;
    std::size_t features_per_split = 0;  // 0 = all features
};

inline double entropy2(double pos, double neg) {
    const double total = pos + neg;
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    if (pos > 0.0) h -= (pos / total) * std::log2(pos / total);
    if (neg > 0.0) h -= (neg / total) * std::log2(neg / total);
    return h;
}

// Tree growth over presorted per-feature index arrays. Node membership
// stays contiguous in every array: a split stably partitions each feature's
// segment, so no re-sorting happens after setup. Bootstrap duplicates are
// carried as integer row weights.
class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const std::vector<int>& y, const std::vector<double>& row_weight,
                TreeParams params, std::mt19937_64& rng)
        : x_(x), y_(y), weight_(row_weight), params_(params), rng_(rng) {
        const std::size_t p = x.cols();
        active_.reserve(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i)
            if (weight_[i] > 0.0) active_.push_back(static_cast<std::uint32_t>(i));
        order_.assign(p, active_);
        for (std::size_t j = 0; j < p; ++j)
            std::sort(order_[j].begin(), order_[j].end(), [&](std::uint32_t a, std::uint32_t b) {
                const double va = x_.at(a, j), vb = x_.at(b, j);
                return va < vb || (va == vb && a < b);
            });
        scratch_.resize(active_.size());
        side_.assign(x.rows(), 0);
        feature_pool_.resize(p);
        for (std::size_t j = 0; j < p; ++j) feature_pool_[j] = j;
    }

    std::vector<TreeModel::Node> build() {
        nodes_.clear();
        if (!active_.empty()) grow(0, active_.size(), 0);
        if (nodes_.empty()) nodes_.push_back(TreeModel::Node{});
        return std::move(nodes_);
    }

private:
    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double boundary_value = 0.0;  // last value on the left, exact partition key
        double ratio = -1.0;
    };

    std::size_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
        double pos = 0.0, neg = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            const std::uint32_t r = order_[0][k];
            (y_[r] ? pos : neg) += weight_[r];
        }
        const std::size_t node_idx = nodes_.size();
        nodes_.push_back(TreeModel::Node{true, 0, 0.0, -1, -1, pos, neg});

        const double total = pos + neg;
        const bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
        if (pos == 0.0 || neg == 0.0 || depth_capped ||
            total < 2.0 * static_cast<double>(params_.min_leaf))
            return node_idx;

        const Split split = best_split(begin, end, pos, neg);
        if (!split.found) return node_idx;

        const std::size_t mid = partition(begin, end, split);
        if (mid == begin || mid == end) return node_idx;  // degenerate, keep leaf

        nodes_[node_idx].leaf = false;
        nodes_[node_idx].feature = split.feature;
        nodes_[node_idx].threshold = split.threshold;
        const std::size_t left = grow(begin, mid, depth + 1);
        nodes_[node_idx].left = static_cast<std::int32_t>(left);
        const std::size_t right = grow(mid, end, depth + 1);
        nodes_[node_idx].right = static_cast<std::int32_t>(right);
        return node_idx;
    }

    Split best_split(std::size_t begin, std::size_t end, double pos, double neg) {
        const std::size_t p = x_.cols();
        std::size_t n_candidates = p;
        if (params_.features_per_split > 0 && params_.features_per_split < p) {
            n_candidates = params_.features_per_split;
            for (std::size_t k = 0; k < n_candidates; ++k) {
                std::uniform_int_distribution<std::size_t> pick(k, p - 1);
                std::swap(feature_pool_[k], feature_pool_[pick(rng_)]);
            }
            std::sort(feature_pool_.begin(),
                      feature_pool_.begin() + static_cast<std::ptrdiff_t>(n_candidates));
        }

        const double h_parent = entropy2(pos, neg);
        const double total = pos + neg;
        const double min_mass = static_cast<double>(params_.min_leaf);
        Split best;
        for (std::size_t c = 0; c < n_candidates; ++c) {
            const std::size_t j = feature_pool_[c];
            const auto& ord = order_[j];
            double left_pos = 0.0, left_neg = 0.0;
            for (std::size_t k = begin; k + 1 < end; ++k) {
                const std::uint32_t r = ord[k];
                (y_[r] ? left_pos : left_neg) += weight_[r];
                const double v = x_.at(r, j);
                const double v_next = x_.at(ord[k + 1], j);
                if (v_next == v) continue;
                const double left_total = left_pos + left_neg;
                const double right_total = total - left_total;
                if (left_total < min_mass || right_total < min_mass) continue;
                const double gain = h_parent -
                                    (left_total / total) * entropy2(left_pos, left_neg) -
                                    (right_total / total) * entropy2(pos - left_pos, neg - left_neg);
                if (gain <= 1e-12) continue;
                const double si = entropy2(left_total, right_total);
                if (si <= 1e-12) continue;
                const double ratio = gain / si;
                if (ratio > best.ratio) {
                    best.found = true;
                    best.ratio = ratio;
                    best.feature = j;
                    best.threshold = (v + v_next) / 2.0;
                    best.boundary_value = v;
                }
            }
        }
        return best;
    }

    // Stable-partition every feature's segment on the chosen split; returns
    // the first right-side position.
    std::size_t partition(std::size_t begin, std::size_t end, const Split& split) {
        const auto& split_ord = order_[split.feature];
        std::size_t left_count = 0;
        for (std::size_t k = begin; k < end; ++k) {
            const std::uint32_t r = split_ord[k];
            const bool left = x_.at(r, split.feature) <= split.boundary_value;
            side_[r] = left ? 0 : 1;
            left_count += left;
        }
        for (auto& ord : order_) {
            std::size_t lo = begin, hi = begin + left_count;
            for (std::size_t k = begin; k < end; ++k) {
                const std::uint32_t r = ord[k];
                scratch_[side_[r] ? hi++ : lo++] = r;
            }
            std::copy(scratch_.begin() + static_cast<std::ptrdiff_t>(begin),
                      scratch_.begin() + static_cast<std::ptrdiff_t>(end),
                      ord.begin() + static_cast<std::ptrdiff_t>(begin));
        }
        return begin + left_count;
    }

    const Matrix& x_;
    const std::vector<int>& y_;
    const std::vector<double>& weight_;
    TreeParams params_;
    std::mt19937_64& rng_;
    std::vector<std::uint32_t> active_;
    std::vector<std::vector<std::uint32_t>> order_;
    std::vector<std::uint32_t> scratch_;
    std::vector<std::uint8_t> side_;
    std::vector<std::size_t> feature_pool_;
    std::vector<TreeModel::Node> nodes_;
};

}  // namespace detail

inline std::unique_ptr<Model> train_tree(const LearnerSpec& spec, const TrainData& data) {
    if (data.x.rows() == 0) throw DataError("tree: empty training set");
    detail::TreeParams params;
    params.max_depth = static_cast<std::size_t>(spec.hyperparameters.at("max_depth"));
    params.min_leaf = std::max<std::size_t>(1, static_cast<std::size_t>(spec.hyperparameters.at("min_leaf")));
    params.features_per_split = 0;
    std::vector<double> weights(data.x.rows(), 1.0);
    std::mt19937_64 rng(mix_seed(spec.seed, 0));
    detail::TreeBuilder builder(data.x, data.y, weights, params, rng);
    return std::make_unique<TreeModel>(builder.build());
}

// Bootstrap-sampled gain-ratio trees over sqrt(p) features per split;
// probability is the fraction of trees voting positive.
class RandomForestModel : public Model {
public:
    explicit RandomForestModel(std::vector<TreeModel> trees) : trees_(std::move(trees)) {}

    LearnerFamily family() const override { return LearnerFamily::random_forest; }

    double predict_proba(std::span<const double> row) const override {
        if (trees_.empty()) return 0.5;
        std::size_t votes = 0;
        for (const auto& t : trees_) {
            const auto& leaf = t.leaf_for(row);
            votes += leaf.pos >= leaf.neg && leaf.pos > 0.0;
        }
        return static_cast<double>(votes) / static_cast<double>(trees_.size());
    }

    const std::vector<TreeModel>& trees() const { return trees_; }

    void save(std::ostream& out) const override {
        out << "trees " << trees_.size() << "\n";
        for (const auto& t : trees_) t.save(out);
    }
    static std::unique_ptr<RandomForestModel> load(std::istream& in) {
        detail::expect_token(in, "trees");
        std::size_t count = 0;
        in >> count;
        std::vector<TreeModel> trees;
        trees.reserve(count);
        for (std::size_t t = 0; t < count; ++t)
            trees.push_back(std::move(*TreeModel::load(in)));
        return std::make_unique<RandomForestModel>(std::move(trees));
    }

private:
    std::vector<TreeModel> trees_;
};

inline std::unique_ptr<Model> train_random_forest(const LearnerSpec& spec, const TrainData& data) {
    const std::size_t n = data.x.rows(), p = data.x.cols();
    if (n == 0) throw DataError("random_forest: empty training set");
    const std::size_t n_trees =
        std::max<std::size_t>(1, static_cast<std::size_t>(spec.hyperparameters.at("trees")));
    detail::TreeParams params;
    params.max_depth = static_cast<std::size_t>(spec.hyperparameters.at("max_depth"));
    params.min_leaf = std::max<std::size_t>(1, static_cast<std::size_t>(spec.hyperparameters.at("min_leaf")));
    params.features_per_split =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(p))));

    std::vector<TreeModel> trees;
    trees.reserve(n_trees);
    std::vector<double> weights(n);
    for (std::size_t t = 0; t < n_trees; ++t) {
        std::mt19937_64 rng(mix_seed(spec.seed, t));
        std::fill(weights.begin(), weights.end(), 0.0);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t i = 0; i < n; ++i) weights[pick(rng)] += 1.0;
        detail::TreeBuilder builder(data.x, data.y, weights, params, rng);
        trees.emplace_back(builder.build());
    }
    return std::make_unique<RandomForestModel>(std::move(trees));
}

}  // namespace amipred
