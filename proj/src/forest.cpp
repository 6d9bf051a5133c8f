#include "semlab/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "semlab/error.hpp"
#include "semlab/rng.hpp"

namespace semlab {

void ForestConfig::validate() const {
    if (n_trees < 1) throw InputError("forest needs at least one tree");
    if (max_depth && *max_depth < 1) throw InputError("max_depth must be positive");
    if (min_samples_leaf < 1) throw InputError("min_samples_leaf must be positive");
    if (features_per_split && *features_per_split < 1) throw InputError("features_per_split must be positive");
    if (!(leaf_smoothing >= 0.0)) throw InputError("leaf_smoothing must be non-negative");
}

std::size_t ForestConfig::split_features(std::size_t dims) const {
    const std::size_t m = features_per_split ? *features_per_split
                                             : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dims))));
    return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(dims, 1));
}

double gini_impurity(std::span<const std::size_t> class_counts) {
    const double n = static_cast<double>(std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0}));
    if (n == 0.0) return 0.0;
    double sum_sq = 0.0;
    for (std::size_t c : class_counts) sum_sq += (static_cast<double>(c) / n) * (static_cast<double>(c) / n);
    return 1.0 - sum_sq;
}

std::span<const double> DecisionTree::leaf_distribution(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const TreeNode& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return {leaf_values.data() + nodes[i].leaf, classes};
}

std::size_t DecisionTree::depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (nodes[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

namespace {

struct Split {
    bool found = false;
    double score = 0.0;  // sum_c L_c^2 / n_L + sum_c R_c^2 / n_R; larger is purer
    std::size_t feature = 0;
    double threshold = 0.0;
};

bool better(const Split& candidate, const Split& best) {
    if (!best.found) return true;
    if (candidate.score != best.score) return candidate.score > best.score;
    if (candidate.feature != best.feature) return candidate.feature < best.feature;
    return candidate.threshold < best.threshold;
}

class TreeBuilder {
public:
    TreeBuilder(const Dataset& data, const ForestConfig& cfg, std::uint64_t seed)
        : data_(data), cfg_(cfg), rng_(seed), mtry_(cfg.split_features(data.cols)) {
        order_.resize(data.cols);
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        counts_.resize(data.classes);
        left_.resize(data.classes);
        right_.resize(data.classes);
    }

    DecisionTree build() {
        sample_.resize(data_.rows);
        for (auto& s : sample_) s = static_cast<std::uint32_t>(rng_.below(data_.rows));

        tree_.classes = data_.classes;
        tree_.nodes.emplace_back();
        struct Work {
            std::size_t node, begin, end, depth;
        };
        std::vector<Work> stack{{0, 0, sample_.size(), 0}};
        while (!stack.empty()) {
            const Work w = stack.back();
            stack.pop_back();
            count_classes(w.begin, w.end);
            const std::size_t n = w.end - w.begin;
            const bool pure = std::count_if(counts_.begin(), counts_.end(), [](std::size_t c) { return c > 0; }) <= 1;
            const bool depth_capped = cfg_.max_depth && w.depth >= *cfg_.max_depth;
            Split split;
            if (!pure && !depth_capped && n >= 2 * cfg_.min_samples_leaf) split = find_split(w.begin, w.end);
            if (!split.found) {
                make_leaf(w.node, n);
                continue;
            }
            const auto mid = partition(w.begin, w.end, split);
            const auto left = static_cast<std::int32_t>(tree_.nodes.size());
            tree_.nodes.emplace_back();
            tree_.nodes.emplace_back();
            TreeNode& node = tree_.nodes[w.node];
            node.feature = static_cast<std::int32_t>(split.feature);
            node.threshold = split.threshold;
            node.left = left;
            node.right = left + 1;
            stack.push_back({static_cast<std::size_t>(left + 1), mid, w.end, w.depth + 1});
            stack.push_back({static_cast<std::size_t>(left), w.begin, mid, w.depth + 1});
        }
        return std::move(tree_);
    }

private:
    void count_classes(std::size_t begin, std::size_t end) {
        std::fill(counts_.begin(), counts_.end(), 0);
        for (std::size_t i = begin; i < end; ++i) ++counts_[static_cast<std::size_t>(data_.y[sample_[i]])];
    }

    void make_leaf(std::size_t node, std::size_t n) {
        tree_.nodes[node].feature = -1;
        tree_.nodes[node].leaf = static_cast<std::uint32_t>(tree_.leaf_values.size());
        const double alpha = cfg_.leaf_smoothing;
        const double denom = static_cast<double>(n) + alpha * static_cast<double>(data_.classes);
        for (std::size_t c = 0; c < data_.classes; ++c) {
            tree_.leaf_values.push_back((static_cast<double>(counts_[c]) + alpha) / denom);
        }
    }

    Split find_split(std::size_t begin, std::size_t end) {
        const std::size_t n = end - begin;
        double parent_sq = 0.0;
        for (std::size_t c : counts_) parent_sq += static_cast<double>(c) * static_cast<double>(c);
        const double parent_score = parent_sq / static_cast<double>(n);

        Split best;
        std::size_t evaluated = 0;
        for (std::size_t k = 0; k < order_.size() && evaluated < mtry_; ++k) {
            std::swap(order_[k], order_[k + rng_.below(order_.size() - k)]);
            const std::size_t f = order_[k];
            values_.clear();
            for (std::size_t i = begin; i < end; ++i) {
                values_.emplace_back(data_.x[sample_[i] * data_.cols + f], data_.y[sample_[i]]);
            }
            std::sort(values_.begin(), values_.end());
            if (values_.front().first == values_.back().first) continue;  // constant here; not counted
            ++evaluated;

            std::fill(left_.begin(), left_.end(), 0);
            right_ = counts_;
            double left_sq = 0.0;
            double right_sq = parent_sq;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const auto c = static_cast<std::size_t>(values_[i].second);
                left_sq += 2.0 * static_cast<double>(left_[c]) + 1.0;
                right_sq -= 2.0 * static_cast<double>(right_[c]) - 1.0;
                ++left_[c];
                --right_[c];
                if (values_[i].first == values_[i + 1].first) continue;
                const std::size_t n_left = i + 1;
                const std::size_t n_right = n - n_left;
                if (n_left < cfg_.min_samples_leaf || n_right < cfg_.min_samples_leaf) continue;
                Split candidate;
                candidate.found = true;
                candidate.score = left_sq / static_cast<double>(n_left) + right_sq / static_cast<double>(n_right);
                candidate.feature = f;
                const double lo = values_[i].first;
                const double hi = values_[i + 1].first;
                double mid = lo + (hi - lo) / 2.0;
                if (!(mid < hi)) mid = lo;
                candidate.threshold = mid;
                if (better(candidate, best)) best = candidate;
            }
        }
        if (best.found && best.score + 1e-9 * parent_score < parent_score) {
            throw std::logic_error("split increased weighted Gini impurity");
        }
        return best;
    }

    std::size_t partition(std::size_t begin, std::size_t end, const Split& split) {
        const auto it = std::stable_partition(sample_.begin() + static_cast<std::ptrdiff_t>(begin),
                                              sample_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::uint32_t s) {
                                                  return data_.x[s * data_.cols + split.feature] <= split.threshold;
                                              });
        return static_cast<std::size_t>(it - sample_.begin());
    }

    const Dataset& data_;
    const ForestConfig& cfg_;
    Rng rng_;
    std::size_t mtry_;
    DecisionTree tree_;
    std::vector<std::uint32_t> sample_;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> counts_, left_, right_;
    std::vector<std::pair<double, int>> values_;
};

void check_dataset(const Dataset& data) {
    if (data.rows == 0) throw InputError("cannot train on an empty dataset");
    if (data.x.size() != data.rows * data.cols || data.y.size() != data.rows) {
        throw InputError("dataset dimensions are inconsistent");
    }
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        if (std::isnan(data.x[i])) {
            throw TrainingError("NaN feature value at row " + std::to_string(i / data.cols) + ", column " +
                                std::to_string(i % data.cols));
        }
    }
    std::vector<bool> seen(data.classes, false);
    for (int y : data.y) {
        if (y < 0 || static_cast<std::size_t>(y) >= data.classes) throw InputError("target outside the label order");
        seen[static_cast<std::size_t>(y)] = true;
    }
    if (std::count(seen.begin(), seen.end(), true) < 2) {
        throw InputError("training set needs at least two distinct classes");
    }
}

RandomForest make_forest(const Dataset& data, const ForestConfig& cfg) {
    RandomForest forest;
    forest.config = cfg;
    forest.classes = data.classes;
    forest.dims = data.cols;
    forest.trees.resize(cfg.n_trees);
    return forest;
}

}  // namespace

DecisionTree grow_tree(const Dataset& data, const ForestConfig& cfg, std::uint64_t seed) {
    return TreeBuilder(data, cfg, seed).build();
}

RandomForest train_random_forest(const Dataset& data, const ForestConfig& cfg) {
    cfg.validate();
    check_dataset(data);
    RandomForest forest = make_forest(data, cfg);
    std::vector<std::string> errors(cfg.n_trees);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        try {
            forest.trees[t] = grow_tree(data, cfg, derive_seed(cfg.seed, t));
        } catch (const std::exception& e) {
            errors[t] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw std::logic_error(e);
    }
    return forest;
}

RandomForest train_random_forest_serial(const Dataset& data, const ForestConfig& cfg) {
    cfg.validate();
    check_dataset(data);
    RandomForest forest = make_forest(data, cfg);
    for (std::size_t t = 0; t < cfg.n_trees; ++t) forest.trees[t] = grow_tree(data, cfg, derive_seed(cfg.seed, t));
    return forest;
}

std::vector<double> RandomForest::predict_proba(std::span<const double> x) const {
    if (x.size() != dims) {
        throw ContractError("input width " + std::to_string(x.size()) + " does not match forest width " +
                            std::to_string(dims));
    }
    std::vector<double> p(classes, 0.0);
    for (const auto& tree : trees) {
        const auto leaf = tree.leaf_distribution(x);
        for (std::size_t c = 0; c < classes; ++c) p[c] += leaf[c];
    }
    for (double& v : p) v /= static_cast<double>(trees.size());
    return p;
}

std::vector<std::vector<double>> predict_rows(const RandomForest& forest, const Dataset& data) {
    if (data.cols != forest.dims) throw ContractError("input width does not match forest width");
    std::vector<std::vector<double>> out(data.rows);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < data.rows; ++i) out[i] = forest.predict_proba(data.row(i));
    return out;
}

std::vector<std::vector<double>> predict_rows_serial(const RandomForest& forest, const Dataset& data) {
    std::vector<std::vector<double>> out;
    out.reserve(data.rows);
    for (std::size_t i = 0; i < data.rows; ++i) out.push_back(forest.predict_proba(data.row(i)));
    return out;
}

}  // namespace semlab
