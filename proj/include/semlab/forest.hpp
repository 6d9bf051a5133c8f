#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace semlab {

/// Dense row-major design matrix with integer class targets.
struct Dataset {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t classes = 0;
    std::vector<double> x;
    std::vector<int> y;

    std::span<const double> row(std::size_t i) const { return {x.data() + i * cols, cols}; }
};

struct ForestConfig {
    std::size_t n_trees = 128;
    std::optional<std::size_t> max_depth;           // unlimited when empty
    std::size_t min_samples_leaf = 1;
    std::optional<std::size_t> features_per_split;  // ceil(sqrt(d)) when empty
    double leaf_smoothing = 1.0;                    // pseudo-count added to every class in a leaf
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t split_features(std::size_t dims) const;
};

/// 1 - sum_c (n_c / n)^2; 0 for an empty node.
double gini_impurity(std::span<const std::size_t> class_counts);

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // go left when x[feature] <= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t leaf = 0;     // offset of the leaf distribution / classes

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
public:
    std::vector<TreeNode> nodes;
    std::vector<double> leaf_values;  // classes entries per leaf
    std::size_t classes = 0;

    std::span<const double> leaf_distribution(std::span<const double> x) const;
    std::size_t depth() const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

/// Grows one CART tree on a bootstrap resample drawn from `seed`.
DecisionTree grow_tree(const Dataset& data, const ForestConfig& cfg, std::uint64_t seed);

class RandomForest {
public:
    ForestConfig config;
    std::vector<DecisionTree> trees;
    std::size_t classes = 0;
    std::size_t dims = 0;

    /// Mean of the per-tree leaf distributions.
    std::vector<double> predict_proba(std::span<const double> x) const;

    friend bool operator==(const RandomForest& a, const RandomForest& b) {
        return a.trees == b.trees && a.classes == b.classes && a.dims == b.dims;
    }
};

/// OpenMP kernel: trees are grown in parallel, tree t from stream (seed, t).
RandomForest train_random_forest(const Dataset& data, const ForestConfig& cfg);
/// Serial reference for train_random_forest.
RandomForest train_random_forest_serial(const Dataset& data, const ForestConfig& cfg);

/// Row-wise predictions for a matrix; OpenMP over rows.
std::vector<std::vector<double>> predict_rows(const RandomForest& forest, const Dataset& data);
std::vector<std::vector<double>> predict_rows_serial(const RandomForest& forest, const Dataset& data);

}  // namespace semlab
