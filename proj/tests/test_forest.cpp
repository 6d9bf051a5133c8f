#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "semlab/error.hpp"
#include "semlab/forest.hpp"
#include "semlab/parallel.hpp"
#include "semlab/rng.hpp"

using namespace semlab;

namespace {

// Three gaussian-ish blobs in 4 dims, class = blob.
Dataset blobs(std::size_t per_class, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Dataset d;
    d.cols = 4;
    d.classes = 3;
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            for (std::size_t j = 0; j < d.cols; ++j) {
                const double centre = (j == static_cast<std::size_t>(c)) ? 3.0 : 0.0;
                d.x.push_back(scale * (centre + rng.unit() * 2.0 - 1.0));
            }
            d.y.push_back(c);
            ++d.rows;
        }
    }
    return d;
}

}  // namespace

TEST(Gini, KnownValues) {
    EXPECT_EQ(gini_impurity(std::vector<std::size_t>{5}), 0.0);
    EXPECT_DOUBLE_EQ(gini_impurity(std::vector<std::size_t>{5, 5}), 0.5);
    EXPECT_EQ(gini_impurity(std::vector<std::size_t>{0, 0}), 0.0);
}

TEST(Forest, PureRegionsGiveCertainty) {
    Dataset d;
    d.cols = 1;
    d.classes = 2;
    for (int i = 0; i < 20; ++i) {
        d.x.push_back(i < 10 ? i : 100 + i);
        d.y.push_back(i < 10 ? 0 : 1);
        ++d.rows;
    }
    ForestConfig cfg;
    cfg.n_trees = 16;
    cfg.leaf_smoothing = 0.0;
    const RandomForest f = train_random_forest(d, cfg);
    const std::vector<double> left = {3.0}, right = {150.0};
    EXPECT_DOUBLE_EQ(f.predict_proba(left)[0], 1.0);
    EXPECT_DOUBLE_EQ(f.predict_proba(right)[1], 1.0);
}

TEST(Forest, SmoothedLeavesNeverZero) {
    const Dataset d = blobs(20, 1);
    ForestConfig cfg;
    cfg.n_trees = 8;
    const RandomForest f = train_random_forest(d, cfg);
    for (std::size_t i = 0; i < d.rows; ++i) {
        for (double p : f.predict_proba(d.row(i))) EXPECT_GT(p, 0.0);
    }
}

TEST(Forest, ProbabilitySimplex) {
    const Dataset d = blobs(30, 2);
    ForestConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = 4;
    const RandomForest f = train_random_forest(d, cfg);
    Rng rng(3);
    for (int q = 0; q < 1000; ++q) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.unit() * 10 - 5;
        const auto p = f.predict_proba(x);
        ASSERT_EQ(p.size(), 3u);
        for (double v : p) ASSERT_GE(v, 0.0);
        ASSERT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    }
}

TEST(Forest, SingleTreeEqualsItsLeaf) {
    const Dataset d = blobs(15, 5);
    ForestConfig cfg;
    cfg.n_trees = 1;
    const RandomForest f = train_random_forest(d, cfg);
    for (std::size_t i = 0; i < d.rows; ++i) {
        const auto leaf = f.trees[0].leaf_distribution(d.row(i));
        const auto p = f.predict_proba(d.row(i));
        ASSERT_EQ(std::vector<double>(leaf.begin(), leaf.end()), p);
    }
}

TEST(Forest, LearnsSeparableData) {
    const Dataset train = blobs(40, 6), test = blobs(20, 7);
    ForestConfig cfg;
    cfg.n_trees = 32;
    const RandomForest f = train_random_forest(train, cfg);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.rows; ++i) {
        const auto p = f.predict_proba(test.row(i));
        correct += static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()) == test.y[i];
    }
    EXPECT_GE(static_cast<double>(correct) / test.rows, 0.95);
}

TEST(Forest, DeterministicAndParallelMatchesSerial) {
    const Dataset d = blobs(25, 8);
    ForestConfig cfg;
    cfg.n_trees = 24;
    cfg.seed = 99;
    set_thread_limit(4);
    const RandomForest par = train_random_forest(d, cfg);
    const auto par_rows = predict_rows(par, d);
    set_thread_limit(0);
    const RandomForest ser = train_random_forest_serial(d, cfg);
    EXPECT_TRUE(par == ser);
    EXPECT_EQ(par_rows, predict_rows_serial(ser, d));
    EXPECT_TRUE(train_random_forest(d, cfg) == par);
    cfg.seed = 100;
    EXPECT_FALSE(train_random_forest(d, cfg) == par);
}

TEST(Forest, ScalingKeepsArgmax) {
    const Dataset d = blobs(25, 9), scaled = blobs(25, 9, 7.5);
    const Dataset q = blobs(10, 10), qs = blobs(10, 10, 7.5);
    ForestConfig cfg;
    cfg.n_trees = 16;
    const RandomForest a = train_random_forest(d, cfg), b = train_random_forest(scaled, cfg);
    for (std::size_t i = 0; i < q.rows; ++i) {
        const auto pa = a.predict_proba(q.row(i)), pb = b.predict_proba(qs.row(i));
        EXPECT_EQ(std::max_element(pa.begin(), pa.end()) - pa.begin(), std::max_element(pb.begin(), pb.end()) - pb.begin());
    }
}

TEST(Forest, DepthLimitAndLeafSize) {
    const Dataset d = blobs(30, 11);
    ForestConfig cfg;
    cfg.n_trees = 4;
    cfg.max_depth = 2;
    for (const auto& t : train_random_forest(d, cfg).trees) EXPECT_LE(t.depth(), 2u);
    cfg.max_depth.reset();
    cfg.min_samples_leaf = 1000;
    for (const auto& t : train_random_forest(d, cfg).trees) EXPECT_EQ(t.nodes.size(), 1u);
}

TEST(Forest, RejectsBadInput) {
    Dataset d = blobs(5, 12);
    d.x[3] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(train_random_forest(d, ForestConfig{}), TrainingError);
    Dataset one = blobs(5, 12);
    one.classes = 1;
    std::fill(one.y.begin(), one.y.end(), 0);
    EXPECT_THROW(train_random_forest(one, ForestConfig{}), InputError);
    ForestConfig zero;
    zero.n_trees = 0;
    EXPECT_THROW(train_random_forest(blobs(5, 1), zero), InputError);
}
