#include <gtest/gtest.h>

#include <numeric>

#include "semlab/error.hpp"
#include "semlab/model.hpp"
#include "semlab/pipeline.hpp"
#include "semlab/synth.hpp"
#include "support.hpp"

using namespace semlab;
using testing_support::TempDir;

namespace {

struct Trained {
    LabeledCorpus corpus;
    TrainOutcome outcome;
};

Trained train_small(ModelKind kind, FeatureSet set, bool bagging = true) {
    SynthesisSpec spec;
    spec.sources = 3;
    spec.labels = 4;
    spec.rows_min = 40;
    spec.rows_max = 60;
    Trained t{generate_synthetic(spec, 17), TrainOutcome{TrainedModel({}, {}, nullptr, {}, {}), {}, {}, 0}};
    std::vector<std::size_t> all = {0, 1, 2};
    const auto attrs = training_attributes(t.corpus, all, true);
    PipelineConfig cfg;
    cfg.model = kind;
    cfg.features = set;
    cfg.seed = 3;
    cfg.forest.n_trees = 12;
    cfg.mlp.hidden_layers = {12, 12, 12};
    cfg.mlp.epochs = 5;
    if (bagging) cfg.bagging = BagConfig{10, 20, 0};
    t.outcome = train_pipeline(attrs, cfg);
    return t;
}

std::vector<double> random_row(Rng& rng, std::size_t width) {
    std::vector<double> x(width);
    for (auto& v : x) v = rng.unit();
    return x;
}

}  // namespace

TEST(RankLabels, SortsAndBreaksTiesLexicographically) {
    const std::vector<SemanticLabel> order = {SemanticLabel::known("A", "x"), SemanticLabel::known("B", "y")};
    const std::vector<double> p1 = {0.1, 0.9};
    auto r = rank_labels(order, p1);
    EXPECT_EQ(r[0].label, order[1]);
    EXPECT_EQ(r[0].probability, 0.9);
    const std::vector<double> tie = {0.5, 0.5};
    const std::vector<SemanticLabel> reversed = {order[1], order[0]};
    r = rank_labels(reversed, tie);
    EXPECT_EQ(r[0].label, order[0]);
    EXPECT_THROW(rank_labels(order, std::vector<double>{1.0}), ContractError);
}

TEST(PredictAttribute, WithoutAndWithBagging) {
    const Trained t = train_small(ModelKind::Forest, FeatureSet::All);
    const TrainedModel& m = t.outcome.model;
    const Attribute& attr = t.corpus.sources[0].attributes[0];

    const PredictionRanking plain = predict_attribute(m, attr);
    ASSERT_EQ(plain.ranked.size(), m.label_order().size());
    double sum = 0;
    for (std::size_t i = 0; i < plain.ranked.size(); ++i) {
        sum += plain.ranked[i].probability;
        if (i) EXPECT_GE(plain.ranked[i - 1].probability, plain.ranked[i].probability);
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);

    // Bagged ranking equals the ranking of the externally averaged bag vectors.
    const BagConfig bags{10, 25, 8};
    const PredictionRanking bagged = predict_attribute(m, attr, bags);
    const Featurizer f = m.featurizer();
    const auto names = f.name_block(attr.name);
    std::vector<std::vector<double>> per_bag;
    for (const auto& bag : make_bags(attr, bags, bag_stream_id(attr.source_name, attr.name, SamplingPhase::Predict))) {
        per_bag.push_back(predict_proba(m, f.from_values(bag.values, names)));
    }
    std::vector<double> mean(per_bag[0].size(), 0.0);
    for (const auto& p : per_bag) {
        for (std::size_t i = 0; i < p.size(); ++i) mean[i] += p[i] / static_cast<double>(per_bag.size());
    }
    const auto expected = rank_labels(m.label_order(), mean);
    ASSERT_EQ(expected.size(), bagged.ranked.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(expected[i].label, bagged.ranked[i].label);
        EXPECT_NEAR(expected[i].probability, bagged.ranked[i].probability, 1e-12);
    }

    Attribute empty = attr;
    empty.values.clear();
    EXPECT_THROW(predict_attribute(m, empty), InputError);
}

TEST(PredictAttribute, FeatureSetMismatch) {
    const Trained t = train_small(ModelKind::Forest, FeatureSet::Base, false);
    const TrainedModel& m = t.outcome.model;
    const Attribute& attr = t.corpus.sources[1].attributes[0];
    EXPECT_THROW(predict_attribute(m, attr, m.context().profiles, FeatureSet::All, std::nullopt), ContractError);
    const ClassProfileIndex empty;
    const Featurizer other(FeatureSet::Base, &empty);
    FeatureVector fv = other(attr);
    fv.schema = std::make_shared<const std::vector<std::string>>(std::vector<std::string>(fv.values.size(), "x"));
    EXPECT_THROW(predict_proba(m, fv), ContractError);
}

TEST(ModelFile, ForestRoundTripIsBitwise) {
    const Trained t = train_small(ModelKind::Forest, FeatureSet::All);
    TempDir dir("model");
    save_model(t.outcome.model, dir / "m.slb");
    const TrainedModel loaded = load_model(dir / "m.slb");
    EXPECT_EQ(loaded.label_order(), t.outcome.model.label_order());
    EXPECT_EQ(loaded.feature_schema(), t.outcome.model.feature_schema());
    EXPECT_EQ(loaded.context().profiles, t.outcome.model.context().profiles);
    Rng rng(1);
    const Featurizer f = loaded.featurizer();
    for (int i = 0; i < 100; ++i) {
        FeatureVector fv{FeatureSet::All, random_row(rng, loaded.feature_schema().size()), loaded.shared_schema()};
        FeatureVector orig = fv;
        orig.schema = t.outcome.model.shared_schema();
        ASSERT_EQ(predict_proba(loaded, fv), predict_proba(t.outcome.model, orig));
    }
    EXPECT_EQ(serialize_model(loaded), serialize_model(t.outcome.model));
}

TEST(ModelFile, MlpRoundTripIsBitwise) {
    const Trained t = train_small(ModelKind::Mlp, FeatureSet::BasePlus);
    const TrainedModel loaded = deserialize_model(serialize_model(t.outcome.model));
    EXPECT_EQ(loaded.kind(), ModelKind::Mlp);
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        const auto x = random_row(rng, loaded.feature_schema().size());
        ASSERT_EQ(predict_proba(loaded, {FeatureSet::BasePlus, x, loaded.shared_schema()}),
                  predict_proba(t.outcome.model, {FeatureSet::BasePlus, x, t.outcome.model.shared_schema()}));
    }
}

TEST(ModelFile, RetrainingIsByteIdentical) {
    EXPECT_EQ(serialize_model(train_small(ModelKind::Forest, FeatureSet::All).outcome.model),
              serialize_model(train_small(ModelKind::Forest, FeatureSet::All).outcome.model));
}

TEST(ModelFile, CorruptionAndVersioning) {
    const std::string bytes = serialize_model(train_small(ModelKind::Forest, FeatureSet::Base, false).outcome.model);
    ASSERT_EQ(bytes.substr(0, 4), "SLB1");

    try {
        deserialize_model(bytes.substr(0, bytes.size() / 2));
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos) << e.what();
    }

    std::string flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x40;
    EXPECT_THROW(deserialize_model(flipped), InputError);

    std::string v99 = bytes;
    v99[4] = 99;
    v99[5] = v99[6] = v99[7] = 0;
    try {
        deserialize_model(v99);
        FAIL();
    } catch (const ContractError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("99"), std::string::npos) << msg;
        EXPECT_NE(msg.find("1"), std::string::npos) << msg;
    }
    EXPECT_THROW(deserialize_model("nope"), InputError);
}

TEST(ModelFile, JsonDump) {
    const Trained t = train_small(ModelKind::Forest, FeatureSet::All);
    const auto doc = model_to_json(t.outcome.model);
    EXPECT_EQ(doc["format_version"], 1);
    EXPECT_EQ(doc["kind"], "rf");
    EXPECT_EQ(doc["label_order"].size(), t.outcome.model.label_order().size());
    EXPECT_EQ(doc["feature_schema"].size(), t.outcome.model.feature_schema().size());
}

TEST(TrainingSet, Validation) {
    TrainingSet s;
    EXPECT_THROW(s.validate(), InputError);
}

TEST(ModelKindNames, ParseAndPrint) {
    EXPECT_EQ(parse_model_kind("rf"), ModelKind::Forest);
    EXPECT_EQ(parse_model_kind("mlp"), ModelKind::Mlp);
    EXPECT_EQ(to_string(ModelKind::Mlp), "mlp");
    EXPECT_THROW(parse_model_kind("cnn"), InputError);
}
