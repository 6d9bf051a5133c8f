#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semlab/model.hpp"

namespace semlab {

/// End-to-end training and prediction settings shared by the train command
/// and every benchmark fold.
struct PipelineConfig {
    ModelKind model = ModelKind::Forest;
    FeatureSet features = FeatureSet::All;
    std::optional<BagConfig> bagging;  // training-time bags; none trains on whole attributes
    bool predict_bagging = false;      // reuse `bagging` at prediction time
    RebalanceStrategy rebalance = RebalanceStrategy::None;
    bool rebalance_attributes = false; // rebalance attributes before bagging instead of instances after
    bool include_unknown = true;
    std::uint64_t seed = 0;
    ForestConfig forest;
    MlpConfig mlp;
    NameFeatureOptions names;

    /// Throws InputError on inconsistent settings.
    void validate() const;
    /// Seeds of the bag config, forest and MLP are derived from `seed`.
    std::optional<BagConfig> effective_bagging() const;
    ForestConfig effective_forest() const;
    MlpConfig effective_mlp() const;
};

nlohmann::json to_json(const PipelineConfig& cfg);
/// Overlays the fields present in `doc` onto `base`.
PipelineConfig pipeline_config_from_json(const nlohmann::json& doc, PipelineConfig base = {});

struct LabeledAttribute {
    const Attribute* attribute;
    SemanticLabel label;
};

struct TrainOutcome {
    TrainedModel model;
    /// Parent attribute of every training instance, in instance order.
    std::vector<AttributeKey> provenance;
    std::map<std::string, std::size_t> class_counts;  // instances per label id
    std::size_t attributes = 0;
};

/// Selects the training attributes honoring include_unknown.
std::vector<LabeledAttribute> training_attributes(const LabeledCorpus& corpus, std::span<const std::size_t> sources,
                                                  bool include_unknown);

/// Builds class profiles, bags, features and rebalanced instances from the
/// given attributes and fits the configured model.
TrainOutcome train_pipeline(std::span<const LabeledAttribute> train, const PipelineConfig& cfg);

}  // namespace semlab
