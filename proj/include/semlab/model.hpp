#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "semlab/featurize.hpp"
#include "semlab/forest.hpp"
#include "semlab/mlp.hpp"
#include "semlab/sampling.hpp"

namespace semlab {

struct TrainingSet {
    std::vector<FeatureVector> instances;
    std::vector<SemanticLabel> targets;
    std::vector<SemanticLabel> label_order;
    std::shared_ptr<const std::vector<std::string>> feature_schema;

    /// Checks the size, schema and label invariants.
    void validate() const;
    /// Dense matrix with targets as positions in label_order.
    Dataset to_dataset() const;
};

enum class ModelKind { Forest, Mlp };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// Everything needed to featurize new attributes the way the training data
/// was featurized.
struct FeatureContext {
    FeatureSet feature_set = FeatureSet::Base;
    ClassProfileIndex profiles;
    NameFeatureOptions name_options;
    std::optional<BagConfig> training_bags;
};

struct TrainingMetadata {
    nlohmann::json config = nlohmann::json::object();  // echo of the training configuration
    std::uint64_t seed = 0;
    std::size_t instances = 0;
    double train_seconds = 0.0;  // in-memory only; not persisted
};

class TrainedModel {
public:
    ModelKind kind() const { return std::holds_alternative<RandomForest>(params_) ? ModelKind::Forest : ModelKind::Mlp; }
    const std::vector<SemanticLabel>& label_order() const { return label_order_; }
    const std::vector<std::string>& feature_schema() const { return *schema_; }
    const std::shared_ptr<const std::vector<std::string>>& shared_schema() const { return schema_; }
    const FeatureContext& context() const { return context_; }
    const TrainingMetadata& metadata() const { return metadata_; }
    const RandomForest* forest() const { return std::get_if<RandomForest>(&params_); }
    const MlpModel* mlp() const { return std::get_if<MlpModel>(&params_); }

    /// Featurizer bound to this model's profile index.
    Featurizer featurizer() const;

    TrainedModel(std::variant<RandomForest, MlpModel> params, std::vector<SemanticLabel> label_order,
                 std::shared_ptr<const std::vector<std::string>> schema, FeatureContext context,
                 TrainingMetadata metadata);

private:
    std::variant<RandomForest, MlpModel> params_;
    std::vector<SemanticLabel> label_order_;
    std::shared_ptr<const std::vector<std::string>> schema_;
    FeatureContext context_;
    TrainingMetadata metadata_;
};

TrainedModel train_forest(const TrainingSet& data, const ForestConfig& cfg, FeatureContext context = {},
                          nlohmann::json config_echo = nlohmann::json::object());
TrainedModel train_mlp(const TrainingSet& data, const MlpConfig& cfg, FeatureContext context = {},
                       nlohmann::json config_echo = nlohmann::json::object());

/// Probability vector over model.label_order(). Throws ContractError when
/// the vector's schema differs from the model's.
std::vector<double> predict_proba(const TrainedModel& model, const FeatureVector& fv);

struct RankedLabel {
    SemanticLabel label;
    double probability = 0.0;
};

/// Labels ranked for one attribute, probabilities non-increasing.
struct PredictionRanking {
    AttributeKey attribute;
    std::vector<RankedLabel> ranked;
    std::optional<SemanticLabel> truth;

    /// 1-based position of `label`, or nullopt when it is not ranked.
    std::optional<std::size_t> rank_of(const SemanticLabel& label) const;
};

/// Sorts by descending probability; ties go to the smaller label identifier.
std::vector<RankedLabel> rank_labels(std::span<const SemanticLabel> label_order, std::span<const double> probabilities);

PredictionRanking predict_attribute(const TrainedModel& model, const Attribute& attr,
                                    const std::optional<BagConfig>& predict_bagging = std::nullopt);

/// Variant with an explicit index and feature set, which must agree with the
/// model's.
PredictionRanking predict_attribute(const TrainedModel& model, const Attribute& attr, const ClassProfileIndex& index,
                                    FeatureSet set, const std::optional<BagConfig>& predict_bagging);

// ---------------------------------------------------------------------------
// Persistence

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(const std::string& bytes);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

nlohmann::json model_to_json(const TrainedModel& model);

}  // namespace semlab
