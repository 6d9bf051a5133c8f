#include "semlab/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "semlab/error.hpp"

namespace semlab {

std::string to_string(ModelKind kind) { return kind == ModelKind::Forest ? "rf" : "mlp"; }

ModelKind parse_model_kind(std::string_view text) {
    if (text == "rf" || text == "forest") return ModelKind::Forest;
    if (text == "mlp") return ModelKind::Mlp;
    throw InputError("unknown model kind '" + std::string(text) + "' (expected rf or mlp)");
}

void TrainingSet::validate() const {
    if (instances.empty()) throw InputError("training set is empty");
    if (instances.size() != targets.size()) throw InputError("training set has mismatched instance and target counts");
    if (!feature_schema) throw InputError("training set has no feature schema");
    if (label_order.empty()) throw InputError("training set has an empty label order");
    for (const auto& fv : instances) {
        if (fv.schema != feature_schema && (!fv.schema || *fv.schema != *feature_schema)) {
            throw ContractError("training instances do not share one feature schema");
        }
        if (fv.values.size() != feature_schema->size()) throw ContractError("training instance width differs from schema");
    }
}

Dataset TrainingSet::to_dataset() const {
    validate();
    std::map<std::string, int> position;
    for (std::size_t i = 0; i < label_order.size(); ++i) position[label_order[i].id()] = static_cast<int>(i);
    Dataset data;
    data.rows = instances.size();
    data.cols = feature_schema->size();
    data.classes = label_order.size();
    data.x.reserve(data.rows * data.cols);
    data.y.reserve(data.rows);
    for (std::size_t i = 0; i < instances.size(); ++i) {
        data.x.insert(data.x.end(), instances[i].values.begin(), instances[i].values.end());
        const auto it = position.find(targets[i].id());
        if (it == position.end()) throw InputError("target " + targets[i].id() + " is not in the label order");
        data.y.push_back(it->second);
    }
    return data;
}

TrainedModel::TrainedModel(std::variant<RandomForest, MlpModel> params, std::vector<SemanticLabel> label_order,
                           std::shared_ptr<const std::vector<std::string>> schema, FeatureContext context,
                           TrainingMetadata metadata)
    : params_(std::move(params)),
      label_order_(std::move(label_order)),
      schema_(std::move(schema)),
      context_(std::move(context)),
      metadata_(std::move(metadata)) {}

Featurizer TrainedModel::featurizer() const {
    return Featurizer(context_.feature_set, &context_.profiles, context_.name_options);
}

namespace {

template <typename Fit>
TrainedModel fit_model(const TrainingSet& data, FeatureContext context, nlohmann::json config_echo,
                       std::uint64_t seed, Fit&& fit) {
    const auto start = std::chrono::steady_clock::now();
    Dataset dataset = data.to_dataset();
    auto params = fit(dataset);
    TrainingMetadata meta;
    meta.config = std::move(config_echo);
    meta.seed = seed;
    meta.instances = data.instances.size();
    meta.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return TrainedModel(std::move(params), data.label_order, data.feature_schema, std::move(context), std::move(meta));
}

}  // namespace

TrainedModel train_forest(const TrainingSet& data, const ForestConfig& cfg, FeatureContext context,
                          nlohmann::json config_echo) {
    return fit_model(data, std::move(context), std::move(config_echo), cfg.seed,
                     [&](const Dataset& d) { return std::variant<RandomForest, MlpModel>(train_random_forest(d, cfg)); });
}

TrainedModel train_mlp(const TrainingSet& data, const MlpConfig& cfg, FeatureContext context,
                       nlohmann::json config_echo) {
    return fit_model(data, std::move(context), std::move(config_echo), cfg.seed,
                     [&](const Dataset& d) { return std::variant<RandomForest, MlpModel>(semlab::train_mlp(d, cfg)); });
}

std::vector<double> predict_proba(const TrainedModel& model, const FeatureVector& fv) {
    const bool same_schema = fv.schema == model.shared_schema() || (fv.schema && *fv.schema == model.feature_schema());
    if (!same_schema) {
        throw ContractError("feature schema mismatch: model expects " + std::to_string(model.feature_schema().size()) +
                            " features (" + to_string(model.context().feature_set) + "), got " +
                            std::to_string(fv.schema ? fv.schema->size() : 0) + " (" + to_string(fv.feature_set) + ")");
    }
    if (const auto* forest = model.forest()) return forest->predict_proba(fv.values);
    return model.mlp()->predict_proba(fv.values);
}

std::optional<std::size_t> PredictionRanking::rank_of(const SemanticLabel& label) const {
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (ranked[i].label == label) return i + 1;
    }
    return std::nullopt;
}

std::vector<RankedLabel> rank_labels(std::span<const SemanticLabel> label_order, std::span<const double> probabilities) {
    if (label_order.size() != probabilities.size()) {
        throw ContractError("probability vector length does not match the label order");
    }
    std::vector<RankedLabel> ranked;
    ranked.reserve(label_order.size());
    for (std::size_t i = 0; i < label_order.size(); ++i) ranked.push_back({label_order[i], probabilities[i]});
    std::sort(ranked.begin(), ranked.end(), [](const RankedLabel& a, const RankedLabel& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return a.label.id() < b.label.id();
    });
    return ranked;
}

PredictionRanking predict_attribute(const TrainedModel& model, const Attribute& attr,
                                    const std::optional<BagConfig>& predict_bagging) {
    if (attr.values.empty()) {
        throw InputError("attribute " + attr.source_name + "/" + attr.name + " has no values");
    }
    const Featurizer featurizer = model.featurizer();
    const std::vector<double> names = featurizer.name_block(attr.name);

    std::vector<double> probabilities;
    if (!predict_bagging) {
        probabilities = predict_proba(model, featurizer.from_values(attr.values, names));
    } else {
        const auto bags =
            make_bags(attr, *predict_bagging, bag_stream_id(attr.source_name, attr.name, SamplingPhase::Predict));
        std::vector<FeatureJob> jobs;
        jobs.reserve(bags.size());
        for (const auto& bag : bags) jobs.push_back({bag.values, names});
        const auto vectors = featurize_batch(featurizer, jobs);
        std::vector<std::vector<double>> per_bag;
        per_bag.reserve(vectors.size());
        for (const auto& fv : vectors) per_bag.push_back(predict_proba(model, fv));
        probabilities = aggregate_bag_predictions(per_bag);
    }

    PredictionRanking ranking;
    ranking.attribute = {attr.source_name, attr.name};
    ranking.ranked = rank_labels(model.label_order(), probabilities);
    return ranking;
}

PredictionRanking predict_attribute(const TrainedModel& model, const Attribute& attr, const ClassProfileIndex& index,
                                    FeatureSet set, const std::optional<BagConfig>& predict_bagging) {
    if (set != model.context().feature_set) {
        throw ContractError("feature set " + to_string(set) + " does not match the model's " +
                            to_string(model.context().feature_set));
    }
    if (set != FeatureSet::Base && !(index == model.context().profiles)) {
        throw ContractError("class profile index differs from the one the model was trained with");
    }
    return predict_attribute(model, attr, predict_bagging);
}

}  // namespace semlab
