#include "semlab/pipeline.hpp"

#include <set>

#include "semlab/error.hpp"
#include "semlab/rng.hpp"

namespace semlab {

using json = nlohmann::json;

void PipelineConfig::validate() const {
    if (predict_bagging && !bagging) throw InputError("prediction bagging requires a bag configuration");
    if (bagging) bagging->validate();
    if (rebalance_attributes && rebalance == RebalanceStrategy::None) {
        throw InputError("attribute-level rebalancing needs a rebalance strategy");
    }
    forest.validate();
    mlp.validate();
    if (names.k < 1) throw InputError("name feature k must be at least 1");
}

std::optional<BagConfig> PipelineConfig::effective_bagging() const {
    if (!bagging) return std::nullopt;
    BagConfig b = *bagging;
    b.seed = derive_seed(seed, 1);
    return b;
}

ForestConfig PipelineConfig::effective_forest() const {
    ForestConfig f = forest;
    f.seed = derive_seed(seed, 2);
    return f;
}

MlpConfig PipelineConfig::effective_mlp() const {
    MlpConfig m = mlp;
    m.seed = derive_seed(seed, 3);
    return m;
}

json to_json(const PipelineConfig& cfg) {
    json doc;
    doc["model"] = to_string(cfg.model);
    doc["features"] = to_string(cfg.features);
    if (cfg.bagging) {
        doc["bagging"] = {{"num_bags", cfg.bagging->num_bags}, {"bag_size", cfg.bagging->bag_size}};
    } else {
        doc["bagging"] = nullptr;
    }
    doc["predict_bagging"] = cfg.predict_bagging;
    doc["rebalance"] = to_string(cfg.rebalance);
    doc["rebalance_level"] = cfg.rebalance_attributes ? "attribute" : "instance";
    doc["include_unknown"] = cfg.include_unknown;
    doc["seed"] = cfg.seed;
    doc["forest"] = {{"n_trees", cfg.forest.n_trees},
                     {"max_depth", cfg.forest.max_depth ? json(*cfg.forest.max_depth) : json(nullptr)},
                     {"min_samples_leaf", cfg.forest.min_samples_leaf},
                     {"features_per_split",
                      cfg.forest.features_per_split ? json(*cfg.forest.features_per_split) : json(nullptr)},
                     {"leaf_smoothing", cfg.forest.leaf_smoothing}};
    doc["mlp"] = {{"hidden_layers", cfg.mlp.hidden_layers}, {"dropout", cfg.mlp.dropout},
                  {"epochs", cfg.mlp.epochs},               {"batch_size", cfg.mlp.batch_size},
                  {"learning_rate", cfg.mlp.learning_rate}, {"momentum", cfg.mlp.momentum}};
    doc["names"] = {{"k", cfg.names.k},
                    {"match", cfg.names.scoring.match},
                    {"mismatch", cfg.names.scoring.mismatch},
                    {"gap", cfg.names.scoring.gap}};
    return doc;
}

PipelineConfig pipeline_config_from_json(const json& doc, PipelineConfig cfg) {
    if (!doc.is_object()) throw InputError("pipeline configuration must be a JSON object");
    try {
        if (doc.contains("model")) cfg.model = parse_model_kind(doc["model"].get<std::string>());
        if (doc.contains("features")) cfg.features = parse_feature_set(doc["features"].get<std::string>());
        if (doc.contains("bagging")) {
            if (doc["bagging"].is_null()) {
                cfg.bagging.reset();
            } else {
                BagConfig b = cfg.bagging.value_or(BagConfig{});
                b.num_bags = doc["bagging"].value("num_bags", b.num_bags);
                b.bag_size = doc["bagging"].value("bag_size", b.bag_size);
                cfg.bagging = b;
            }
        }
        // Flat aliases, matching the command-line flag names.
        if (doc.contains("num_bags") || doc.contains("bag_size")) {
            BagConfig b = cfg.bagging.value_or(BagConfig{});
            b.num_bags = doc.value("num_bags", b.num_bags);
            b.bag_size = doc.value("bag_size", b.bag_size);
            cfg.bagging = b;
        }
        if (doc.contains("predict_bagging")) cfg.predict_bagging = doc["predict_bagging"].get<bool>();
        if (doc.contains("rebalance")) cfg.rebalance = parse_rebalance(doc["rebalance"].get<std::string>());
        if (doc.contains("rebalance_level")) {
            const auto level = doc["rebalance_level"].get<std::string>();
            if (level != "attribute" && level != "instance") {
                throw InputError("rebalance_level must be 'instance' or 'attribute'");
            }
            cfg.rebalance_attributes = level == "attribute";
        }
        if (doc.contains("include_unknown")) cfg.include_unknown = doc["include_unknown"].get<bool>();
        if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("forest")) {
            const json& f = doc["forest"];
            cfg.forest.n_trees = f.value("n_trees", cfg.forest.n_trees);
            if (f.contains("max_depth")) {
                cfg.forest.max_depth = f["max_depth"].is_null() ? std::nullopt
                                                                : std::optional<std::size_t>(f["max_depth"].get<std::size_t>());
            }
            cfg.forest.min_samples_leaf = f.value("min_samples_leaf", cfg.forest.min_samples_leaf);
            if (f.contains("features_per_split")) {
                cfg.forest.features_per_split =
                    f["features_per_split"].is_null() ? std::nullopt
                                                      : std::optional<std::size_t>(f["features_per_split"].get<std::size_t>());
            }
            cfg.forest.leaf_smoothing = f.value("leaf_smoothing", cfg.forest.leaf_smoothing);
        }
        if (doc.contains("mlp")) {
            const json& m = doc["mlp"];
            if (m.contains("hidden_layers")) cfg.mlp.hidden_layers = m["hidden_layers"].get<std::vector<std::size_t>>();
            cfg.mlp.dropout = m.value("dropout", cfg.mlp.dropout);
            cfg.mlp.epochs = m.value("epochs", cfg.mlp.epochs);
            cfg.mlp.batch_size = m.value("batch_size", cfg.mlp.batch_size);
            cfg.mlp.learning_rate = m.value("learning_rate", cfg.mlp.learning_rate);
            cfg.mlp.momentum = m.value("momentum", cfg.mlp.momentum);
        }
        if (doc.contains("names")) {
            const json& n = doc["names"];
            cfg.names.k = n.value("k", cfg.names.k);
            cfg.names.scoring.match = n.value("match", cfg.names.scoring.match);
            cfg.names.scoring.mismatch = n.value("mismatch", cfg.names.scoring.mismatch);
            cfg.names.scoring.gap = n.value("gap", cfg.names.scoring.gap);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("invalid pipeline configuration: ") + e.what());
    }
    return cfg;
}

std::vector<LabeledAttribute> training_attributes(const LabeledCorpus& corpus, std::span<const std::size_t> sources,
                                                  bool include_unknown) {
    std::vector<LabeledAttribute> out;
    for (std::size_t s : sources) {
        for (const auto& attr : corpus.sources.at(s).attributes) {
            const SemanticLabel& label = corpus.label_of(attr);
            if (label.is_unknown() && !include_unknown) continue;
            out.push_back({&attr, label});
        }
    }
    return out;
}

TrainOutcome train_pipeline(std::span<const LabeledAttribute> train, const PipelineConfig& cfg) {
    cfg.validate();
    if (train.empty()) throw InputError("no training attributes");

    std::set<SemanticLabel> distinct;
    for (const auto& t : train) distinct.insert(t.label);
    if (distinct.size() < 2) throw InputError("training split has fewer than 2 classes");
    std::vector<SemanticLabel> label_order(distinct.begin(), distinct.end());

    FeatureContext context;
    context.feature_set = cfg.features;
    context.name_options = cfg.names;
    context.training_bags = cfg.bagging;
    if (cfg.features != FeatureSet::Base) {
        std::vector<TrainingAttribute> members;
        members.reserve(train.size());
        for (const auto& t : train) members.push_back({t.attribute, t.label});
        context.profiles = build_class_profiles(members);
    }
    const Featurizer featurizer(context.feature_set, &context.profiles, context.name_options);

    // Attribute-level rebalancing duplicates whole attributes; each copy gets
    // its own bag stream.
    std::vector<std::size_t> chosen(train.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
    if (cfg.rebalance_attributes) {
        std::vector<SemanticLabel> labels;
        for (const auto& t : train) labels.push_back(t.label);
        chosen = rebalance_indices(labels, cfg.rebalance, derive_seed(cfg.seed, 4));
    }

    std::vector<std::vector<double>> name_blocks(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const Attribute& a = *train[i].attribute;
        name_blocks[i] = featurizer.name_block(a.name, AttributeKey{a.source_name, a.name});
    }

    std::vector<FeatureJob> jobs;
    std::vector<std::size_t> job_owner;
    std::vector<std::vector<Bag>> bags;
    if (const auto bag_cfg = cfg.effective_bagging()) {
        std::vector<const Attribute*> attrs;
        std::vector<std::uint64_t> streams;
        std::map<std::size_t, std::uint64_t> copies;
        for (std::size_t i : chosen) {
            const Attribute& a = *train[i].attribute;
            const std::uint64_t copy = copies[i]++;
            attrs.push_back(&a);
            streams.push_back(bag_stream_id(a.source_name, a.name, SamplingPhase::Train) ^ (copy ? mix64(copy) : 0));
        }
        bags = make_bags_batch(attrs, *bag_cfg, streams);
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            for (const auto& bag : bags[k]) {
                jobs.push_back({bag.values, name_blocks[chosen[k]]});
                job_owner.push_back(chosen[k]);
            }
        }
    } else {
        for (std::size_t i : chosen) {
            if (train[i].attribute->values.empty()) {
                throw InputError("attribute " + train[i].attribute->source_name + "/" + train[i].attribute->name +
                                 " has no values");
            }
            jobs.push_back({train[i].attribute->values, name_blocks[i]});
            job_owner.push_back(i);
        }
    }

    std::vector<FeatureVector> vectors = featurize_batch(featurizer, jobs);
    std::vector<SemanticLabel> targets;
    targets.reserve(job_owner.size());
    for (std::size_t owner : job_owner) targets.push_back(train[owner].label);

    std::vector<std::size_t> keep(vectors.size());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    if (!cfg.rebalance_attributes) keep = rebalance_indices(targets, cfg.rebalance, derive_seed(cfg.seed, 4));

    TrainingSet set;
    set.label_order = label_order;
    set.feature_schema = featurizer.schema();
    set.instances.reserve(keep.size());
    set.targets.reserve(keep.size());
    TrainOutcome outcome{.model = TrainedModel({}, {}, nullptr, {}, {}), .provenance = {}, .class_counts = {},
                         .attributes = train.size()};
    for (std::size_t i : keep) {
        set.instances.push_back(vectors[i]);
        set.targets.push_back(targets[i]);
        const Attribute& a = *train[job_owner[i]].attribute;
        outcome.provenance.push_back({a.source_name, a.name});
        ++outcome.class_counts[targets[i].id()];
    }

    json echo = to_json(cfg);
    if (cfg.model == ModelKind::Forest) {
        outcome.model = train_forest(set, cfg.effective_forest(), std::move(context), std::move(echo));
    } else {
        outcome.model = train_mlp(set, cfg.effective_mlp(), std::move(context), std::move(echo));
    }
    return outcome;
}

}  // namespace semlab
