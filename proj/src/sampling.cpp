#include "semlab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "semlab/error.hpp"
#include "semlab/rng.hpp"

namespace semlab {

void BagConfig::validate() const {
    if (num_bags < 1) throw InputError("num_bags must be at least 1");
    if (bag_size < 1) throw InputError("bag_size must be at least 1");
}

std::uint64_t bag_stream_id(std::string_view source, std::string_view attribute, SamplingPhase phase) {
    std::uint64_t h = fnv1a(source);
    h = fnv1a(std::string_view("\x1f", 1), h);
    h = fnv1a(attribute, h);
    h = fnv1a(phase == SamplingPhase::Train ? std::string_view("\x1ftrain") : std::string_view("\x1fpredict"), h);
    return h;
}

std::vector<Bag> make_bags(const Attribute& attr, const BagConfig& cfg, std::uint64_t stream_id) {
    cfg.validate();
    if (attr.values.empty()) {
        throw InputError("cannot bag empty attribute " + attr.source_name + "/" + attr.name);
    }
    Rng rng(derive_seed(cfg.seed, stream_id));
    std::vector<Bag> bags(cfg.num_bags);
    for (auto& bag : bags) {
        bag.parent = {attr.source_name, attr.name};
        bag.name = attr.name;
        bag.values.reserve(cfg.bag_size);
        for (std::size_t i = 0; i < cfg.bag_size; ++i) bag.values.push_back(attr.values[rng.below(attr.values.size())]);
    }
    return bags;
}

std::vector<std::vector<Bag>> make_bags_batch(std::span<const Attribute* const> attrs, const BagConfig& cfg,
                                              std::span<const std::uint64_t> stream_ids) {
    if (attrs.size() != stream_ids.size()) throw InputError("one stream id per attribute is required");
    cfg.validate();
    std::vector<std::vector<Bag>> out(attrs.size());
    std::vector<std::string> errors(attrs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        try {
            out[i] = make_bags(*attrs[i], cfg, stream_ids[i]);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw InputError(e);
    }
    return out;
}

std::vector<std::vector<Bag>> make_bags_batch_serial(std::span<const Attribute* const> attrs, const BagConfig& cfg,
                                                     std::span<const std::uint64_t> stream_ids) {
    if (attrs.size() != stream_ids.size()) throw InputError("one stream id per attribute is required");
    std::vector<std::vector<Bag>> out;
    out.reserve(attrs.size());
    for (std::size_t i = 0; i < attrs.size(); ++i) out.push_back(make_bags(*attrs[i], cfg, stream_ids[i]));
    return out;
}

std::string to_string(RebalanceStrategy strategy) {
    switch (strategy) {
        case RebalanceStrategy::None: return "none";
        case RebalanceStrategy::ResampleToMean: return "mean";
        case RebalanceStrategy::ResampleToMax: return "max";
    }
    return "none";
}

RebalanceStrategy parse_rebalance(std::string_view text) {
    if (text == "none") return RebalanceStrategy::None;
    if (text == "mean") return RebalanceStrategy::ResampleToMean;
    if (text == "max") return RebalanceStrategy::ResampleToMax;
    throw InputError("unknown rebalance strategy '" + std::string(text) + "' (expected none, mean or max)");
}

// Relies on the default FE_TONEAREST mode, which rounds ties to even.
long round_half_even(double x) { return std::lrint(x); }

std::vector<std::size_t> rebalance_indices(std::span<const SemanticLabel> labels, RebalanceStrategy strategy,
                                           std::uint64_t seed) {
    std::vector<std::size_t> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    if (strategy == RebalanceStrategy::None) return all;
    if (labels.empty()) throw InputError("cannot rebalance an empty instance set");

    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i].id()].push_back(i);

    std::size_t max_count = 0;
    for (const auto& [id, idx] : members) max_count = std::max(max_count, idx.size());
    const std::size_t target =
        strategy == RebalanceStrategy::ResampleToMax
            ? max_count
            : static_cast<std::size_t>(round_half_even(static_cast<double>(labels.size()) /
                                                       static_cast<double>(members.size())));

    Rng rng(derive_seed(seed, 0x5eba1a9ceULL));
    std::vector<bool> keep(labels.size(), true);
    std::vector<std::size_t> extra;
    for (auto& [id, idx] : members) {
        if (idx.size() > target) {
            // Partial Fisher-Yates: the first `target` slots form the kept sample.
            std::vector<std::size_t> pool = idx;
            for (std::size_t i = 0; i < target; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
            for (std::size_t i = target; i < pool.size(); ++i) keep[pool[i]] = false;
        } else {
            for (std::size_t i = idx.size(); i < target; ++i) extra.push_back(idx[rng.below(idx.size())]);
        }
    }
    std::vector<std::size_t> out;
    out.reserve(labels.size() + extra.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (keep[i]) out.push_back(i);
    }
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
}

std::vector<LabeledInstance> rebalance(std::vector<LabeledInstance> instances, RebalanceStrategy strategy,
                                       std::uint64_t seed) {
    if (instances.empty()) throw InputError("cannot rebalance an empty instance set");
    if (strategy == RebalanceStrategy::None) return instances;
    std::vector<SemanticLabel> labels;
    labels.reserve(instances.size());
    for (const auto& inst : instances) labels.push_back(inst.second);
    const auto order = rebalance_indices(labels, strategy, seed);
    std::vector<LabeledInstance> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back(instances[i]);
    return out;
}

std::vector<double> aggregate_bag_predictions(std::span<const std::vector<double>> per_bag) {
    if (per_bag.empty()) throw InputError("no bag predictions to aggregate");
    const std::size_t width = per_bag.front().size();
    std::vector<double> mean(width, 0.0);
    for (const auto& p : per_bag) {
        if (p.size() != width) {
            throw InputError("bag prediction length " + std::to_string(p.size()) + " differs from " +
                             std::to_string(width));
        }
        for (std::size_t i = 0; i < width; ++i) mean[i] += p[i];
    }
    for (double& v : mean) v /= static_cast<double>(per_bag.size());
    return mean;
}

}  // namespace semlab
