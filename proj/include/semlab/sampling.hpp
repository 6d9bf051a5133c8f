#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semlab/corpus.hpp"
#include "semlab/featurize.hpp"

namespace semlab {

struct BagConfig {
    std::size_t num_bags = 100;
    std::size_t bag_size = 100;
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const BagConfig&, const BagConfig&) = default;
};

/// A sample (with replacement) of an attribute's cells. The name is the
/// parent's name, unperturbed.
struct Bag {
    AttributeKey parent;
    std::string name;
    std::vector<std::string> values;
};

enum class SamplingPhase { Train, Predict };

/// Stable stream identifier for an attribute's bag draws in one phase.
std::uint64_t bag_stream_id(std::string_view source, std::string_view attribute, SamplingPhase phase);

std::vector<Bag> make_bags(const Attribute& attr, const BagConfig& cfg, std::uint64_t stream_id);

/// OpenMP kernel over attributes; bags of attribute i come from stream
/// ids[i]. Output is grouped by attribute, in input order.
std::vector<std::vector<Bag>> make_bags_batch(std::span<const Attribute* const> attrs, const BagConfig& cfg,
                                              std::span<const std::uint64_t> stream_ids);
std::vector<std::vector<Bag>> make_bags_batch_serial(std::span<const Attribute* const> attrs, const BagConfig& cfg,
                                                     std::span<const std::uint64_t> stream_ids);

enum class RebalanceStrategy { None, ResampleToMean, ResampleToMax };

std::string to_string(RebalanceStrategy strategy);
RebalanceStrategy parse_rebalance(std::string_view text);

/// Round half to even.
long round_half_even(double x);

/// Indices into `labels` after rebalancing. Kept items stay in input order;
/// upsampled duplicates follow, grouped by class in identifier order.
std::vector<std::size_t> rebalance_indices(std::span<const SemanticLabel> labels, RebalanceStrategy strategy,
                                           std::uint64_t seed);

using LabeledInstance = std::pair<FeatureVector, SemanticLabel>;

std::vector<LabeledInstance> rebalance(std::vector<LabeledInstance> instances, RebalanceStrategy strategy,
                                       std::uint64_t seed);

/// Element-wise mean of per-bag probability vectors.
std::vector<double> aggregate_bag_predictions(std::span<const std::vector<double>> per_bag);

}  // namespace semlab
