#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "semlab/corpus.hpp"
#include "semlab/rng.hpp"

namespace semlab {

/// Value generators with distinct character signatures. Label i of a
/// synthetic corpus uses kind i modulo the number of kinds.
enum class SignatureKind {
    Date,
    PersonName,
    Integer,
    Acronym,
    Email,
    Phone,
    Price,
    CityName,
    PostCode,
    TimeOfDay,
    Url,
    Percentage,
};

inline constexpr int kSignatureKinds = 12;

struct SynthesisSpec {
    int sources = 10;
    int labels = 8;
    int rows_min = 200;
    int rows_max = 500;
    int columns_min = 6;
    int columns_max = 10;
    double unknown_frac = 0.1;
    /// Relative attribute-count weight per label index; missing entries weigh 1.
    std::map<int, double> imbalance;

    /// Throws InputError when the spec cannot produce a corpus.
    void validate() const;
};

SynthesisSpec parse_synthesis_spec(const std::string& json_text);

/// Label used for synthetic label index `i`.
SemanticLabel synthetic_label(int index);

/// Single value from a signature generator.
std::string synthesize_value(SignatureKind kind, Rng& rng);

/// Deterministic for a fixed (spec, seed).
LabeledCorpus generate_synthetic(const SynthesisSpec& spec, std::uint64_t seed);

/// Largest-remainder apportionment of `total` slots to the given weights.
std::vector<int> apportion(int total, const std::vector<double>& weights);

}  // namespace semlab
