#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semlab/corpus.hpp"

namespace semlab {

// ---------------------------------------------------------------------------
// Character distribution

/// ASCII 0x09-0x0D followed by the printable range 0x20-0x7E.
inline constexpr std::size_t kVocabularySize = 100;

/// Vocabulary slot of a code point, or -1 when it is out of vocabulary.
constexpr int vocabulary_index(char32_t c) {
    if (c >= 0x09 && c <= 0x0D) return static_cast<int>(c - 0x09);
    if (c >= 0x20 && c <= 0x7E) return static_cast<int>(c - 0x20) + 5;
    return -1;
}

constexpr char vocabulary_char(std::size_t index) {
    return index < 5 ? static_cast<char>(0x09 + index) : static_cast<char>(0x20 + index - 5);
}

struct CharProfile {
    std::array<double, kVocabularySize> dist{};
    double entropy = 0.0;  // bits
    std::size_t total_chars = 0;
    std::size_t skipped_chars = 0;  // out-of-vocabulary code points

    friend bool operator==(const CharProfile&, const CharProfile&) = default;
};

CharProfile char_profile(std::span<const std::string> values);

/// -sum p log2 p over the nonzero entries.
double shannon_entropy(std::span<const double> probabilities);

// ---------------------------------------------------------------------------
// Column statistics

inline constexpr std::size_t kStatFeatureCount = 26;

/// Names of the column statistics in vector order.
const std::array<std::string_view, kStatFeatureCount>& stat_feature_names();

struct StatFeatures {
    double row_count = 0;
    double unique_ratio = 0;
    double empty_ratio = 0;
    double length_min = 0;
    double length_max = 0;
    double length_mean = 0;
    double length_median = 0;
    double length_std = 0;
    double whitespace_total = 0;
    double whitespace_mean = 0;
    double alpha_ratio = 0;
    double digit_ratio = 0;
    double punctuation_ratio = 0;
    double uppercase_ratio = 0;
    double numeric_ratio = 0;
    double date_ratio = 0;
    double numeric_mean = 0;
    double numeric_min = 0;
    double numeric_max = 0;
    double numeric_std = 0;
    double negative_ratio = 0;
    double integer_ratio = 0;
    double value_entropy = 0;
    double tokens_mean = 0;
    double single_char_ratio = 0;
    double all_caps_ratio = 0;

    std::array<double, kStatFeatureCount> as_array() const;
};

StatFeatures stat_features(const Attribute& attr);
StatFeatures stat_features(std::span<const std::string> values);

/// Optional sign, comma thousands separators, decimal point. Surrounding
/// ASCII whitespace is ignored.
std::optional<double> parse_number(std::string_view text);

/// Digit-group dates: d-m-y, d/m/y, d.m.y with a 2- or 4-digit year, and
/// ISO-style y-m-d with a 4-digit year.
bool looks_like_date(std::string_view text);

// ---------------------------------------------------------------------------
// String similarity

/// Unit-cost insert/delete/substitute distance over Unicode scalar values.
std::size_t levenshtein(std::string_view a, std::string_view b);

struct AlignmentScoring {
    int match = 2;
    int mismatch = -1;
    int gap = -2;
};

/// Global alignment score.
long needleman_wunsch(std::string_view a, std::string_view b, const AlignmentScoring& scoring = {});

// ---------------------------------------------------------------------------
// Class profiles

struct Representative {
    std::string name;
    AttributeKey owner;
};

struct ClassProfile {
    SemanticLabel label = SemanticLabel::unknown();
    std::array<double, kVocabularySize> mean_dist{};
    std::vector<Representative> representatives;
};

/// Per-label mean character distribution and attribute names, in label
/// identifier order.
class ClassProfileIndex {
public:
    ClassProfileIndex() = default;
    explicit ClassProfileIndex(std::vector<ClassProfile> classes);

    const std::vector<ClassProfile>& classes() const { return classes_; }
    std::vector<SemanticLabel> labels() const;
    std::size_t size() const { return classes_.size(); }
    bool empty() const { return classes_.empty(); }

    friend bool operator==(const ClassProfileIndex& a, const ClassProfileIndex& b);

private:
    std::vector<ClassProfile> classes_;
};

struct TrainingAttribute {
    const Attribute* attribute;
    SemanticLabel label;
};

ClassProfileIndex build_class_profiles(std::span<const TrainingAttribute> train);

/// Cosine similarity against every class mean, in index order.
std::vector<double> cosine_features(const CharProfile& profile, const ClassProfileIndex& index);

struct NameFeatureOptions {
    std::size_t k = 3;
    AlignmentScoring scoring{};
};

struct NameFeatures {
    std::vector<double> min_edit;      // normalized to [0, 1]
    std::vector<double> knn_alignment; // normalized to [0, 1]
};

/// `exclude` drops representatives owned by that attribute, so a training
/// attribute is never compared with its own name.
NameFeatures name_features(std::string_view name, const ClassProfileIndex& index,
                           const NameFeatureOptions& options = {},
                           const std::optional<AttributeKey>& exclude = std::nullopt);

// ---------------------------------------------------------------------------
// Feature vectors

enum class FeatureSet { Base, BasePlus, All };

std::string to_string(FeatureSet set);
FeatureSet parse_feature_set(std::string_view text);

/// Feature names in vector order; depends only on the set and label order.
std::vector<std::string> feature_schema(FeatureSet set, std::span<const SemanticLabel> labels);

struct FeatureVector {
    FeatureSet feature_set = FeatureSet::Base;
    std::vector<double> values;
    // Shared across every vector built against the same index.
    std::shared_ptr<const std::vector<std::string>> schema;
};

/// Builds feature vectors against one ClassProfileIndex and caches the
/// schema so vectors share it.
class Featurizer {
public:
    Featurizer(FeatureSet set, const ClassProfileIndex* index, NameFeatureOptions name_options = {});

    FeatureSet feature_set() const { return set_; }
    const std::shared_ptr<const std::vector<std::string>>& schema() const { return schema_; }
    std::size_t width() const { return schema_->size(); }

    /// Name-derived block for an attribute name; identical for every bag of
    /// one attribute, so callers may compute it once and reuse it.
    std::vector<double> name_block(std::string_view name,
                                   const std::optional<AttributeKey>& exclude = std::nullopt) const;

    /// Vector for a set of cell values plus a precomputed name block.
    FeatureVector from_values(std::span<const std::string> values, std::span<const double> name_block) const;

    FeatureVector operator()(const Attribute& attr,
                             const std::optional<AttributeKey>& exclude = std::nullopt) const;

private:
    FeatureSet set_;
    const ClassProfileIndex* index_;
    NameFeatureOptions name_options_;
    std::shared_ptr<const std::vector<std::string>> schema_;
};

FeatureVector assemble(const Attribute& attr, FeatureSet set, const ClassProfileIndex& index);

/// One featurization job: a value list (a whole attribute or one bag) and
/// the name block of its parent attribute.
struct FeatureJob {
    std::span<const std::string> values;
    std::span<const double> name_block;
};

/// OpenMP kernel: featurize many jobs, output in job order.
std::vector<FeatureVector> featurize_batch(const Featurizer& featurizer, std::span<const FeatureJob> jobs);
/// Serial reference for featurize_batch.
std::vector<FeatureVector> featurize_batch_serial(const Featurizer& featurizer, std::span<const FeatureJob> jobs);

}  // namespace semlab
