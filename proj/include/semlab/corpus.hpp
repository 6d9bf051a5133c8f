#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace semlab {

/// One column of a data source: header name plus raw cell text.
struct Attribute {
    std::string name;
    std::vector<std::string> values;
    std::string source_name;

    friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// A (class, property) pair from the target ontology, or the distinguished
/// unknown label.
class SemanticLabel {
public:
    static SemanticLabel known(std::string cls, std::string property);
    static SemanticLabel unknown() { return SemanticLabel{}; }

    bool is_unknown() const { return !known_; }
    const std::string& cls() const { return class_; }
    const std::string& property() const { return property_; }

    /// Stable text identifier: "Class.property" or "unknown". Label orderings
    /// everywhere in the toolkit are the lexicographic order of this string.
    std::string id() const;

    /// Inverse of id(). Throws InputError on malformed text.
    static SemanticLabel from_id(const std::string& id);

    friend bool operator==(const SemanticLabel&, const SemanticLabel&) = default;
    friend bool operator<(const SemanticLabel& a, const SemanticLabel& b) { return a.id() < b.id(); }

private:
    SemanticLabel() = default;
    bool known_ = false;
    std::string class_;
    std::string property_;
};

struct DataSource {
    std::string name;
    std::vector<Attribute> attributes;

    std::size_t row_count() const { return attributes.empty() ? 0 : attributes.front().values.size(); }
    const Attribute* find(const std::string& attribute_name) const;

    friend bool operator==(const DataSource&, const DataSource&) = default;
};

/// (source name, attribute name)
using AttributeKey = std::pair<std::string, std::string>;
using LabelMap = std::map<AttributeKey, SemanticLabel>;

struct LabeledCorpus {
    std::vector<DataSource> sources;
    LabelMap labels;

    const SemanticLabel& label_of(const Attribute& attr) const;
    /// Distinct Known labels in identifier order.
    std::vector<SemanticLabel> known_labels() const;
    std::size_t attribute_count() const;

    friend bool operator==(const LabeledCorpus&, const LabeledCorpus&) = default;
};

// ---------------------------------------------------------------------------
// Ingestion

struct IngestOptions {
    char delimiter = ',';
    bool has_header = true;
};

/// Counters for repairs applied while loading a table.
struct LoadDiagnostics {
    std::size_t padded_rows = 0;     // rows shorter than the header
    std::size_t padded_cells = 0;
    std::size_t widened_rows = 0;    // rows longer than the header
    std::size_t renamed_headers = 0; // duplicate header names rewritten
};

DataSource load_source(const std::filesystem::path& path, const IngestOptions& options = {},
                       LoadDiagnostics* diagnostics = nullptr);

/// Parses delimiter-separated text already in memory. `name` becomes the
/// source name.
DataSource parse_source(const std::string& text, const std::string& name, const IngestOptions& options = {},
                        LoadDiagnostics* diagnostics = nullptr);

/// Writes a source as RFC-4180 CSV with a header row.
std::string format_source(const DataSource& source, char delimiter = ',');

LabelMap load_labels(const std::filesystem::path& path);
LabelMap parse_labels(const std::string& json_text);
std::string format_labels(const LabelMap& labels);

enum class UnlabeledPolicy { Strict, Lenient };

LabeledCorpus build_corpus(std::vector<DataSource> sources, const LabelMap& labels,
                           UnlabeledPolicy policy = UnlabeledPolicy::Strict);

/// Reads `<dir>/sources/*.csv` (sorted by file name) and `<dir>/labels.json`.
/// Sources load in parallel; the result is in file-name order.
LabeledCorpus load_corpus(const std::filesystem::path& dir, const IngestOptions& options = {},
                          UnlabeledPolicy policy = UnlabeledPolicy::Strict,
                          const std::optional<std::filesystem::path>& labels_path = std::nullopt);

void save_corpus(const LabeledCorpus& corpus, const std::filesystem::path& dir);

}  // namespace semlab
