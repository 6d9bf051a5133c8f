#include "semlab/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "semlab/error.hpp"
#include "semlab/utf8.hpp"

namespace semlab {

namespace fs = std::filesystem;
using json = nlohmann::json;

SemanticLabel SemanticLabel::known(std::string cls, std::string property) {
    if (cls.empty() || property.empty()) {
        throw InputError("semantic label needs a non-empty class and property");
    }
    SemanticLabel label;
    label.known_ = true;
    label.class_ = std::move(cls);
    label.property_ = std::move(property);
    return label;
}

std::string SemanticLabel::id() const {
    if (!known_) return "unknown";
    return class_ + "." + property_;
}

SemanticLabel SemanticLabel::from_id(const std::string& id) {
    if (id == "unknown") return unknown();
    const auto dot = id.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == id.size()) {
        throw InputError("malformed label identifier '" + id + "'");
    }
    return known(id.substr(0, dot), id.substr(dot + 1));
}

const Attribute* DataSource::find(const std::string& attribute_name) const {
    for (const auto& a : attributes) {
        if (a.name == attribute_name) return &a;
    }
    return nullptr;
}

const SemanticLabel& LabeledCorpus::label_of(const Attribute& attr) const {
    const auto it = labels.find({attr.source_name, attr.name});
    if (it == labels.end()) {
        throw InputError("no label for " + attr.source_name + "/" + attr.name);
    }
    return it->second;
}

std::vector<SemanticLabel> LabeledCorpus::known_labels() const {
    std::set<SemanticLabel> seen;
    for (const auto& [key, label] : labels) {
        if (!label.is_unknown()) seen.insert(label);
    }
    return {seen.begin(), seen.end()};
}

std::size_t LabeledCorpus::attribute_count() const {
    std::size_t n = 0;
    for (const auto& s : sources) n += s.attributes.size();
    return n;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

using Row = std::vector<std::string>;

// RFC-4180 reader. Blank lines are skipped; quoted fields may span lines.
std::vector<Row> read_records(const std::string& text, char delim) {
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;  // distinguishes `""` from an empty line
    std::size_t i = 0;
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        const bool blank = row.empty() && field.empty() && !field_started;
        if (!blank) {
            end_field();
            rows.push_back(std::move(row));
        }
        row.clear();
    };

    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
            field_started = true;
        } else if (c == delim) {
            end_field();
            field_started = true;  // a delimiter always implies a following field
        } else if (c == '\n') {
            end_row();
        } else if (c == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_row();
        } else {
            field.push_back(c);
        }
    }
    if (in_quotes) throw InputError("unterminated quoted field at end of input");
    end_row();
    return rows;
}

bool needs_quotes(const std::string& cell, char delim) {
    return cell.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string::npos;
}

void write_cell(std::string& out, const std::string& cell, char delim) {
    if (!needs_quotes(cell, delim)) {
        out += cell;
        return;
    }
    out.push_back('"');
    for (char c : cell) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

std::vector<std::string> dedupe_names(std::vector<std::string> names, std::size_t& renamed) {
    std::set<std::string> taken;
    std::unordered_map<std::string, int> next_suffix;
    for (auto& name : names) {
        if (!taken.contains(name)) {
            taken.insert(name);
            continue;
        }
        int& k = next_suffix[name];
        if (k < 2) k = 2;
        std::string candidate;
        do {
            candidate = name + "_" + std::to_string(k++);
        } while (taken.contains(candidate));
        name = candidate;
        taken.insert(name);
        ++renamed;
    }
    return names;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw InputError("I/O error reading " + path.string());
    return buf.str();
}

}  // namespace

DataSource parse_source(const std::string& text, const std::string& name, const IngestOptions& options,
                        LoadDiagnostics* diagnostics) {
    LoadDiagnostics diag;
    std::vector<Row> records = read_records(text, options.delimiter);

    for (std::size_t r = 0; r < records.size(); ++r) {
        for (std::size_t c = 0; c < records[r].size(); ++c) {
            if (auto bad = utf8::find_invalid(records[r][c])) {
                throw InputError("source " + name + ": undecodable UTF-8 at row " + std::to_string(r + 1) +
                                 ", column " + std::to_string(c + 1) + " (byte " + std::to_string(*bad) + ")");
            }
        }
    }

    std::vector<std::string> header;
    std::size_t first_data = 0;
    if (options.has_header && !records.empty()) {
        header = records.front();
        first_data = 1;
    }
    if (records.size() <= first_data) {
        throw InputError("source " + name + ": zero data rows");
    }

    std::size_t width = header.size();
    for (std::size_t r = first_data; r < records.size(); ++r) width = std::max(width, records[r].size());
    for (std::size_t c = header.size(); c < width; ++c) header.push_back("col_" + std::to_string(c + 1));
    header = dedupe_names(std::move(header), diag.renamed_headers);

    DataSource source;
    source.name = name;
    source.attributes.resize(width);
    for (std::size_t c = 0; c < width; ++c) {
        source.attributes[c].name = header[c];
        source.attributes[c].source_name = name;
        source.attributes[c].values.reserve(records.size() - first_data);
    }
    for (std::size_t r = first_data; r < records.size(); ++r) {
        Row& row = records[r];
        if (options.has_header && row.size() > records.front().size()) ++diag.widened_rows;
        if (row.size() < width) {
            ++diag.padded_rows;
            diag.padded_cells += width - row.size();
            row.resize(width);
        }
        for (std::size_t c = 0; c < width; ++c) source.attributes[c].values.push_back(std::move(row[c]));
    }
    if (diagnostics) *diagnostics = diag;
    return source;
}

DataSource load_source(const fs::path& path, const IngestOptions& options, LoadDiagnostics* diagnostics) {
    return parse_source(read_file(path), path.stem().string(), options, diagnostics);
}

std::string format_source(const DataSource& source, char delimiter) {
    std::string out;
    auto write_row = [&](auto cell_at) {
        const std::size_t n = source.attributes.size();
        bool all_empty = true;
        for (std::size_t c = 0; c < n; ++c) {
            if (c) out.push_back(delimiter);
            const std::string& cell = cell_at(c);
            all_empty = all_empty && cell.empty();
            write_cell(out, cell, delimiter);
        }
        // A lone empty cell would otherwise be a blank line, which readers skip.
        if (n == 1 && all_empty) out += "\"\"";
        out.push_back('\n');
    };
    write_row([&](std::size_t c) -> const std::string& { return source.attributes[c].name; });
    for (std::size_t r = 0; r < source.row_count(); ++r) {
        write_row([&](std::size_t c) -> const std::string& { return source.attributes[c].values[r]; });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Labels

LabelMap parse_labels(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed labels JSON: ") + e.what());
    }
    const json* records = &doc;
    if (doc.is_object()) {
        const int version = doc.value("version", 1);
        if (version != 1) {
            throw InputError("labels file version " + std::to_string(version) + " is not supported (expected 1)");
        }
        if (!doc.contains("labels")) throw InputError("labels JSON object lacks a \"labels\" array");
        records = &doc["labels"];
    }
    if (!records->is_array()) throw InputError("labels JSON must be an array of records");

    LabelMap labels;
    std::size_t index = 0;
    for (const auto& rec : *records) {
        const std::string where = "label record " + std::to_string(index++);
        if (!rec.is_object()) throw InputError(where + " is not an object");
        auto text_field = [&](const char* key) -> std::string {
            if (!rec.contains(key) || rec[key].is_null()) return {};
            if (!rec[key].is_string()) throw InputError(where + ": field '" + key + "' must be a string");
            return rec[key].get<std::string>();
        };
        const std::string source = text_field("source");
        const std::string attribute = text_field("attribute");
        const std::string cls = text_field("class");
        const std::string property = text_field("property");
        if (source.empty()) throw InputError(where + ": missing 'source'");
        if (!rec.contains("attribute")) throw InputError(where + ": missing 'attribute'");

        SemanticLabel label = SemanticLabel::unknown();
        if (cls == "unknown") {
            if (!property.empty()) {
                throw InputError(where + ": class \"unknown\" must not carry a property");
            }
        } else if (cls.empty() || property.empty()) {
            throw InputError(where + ": known labels need both 'class' and 'property'");
        } else {
            label = SemanticLabel::known(cls, property);
        }
        auto [it, inserted] = labels.emplace(AttributeKey{source, attribute}, label);
        if (!inserted) {
            throw InputError("duplicate key in labels: (" + source + ", " + attribute + ")");
        }
    }
    return labels;
}

LabelMap load_labels(const fs::path& path) {
    if (!fs::exists(path)) throw InputError(path.filename().string() + " not found");
    return parse_labels(read_file(path));
}

std::string format_labels(const LabelMap& labels) {
    json records = json::array();
    for (const auto& [key, label] : labels) {
        json rec{{"source", key.first}, {"attribute", key.second}};
        if (label.is_unknown()) {
            rec["class"] = "unknown";
        } else {
            rec["class"] = label.cls();
            rec["property"] = label.property();
        }
        records.push_back(std::move(rec));
    }
    json doc{{"version", 1}, {"labels", std::move(records)}};
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Corpus

LabeledCorpus build_corpus(std::vector<DataSource> sources, const LabelMap& labels, UnlabeledPolicy policy) {
    std::set<AttributeKey> present;
    std::set<std::string> source_names;
    for (const auto& s : sources) {
        if (!source_names.insert(s.name).second) throw InputError("duplicate source name " + s.name);
        for (const auto& a : s.attributes) present.insert({s.name, a.name});
    }
    for (const auto& [key, label] : labels) {
        if (!present.contains(key)) {
            throw InputError("label references nonexistent attribute (" + key.first + ", " + key.second + ")");
        }
    }

    LabeledCorpus corpus;
    for (const auto& key : present) {
        const auto it = labels.find(key);
        if (it != labels.end()) {
            corpus.labels.emplace(key, it->second);
        } else if (policy == UnlabeledPolicy::Lenient) {
            corpus.labels.emplace(key, SemanticLabel::unknown());
        } else {
            throw InputError("unlabeled attribute (" + key.first + ", " + key.second + ")");
        }
    }
    corpus.sources = std::move(sources);
    return corpus;
}

LabeledCorpus load_corpus(const fs::path& dir, const IngestOptions& options, UnlabeledPolicy policy,
                          const std::optional<fs::path>& labels_path) {
    const fs::path sources_dir = dir / "sources";
    if (!fs::is_directory(sources_dir)) {
        throw InputError("corpus directory " + dir.string() + " has no sources/ subdirectory");
    }
    const fs::path label_file = labels_path.value_or(dir / "labels.json");
    const LabelMap labels = load_labels(label_file);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(sources_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InputError("no CSV files in " + sources_dir.string());

    std::vector<DataSource> sources(files.size());
    std::vector<std::string> errors(files.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < files.size(); ++i) {
        try {
            sources[i] = load_source(files[i], options);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw InputError(e);
    }
    return build_corpus(std::move(sources), labels, policy);
}

void save_corpus(const LabeledCorpus& corpus, const fs::path& dir) {
    const fs::path sources_dir = dir / "sources";
    fs::create_directories(sources_dir);
    for (const auto& source : corpus.sources) {
        std::ofstream out(sources_dir / (source.name + ".csv"), std::ios::binary);
        if (!out) throw InputError("cannot write source " + source.name + " under " + sources_dir.string());
        out << format_source(source);
    }
    std::ofstream out(dir / "labels.json", std::ios::binary);
    if (!out) throw InputError("cannot write labels.json under " + dir.string());
    out << format_labels(corpus.labels);
}

}  // namespace semlab
