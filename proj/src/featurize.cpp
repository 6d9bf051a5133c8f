#include "semlab/featurize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "semlab/error.hpp"
#include "semlab/utf8.hpp"

namespace semlab {

// ---------------------------------------------------------------------------
// Character distribution

double shannon_entropy(std::span<const double> probabilities) {
    double h = 0.0;
    for (double p : probabilities) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

CharProfile char_profile(std::span<const std::string> values) {
    CharProfile profile;
    std::array<std::size_t, kVocabularySize> counts{};
    for (const auto& value : values) {
        for (char32_t c : utf8::decode(value)) {
            const int slot = vocabulary_index(c);
            if (slot < 0) {
                ++profile.skipped_chars;
            } else {
                ++counts[static_cast<std::size_t>(slot)];
                ++profile.total_chars;
            }
        }
    }
    if (profile.total_chars > 0) {
        const double total = static_cast<double>(profile.total_chars);
        for (std::size_t i = 0; i < kVocabularySize; ++i) profile.dist[i] = static_cast<double>(counts[i]) / total;
    }
    profile.entropy = shannon_entropy(profile.dist);
    return profile;
}

// ---------------------------------------------------------------------------
// Column statistics

const std::array<std::string_view, kStatFeatureCount>& stat_feature_names() {
    static const std::array<std::string_view, kStatFeatureCount> names = {
        "row_count",        "unique_ratio",     "empty_ratio",     "length_min",        "length_max",
        "length_mean",      "length_median",    "length_std",      "whitespace_total",  "whitespace_mean",
        "alpha_ratio",      "digit_ratio",      "punctuation_ratio", "uppercase_ratio", "numeric_ratio",
        "date_ratio",       "numeric_mean",     "numeric_min",     "numeric_max",       "numeric_std",
        "negative_ratio",   "integer_ratio",    "value_entropy",   "tokens_mean",       "single_char_ratio",
        "all_caps_ratio"};
    return names;
}

std::array<double, kStatFeatureCount> StatFeatures::as_array() const {
    return {row_count,       unique_ratio,   empty_ratio,       length_min,     length_max,
            length_mean,     length_median,  length_std,        whitespace_total, whitespace_mean,
            alpha_ratio,     digit_ratio,    punctuation_ratio, uppercase_ratio, numeric_ratio,
            date_ratio,      numeric_mean,   numeric_min,       numeric_max,    numeric_std,
            negative_ratio,  integer_ratio,  value_entropy,     tokens_mean,    single_char_ratio,
            all_caps_ratio};
}

namespace {

bool is_space(char32_t c) { return c == ' ' || (c >= 0x09 && c <= 0x0D); }
bool is_upper(char32_t c) { return c >= 'A' && c <= 'Z'; }
bool is_alpha(char32_t c) { return is_upper(c) || (c >= 'a' && c <= 'z'); }
bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }
bool is_punct(char32_t c) { return c >= 0x21 && c <= 0x7E && !is_alpha(c) && !is_digit(c); }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double mean_of(std::span<const double> xs) {
    return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double population_std(std::span<const double> xs, double mean) {
    if (xs.empty()) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

// Length of a run of ASCII digits starting at `i`.
std::size_t digit_run(std::string_view s, std::size_t i) {
    std::size_t n = 0;
    while (i + n < s.size() && is_digit(static_cast<unsigned char>(s[i + n]))) ++n;
    return n;
}

}  // namespace

std::optional<double> parse_number(std::string_view text) {
    text = trim(text);
    std::string cleaned;
    cleaned.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == ',') {
            // Only a separator between digits counts as a thousands separator.
            const bool between_digits = i > 0 && i + 1 < text.size() && is_digit(static_cast<unsigned char>(text[i - 1])) &&
                                        is_digit(static_cast<unsigned char>(text[i + 1]));
            if (!between_digits) return std::nullopt;
            continue;
        }
        cleaned.push_back(c);
    }
    std::string_view s = cleaned;
    bool negative = false;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    const std::size_t int_digits = digit_run(s, 0);
    std::size_t pos = int_digits;
    std::size_t frac_digits = 0;
    if (pos < s.size() && s[pos] == '.') {
        frac_digits = digit_run(s, pos + 1);
        pos += 1 + frac_digits;
    }
    if (pos != s.size() || int_digits + frac_digits == 0) return std::nullopt;

    double value = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || end != s.data() + s.size()) {
        // from_chars rejects a bare trailing point such as "12."
        if (s.back() != '.') return std::nullopt;
        const auto [end2, ec2] = std::from_chars(s.data(), s.data() + s.size() - 1, value);
        if (ec2 != std::errc{}) return std::nullopt;
    }
    return negative ? -value : value;
}

bool looks_like_date(std::string_view text) {
    text = trim(text);
    std::size_t group[3];
    char sep = 0;
    std::size_t i = 0;
    for (int g = 0; g < 3; ++g) {
        group[g] = digit_run(text, i);
        if (group[g] == 0) return false;
        i += group[g];
        if (g < 2) {
            if (i >= text.size()) return false;
            const char c = text[i];
            if (c != '-' && c != '/' && c != '.') return false;
            if (g == 0) sep = c;
            else if (c != sep) return false;
            ++i;
        }
    }
    if (i != text.size()) return false;
    const bool day_first = group[0] <= 2 && group[1] <= 2 && (group[2] == 2 || group[2] == 4);
    const bool year_first = group[0] == 4 && group[1] <= 2 && group[2] <= 2;
    return day_first || year_first;
}

StatFeatures stat_features(const Attribute& attr) {
    if (attr.values.empty()) {
        throw InputError("attribute " + attr.source_name + "/" + attr.name + " has no values");
    }
    return stat_features(attr.values);
}

StatFeatures stat_features(std::span<const std::string> values) {
    if (values.empty()) throw InputError("cannot compute statistics of an empty attribute");
    StatFeatures f;
    const double n = static_cast<double>(values.size());
    f.row_count = n;

    std::vector<double> lengths;
    lengths.reserve(values.size());
    std::vector<double> numbers;
    std::unordered_map<std::string_view, std::size_t> frequency;
    std::size_t total_chars = 0, alpha = 0, digit = 0, punct = 0, upper = 0, whitespace = 0;
    std::size_t empty = 0, dates = 0, tokens = 0, single = 0, all_caps = 0;

    for (const auto& value : values) {
        ++frequency[value];
        const std::vector<char32_t> chars = utf8::decode(value);
        lengths.push_back(static_cast<double>(chars.size()));
        total_chars += chars.size();
        if (chars.empty()) ++empty;
        if (chars.size() == 1) ++single;

        bool caps = !chars.empty();
        bool in_token = false;
        for (char32_t c : chars) {
            alpha += is_alpha(c);
            digit += is_digit(c);
            punct += is_punct(c);
            upper += is_upper(c);
            caps = caps && is_upper(c);
            if (is_space(c)) {
                ++whitespace;
                in_token = false;
            } else if (!in_token) {
                ++tokens;
                in_token = true;
            }
        }
        all_caps += caps;
        if (auto number = parse_number(value)) numbers.push_back(*number);
        if (looks_like_date(value)) ++dates;
    }

    f.unique_ratio = static_cast<double>(frequency.size()) / n;
    f.empty_ratio = static_cast<double>(empty) / n;

    std::vector<double> sorted = lengths;
    std::sort(sorted.begin(), sorted.end());
    f.length_min = sorted.front();
    f.length_max = sorted.back();
    f.length_mean = mean_of(lengths);
    const std::size_t mid = sorted.size() / 2;
    f.length_median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    f.length_std = population_std(lengths, f.length_mean);

    f.whitespace_total = static_cast<double>(whitespace);
    f.whitespace_mean = static_cast<double>(whitespace) / n;
    if (total_chars > 0) {
        const double t = static_cast<double>(total_chars);
        f.alpha_ratio = static_cast<double>(alpha) / t;
        f.digit_ratio = static_cast<double>(digit) / t;
        f.punctuation_ratio = static_cast<double>(punct) / t;
        f.uppercase_ratio = static_cast<double>(upper) / t;
    }

    f.numeric_ratio = static_cast<double>(numbers.size()) / n;
    f.date_ratio = static_cast<double>(dates) / n;
    if (!numbers.empty()) {
        const auto [lo, hi] = std::minmax_element(numbers.begin(), numbers.end());
        f.numeric_min = *lo;
        f.numeric_max = *hi;
        f.numeric_mean = mean_of(numbers);
        f.numeric_std = population_std(numbers, f.numeric_mean);
        const double count = static_cast<double>(numbers.size());
        f.negative_ratio = static_cast<double>(std::count_if(numbers.begin(), numbers.end(), [](double x) { return x < 0; })) / count;
        f.integer_ratio = static_cast<double>(std::count_if(numbers.begin(), numbers.end(), [](double x) { return x == std::floor(x); })) / count;
    }

    // Sum in a fixed order so the result does not depend on hash iteration.
    std::vector<double> probabilities;
    probabilities.reserve(frequency.size());
    for (const auto& [value, count] : frequency) probabilities.push_back(static_cast<double>(count) / n);
    std::sort(probabilities.begin(), probabilities.end());
    f.value_entropy = shannon_entropy(probabilities);

    f.tokens_mean = static_cast<double>(tokens) / n;
    f.single_char_ratio = static_cast<double>(single) / n;
    f.all_caps_ratio = static_cast<double>(all_caps) / n;
    return f;
}

// ---------------------------------------------------------------------------
// String similarity

namespace {

template <typename T>
std::size_t edit_distance(std::span<const T> a, std::span<const T> b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

template <typename T>
long global_alignment(std::span<const T> a, std::span<const T> b, const AlignmentScoring& s) {
    std::vector<long> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<long>(j) * s.gap;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        long diag = row[0];
        row[0] = static_cast<long>(i) * s.gap;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const long up = row[j];
            const long sub = diag + (a[i - 1] == b[j - 1] ? s.match : s.mismatch);
            row[j] = std::max({sub, up + s.gap, row[j - 1] + s.gap});
            diag = up;
        }
    }
    return row[b.size()];
}

std::vector<char32_t> lowered(std::string_view s) {
    std::vector<char32_t> chars = utf8::decode(s);
    for (auto& c : chars) {
        if (is_upper(c)) c = c - 'A' + 'a';
    }
    return chars;
}

}  // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) {
    const auto ca = utf8::decode(a);
    const auto cb = utf8::decode(b);
    return edit_distance<char32_t>(ca, cb);
}

long needleman_wunsch(std::string_view a, std::string_view b, const AlignmentScoring& scoring) {
    const auto ca = utf8::decode(a);
    const auto cb = utf8::decode(b);
    return global_alignment<char32_t>(ca, cb, scoring);
}

// ---------------------------------------------------------------------------
// Class profiles

ClassProfileIndex::ClassProfileIndex(std::vector<ClassProfile> classes) : classes_(std::move(classes)) {
    std::sort(classes_.begin(), classes_.end(),
              [](const ClassProfile& a, const ClassProfile& b) { return a.label.id() < b.label.id(); });
    for (std::size_t i = 1; i < classes_.size(); ++i) {
        if (classes_[i].label == classes_[i - 1].label) {
            throw InputError("class profile index lists label " + classes_[i].label.id() + " twice");
        }
    }
}

std::vector<SemanticLabel> ClassProfileIndex::labels() const {
    std::vector<SemanticLabel> out;
    out.reserve(classes_.size());
    for (const auto& c : classes_) out.push_back(c.label);
    return out;
}

bool operator==(const ClassProfileIndex& a, const ClassProfileIndex& b) {
    if (a.classes_.size() != b.classes_.size()) return false;
    for (std::size_t i = 0; i < a.classes_.size(); ++i) {
        const auto& x = a.classes_[i];
        const auto& y = b.classes_[i];
        if (!(x.label == y.label) || x.mean_dist != y.mean_dist ||
            x.representatives.size() != y.representatives.size()) {
            return false;
        }
        for (std::size_t r = 0; r < x.representatives.size(); ++r) {
            if (x.representatives[r].name != y.representatives[r].name ||
                x.representatives[r].owner != y.representatives[r].owner) {
                return false;
            }
        }
    }
    return true;
}

ClassProfileIndex build_class_profiles(std::span<const TrainingAttribute> train) {
    if (train.empty()) throw InputError("cannot build class profiles from an empty training set");
    std::map<std::string, std::vector<const TrainingAttribute*>> members;
    for (const auto& t : train) members[t.label.id()].push_back(&t);

    std::vector<ClassProfile> classes;
    for (const auto& [id, group] : members) {
        ClassProfile cls;
        cls.label = group.front()->label;
        for (const TrainingAttribute* t : group) {
            const CharProfile p = char_profile(t->attribute->values);
            for (std::size_t i = 0; i < kVocabularySize; ++i) cls.mean_dist[i] += p.dist[i];
            cls.representatives.push_back({t->attribute->name, {t->attribute->source_name, t->attribute->name}});
        }
        double sum = 0.0;
        for (double& v : cls.mean_dist) {
            v /= static_cast<double>(group.size());
            sum += v;
        }
        if (sum > 0.0) {
            for (double& v : cls.mean_dist) v /= sum;
        }
        classes.push_back(std::move(cls));
    }
    return ClassProfileIndex(std::move(classes));
}

std::vector<double> cosine_features(const CharProfile& profile, const ClassProfileIndex& index) {
    std::vector<double> out;
    out.reserve(index.size());
    double norm_p = 0.0;
    for (double v : profile.dist) norm_p += v * v;
    for (const auto& cls : index.classes()) {
        double dot = 0.0, norm_c = 0.0;
        for (std::size_t i = 0; i < kVocabularySize; ++i) {
            dot += profile.dist[i] * cls.mean_dist[i];
            norm_c += cls.mean_dist[i] * cls.mean_dist[i];
        }
        if (norm_p == 0.0 || norm_c == 0.0) {
            out.push_back(0.0);
        } else {
            out.push_back(std::clamp(dot / std::sqrt(norm_p * norm_c), 0.0, 1.0));
        }
    }
    return out;
}

NameFeatures name_features(std::string_view name, const ClassProfileIndex& index, const NameFeatureOptions& options,
                           const std::optional<AttributeKey>& exclude) {
    if (options.k < 1) throw InputError("name features need k >= 1");
    const std::vector<char32_t> query = lowered(name);
    NameFeatures out;
    out.min_edit.reserve(index.size());
    out.knn_alignment.reserve(index.size());
    std::vector<double> similarities;
    for (const auto& cls : index.classes()) {
        double best_edit = 1.0;
        similarities.clear();
        for (const auto& rep : cls.representatives) {
            if (exclude && rep.owner == *exclude) continue;
            const std::vector<char32_t> other = lowered(rep.name);
            const std::size_t longest = std::max(query.size(), other.size());
            if (longest == 0) {
                best_edit = 0.0;
                similarities.push_back(1.0);
                continue;
            }
            const double edit = static_cast<double>(edit_distance<char32_t>(query, other)) / static_cast<double>(longest);
            best_edit = std::min(best_edit, edit);
            const double score = static_cast<double>(global_alignment<char32_t>(query, other, options.scoring));
            const double scale = static_cast<double>(std::max(options.scoring.match, 1)) * static_cast<double>(longest);
            similarities.push_back(std::clamp(score / scale, 0.0, 1.0));
        }
        out.min_edit.push_back(best_edit);
        if (similarities.empty()) {
            out.knn_alignment.push_back(0.0);
        } else {
            const std::size_t k = std::min(options.k, similarities.size());
            std::partial_sort(similarities.begin(), similarities.begin() + static_cast<std::ptrdiff_t>(k),
                              similarities.end(), std::greater<>());
            out.knn_alignment.push_back(
                std::accumulate(similarities.begin(), similarities.begin() + static_cast<std::ptrdiff_t>(k), 0.0) /
                static_cast<double>(k));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Feature vectors

std::string to_string(FeatureSet set) {
    switch (set) {
        case FeatureSet::Base: return "base";
        case FeatureSet::BasePlus: return "base_plus";
        case FeatureSet::All: return "all";
    }
    return "base";
}

FeatureSet parse_feature_set(std::string_view text) {
    if (text == "base") return FeatureSet::Base;
    if (text == "base_plus" || text == "base+") return FeatureSet::BasePlus;
    if (text == "all") return FeatureSet::All;
    throw InputError("unknown feature set '" + std::string(text) + "' (expected base, base_plus or all)");
}

std::vector<std::string> feature_schema(FeatureSet set, std::span<const SemanticLabel> labels) {
    std::vector<std::string> schema;
    if (set == FeatureSet::All) {
        for (auto name : stat_feature_names()) schema.push_back("stat:" + std::string(name));
    }
    for (std::size_t i = 0; i < kVocabularySize; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "chardist:0x%02X", static_cast<unsigned>(vocabulary_char(i)));
        schema.emplace_back(buf);
    }
    schema.emplace_back("entropy");
    if (set == FeatureSet::All) {
        for (const auto& l : labels) schema.push_back("cosine:" + l.id());
    }
    if (set != FeatureSet::Base) {
        for (const auto& l : labels) schema.push_back("min_edit:" + l.id());
    }
    if (set == FeatureSet::All) {
        for (const auto& l : labels) schema.push_back("nw_knn:" + l.id());
    }
    return schema;
}

Featurizer::Featurizer(FeatureSet set, const ClassProfileIndex* index, NameFeatureOptions name_options)
    : set_(set), index_(index), name_options_(name_options) {
    if (set_ != FeatureSet::Base && (index_ == nullptr || index_->empty())) {
        throw InputError("feature set " + to_string(set_) + " needs a non-empty class profile index");
    }
    std::vector<SemanticLabel> labels;
    if (set_ != FeatureSet::Base) labels = index_->labels();
    schema_ = std::make_shared<const std::vector<std::string>>(feature_schema(set_, labels));
}

std::vector<double> Featurizer::name_block(std::string_view name, const std::optional<AttributeKey>& exclude) const {
    if (set_ == FeatureSet::Base) return {};
    NameFeatures nf = name_features(name, *index_, name_options_, exclude);
    std::vector<double> block = std::move(nf.min_edit);
    if (set_ == FeatureSet::All) block.insert(block.end(), nf.knn_alignment.begin(), nf.knn_alignment.end());
    return block;
}

FeatureVector Featurizer::from_values(std::span<const std::string> values, std::span<const double> name_block) const {
    FeatureVector fv;
    fv.feature_set = set_;
    fv.schema = schema_;
    fv.values.reserve(schema_->size());
    if (set_ == FeatureSet::All) {
        const auto stats = stat_features(values).as_array();
        fv.values.insert(fv.values.end(), stats.begin(), stats.end());
    }
    const CharProfile profile = char_profile(values);
    fv.values.insert(fv.values.end(), profile.dist.begin(), profile.dist.end());
    fv.values.push_back(profile.entropy);
    if (set_ == FeatureSet::All) {
        const auto cos = cosine_features(profile, *index_);
        fv.values.insert(fv.values.end(), cos.begin(), cos.end());
    }
    fv.values.insert(fv.values.end(), name_block.begin(), name_block.end());
    if (fv.values.size() != schema_->size()) {
        throw ContractError("feature vector width " + std::to_string(fv.values.size()) + " does not match schema width " +
                            std::to_string(schema_->size()));
    }
    return fv;
}

FeatureVector Featurizer::operator()(const Attribute& attr, const std::optional<AttributeKey>& exclude) const {
    if (attr.values.empty()) {
        throw InputError("attribute " + attr.source_name + "/" + attr.name + " has no values");
    }
    const std::vector<double> block = name_block(attr.name, exclude);
    return from_values(attr.values, block);
}

FeatureVector assemble(const Attribute& attr, FeatureSet set, const ClassProfileIndex& index) {
    return Featurizer(set, &index)(attr);
}

std::vector<FeatureVector> featurize_batch(const Featurizer& featurizer, std::span<const FeatureJob> jobs) {
    std::vector<FeatureVector> out(jobs.size());
    std::vector<std::string> errors(jobs.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            out[i] = featurizer.from_values(jobs[i].values, jobs[i].name_block);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw InputError(e);
    }
    return out;
}

std::vector<FeatureVector> featurize_batch_serial(const Featurizer& featurizer, std::span<const FeatureJob> jobs) {
    std::vector<FeatureVector> out;
    out.reserve(jobs.size());
    for (const auto& job : jobs) out.push_back(featurizer.from_values(job.values, job.name_block));
    return out;
}

}  // namespace semlab
