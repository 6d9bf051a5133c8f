#include "semlab/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <string_view>

#include <nlohmann/json.hpp>

#include "semlab/error.hpp"

namespace semlab {

namespace {

constexpr std::array<std::string_view, 24> kFirstNames = {
    "Neil", "Mary", "Henry", "Larry", "Adrian", "Hugh", "Alice", "Bob", "Chen", "Diana", "Ethan", "Fatima",
    "Grace", "Hiro", "Ivan", "Julia", "Kofi", "Lena", "Mateo", "Nora", "Omar", "Priya", "Quinn", "Rosa"};
constexpr std::array<std::string_view, 20> kLastNames = {
    "Marshall", "Turner", "Durrant", "Smith", "Nguyen", "Garcia", "Okafor", "Muller", "Rossi", "Kowalski",
    "Tanaka", "Silva", "Johnson", "Brown", "Lee", "Walker", "Hall", "Young", "King", "Wright"};
constexpr std::array<std::string_view, 18> kSyllables = {"wa", "ter", "loo", "ev", "lei", "gh", "red",
                                                         "fern", "ber", "ra", "syd", "ney", "mel",
                                                         "bourne", "ho", "bart", "dar", "win"};
constexpr std::array<std::string_view, 6> kDomains = {"example.com", "csiro.au", "data61.org",
                                                      "mail.net", "uni.edu", "corp.io"};

struct KindInfo {
    std::string_view cls;
    std::string_view property;
    std::array<std::string_view, 4> aliases;
};

constexpr std::array<KindInfo, kSignatureKinds> kKinds = {{
    {"Event", "date", {"date", "event_date", "when", "day"}},
    {"Person", "name", {"name", "employee", "full_name", "person"}},
    {"Item", "quantity", {"quantity", "count", "qty", "units"}},
    {"Organization", "code", {"code", "org_code", "acronym", "abbrev"}},
    {"Person", "email", {"email", "e_mail", "contact", "mail"}},
    {"Person", "phone", {"phone", "telephone", "tel", "mobile"}},
    {"Product", "price", {"price", "cost", "amount", "value"}},
    {"City", "name", {"city", "town", "suburb", "locality"}},
    {"Place", "postcode", {"postcode", "zip", "postal_code", "pcode"}},
    {"Event", "time", {"time", "start_time", "hour", "at"}},
    {"Organization", "website", {"website", "url", "homepage", "link"}},
    {"Measure", "ratio", {"ratio", "percent", "share", "rate"}},
}};

constexpr std::array<std::string_view, 6> kUnknownAliases = {"notes", "misc", "comment", "extra", "ref", "other"};

template <typename Array>
std::string_view pick(const Array& items, Rng& rng) {
    return items[rng.below(items.size())];
}

std::string digits(Rng& rng, int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s.push_back(static_cast<char>('0' + rng.below(10)));
    return s;
}

std::string two_digit(std::int64_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", static_cast<int>(v));
    return buf;
}

std::string decorate(std::string_view alias, Rng& rng) {
    std::string name(alias);
    if (rng.chance(0.4)) name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    if (rng.chance(0.25)) name += "_" + std::to_string(rng.between(1, 9));
    return name;
}

}  // namespace

void SynthesisSpec::validate() const {
    if (sources < 1) throw InputError("synthesis spec needs at least one source");
    if (labels < 1) throw InputError("synthesis spec needs at least one label");
    if (rows_min < 1 || rows_max < rows_min) throw InputError("synthesis spec has an invalid row range");
    if (columns_min < 1 || columns_max < columns_min) {
        throw InputError("synthesis spec has an invalid columns-per-source range");
    }
    if (!(unknown_frac >= 0.0 && unknown_frac <= 1.0)) throw InputError("unknown fraction must lie in [0, 1]");
    for (const auto& [index, weight] : imbalance) {
        if (index < 0 || index >= labels) throw InputError("imbalance entry for nonexistent label index");
        if (!(weight > 0.0)) throw InputError("imbalance weights must be positive");
    }
}

SynthesisSpec parse_synthesis_spec(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("malformed synthesis spec: ") + e.what());
    }
    SynthesisSpec spec;
    try {
        spec.sources = doc.value("sources", spec.sources);
        spec.labels = doc.value("labels", spec.labels);
        spec.rows_min = doc.value("rows_min", spec.rows_min);
        spec.rows_max = doc.value("rows_max", spec.rows_max);
        spec.columns_min = doc.value("columns_min", spec.columns_min);
        spec.columns_max = doc.value("columns_max", spec.columns_max);
        spec.unknown_frac = doc.value("unknown_frac", spec.unknown_frac);
        if (doc.contains("imbalance")) {
            for (const auto& [key, weight] : doc["imbalance"].items()) {
                spec.imbalance[std::stoi(key)] = weight.get<double>();
            }
        }
    } catch (const std::exception& e) {
        throw InputError(std::string("invalid synthesis spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

SemanticLabel synthetic_label(int index) {
    const KindInfo& info = kKinds[static_cast<std::size_t>(index % kSignatureKinds)];
    std::string cls(info.cls);
    if (index >= kSignatureKinds) cls += std::to_string(index / kSignatureKinds + 1);
    return SemanticLabel::known(cls, std::string(info.property));
}

std::string synthesize_value(SignatureKind kind, Rng& rng) {
    switch (kind) {
        case SignatureKind::Date:
            return two_digit(rng.between(1, 28)) + "-" + two_digit(rng.between(1, 12)) + "-" +
                   std::to_string(rng.between(1900, 2020));
        case SignatureKind::PersonName:
            return std::string(pick(kFirstNames, rng)) + " " + std::string(pick(kLastNames, rng));
        case SignatureKind::Integer: {
            const auto magnitude = rng.between(1, 5);
            return std::to_string(rng.between(0, static_cast<std::int64_t>(std::pow(10, magnitude)) - 1));
        }
        case SignatureKind::Acronym: {
            std::string s;
            const auto n = rng.between(2, 5);
            for (std::int64_t i = 0; i < n; ++i) s.push_back(static_cast<char>('A' + rng.below(26)));
            return s;
        }
        case SignatureKind::Email: {
            std::string first(pick(kFirstNames, rng));
            std::string last(pick(kLastNames, rng));
            std::transform(first.begin(), first.end(), first.begin(), [](unsigned char c) { return std::tolower(c); });
            std::transform(last.begin(), last.end(), last.begin(), [](unsigned char c) { return std::tolower(c); });
            return first + "." + last + "@" + std::string(pick(kDomains, rng));
        }
        case SignatureKind::Phone:
            return "(0" + digits(rng, 1) + ") " + digits(rng, 4) + " " + digits(rng, 4);
        case SignatureKind::Price:
            return std::to_string(rng.between(0, 9999)) + "." + digits(rng, 2);
        case SignatureKind::CityName: {
            std::string s;
            const auto n = rng.between(2, 3);
            for (std::int64_t i = 0; i < n; ++i) s += pick(kSyllables, rng);
            s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
            return s;
        }
        case SignatureKind::PostCode:
            return std::to_string(rng.between(1000, 9999));
        case SignatureKind::TimeOfDay:
            return two_digit(rng.between(0, 23)) + ":" + two_digit(rng.between(0, 59));
        case SignatureKind::Url: {
            std::string host;
            for (int i = 0; i < 2; ++i) host += pick(kSyllables, rng);
            return "https://www." + host + ".com/" + std::string(pick(kSyllables, rng));
        }
        case SignatureKind::Percentage:
            return std::to_string(rng.between(0, 99)) + "." + digits(rng, 1) + "%";
    }
    return {};
}

std::vector<int> apportion(int total, const std::vector<double>& weights) {
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<int> counts(weights.size(), 0);
    if (weights.empty() || total <= 0) return counts;
    std::vector<double> remainder(weights.size());
    int assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double share = total * weights[i] / sum;
        counts[i] = static_cast<int>(std::floor(share));
        remainder[i] = share - counts[i];
        assigned += counts[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[order[k % order.size()]];
    return counts;
}

LabeledCorpus generate_synthetic(const SynthesisSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng layout(derive_seed(seed, 0));

    std::vector<int> columns(static_cast<std::size_t>(spec.sources));
    int total = 0;
    for (auto& c : columns) total += c = static_cast<int>(layout.between(spec.columns_min, spec.columns_max));

    const int unknown = static_cast<int>(std::lround(spec.unknown_frac * total));
    std::vector<double> weights(static_cast<std::size_t>(spec.labels), 1.0);
    for (const auto& [index, weight] : spec.imbalance) weights[static_cast<std::size_t>(index)] = weight;
    const std::vector<int> per_label = apportion(total - unknown, weights);

    // Slot -1 marks an unknown column.
    std::vector<int> slots(static_cast<std::size_t>(unknown), -1);
    for (int label = 0; label < spec.labels; ++label) slots.insert(slots.end(), per_label[label], label);
    for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[layout.below(i)]);

    std::vector<DataSource> sources;
    LabelMap labels;
    std::size_t next_slot = 0;
    for (int s = 0; s < spec.sources; ++s) {
        DataSource source;
        source.name = "source_" + two_digit(s + 1);
        const auto rows = layout.between(spec.rows_min, spec.rows_max);
        std::set<std::string> names;
        for (int c = 0; c < columns[static_cast<std::size_t>(s)]; ++c) {
            const int label_index = slots[next_slot++];
            Rng rng(derive_seed(seed, (static_cast<std::uint64_t>(s) << 20) + static_cast<std::uint64_t>(c) + 1));

            Attribute attr;
            attr.source_name = source.name;
            attr.name = label_index < 0
                            ? decorate(pick(kUnknownAliases, rng), rng)
                            : decorate(kKinds[static_cast<std::size_t>(label_index % kSignatureKinds)]
                                           .aliases[rng.below(4)],
                                       rng);
            for (int k = 2; names.contains(attr.name); ++k) {
                const std::string candidate = attr.name + "_" + std::to_string(k);
                if (!names.contains(candidate)) attr.name = candidate;
            }
            names.insert(attr.name);

            attr.values.reserve(static_cast<std::size_t>(rows));
            for (std::int64_t r = 0; r < rows; ++r) {
                const auto kind = label_index < 0
                                      ? static_cast<SignatureKind>(rng.below(kSignatureKinds))
                                      : static_cast<SignatureKind>(label_index % kSignatureKinds);
                attr.values.push_back(synthesize_value(kind, rng));
            }
            labels.emplace(AttributeKey{source.name, attr.name},
                           label_index < 0 ? SemanticLabel::unknown() : synthetic_label(label_index));
            source.attributes.push_back(std::move(attr));
        }
        sources.push_back(std::move(source));
    }
    return build_corpus(std::move(sources), labels);
}

}  // namespace semlab
