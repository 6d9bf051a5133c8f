#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "semlab/corpus.hpp"
#include "semlab/rng.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("semlab_" + tag + "_" + std::to_string(::getpid()) + "_" +
                                             std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& child) const { return path_ / child; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Random string over a small alphabet that mixes ASCII and multi-byte
/// characters, so that distances exercise repeated symbols.
inline std::string random_text(semlab::Rng& rng, std::size_t max_len) {
    static const std::vector<std::string> alphabet = {"a", "b", "c", "A", "1", " ", "-", "\xC3\xA9", "\xE2\x82\xAC",
                                                      "\xF0\x9F\x98\x80"};
    const std::size_t len = rng.below(max_len + 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.below(alphabet.size())];
    return s;
}

/// The three example sources: personal-info, businessInfo and Employees.
inline std::vector<semlab::DataSource> example_sources() {
    auto make = [](std::string name, std::vector<std::string> header, std::vector<std::vector<std::string>> rows) {
        semlab::DataSource s;
        s.name = name;
        for (std::size_t c = 0; c < header.size(); ++c) {
            semlab::Attribute a;
            a.name = header[c];
            a.source_name = name;
            for (const auto& r : rows) a.values.push_back(r[c]);
            s.attributes.push_back(std::move(a));
        }
        return s;
    };
    return {
        make("personal-info", {"name", "birthDate", "city", "state", "workplace"},
             {{"Neil", "21-05-1916", "Waterloo", "NSW", "CSIRO"},
              {"Mary", "07-12-1990", "Eveleigh", "NSW", "CSIRO"},
              {"Henry", "15-03-2000", "Redfern", "NSW", "Data61"}}),
        make("Employees", {"employer", "employee", "DOB"},
             {{"CSIRO", "Neil", "05/21/1916"}, {"Data61", "Mary", "12/07/1990"}, {"NICTA", "Henry", "03/15/2000"}}),
        make("businessInfo", {"company", "ceo", "state", "founded"},
             {{"CSIRO", "Larry Marshall", "Australian Capital Territory", "21-05-1916"},
              {"Data61", "Adrian Turner", "New South Wales", "12-07-2016"},
              {"NICTA", "Hugh Durrant", "New South Wales", "15-03-2002"}}),
    };
}

inline semlab::LabelMap example_labels() {
    using semlab::SemanticLabel;
    return {
        {{"personal-info", "name"}, SemanticLabel::known("Person", "name")},
        {{"personal-info", "birthDate"}, SemanticLabel::known("Person", "birthDate")},
        {{"personal-info", "city"}, SemanticLabel::known("City", "name")},
        {{"personal-info", "state"}, SemanticLabel::known("State", "name")},
        {{"personal-info", "workplace"}, SemanticLabel::known("Organization", "name")},
        {{"Employees", "employer"}, SemanticLabel::known("Organization", "name")},
        {{"Employees", "employee"}, SemanticLabel::known("Person", "name")},
        {{"Employees", "DOB"}, SemanticLabel::known("Person", "birthDate")},
        {{"businessInfo", "company"}, SemanticLabel::known("Organization", "name")},
        {{"businessInfo", "ceo"}, SemanticLabel::known("Person", "name")},
        {{"businessInfo", "state"}, SemanticLabel::known("State", "name")},
        {{"businessInfo", "founded"}, SemanticLabel::unknown()},
    };
}

inline semlab::LabeledCorpus example_corpus() { return semlab::build_corpus(example_sources(), example_labels()); }

}  // namespace testing_support
