#include <gtest/gtest.h>

#include "semlab/corpus.hpp"
#include "semlab/error.hpp"
#include "semlab/synth.hpp"
#include "support.hpp"

using namespace semlab;
using testing_support::TempDir;
using testing_support::write_file;

TEST(LoadSource, EmployeesTable) {
    TempDir dir("load");
    write_file(dir / "Employees.csv", "employer,employee,DOB\nCSIRO,Neil,05/21/1916\nData61,Mary,12/07/1990\n"
                                      "NICTA,Henry,03/15/2000\n");
    const DataSource s = load_source(dir / "Employees.csv");
    EXPECT_EQ(s.name, "Employees");
    ASSERT_EQ(s.attributes.size(), 3u);
    for (const auto& a : s.attributes) {
        EXPECT_EQ(a.values.size(), 3u);
        EXPECT_EQ(a.source_name, "Employees");
    }
    EXPECT_EQ(s.attributes[2].name, "DOB");
    EXPECT_EQ(s.attributes[1].values[2], "Henry");
}

TEST(LoadSource, HeaderOnlyIsRejected) {
    try {
        parse_source("a,b\n", "t");
        FAIL() << "expected an error";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("zero data rows"), std::string::npos);
    }
}

TEST(LoadSource, DuplicateHeadersGetSuffixes) {
    LoadDiagnostics diag;
    const DataSource s = parse_source("x,x,x\n1,2,3\n", "t", {}, &diag);
    EXPECT_EQ(s.attributes[0].name, "x");
    EXPECT_EQ(s.attributes[1].name, "x_2");
    EXPECT_EQ(s.attributes[2].name, "x_3");
    EXPECT_EQ(diag.renamed_headers, 2u);
}

TEST(LoadSource, RaggedRowsArePadded) {
    LoadDiagnostics diag;
    const DataSource s = parse_source("a,b,c\n1\n1,2,3,4\n", "t", {}, &diag);
    ASSERT_EQ(s.attributes.size(), 4u);
    EXPECT_EQ(s.attributes[3].name, "col_4");
    for (const auto& a : s.attributes) EXPECT_EQ(a.values.size(), 2u);
    EXPECT_EQ(s.attributes[1].values[0], "");
    EXPECT_EQ(diag.padded_rows, 1u);
    EXPECT_EQ(diag.widened_rows, 1u);
}

TEST(LoadSource, QuotingAndRawCells) {
    const DataSource s = parse_source("a,b\n\"x, y\",\" padded \"\n\"say \"\"hi\"\"\",\"multi\nline\"\n", "t");
    EXPECT_EQ(s.attributes[0].values[0], "x, y");
    EXPECT_EQ(s.attributes[1].values[0], " padded ");
    EXPECT_EQ(s.attributes[0].values[1], "say \"hi\"");
    EXPECT_EQ(s.attributes[1].values[1], "multi\nline");
}

TEST(LoadSource, NoHeaderNamesColumns) {
    IngestOptions opts;
    opts.has_header = false;
    opts.delimiter = ';';
    const DataSource s = parse_source("1;2\n3;4\n", "t", opts);
    EXPECT_EQ(s.attributes[0].name, "col_1");
    EXPECT_EQ(s.attributes[1].name, "col_2");
    EXPECT_EQ(s.row_count(), 2u);
}

TEST(LoadSource, InvalidUtf8ReportsPosition) {
    try {
        parse_source("a,b\nok,\xff\xfe\n", "t");
        FAIL();
    } catch (const InputError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
        EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
    }
}

TEST(Labels, KnownUnknownAndDuplicates) {
    const LabelMap m = parse_labels(R"({"version":1,"labels":[
        {"source":"Employees","attribute":"employee","class":"Person","property":"name"},
        {"source":"businessInfo","attribute":"founded","class":"unknown"}]})");
    EXPECT_EQ(m.at({"Employees", "employee"}), SemanticLabel::known("Person", "name"));
    EXPECT_TRUE(m.at({"businessInfo", "founded"}).is_unknown());

    EXPECT_THROW(parse_labels(R"([{"source":"s","attribute":"a","class":"A","property":"p"},
                                  {"source":"s","attribute":"a","class":"B","property":"q"}])"),
                 InputError);
    EXPECT_THROW(parse_labels(R"([{"source":"s","attribute":"a","class":"unknown","property":"p"}])"), InputError);
    EXPECT_THROW(parse_labels("{not json"), InputError);
}

TEST(Labels, FormatRoundTrip) {
    const LabelMap m = testing_support::example_labels();
    EXPECT_EQ(parse_labels(format_labels(m)), m);
}

TEST(BuildCorpus, ExampleSources) {
    const LabeledCorpus c = testing_support::example_corpus();
    EXPECT_EQ(c.attribute_count(), 12u);
    std::size_t unknown = 0;
    for (const auto& s : c.sources) {
        for (const auto& a : s.attributes) unknown += c.label_of(a).is_unknown() ? 1 : 0;
    }
    EXPECT_EQ(unknown, 1u);
    EXPECT_EQ(c.known_labels().size(), 5u);
}

TEST(BuildCorpus, StrictLenientAndGhosts) {
    auto labels = testing_support::example_labels();
    labels.erase({"Employees", "DOB"});
    EXPECT_THROW(build_corpus(testing_support::example_sources(), labels), InputError);
    const LabeledCorpus c = build_corpus(testing_support::example_sources(), labels, UnlabeledPolicy::Lenient);
    EXPECT_TRUE(c.labels.at({"Employees", "DOB"}).is_unknown());

    auto ghost = testing_support::example_labels();
    ghost.insert_or_assign(AttributeKey{"Employees", "ghost"}, SemanticLabel::known("A", "b"));
    EXPECT_THROW(build_corpus(testing_support::example_sources(), ghost, UnlabeledPolicy::Lenient), InputError);
}

TEST(Corpus, SaveLoadRoundTrip) {
    TempDir dir("roundtrip");
    SynthesisSpec spec;
    spec.sources = 3;
    spec.rows_min = 5;
    spec.rows_max = 9;
    LabeledCorpus c = generate_synthetic(spec, 3);
    // Awkward cells: quotes, delimiters, newlines, leading spaces, empties.
    c.sources[0].attributes[0].values[0] = "a,\"b\"\n c";
    c.sources[0].attributes[1].values[1] = "";
    c.sources[1].attributes[0].values[0] = "  lead";
    save_corpus(c, dir.path());
    EXPECT_EQ(load_corpus(dir.path()), c);
}

TEST(Corpus, MissingLabelsFile) {
    TempDir dir("nolabels");
    write_file(dir / "sources/a.csv", "x\n1\n");
    try {
        load_corpus(dir.path());
        FAIL();
    } catch (const InputError& e) {
        EXPECT_STREQ(e.what(), "labels.json not found");
    }
}

TEST(Synthetic, DeterministicAndByteIdentical) {
    SynthesisSpec spec;
    TempDir a("synth_a"), b("synth_b");
    save_corpus(generate_synthetic(spec, 42), a.path());
    save_corpus(generate_synthetic(spec, 42), b.path());
    for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path())) {
        if (!entry.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(entry.path(), a.path());
        EXPECT_EQ(testing_support::read_file(entry.path()), testing_support::read_file(b.path() / rel)) << rel;
    }
    EXPECT_NE(generate_synthetic(spec, 43), generate_synthetic(spec, 42));
}

TEST(Synthetic, ShapeMatchesSpec) {
    SynthesisSpec spec;
    const LabeledCorpus c = generate_synthetic(spec, 42);
    EXPECT_EQ(c.sources.size(), 10u);
    EXPECT_EQ(c.known_labels().size(), 8u);
    std::size_t unknown = 0;
    for (const auto& s : c.sources) {
        EXPECT_GE(s.row_count(), 200u);
        EXPECT_LE(s.row_count(), 500u);
        for (const auto& a : s.attributes) {
            EXPECT_EQ(a.values.size(), s.row_count());
            unknown += c.label_of(a).is_unknown() ? 1 : 0;
        }
    }
    const double frac = static_cast<double>(unknown) / static_cast<double>(c.attribute_count());
    EXPECT_NEAR(frac, 0.1, 0.03);
}

TEST(Synthetic, ImbalanceRatio) {
    SynthesisSpec spec;
    spec.labels = 2;
    spec.unknown_frac = 0.0;
    spec.imbalance = {{0, 10.0}, {1, 1.0}};
    spec.columns_min = spec.columns_max = 11;
    const LabeledCorpus c = generate_synthetic(spec, 5);
    std::map<std::string, int> counts;
    for (const auto& [key, label] : c.labels) ++counts[label.id()];
    const int a = counts[synthetic_label(0).id()];
    const int b = counts[synthetic_label(1).id()];
    ASSERT_GT(b, 0);
    EXPECT_NEAR(static_cast<double>(a) / b, 10.0, 1.0) << a << " vs " << b;
}

TEST(Synthetic, DegenerateAndInvalidSpecs) {
    SynthesisSpec one;
    one.sources = 1;
    one.labels = 1;
    one.unknown_frac = 0.0;
    const LabeledCorpus c = generate_synthetic(one, 1);
    ASSERT_EQ(c.known_labels().size(), 1u);
    for (const auto& [key, label] : c.labels) EXPECT_EQ(label, c.known_labels()[0]);

    SynthesisSpec none;
    none.labels = 0;
    EXPECT_THROW(generate_synthetic(none, 1), InputError);
    none.labels = 3;
    none.sources = 0;
    EXPECT_THROW(generate_synthetic(none, 1), InputError);
}

TEST(Synthetic, Apportion) {
    EXPECT_EQ(apportion(11, {10.0, 1.0}), (std::vector<int>{10, 1}));
    EXPECT_EQ(apportion(3, {1.0, 1.0, 1.0}), (std::vector<int>{1, 1, 1}));
    const auto v = apportion(7, {1.0, 2.0});
    EXPECT_EQ(v[0] + v[1], 7);
}
