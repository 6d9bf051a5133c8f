#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "semlab/cli.hpp"
#include "support.hpp"

using semlab::cli::run;
using testing_support::read_file;
using testing_support::TempDir;
using testing_support::write_file;
using json = nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

void expect_error(const Result& r, int code, const std::string& fragment) {
    EXPECT_EQ(r.code, code) << r.err;
    const auto ls = lines(r.err);
    ASSERT_EQ(ls.size(), 1u) << r.err;
    const json doc = json::parse(ls[0]);
    EXPECT_EQ(doc["error"]["code"], code);
    EXPECT_NE(doc["error"]["message"].get<std::string>().find(fragment), std::string::npos) << ls[0];
}

class CliFixture : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir = new TempDir("cli");
        const Result r = call({"synth", "--sources", "4", "--labels", "5", "--rows-min", "30", "--rows-max", "60",
                               "--unknown-frac", "0.1", "--seed", "42", "-o", (*dir / "corpus").string()});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    static void TearDownTestSuite() { delete dir; }
    static std::string corpus() { return (*dir / "corpus").string(); }
    static std::string path(const std::string& name) { return (*dir / name).string(); }
    static TempDir* dir;
};

TempDir* CliFixture::dir = nullptr;

}  // namespace

TEST_F(CliFixture, SynthIsDeterministic) {
    const Result r = call({"synth", "--sources", "4", "--labels", "5", "--rows-min", "30", "--rows-max", "60",
                           "--unknown-frac", "0.1", "--seed", "42", "-o", path("again")});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.err.empty());
    EXPECT_EQ(read_file(path("again") + "/labels.json"), read_file(corpus() + "/labels.json"));
    EXPECT_EQ(read_file(path("again") + "/sources/source_03.csv"), read_file(corpus() + "/sources/source_03.csv"));
}

TEST_F(CliFixture, SynthRejectsZeroLabels) {
    expect_error(call({"synth", "--labels", "0", "--seed", "1", "-o", path("zero")}), 2, "label");
}

TEST_F(CliFixture, SynthSpecFileAndFlags) {
    write_file(path("spec.json"), R"({"sources": 2, "labels": 3, "rows_min": 10, "rows_max": 12})");
    const Result r = call({"synth", "--spec", path("spec.json"), "--sources", "3", "--seed", "5", "-o", path("fromspec")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["sources"], 3);
}

TEST_F(CliFixture, TrainIsByteIdenticalAcrossRuns) {
    const std::vector<std::string> base = {"train", "--corpus", corpus(), "--model", "rf", "--features", "all",
                                           "--num-bags", "20", "--bag-size", "30", "--seed", "7", "--trees", "16"};
    auto a = base, b = base;
    a.insert(a.end(), {"-o", path("a.slb")});
    b.insert(b.end(), {"-o", path("b.slb"), "--threads", "3"});
    const Result ra = call(a), rb = call(b);
    ASSERT_EQ(ra.code, 0) << ra.err;
    ASSERT_EQ(rb.code, 0) << rb.err;
    EXPECT_TRUE(ra.err.empty());
    EXPECT_EQ(read_file(path("a.slb")), read_file(path("b.slb")));
    const json summary = json::parse(ra.out);
    EXPECT_EQ(summary["instances"].get<std::size_t>(), 20 * summary["attributes"].get<std::size_t>());
    EXPECT_TRUE(summary.contains("class_counts"));
    EXPECT_TRUE(summary.contains("train_seconds"));
}

TEST_F(CliFixture, TrainWithoutLabelsFile) {
    write_file(path("nolabels/sources/x.csv"), "a,b\n1,2\n");
    expect_error(call({"train", "--corpus", path("nolabels"), "--features", "base_plus", "--seed", "1", "-o",
                       path("x.slb")}),
                 2, "labels.json not found");
}

TEST_F(CliFixture, PredictCardinalityTopAndMismatch) {
    ASSERT_EQ(call({"train", "--corpus", corpus(), "--features", "base", "--seed", "3", "--trees", "8", "-o",
                    path("p.slb")})
                  .code,
              0);
    write_file(path("target.csv"), "when,who,amount\n12-05-2001,Ann Lee,$4.00\n01-01-1999,Bo Chan,$12.50\n");
    const json info = json::parse(call({"inspect", path("p.slb")}).out);
    const std::size_t labels = info["labels"].size();

    Result r = call({"predict", "-m", path("p.slb"), path("target.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 3u);
    for (const auto& l : ls) EXPECT_EQ(json::parse(l)["ranked"].size(), labels);

    r = call({"predict", "-m", path("p.slb"), path("target.csv"), "--top", "1", "--predict-bags", "--num-bags", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto& l : lines(r.out)) EXPECT_EQ(json::parse(l)["ranked"].size(), 1u);

    expect_error(call({"predict", "-m", path("p.slb"), path("target.csv"), "--features", "all"}), 3, "feature set");
    expect_error(call({"predict", "-m", path("missing.slb"), path("target.csv")}), 2, "not found");
}

TEST_F(CliFixture, InspectDumpJson) {
    ASSERT_EQ(call({"train", "--corpus", corpus(), "--features", "base", "--seed", "3", "--trees", "4", "-o",
                    path("i.slb")})
                  .code,
              0);
    const Result r = call({"inspect", path("i.slb"), "--dump-json"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["kind"], "rf");
}

TEST_F(CliFixture, BenchmarkFlagValidation) {
    expect_error(call({"benchmark", "--corpus", corpus(), "--protocol", "loo", "--p", "0.2", "--seed", "1"}), 2,
                 "p is only valid for holdout");
    expect_error(call({"benchmark", "--corpus", corpus(), "--protocol", "loo"}), 2, "--seed");
    expect_error(call({"benchmark", "--corpus", corpus(), "--protocol", "holdout", "--seed", "1"}), 2, "--p");
    expect_error(call({"benchmark", "--corpus", corpus(), "--protocol", "kfold", "--seed", "1"}), 2, "protocol");
    expect_error(call({"benchmark", "--bogus"}), 2, "bogus");
    expect_error(call({"benchmark", "--corpus", path("nowhere"), "--protocol", "loo", "--seed", "1"}), 2,
                 "not found");
}

TEST_F(CliFixture, BenchmarkThreadsAndConfigEquivalence) {
    const std::vector<std::string> flags = {"--corpus", corpus(), "--protocol", "holdout", "--p", "0.5", "--n", "3",
                                            "--features", "base_plus", "--num-bags", "10", "--bag-size", "20",
                                            "--seed", "5", "--trees", "8"};
    auto one = flags, many = flags;
    one.insert(one.begin(), {"benchmark", "--threads", "1"});
    one.insert(one.end(), {"-o", path("r1.json")});
    many.insert(many.begin(), {"benchmark", "--threads", "8"});
    many.insert(many.end(), {"-o", path("r8.json")});
    Result r = call(one);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.err.empty());
    ASSERT_EQ(call(many).code, 0);
    EXPECT_EQ(read_file(path("r1.json")), read_file(path("r8.json")));

    write_file(path("run.json"), json{{"corpus", corpus()},
                                      {"protocol", "holdout"},
                                      {"p", 0.5},
                                      {"n", 3},
                                      {"features", "base_plus"},
                                      {"bagging", {{"num_bags", 10}, {"bag_size", 20}}},
                                      {"seed", 5},
                                      {"forest", {{"n_trees", 8}}}}
                                     .dump());
    r = call({"benchmark", "--config", path("run.json"), "-o", path("rc.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_file(path("rc.json")), read_file(path("r1.json")));

    // A flag overrides the file.
    r = call({"benchmark", "--config", path("run.json"), "--seed", "6", "-o", path("rs.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(read_file(path("rs.json")), read_file(path("r1.json")));

    write_file(path("typo.json"), R"({"sead": 1})");
    expect_error(call({"benchmark", "--config", path("typo.json")}), 2, "sead");
}

TEST_F(CliFixture, BenchmarkMarkdownAndLoo) {
    const Result r = call({"benchmark", "--corpus", corpus(), "--protocol", "loo", "--features", "base", "--seed", "2",
                           "--trees", "8", "--format", "markdown", "--timings", "-o", path("r.md")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["folds"], 4);
    EXPECT_NE(read_file(path("r.md")).find("| mean |"), std::string::npos);
}

TEST_F(CliFixture, SweepEmitsCsv) {
    const Result r = call({"sweep", "--corpus", corpus(), "--features", "base", "--seed", "2", "--trees", "4", "--p",
                           "0.5", "--n", "2", "--num-bags-grid", "2,4", "--fixed-bag-size", "10", "-o", path("s.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(read_file(path("s.csv")));
    ASSERT_EQ(ls.size(), 3u);
    EXPECT_EQ(ls[0], "num_bags,bag_size,mean_mrr");
    EXPECT_EQ(ls[1].rfind("2,10,", 0), 0u);
    expect_error(call({"sweep", "--corpus", corpus(), "--seed", "1"}), 2, "grid");
}

TEST(Cli, HelpAndUsage) {
    Result r = call({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("benchmark"), std::string::npos);
    r = call({});
    EXPECT_EQ(r.code, 2);
    r = call({"train", "--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("--num-bags"), std::string::npos);
}
