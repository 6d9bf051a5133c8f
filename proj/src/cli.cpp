#include "semlab/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semlab/corpus.hpp"
#include "semlab/error.hpp"
#include "semlab/evaluate.hpp"
#include "semlab/parallel.hpp"
#include "semlab/pipeline.hpp"
#include "semlab/synth.hpp"

namespace semlab::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Keys understood by pipeline_config_from_json.
const std::set<std::string> kPipelineKeys = {"model",      "features", "bagging",         "num_bags",
                                             "bag_size",   "predict_bagging", "rebalance", "rebalance_level",
                                             "include_unknown", "seed", "forest",          "mlp",
                                             "names"};

const std::set<std::string> kRunKeys = {"corpus",   "labels", "output",   "threads",       "lenient",
                                        "delimiter", "protocol", "p",      "n",             "format",
                                        "timings",  "domain", "num_bags_grid", "bag_size_grid", "fixed_bag_size",
                                        "fixed_num_bags"};

// Overlays `top` onto `base`; nested objects merge, everything else replaces.
void overlay(json& base, const json& top) {
    for (const auto& [key, value] : top.items()) {
        if (value.is_object() && base.contains(key) && base[key].is_object()) {
            overlay(base[key], value);
        } else {
            base[key] = value;
        }
    }
}

std::string read_text(const fs::path& path, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(what + " " + path.string() + " not found");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json read_json_file(const fs::path& path, const std::string& what) {
    const std::string text = read_text(path, what);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError("malformed " + what + " " + path.string() + ": " + e.what());
    }
}

/// Flag values collected as a JSON document so they overlay a config file
/// with the same semantics as its keys.
class Settings {
public:
    json flags = json::object();
    std::optional<std::string> config_path;

    template <typename T>
    CLI::Option* option(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
        return app->add_option_function<T>(
            name, [this, key](const T& v) { flags[json::json_pointer(key)] = v; }, help);
    }

    CLI::Option* flag(CLI::App* app, const std::string& name, const std::string& key, json value,
                      const std::string& help) {
        return app->add_flag_callback(
            name, [this, key, value] { flags[json::json_pointer(key)] = value; }, help);
    }

    void add_config(CLI::App* app) {
        app->add_option_function<std::string>(
            "--config", [this](const std::string& p) { config_path = p; },
            "JSON run configuration; flags override its values");
    }

    /// Config file overlaid with flags, keys checked against `allowed`.
    json resolve(const std::set<std::string>& allowed) const {
        json doc = json::object();
        if (config_path) {
            doc = read_json_file(*config_path, "config file");
            if (!doc.is_object()) throw InputError("config file must hold a JSON object");
        }
        overlay(doc, flags);
        for (const auto& [key, value] : doc.items()) {
            if (!allowed.contains(key)) throw InputError("unknown configuration key '" + key + "'");
        }
        return doc;
    }
};

std::set<std::string> keys_union(std::initializer_list<std::set<std::string>> sets) {
    std::set<std::string> out;
    for (const auto& s : sets) out.insert(s.begin(), s.end());
    return out;
}

void add_corpus_options(CLI::App* app, Settings& s) {
    s.option<std::string>(app, "--corpus", "/corpus", "corpus directory (sources/*.csv and labels.json)");
    s.option<std::string>(app, "--labels", "/labels", "label file (default <corpus>/labels.json)");
    s.flag(app, "--lenient", "/lenient", true, "label unlabeled attributes unknown instead of failing");
    s.option<std::string>(app, "--delimiter", "/delimiter", "CSV field delimiter (default ,)");
}

void add_pipeline_options(CLI::App* app, Settings& s) {
    s.option<std::string>(app, "--model", "/model", "classifier: rf or mlp");
    s.option<std::string>(app, "--features", "/features", "feature set: base, base_plus or all");
    s.option<std::size_t>(app, "--num-bags", "/num_bags", "bags per training attribute (enables bagging)");
    s.option<std::size_t>(app, "--bag-size", "/bag_size", "cells per bag (enables bagging)");
    s.flag(app, "--no-bagging", "/bagging", nullptr, "train on whole attributes");
    s.flag(app, "--predict-bags", "/predict_bagging", true, "also bag at prediction time");
    s.option<std::string>(app, "--rebalance", "/rebalance", "class rebalancing: none, mean or max");
    s.option<std::string>(app, "--rebalance-level", "/rebalance_level", "rebalance instances or attributes");
    s.flag(app, "--exclude-unknown", "/include_unknown", false, "drop unknown attributes from training and scoring");
    s.flag(app, "--include-unknown", "/include_unknown", true, "keep unknown as an ordinary class (default)");
    s.option<std::uint64_t>(app, "--seed", "/seed", "random seed");
    s.option<std::size_t>(app, "--trees", "/forest/n_trees", "forest size");
    s.option<std::size_t>(app, "--max-depth", "/forest/max_depth", "forest depth limit");
    s.option<std::size_t>(app, "--epochs", "/mlp/epochs", "MLP training epochs");
}

std::string require_string(const json& doc, const std::string& key, const std::string& flag) {
    if (!doc.contains(key) || !doc[key].is_string()) throw InputError("missing required " + flag);
    return doc[key].get<std::string>();
}

IngestOptions ingest_options(const json& doc) {
    IngestOptions opts;
    if (doc.contains("delimiter")) {
        const std::string d = doc["delimiter"].get<std::string>();
        if (d.size() != 1) throw InputError("delimiter must be a single character");
        opts.delimiter = d[0];
    }
    return opts;
}

LabeledCorpus load_corpus_from(const json& doc) {
    const fs::path dir = require_string(doc, "corpus", "--corpus");
    if (!fs::is_directory(dir)) throw InputError("corpus directory " + dir.string() + " not found");
    std::optional<fs::path> labels;
    if (doc.contains("labels")) labels = fs::path(doc["labels"].get<std::string>());
    const auto policy = doc.value("lenient", false) ? UnlabeledPolicy::Lenient : UnlabeledPolicy::Strict;
    return load_corpus(dir, ingest_options(doc), policy, labels);
}

std::string domain_of(const json& doc) {
    if (doc.contains("domain")) return doc["domain"].get<std::string>();
    fs::path dir = fs::path(doc.value("corpus", std::string("corpus")));
    if (!dir.has_filename()) dir = dir.parent_path();
    return dir.filename().string();
}

void apply_threads(const json& doc, std::optional<int> flag) {
    if (flag) {
        if (*flag < 1) throw InputError("--threads must be at least 1");
        set_thread_limit(*flag);
    } else if (doc.contains("threads")) {
        const int t = doc["threads"].get<int>();
        if (t < 1) throw InputError("threads must be at least 1");
        set_thread_limit(t);
    }
}

fs::path writable_output(const json& doc, const std::string& flag) {
    const fs::path out = require_string(doc, "output", flag);
    const fs::path parent = out.parent_path();
    if (!parent.empty() && !fs::is_directory(parent)) {
        throw InputError("output directory " + parent.string() + " does not exist");
    }
    return out;
}

json error_json(int code, const std::string& kind, const std::string& message) {
    return {{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
}

// ---------------------------------------------------------------------------
// Commands

int cmd_train(const Settings& s, std::optional<int> threads, std::ostream& out) {
    const json doc = s.resolve(keys_union({kPipelineKeys, kRunKeys}));
    apply_threads(doc, threads);
    const PipelineConfig cfg = pipeline_config_from_json(doc);
    cfg.validate();
    const fs::path model_path = writable_output(doc, "-o/--output");
    const LabeledCorpus corpus = load_corpus_from(doc);

    std::vector<std::size_t> all(corpus.sources.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto attrs = training_attributes(corpus, all, cfg.include_unknown);
    const auto start = std::chrono::steady_clock::now();
    TrainOutcome trained = train_pipeline(attrs, cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    save_model(trained.model, model_path);

    json summary = {{"model_file", model_path.string()},
                    {"model", to_string(cfg.model)},
                    {"features", to_string(cfg.features)},
                    {"attributes", trained.attributes},
                    {"instances", trained.provenance.size()},
                    {"labels", trained.model.label_order().size()},
                    {"class_counts", trained.class_counts},
                    {"train_seconds", seconds}};
    out << summary.dump() << "\n";
    return kExitOk;
}

struct PredictOptions {
    std::string model_file;
    std::vector<std::string> inputs;
    std::optional<std::size_t> top;
    bool pretty = false;
    bool predict_bags = false;
    std::optional<std::string> features;
    std::optional<std::size_t> num_bags, bag_size;
    std::optional<std::uint64_t> seed;
    std::string delimiter = ",";
};

int cmd_predict(const PredictOptions& o, std::optional<int> threads, std::ostream& out) {
    apply_threads(json::object(), threads);
    if (!fs::exists(o.model_file)) throw InputError("model file " + o.model_file + " not found");
    for (const auto& in : o.inputs) {
        if (!fs::exists(in)) throw InputError("input file " + in + " not found");
    }
    if (o.top && *o.top < 1) throw InputError("--top must be at least 1");
    if (o.delimiter.size() != 1) throw InputError("delimiter must be a single character");
    const TrainedModel model = load_model(o.model_file);
    if (o.features) {
        const FeatureSet requested = parse_feature_set(*o.features);
        if (requested != model.context().feature_set) {
            throw ContractError("requested feature set " + to_string(requested) + " but the model was trained with " +
                                to_string(model.context().feature_set));
        }
    }
    std::optional<BagConfig> bags;
    if (o.predict_bags || o.num_bags || o.bag_size) {
        BagConfig b = model.context().training_bags.value_or(BagConfig{});
        if (o.num_bags) b.num_bags = *o.num_bags;
        if (o.bag_size) b.bag_size = *o.bag_size;
        const json& echo = model.metadata().config;
        const std::uint64_t seed = o.seed ? *o.seed : echo.value("seed", std::uint64_t{0});
        b.seed = derive_seed(seed, 1);
        b.validate();
        bags = b;
    }
    IngestOptions ingest;
    ingest.delimiter = o.delimiter[0];
    for (const auto& in : o.inputs) {
        const DataSource source = load_source(in, ingest);
        for (const auto& attr : source.attributes) {
            const PredictionRanking ranking = predict_attribute(model, attr, bags);
            const std::size_t keep = o.top ? std::min(*o.top, ranking.ranked.size()) : ranking.ranked.size();
            json labels = json::array();
            for (std::size_t i = 0; i < keep; ++i) {
                labels.push_back({{"label", ranking.ranked[i].label.id()}, {"probability", ranking.ranked[i].probability}});
            }
            const json line = {{"source", source.name}, {"attribute", attr.name}, {"ranked", labels}};
            out << (o.pretty ? line.dump(2) : line.dump()) << "\n";
        }
    }
    return kExitOk;
}

int cmd_benchmark(const Settings& s, std::optional<int> threads, std::ostream& out) {
    const json doc = s.resolve(keys_union({kPipelineKeys, kRunKeys}));
    apply_threads(doc, threads);
    if (!doc.contains("seed")) throw InputError("--seed is required for benchmark runs");
    const std::string protocol = require_string(doc, "protocol", "--protocol");
    if (protocol != "loo" && protocol != "holdout") {
        throw InputError("unknown protocol '" + protocol + "' (expected loo or holdout)");
    }
    if (protocol == "loo" && (doc.contains("p") || doc.contains("n"))) {
        throw InputError(doc.contains("p") ? "p is only valid for holdout" : "n is only valid for holdout");
    }
    if (protocol == "holdout" && (!doc.contains("p") || !doc.contains("n"))) {
        throw InputError("holdout requires --p and --n");
    }
    const PipelineConfig cfg = pipeline_config_from_json(doc);
    cfg.validate();
    const ReportFormat format = parse_report_format(doc.value("format", std::string("json")));
    const bool timings = doc.value("timings", false);
    std::optional<fs::path> report_path;
    if (doc.contains("output")) report_path = writable_output(doc, "-o/--output");
    HoldoutConfig holdout;
    if (protocol == "holdout") {
        holdout.p = doc["p"].get<double>();
        holdout.n = doc["n"].get<std::size_t>();
        holdout.seed = cfg.seed;
        holdout.validate();
    }
    const LabeledCorpus corpus = load_corpus_from(doc);

    EvaluationReport report =
        protocol == "loo" ? leave_one_out(corpus, cfg) : repeated_holdout(corpus, holdout, cfg);
    report.domain = domain_of(doc);
    if (report_path) emit_report(report, *report_path, format, timings);

    json summary = {{"protocol", report.protocol},
                    {"domain", report.domain},
                    {"folds", report.folds.size()},
                    {"skipped", report.skipped.size()},
                    {"mean_mrr", report.mean_mrr}};
    if (const auto rate = report.unknown_top1_rate()) summary["unknown_top1_rate"] = *rate;
    if (report_path) {
        summary["report"] = report_path->string();
    } else {
        summary["report"] = report_to_json(report, timings);
    }
    out << summary.dump() << "\n";
    return kExitOk;
}

std::vector<std::size_t> parse_grid(const json& value, const std::string& name) {
    std::vector<std::size_t> out;
    if (value.is_array()) return value.get<std::vector<std::size_t>>();
    std::stringstream ss(value.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            const unsigned long v = std::stoul(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw InputError("invalid " + name + " entry '" + item + "'");
        }
    }
    return out;
}

int cmd_sweep(const Settings& s, std::optional<int> threads, std::ostream& out) {
    const json doc = s.resolve(keys_union({kPipelineKeys, kRunKeys}));
    apply_threads(doc, threads);
    if (!doc.contains("seed")) throw InputError("--seed is required for sweep runs");
    PipelineConfig cfg = pipeline_config_from_json(doc);
    BaggingGrid grid;
    if (doc.contains("num_bags_grid")) grid.num_bags = parse_grid(doc["num_bags_grid"], "--num-bags-grid");
    if (doc.contains("bag_size_grid")) grid.bag_sizes = parse_grid(doc["bag_size_grid"], "--bag-size-grid");
    grid.fixed_bag_size = doc.value("fixed_bag_size", grid.fixed_bag_size);
    grid.fixed_num_bags = doc.value("fixed_num_bags", grid.fixed_num_bags);
    if (grid.num_bags.empty() && grid.bag_sizes.empty()) throw InputError("bagging sweep grid is empty");
    if (!cfg.bagging) cfg.bagging = BagConfig{};
    cfg.validate();
    HoldoutConfig holdout;
    holdout.p = doc.value("p", holdout.p);
    holdout.n = doc.value("n", holdout.n);
    holdout.seed = cfg.seed;
    holdout.validate();
    std::optional<fs::path> csv_path;
    if (doc.contains("output")) csv_path = writable_output(doc, "-o/--output");
    const LabeledCorpus corpus = load_corpus_from(doc);

    const auto rows = sweep_bagging(corpus, grid, holdout, cfg);
    const std::string csv = format_sweep_csv(rows);
    if (csv_path) {
        std::ofstream f(*csv_path, std::ios::binary);
        if (!f) throw InputError("cannot write " + csv_path->string());
        f << csv;
    }
    out << csv;
    return kExitOk;
}

int cmd_synth(const Settings& s, std::ostream& out) {
    json doc = json::object();
    if (s.config_path) {
        doc = read_json_file(*s.config_path, "synthesis spec");
        if (!doc.is_object()) throw InputError("synthesis spec must hold a JSON object");
    }
    overlay(doc, s.flags);
    const std::set<std::string> allowed = {"sources",      "labels",      "rows_min",  "rows_max", "columns_min",
                                           "columns_max",  "unknown_frac", "imbalance", "seed",     "output"};
    for (const auto& [key, value] : doc.items()) {
        if (!allowed.contains(key)) throw InputError("unknown synthesis key '" + key + "'");
    }
    const fs::path dir = require_string(doc, "output", "-o/--output");
    if (!doc.contains("seed")) throw InputError("--seed is required for synth");
    const std::uint64_t seed = doc["seed"].get<std::uint64_t>();
    json spec_doc = doc;
    spec_doc.erase("seed");
    spec_doc.erase("output");
    const SynthesisSpec spec = parse_synthesis_spec(spec_doc.dump());
    const LabeledCorpus corpus = generate_synthetic(spec, seed);
    save_corpus(corpus, dir);
    std::size_t unknown = 0;
    for (const auto& [key, label] : corpus.labels) unknown += label.is_unknown() ? 1 : 0;
    out << json{{"output", dir.string()},
                {"sources", corpus.sources.size()},
                {"attributes", corpus.attribute_count()},
                {"unknown_attributes", unknown},
                {"labels", corpus.known_labels().size()}}
               .dump()
        << "\n";
    return kExitOk;
}

int cmd_inspect(const std::string& model_file, bool dump_json, std::ostream& out) {
    if (!fs::exists(model_file)) throw InputError("model file " + model_file + " not found");
    const TrainedModel model = load_model(model_file);
    if (dump_json) {
        out << model_to_json(model).dump(2) << "\n";
        return kExitOk;
    }
    json labels = json::array();
    for (const auto& l : model.label_order()) labels.push_back(l.id());
    out << json{{"model", to_string(model.kind())},
                {"features", to_string(model.context().feature_set)},
                {"feature_count", model.feature_schema().size()},
                {"labels", labels},
                {"instances", model.metadata().instances},
                {"config", model.metadata().config}}
               .dump()
        << "\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Semantic labeling toolkit: train, predict and benchmark column classifiers", "semlab"};
    app.require_subcommand(1);
    std::optional<int> threads;
    app.add_option_function<int>("--threads", [&](const int& t) { threads = t; }, "worker thread ceiling")
        ->configurable(false);

    Settings train_s, bench_s, sweep_s, synth_s;

    CLI::App* train = app.add_subcommand("train", "train a model on a labeled corpus");
    add_corpus_options(train, train_s);
    add_pipeline_options(train, train_s);
    train_s.option<std::string>(train, "-o,--output", "/output", "model file to write");
    train_s.add_config(train);
    train->add_option_function<int>("--threads", [&](const int& t) { threads = t; }, "worker thread ceiling");

    PredictOptions predict_o;
    CLI::App* predict = app.add_subcommand("predict", "rank labels for the columns of CSV files");
    predict->add_option("-m,--model-file", predict_o.model_file, "trained model")->required();
    predict->add_option("input", predict_o.inputs, "CSV files")->required();
    predict->add_option_function<std::size_t>("--top", [&](const std::size_t& v) { predict_o.top = v; },
                                              "labels to print per column");
    predict->add_flag("--pretty", predict_o.pretty, "indented output");
    predict->add_flag("--predict-bags", predict_o.predict_bags, "bag at prediction time");
    predict->add_option_function<std::string>("--features", [&](const std::string& v) { predict_o.features = v; },
                                              "expected feature set; must match the model");
    predict->add_option_function<std::size_t>("--num-bags", [&](const std::size_t& v) { predict_o.num_bags = v; },
                                              "prediction bags per column");
    predict->add_option_function<std::size_t>("--bag-size", [&](const std::size_t& v) { predict_o.bag_size = v; },
                                              "cells per prediction bag");
    predict->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { predict_o.seed = v; },
                                                 "seed for prediction bags (default: the training seed)");
    predict->add_option("--delimiter", predict_o.delimiter, "CSV field delimiter");
    predict->add_option_function<int>("--threads", [&](const int& t) { threads = t; }, "worker thread ceiling");

    CLI::App* bench = app.add_subcommand("benchmark", "cross-validate a configuration and report MRR");
    add_corpus_options(bench, bench_s);
    add_pipeline_options(bench, bench_s);
    bench_s.option<std::string>(bench, "--protocol", "/protocol", "loo or holdout");
    bench_s.option<double>(bench, "--p", "/p", "holdout training fraction");
    bench_s.option<std::size_t>(bench, "--n", "/n", "holdout iterations");
    bench_s.option<std::string>(bench, "-o,--output", "/output", "report file");
    bench_s.option<std::string>(bench, "--format", "/format", "report format: json or markdown");
    bench_s.flag(bench, "--timings", "/timings", true, "include wall-clock seconds in the report");
    bench_s.option<std::string>(bench, "--domain", "/domain", "domain name in the report (default: corpus dir)");
    bench_s.add_config(bench);
    bench->add_option_function<int>("--threads", [&](const int& t) { threads = t; }, "worker thread ceiling");

    CLI::App* sweep = app.add_subcommand("sweep", "MRR over a grid of bagging parameters (repeated holdout)");
    add_corpus_options(sweep, sweep_s);
    add_pipeline_options(sweep, sweep_s);
    sweep_s.option<double>(sweep, "--p", "/p", "holdout training fraction (default 0.2)");
    sweep_s.option<std::size_t>(sweep, "--n", "/n", "holdout iterations (default 10)");
    sweep_s.option<std::string>(sweep, "--num-bags-grid", "/num_bags_grid", "comma list of num_bags values");
    sweep_s.option<std::string>(sweep, "--bag-size-grid", "/bag_size_grid", "comma list of bag_size values");
    sweep_s.option<std::size_t>(sweep, "--fixed-bag-size", "/fixed_bag_size", "bag_size for the num_bags series");
    sweep_s.option<std::size_t>(sweep, "--fixed-num-bags", "/fixed_num_bags", "num_bags for the bag_size series");
    sweep_s.option<std::string>(sweep, "-o,--output", "/output", "CSV file");
    sweep_s.add_config(sweep);
    sweep->add_option_function<int>("--threads", [&](const int& t) { threads = t; }, "worker thread ceiling");

    CLI::App* synth = app.add_subcommand("synth", "write a synthetic labeled corpus");
    synth->add_option_function<std::string>("--spec", [&](const std::string& p) { synth_s.config_path = p; },
                                             "JSON synthesis spec; flags override it");
    synth_s.option<int>(synth, "--sources", "/sources", "number of sources");
    synth_s.option<int>(synth, "--labels", "/labels", "number of known labels");
    synth_s.option<int>(synth, "--rows-min", "/rows_min", "minimum rows per source");
    synth_s.option<int>(synth, "--rows-max", "/rows_max", "maximum rows per source");
    synth_s.option<int>(synth, "--columns-min", "/columns_min", "minimum columns per source");
    synth_s.option<int>(synth, "--columns-max", "/columns_max", "maximum columns per source");
    synth_s.option<double>(synth, "--unknown-frac", "/unknown_frac", "fraction of unknown columns");
    synth_s.option<std::uint64_t>(synth, "--seed", "/seed", "random seed");
    synth_s.option<std::string>(synth, "-o,--output", "/output", "corpus directory to write");

    std::string inspect_file;
    bool dump_json = false;
    CLI::App* inspect = app.add_subcommand("inspect", "describe a model file");
    inspect->add_option("model_file", inspect_file, "model file")->required();
    inspect->add_flag("--dump-json", dump_json, "full JSON rendering of the model");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    int code = kExitOk;
    try {
        try {
            app.parse(reversed);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return kExitOk;
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            throw InputError(e.what());
        }
        if (train->parsed()) code = cmd_train(train_s, threads, out);
        else if (predict->parsed()) code = cmd_predict(predict_o, threads, out);
        else if (bench->parsed()) code = cmd_benchmark(bench_s, threads, out);
        else if (sweep->parsed()) code = cmd_sweep(sweep_s, threads, out);
        else if (synth->parsed()) code = cmd_synth(synth_s, out);
        else if (inspect->parsed()) code = cmd_inspect(inspect_file, dump_json, out);
    } catch (const InputError& e) {
        err << error_json(kExitInput, "input", e.what()).dump() << "\n";
        code = kExitInput;
    } catch (const ContractError& e) {
        err << error_json(kExitContract, "contract", e.what()).dump() << "\n";
        code = kExitContract;
    } catch (const json::exception& e) {
        err << error_json(kExitInput, "input", std::string("invalid configuration value: ") + e.what()).dump() << "\n";
        code = kExitInput;
    } catch (const TrainingError& e) {
        err << error_json(kExitInternal, "training", e.what()).dump() << "\n";
        code = kExitInternal;
    } catch (const std::exception& e) {
        err << error_json(kExitInternal, "internal", e.what()).dump() << "\n";
        code = kExitInternal;
    }
    set_thread_limit(0);
    return code;
}

}  // namespace semlab::cli
