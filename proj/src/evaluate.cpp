#include "semlab/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "semlab/error.hpp"
#include "semlab/rng.hpp"

namespace semlab {

using json = nlohmann::json;

double mrr(std::span<const PredictionRanking> rankings) {
    if (rankings.empty()) throw InputError("mrr of an empty ranking list");
    double sum = 0.0;
    for (const auto& r : rankings) {
        if (!r.truth) throw InputError("ranking for " + r.attribute.first + "/" + r.attribute.second + " has no truth");
        if (const auto rank = r.rank_of(*r.truth)) sum += 1.0 / static_cast<double>(*rank);
    }
    return sum / static_cast<double>(rankings.size());
}

void HoldoutConfig::validate() const {
    if (!(p > 0.0 && p < 1.0)) throw InputError("holdout p must lie in (0, 1)");
    if (n < 1) throw InputError("holdout n must be at least 1");
}

std::size_t holdout_train_count(double p, std::size_t sources) {
    return static_cast<std::size_t>(std::ceil(p * static_cast<double>(sources) - 1e-9));
}

std::optional<double> EvaluationReport::unknown_top1_rate() const {
    std::size_t total = 0, top = 0;
    for (const auto& f : folds) {
        total += f.unknown_test;
        top += f.unknown_top1;
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(top) / static_cast<double>(total);
}

double EvaluationReport::total_train_seconds() const {
    double s = 0.0;
    for (const auto& f : folds) s += f.train_seconds;
    return s;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct FoldPlan {
    std::size_t index;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

struct FoldOutcome {
    std::optional<FoldResult> result;
    std::optional<std::string> skip_reason;
};

std::vector<std::string> source_names(const LabeledCorpus& corpus, std::span<const std::size_t> idx) {
    std::vector<std::string> out;
    for (std::size_t i : idx) out.push_back(corpus.sources[i].name);
    return out;
}

std::string describe(const FoldPlan& plan, const LabeledCorpus& corpus) {
    std::string text = "fold " + std::to_string(plan.index) + " (test";
    for (std::size_t i : plan.test) text += " " + corpus.sources[i].name;
    return text + ")";
}

// Returns a skip reason instead of throwing when the training split is
// degenerate and `strict` is off.
FoldOutcome run_fold(const LabeledCorpus& corpus, const FoldPlan& plan, const PipelineConfig& cfg, bool strict) {
    const auto train = training_attributes(corpus, plan.train, cfg.include_unknown);
    std::set<SemanticLabel> classes;
    for (const auto& t : train) classes.insert(t.label);
    if (classes.size() < 2) {
        const std::string reason = describe(plan, corpus) + ": training split has fewer than 2 classes";
        if (strict) throw InputError(reason);
        return {std::nullopt, reason};
    }
    const auto test = training_attributes(corpus, plan.test, cfg.include_unknown);
    if (test.empty()) return {std::nullopt, describe(plan, corpus) + ": no scorable test attributes"};

    const auto train_start = Clock::now();
    TrainOutcome trained = train_pipeline(train, cfg);
    const double train_seconds = seconds_since(train_start);

    std::set<std::string> allowed;
    for (std::size_t i : plan.train) allowed.insert(corpus.sources[i].name);
    for (const auto& key : trained.provenance) {
        if (!allowed.contains(key.first)) {
            throw std::logic_error(describe(plan, corpus) + ": training instance from held-out source " + key.first);
        }
    }

    const std::optional<BagConfig> predict_bags =
        cfg.predict_bagging ? cfg.effective_bagging() : std::optional<BagConfig>{};
    std::vector<PredictionRanking> rankings(test.size());
    std::exception_ptr failure;
    const auto predict_start = Clock::now();
    const long count = static_cast<long>(test.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
        try {
            rankings[i] = predict_attribute(trained.model, *test[i].attribute, predict_bags);
            rankings[i].truth = test[i].label;
        } catch (...) {
#pragma omp critical(semlab_fold_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    const double predict_seconds = seconds_since(predict_start);

    FoldResult r;
    r.index = plan.index;
    r.train_sources = source_names(corpus, plan.train);
    r.test_sources = source_names(corpus, plan.test);
    r.mrr = mrr(rankings);
    r.test_attributes = rankings.size();
    r.train_instances = trained.provenance.size();
    for (const auto& ranking : rankings) {
        if (!ranking.truth->is_unknown()) continue;
        ++r.unknown_test;
        if (!ranking.ranked.empty() && ranking.ranked.front().label.is_unknown()) ++r.unknown_top1;
    }
    r.train_seconds = train_seconds;
    r.predict_seconds = predict_seconds;
    return {r, std::nullopt};
}

EvaluationReport run_plans(const LabeledCorpus& corpus, const std::vector<FoldPlan>& plans, const PipelineConfig& cfg,
                           bool strict, std::string protocol) {
    EvaluationReport report;
    report.protocol = std::move(protocol);
    report.config = to_json(cfg);
    report.include_unknown = cfg.include_unknown;
    for (const auto& plan : plans) {
        FoldOutcome outcome = run_fold(corpus, plan, cfg, strict);
        if (outcome.result) {
            report.folds.push_back(std::move(*outcome.result));
        } else {
            report.skipped.push_back({plan.index, *outcome.skip_reason});
        }
    }
    if (report.folds.empty()) throw InputError("every fold was skipped; no MRR to report");
    double sum = 0.0;
    for (const auto& f : report.folds) sum += f.mrr;
    report.mean_mrr = sum / static_cast<double>(report.folds.size());
    return report;
}

}  // namespace

EvaluationReport leave_one_out(const LabeledCorpus& corpus, const PipelineConfig& cfg) {
    cfg.validate();
    const std::size_t s = corpus.sources.size();
    if (s < 2) throw InputError("leave-one-out needs at least 2 sources, got " + std::to_string(s));
    std::vector<FoldPlan> plans;
    for (std::size_t k = 0; k < s; ++k) {
        FoldPlan plan{k, {}, {k}};
        for (std::size_t i = 0; i < s; ++i) {
            if (i != k) plan.train.push_back(i);
        }
        plans.push_back(std::move(plan));
    }
    return run_plans(corpus, plans, cfg, true, "loo");
}

EvaluationReport repeated_holdout(const LabeledCorpus& corpus, const HoldoutConfig& holdout, const PipelineConfig& cfg) {
    cfg.validate();
    holdout.validate();
    const std::size_t s = corpus.sources.size();
    if (s < 2) throw InputError("repeated holdout needs at least 2 sources, got " + std::to_string(s));
    const std::size_t k = holdout_train_count(holdout.p, s);
    if (k < 1 || k >= s) {
        throw InputError("degenerate holdout split: p=" + std::to_string(holdout.p) + " over " + std::to_string(s) +
                         " sources leaves " + std::to_string(k) + " for training");
    }
    std::vector<FoldPlan> plans;
    for (std::size_t it = 0; it < holdout.n; ++it) {
        Rng rng(derive_seed(holdout.seed, it));
        std::vector<std::size_t> order(s);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = 0; i < k; ++i) std::swap(order[i], order[i + rng.below(s - i)]);
        FoldPlan plan{it, {order.begin(), order.begin() + static_cast<long>(k)}, {}};
        std::sort(plan.train.begin(), plan.train.end());
        for (std::size_t i = 0; i < s; ++i) {
            if (!std::binary_search(plan.train.begin(), plan.train.end(), i)) plan.test.push_back(i);
        }
        plans.push_back(std::move(plan));
    }
    EvaluationReport report = run_plans(corpus, plans, cfg, false, "holdout");
    report.holdout = holdout;
    return report;
}

std::vector<SweepRow> sweep_bagging(const LabeledCorpus& corpus, const BaggingGrid& grid, const HoldoutConfig& holdout,
                                    const PipelineConfig& cfg) {
    if (grid.num_bags.empty() && grid.bag_sizes.empty()) throw InputError("bagging sweep grid is empty");
    std::vector<std::pair<std::size_t, std::size_t>> points;
    for (std::size_t nb : grid.num_bags) points.emplace_back(nb, grid.fixed_bag_size);
    for (std::size_t bs : grid.bag_sizes) points.emplace_back(grid.fixed_num_bags, bs);
    std::vector<SweepRow> rows;
    for (const auto& [nb, bs] : points) {
        PipelineConfig point = cfg;
        BagConfig bags;
        bags.num_bags = nb;
        bags.bag_size = bs;
        point.bagging = bags;
        rows.push_back({nb, bs, repeated_holdout(corpus, holdout, point).mean_mrr});
    }
    return rows;
}

std::string format_sweep_csv(std::span<const SweepRow> rows) {
    std::ostringstream out;
    out << "num_bags,bag_size,mean_mrr\n";
    out << std::setprecision(17);
    for (const auto& r : rows) out << r.num_bags << ',' << r.bag_size << ',' << r.mean_mrr << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Reports

ReportFormat parse_report_format(std::string_view text) {
    if (text == "json") return ReportFormat::Json;
    if (text == "markdown" || text == "md") return ReportFormat::Markdown;
    throw InputError("unknown report format '" + std::string(text) + "' (expected json or markdown)");
}

json report_to_json(const EvaluationReport& report, bool include_timings) {
    json doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["protocol"] = report.protocol;
    doc["domain"] = report.domain;
    doc["config"] = report.config;
    doc["include_unknown"] = report.include_unknown;
    if (report.holdout) {
        doc["holdout"] = {{"p", report.holdout->p}, {"n", report.holdout->n}, {"seed", report.holdout->seed}};
    } else {
        doc["holdout"] = nullptr;
    }
    json folds = json::array();
    for (const auto& f : report.folds) {
        json fold = {{"index", f.index},
                     {"train_sources", f.train_sources},
                     {"test_sources", f.test_sources},
                     {"mrr", f.mrr},
                     {"test_attributes", f.test_attributes},
                     {"train_instances", f.train_instances},
                     {"unknown_test", f.unknown_test},
                     {"unknown_top1", f.unknown_top1}};
        if (include_timings) {
            fold["train_seconds"] = f.train_seconds;
            fold["predict_seconds"] = f.predict_seconds;
        }
        folds.push_back(std::move(fold));
    }
    doc["folds"] = std::move(folds);
    json skipped = json::array();
    for (const auto& s : report.skipped) skipped.push_back({{"index", s.index}, {"reason", s.reason}});
    doc["skipped"] = std::move(skipped);
    doc["mean_mrr"] = report.mean_mrr;
    const auto rate = report.unknown_top1_rate();
    doc["unknown_top1_rate"] = rate ? json(*rate) : json(nullptr);
    if (include_timings) doc["total_train_seconds"] = report.total_train_seconds();
    return doc;
}

EvaluationReport report_from_json(const json& doc) {
    try {
        const int version = doc.at("schema_version").get<int>();
        if (version != kReportSchemaVersion) {
            throw ContractError("report schema version " + std::to_string(version) + " is not supported (expected " +
                                std::to_string(kReportSchemaVersion) + ")");
        }
        EvaluationReport r;
        r.protocol = doc.at("protocol").get<std::string>();
        r.domain = doc.value("domain", r.domain);
        r.config = doc.at("config");
        r.include_unknown = doc.at("include_unknown").get<bool>();
        if (doc.contains("holdout") && !doc["holdout"].is_null()) {
            const json& h = doc["holdout"];
            r.holdout = HoldoutConfig{h.at("p").get<double>(), h.at("n").get<std::size_t>(),
                                      h.at("seed").get<std::uint64_t>()};
        }
        for (const json& f : doc.at("folds")) {
            FoldResult fold;
            fold.index = f.at("index").get<std::size_t>();
            fold.train_sources = f.at("train_sources").get<std::vector<std::string>>();
            fold.test_sources = f.at("test_sources").get<std::vector<std::string>>();
            fold.mrr = f.at("mrr").get<double>();
            fold.test_attributes = f.at("test_attributes").get<std::size_t>();
            fold.train_instances = f.at("train_instances").get<std::size_t>();
            fold.unknown_test = f.at("unknown_test").get<std::size_t>();
            fold.unknown_top1 = f.at("unknown_top1").get<std::size_t>();
            fold.train_seconds = f.value("train_seconds", 0.0);
            fold.predict_seconds = f.value("predict_seconds", 0.0);
            r.folds.push_back(std::move(fold));
        }
        for (const json& s : doc.at("skipped")) {
            r.skipped.push_back({s.at("index").get<std::size_t>(), s.at("reason").get<std::string>()});
        }
        r.mean_mrr = doc.at("mean_mrr").get<double>();
        return r;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed report: ") + e.what());
    }
}

namespace {

std::string fixed(double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : " ") + s;
    return out;
}

std::string sampling_label(const json& config) {
    std::string text;
    const json& bags = config.value("bagging", json(nullptr));
    if (bags.is_null()) {
        text = "no bagging";
    } else {
        text = "bagging " + std::to_string(bags.value("num_bags", 0)) + "x" + std::to_string(bags.value("bag_size", 0));
        if (config.value("predict_bagging", false)) text += " (+predict)";
    }
    const std::string rebalance = config.value("rebalance", "none");
    if (rebalance != "none") text += ", resample to " + rebalance;
    return text;
}

}  // namespace

std::string render_markdown(const EvaluationReport& report, bool include_timings) {
    const json& cfg = report.config;
    const std::string model = cfg.value("model", "?");
    const std::string features = cfg.value("features", "?");
    const std::string sampling = sampling_label(cfg);
    std::ostringstream out;
    out << "# Evaluation report: " << report.domain << "\n\n";
    out << "| setting | value |\n|---|---|\n";
    out << "| protocol | " << report.protocol << " |\n";
    out << "| model | " << model << " |\n";
    out << "| features | " << features << " |\n";
    out << "| sampling | " << sampling << " |\n";
    out << "| unknown included | " << (report.include_unknown ? "yes" : "no") << " |\n";
    out << "| seed | " << cfg.value("seed", std::uint64_t{0}) << " |\n";
    if (report.holdout) out << "| holdout | p=" << report.holdout->p << ", n=" << report.holdout->n << " |\n";
    out << "\n| fold | test sources | model | features | sampling | " << report.domain << " MRR |";
    if (include_timings) out << " train s | predict s |";
    out << "\n|---|---|---|---|---|---|";
    if (include_timings) out << "---|---|";
    out << "\n";
    for (const auto& f : report.folds) {
        out << "| " << f.index << " | " << join(f.test_sources) << " | " << model << " | " << features << " | "
            << sampling << " | " << fixed(f.mrr, 3) << " |";
        if (include_timings) out << ' ' << fixed(f.train_seconds, 2) << " | " << fixed(f.predict_seconds, 2) << " |";
        out << "\n";
    }
    out << "| mean | | " << model << " | " << features << " | " << sampling << " | " << fixed(report.mean_mrr, 3)
        << " |";
    if (include_timings) {
        double predict = 0.0;
        for (const auto& f : report.folds) predict += f.predict_seconds;
        const double n = static_cast<double>(report.folds.size());
        out << ' ' << fixed(report.total_train_seconds() / n, 2) << " | " << fixed(predict / n, 2) << " |";
    }
    out << "\n";
    if (const auto rate = report.unknown_top1_rate()) out << "\nunknown ranked first: " << fixed(*rate, 3) << "\n";
    if (!report.skipped.empty()) {
        out << "\nSkipped:\n\n";
        for (const auto& s : report.skipped) out << "- " << s.index << ": " << s.reason << "\n";
    }
    return out.str();
}

std::string render_report(const EvaluationReport& report, ReportFormat format, bool include_timings) {
    if (format == ReportFormat::Markdown) return render_markdown(report, include_timings);
    return report_to_json(report, include_timings).dump(2) + "\n";
}

void emit_report(const EvaluationReport& report, const std::filesystem::path& path, ReportFormat format,
                 bool include_timings) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write report to " + path.string());
    out << render_report(report, format, include_timings);
    if (!out) throw InputError("failed writing report to " + path.string());
}

}  // namespace semlab
