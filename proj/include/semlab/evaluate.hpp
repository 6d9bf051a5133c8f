#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semlab/pipeline.hpp"

namespace semlab {

/// Mean of 1/rank of each ranking's truth. A truth missing from the ranking
/// scores 0. Throws InputError on empty input or a ranking without truth.
double mrr(std::span<const PredictionRanking> rankings);

struct HoldoutConfig {
    double p = 0.2;      // fraction of sources used for training
    std::size_t n = 10;  // iterations
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const HoldoutConfig&, const HoldoutConfig&) = default;
};

/// Number of training sources for a holdout split, ceil(p * sources).
std::size_t holdout_train_count(double p, std::size_t sources);

struct FoldResult {
    std::size_t index = 0;
    std::vector<std::string> train_sources;
    std::vector<std::string> test_sources;
    double mrr = 0.0;
    std::size_t test_attributes = 0;
    std::size_t train_instances = 0;
    std::size_t unknown_test = 0;  // test attributes labeled unknown
    std::size_t unknown_top1 = 0;  // ... of which unknown ranked first
    double train_seconds = 0.0;
    double predict_seconds = 0.0;

    friend bool operator==(const FoldResult&, const FoldResult&) = default;
};

struct SkippedFold {
    std::size_t index = 0;
    std::string reason;

    friend bool operator==(const SkippedFold&, const SkippedFold&) = default;
};

struct EvaluationReport {
    std::string protocol;  // "loo" or "holdout"
    std::string domain = "corpus";
    nlohmann::json config = nlohmann::json::object();
    bool include_unknown = true;
    std::optional<HoldoutConfig> holdout;
    std::vector<FoldResult> folds;
    std::vector<SkippedFold> skipped;
    double mean_mrr = 0.0;

    /// Unknown-labeled test attributes ranked unknown first, over all folds.
    /// nullopt when no fold tested an unknown attribute.
    std::optional<double> unknown_top1_rate() const;
    double total_train_seconds() const;

    friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

/// One fold per source, training on all the others.
EvaluationReport leave_one_out(const LabeledCorpus& corpus, const PipelineConfig& cfg);

/// n random source splits. Iterations whose training split has fewer than
/// two classes are skipped and recorded.
EvaluationReport repeated_holdout(const LabeledCorpus& corpus, const HoldoutConfig& holdout, const PipelineConfig& cfg);

/// Two one-dimensional series: num_bags varied at a fixed bag_size, then
/// bag_size varied at a fixed num_bags. Either list may be empty, not both.
struct BaggingGrid {
    std::vector<std::size_t> num_bags;
    std::size_t fixed_bag_size = 100;
    std::vector<std::size_t> bag_sizes;
    std::size_t fixed_num_bags = 50;
};

struct SweepRow {
    std::size_t num_bags = 0;
    std::size_t bag_size = 0;
    double mean_mrr = 0.0;
};

std::vector<SweepRow> sweep_bagging(const LabeledCorpus& corpus, const BaggingGrid& grid, const HoldoutConfig& holdout,
                                    const PipelineConfig& cfg);
std::string format_sweep_csv(std::span<const SweepRow> rows);

// ---------------------------------------------------------------------------
// Reports

inline constexpr int kReportSchemaVersion = 1;

enum class ReportFormat { Json, Markdown };
ReportFormat parse_report_format(std::string_view text);

/// Wall-clock fields are left out unless `include_timings`, so that reports of
/// identical runs compare byte-for-byte.
nlohmann::json report_to_json(const EvaluationReport& report, bool include_timings = false);
EvaluationReport report_from_json(const nlohmann::json& doc);
std::string render_markdown(const EvaluationReport& report, bool include_timings = false);
std::string render_report(const EvaluationReport& report, ReportFormat format, bool include_timings = false);

void emit_report(const EvaluationReport& report, const std::filesystem::path& path, ReportFormat format,
                 bool include_timings = false);

}  // namespace semlab
