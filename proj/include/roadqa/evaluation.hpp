#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roadqa/qa_io.hpp"
#include "roadqa/types.hpp"

namespace roadqa {

enum class CoverageMode {
    Strict,   // every gold item needs a prediction
    Lenient,  // missing predictions count as wrong and are reported
};

struct Tally {
    std::size_t correct = 0;
    std::size_t total = 0;

    /// correct / total; throws ValidationError when total is 0.
    double accuracy() const;

    bool operator==(const Tally&) const = default;
};

struct OverlapResult {
    std::size_t correct_a = 0;
    std::size_t correct_b = 0;
    std::size_t joint_correct = 0;
    std::size_t union_correct = 0;
    std::size_t total = 0;

    double ensemble_upper_bound() const;

    bool operator==(const OverlapResult&) const = default;
};

struct EvaluationReport {
    std::string scorer_name;
    Tally overall;
    std::map<Partition, Tally> partitions;
    std::map<ActionClass, Tally> per_class;
    std::size_t errored = 0;  // excluded from every tally
    std::size_t missing = 0;  // lenient mode only; counted wrong
    std::optional<OverlapResult> overlap;

    bool operator==(const EvaluationReport&) const = default;
};

/// Fraction of gold items answered correctly. Errored predictions are left out
/// of numerator and denominator. Throws ValidationError for an empty
/// prediction set, unknown or duplicate item ids, and (strict mode) gold items
/// without a prediction.
double accuracy(const std::vector<PredictionRecord>& predictions, const std::vector<QAItem>& gold,
                CoverageMode mode = CoverageMode::Strict);

/// Accuracy within each class_label; classes without items are omitted.
/// Throws ValidationError if no gold item carries a class label.
std::map<ActionClass, double> per_class_accuracy(const std::vector<PredictionRecord>& predictions,
                                                 const std::vector<QAItem>& gold,
                                                 CoverageMode mode = CoverageMode::Strict);

/// Full breakdown by partition and class.
EvaluationReport evaluate(const std::vector<PredictionRecord>& predictions, const std::vector<QAItem>& gold,
                          CoverageMode mode = CoverageMode::Strict);

/// Correct-set overlap of two prediction sets covering the same item ids.
/// Errored predictions count as wrong.
OverlapResult overlap_analysis(const std::vector<PredictionRecord>& a, const std::vector<PredictionRecord>& b,
                               const std::vector<QAItem>& gold);

struct HumanVote {
    std::string item_id;
    std::string annotator_id;
    int answer_index = 0;
    int confidence = 0;  // Likert 1..5
};

struct HumanAggregate {
    std::map<std::string, int> majority;  // item id → strict-majority answer
    std::vector<std::string> unresolved;  // no strict majority
    double mean_confidence = 0.0;         // grand mean over all votes
    std::size_t vote_count = 0;
};

HumanAggregate aggregate_human(const std::vector<HumanVote>& votes);

/// Majority answers scored against gold; unresolved items count as wrong.
Tally human_accuracy(const HumanAggregate& aggregate, const std::vector<QAItem>& gold);

std::vector<HumanVote> load_votes_file(const std::filesystem::path& path);

enum class ReportFormat { Json, Markdown };

Json to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const Json& j);
Json to_json(const OverlapResult& overlap);
Json to_json(const HumanAggregate& aggregate);

/// Markdown renders one row per report with a column per partition (percent,
/// one decimal) and an Avg column holding the unweighted mean over the
/// partitions present in that row; per-class accuracies follow in a second
/// table when available. Json renders an array of report objects.
std::string emit_report(const std::vector<EvaluationReport>& reports, ReportFormat format);

/// Parses the output of emit_report(..., Json).
std::vector<EvaluationReport> parse_report_json(const std::string& text);

/// Percentage with one decimal, e.g. 0.8703 → "87.0".
std::string format_percent(double fraction);

}  // namespace roadqa
