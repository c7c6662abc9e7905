#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace roadqa {

enum class Partition { BddEp, BddCp, Hdt2, Hdt3, Hdt4, Hdt5 };

enum class ActionClass { Accelerate, Slow, Stop, Merge, Turn };

std::string_view to_string(Partition p);
std::string_view to_string(ActionClass c);
/// Throws ValidationError on an unknown name.
Partition parse_partition(std::string_view name);
ActionClass parse_action_class(std::string_view name);

inline constexpr Partition kAllPartitions[] = {Partition::BddEp, Partition::BddCp, Partition::Hdt2,
                                               Partition::Hdt3,  Partition::Hdt4,  Partition::Hdt5};
inline constexpr ActionClass kAllActionClasses[] = {ActionClass::Accelerate, ActionClass::Slow,
                                                    ActionClass::Stop, ActionClass::Merge,
                                                    ActionClass::Turn};

bool is_bdd(Partition p);

/// HDT partitions name their candidate count; BDD partitions always have 3.
int expected_candidate_count(Partition p);

struct QAItem {
    std::string id;
    std::string question;
    std::vector<std::string> candidates;
    int answer_index = 0;
    Partition partition = Partition::BddEp;
    std::optional<ActionClass> class_label;
    std::map<std::string, std::string> metadata;

    const std::string& answer() const { return candidates.at(static_cast<std::size_t>(answer_index)); }

    bool operator==(const QAItem&) const = default;
};

/// Throws ValidationError describing the first violated invariant.
void validate(const QAItem& item);

struct CausalPair {
    std::string id;
    std::string cause;
    std::string effect;
    std::string source;

    bool operator==(const CausalPair&) const = default;
};

struct PredictionRecord {
    std::string item_id;
    int predicted_index = -1;
    std::vector<double> candidate_scores;
    std::string scorer_name;
    std::map<std::string, std::string> metadata;
    /// Set when the scorer could not produce a decision for this item. Errored
    /// records carry predicted_index -1 and no scores.
    std::optional<std::string> error;

    bool errored() const { return error.has_value(); }

    bool operator==(const PredictionRecord&) const = default;
};

/// Index of the largest score; the lowest index wins ties. Empty input → -1.
int argmax_lowest(const std::vector<double>& scores);

PredictionRecord make_prediction(std::string item_id, std::vector<double> scores,
                                 std::string scorer_name);

void validate(const PredictionRecord& record);

}  // namespace roadqa
