#include "roadqa/evaluation.hpp"

#include <cstdio>
#include <set>
#include <unordered_map>

#include "roadqa/errors.hpp"

namespace roadqa {

namespace {

using PredictionIndex = std::unordered_map<std::string, const PredictionRecord*>;

PredictionIndex index_predictions(const std::vector<PredictionRecord>& predictions,
                                  const std::vector<QAItem>& gold) {
    if (predictions.empty()) throw ValidationError("no predictions to evaluate");
    std::set<std::string> gold_ids;
    for (const auto& g : gold) gold_ids.insert(g.id);
    PredictionIndex out;
    for (const auto& p : predictions) {
        if (!gold_ids.count(p.item_id)) throw ValidationError("prediction for unknown item \"" + p.item_id + "\"");
        if (!out.emplace(p.item_id, &p).second) {
            throw ValidationError("duplicate prediction for item \"" + p.item_id + "\"");
        }
    }
    return out;
}

bool is_correct(const PredictionRecord& p, const QAItem& item) {
    return !p.errored() && p.predicted_index == item.answer_index;
}

Json tally_json(const Tally& t) {
    Json j;
    j["correct"] = t.correct;
    j["total"] = t.total;
    j["accuracy"] = t.total ? Json(t.accuracy()) : Json(nullptr);
    return j;
}

Tally tally_from_json(const Json& j) { return {j.at("correct").get<std::size_t>(), j.at("total").get<std::size_t>()}; }

}  // namespace

double Tally::accuracy() const {
    if (total == 0) throw ValidationError("accuracy over zero items");
    return static_cast<double>(correct) / static_cast<double>(total);
}

double OverlapResult::ensemble_upper_bound() const {
    if (total == 0) throw ValidationError("overlap over zero items");
    return static_cast<double>(union_correct) / static_cast<double>(total);
}

EvaluationReport evaluate(const std::vector<PredictionRecord>& predictions, const std::vector<QAItem>& gold,
                          CoverageMode mode) {
    const auto by_id = index_predictions(predictions, gold);
    EvaluationReport report;
    report.scorer_name = predictions.front().scorer_name;
    for (const auto& p : predictions) {
        if (p.scorer_name != report.scorer_name) {
            throw ValidationError("predictions mix scorers \"" + report.scorer_name + "\" and \"" + p.scorer_name + "\"");
        }
    }

    for (const auto& item : gold) {
        auto it = by_id.find(item.id);
        bool correct = false;
        if (it == by_id.end()) {
            if (mode == CoverageMode::Strict) throw ValidationError("no prediction for item \"" + item.id + "\"");
            ++report.missing;
        } else if (it->second->errored()) {
            ++report.errored;
            continue;
        } else {
            const auto& p = *it->second;
            if (p.candidate_scores.size() != item.candidates.size()) {
                throw ValidationError("prediction for \"" + item.id + "\" scores " +
                                      std::to_string(p.candidate_scores.size()) + " candidates, item has " +
                                      std::to_string(item.candidates.size()));
            }
            correct = is_correct(p, item);
        }
        for (Tally* t : {&report.overall, &report.partitions[item.partition]}) {
            ++t->total;
            if (correct) ++t->correct;
        }
        if (item.class_label) {
            Tally& t = report.per_class[*item.class_label];
            ++t.total;
            if (correct) ++t.correct;
        }
    }
    if (report.overall.total == 0) throw ValidationError("every prediction errored; nothing to score");
    return report;
}

double accuracy(const std::vector<PredictionRecord>& predictions, const std::vector<QAItem>& gold,
                CoverageMode mode) {
    return evaluate(predictions, gold, mode).overall.accuracy();
}

std::map<ActionClass, double> per_class_accuracy(const std::vector<PredictionRecord>& predictions,
                                                 const std::vector<QAItem>& gold, CoverageMode mode) {
    const auto report = evaluate(predictions, gold, mode);
    if (report.per_class.empty()) throw ValidationError("no gold item carries a class label");
    std::map<ActionClass, double> out;
    for (const auto& [cls, tally] : report.per_class) out[cls] = tally.accuracy();
    return out;
}

OverlapResult overlap_analysis(const std::vector<PredictionRecord>& a, const std::vector<PredictionRecord>& b,
                               const std::vector<QAItem>& gold) {
    const auto by_a = index_predictions(a, gold);
    const auto by_b = index_predictions(b, gold);
    if (by_a.size() != by_b.size()) throw ValidationError("prediction sets cover different items");
    for (const auto& [id, _] : by_a) {
        if (!by_b.count(id)) throw ValidationError("item \"" + id + "\" predicted by only one model");
    }

    OverlapResult r;
    for (const auto& item : gold) {
        auto ia = by_a.find(item.id);
        if (ia == by_a.end()) continue;
        const bool ca = is_correct(*ia->second, item);
        const bool cb = is_correct(*by_b.at(item.id), item);
        ++r.total;
        r.correct_a += ca;
        r.correct_b += cb;
        r.joint_correct += ca && cb;
    }
    r.union_correct = r.correct_a + r.correct_b - r.joint_correct;
    return r;
}

HumanAggregate aggregate_human(const std::vector<HumanVote>& votes) {
    std::map<std::string, std::map<int, int>> counts;
    std::map<std::string, int> totals;
    HumanAggregate out;
    long long confidence_sum = 0;
    for (const auto& v : votes) {
        if (v.confidence < 1 || v.confidence > 5) {
            throw ValidationError("confidence " + std::to_string(v.confidence) + " for item \"" + v.item_id +
                                  "\" is outside 1..5");
        }
        if (v.answer_index < 0) throw ValidationError("negative answer index for item \"" + v.item_id + "\"");
        ++counts[v.item_id][v.answer_index];
        ++totals[v.item_id];
        confidence_sum += v.confidence;
    }
    for (const auto& [id, answers] : counts) {
        const int n = totals[id];
        int winner = -1;
        for (const auto& [answer, c] : answers) {
            if (2 * c > n) winner = answer;
        }
        if (winner >= 0) {
            out.majority[id] = winner;
        } else {
            out.unresolved.push_back(id);
        }
    }
    out.vote_count = votes.size();
    out.mean_confidence = votes.empty() ? 0.0 : static_cast<double>(confidence_sum) / static_cast<double>(votes.size());
    return out;
}

Tally human_accuracy(const HumanAggregate& aggregate, const std::vector<QAItem>& gold) {
    std::unordered_map<std::string, const QAItem*> by_id;
    for (const auto& g : gold) by_id.emplace(g.id, &g);
    Tally t;
    for (const auto& [id, answer] : aggregate.majority) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw ValidationError("vote for unknown item \"" + id + "\"");
        ++t.total;
        if (answer == it->second->answer_index) ++t.correct;
    }
    for (const auto& id : aggregate.unresolved) {
        if (!by_id.count(id)) throw ValidationError("vote for unknown item \"" + id + "\"");
        ++t.total;
    }
    return t;
}

std::vector<HumanVote> load_votes_file(const std::filesystem::path& path) {
    std::vector<HumanVote> out;
    std::size_t line = 0;
    for (const auto& row : read_jsonl(path)) {
        ++line;
        try {
            HumanVote v;
            v.item_id = row.at("item_id").get<std::string>();
            v.annotator_id = row.value("annotator_id", std::string());
            v.answer_index = row.at("answer_index").get<int>();
            v.confidence = row.at("confidence").get<int>();
            out.push_back(std::move(v));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string(), line, e.what());
        }
    }
    return out;
}

Json to_json(const OverlapResult& o) {
    Json j;
    j["correct_a"] = o.correct_a;
    j["correct_b"] = o.correct_b;
    j["joint_correct"] = o.joint_correct;
    j["union_correct"] = o.union_correct;
    j["total"] = o.total;
    j["ensemble_upper_bound"] = o.total ? Json(o.ensemble_upper_bound()) : Json(nullptr);
    return j;
}

Json to_json(const HumanAggregate& h) {
    Json j;
    j["majority"] = Json::object();
    for (const auto& [id, answer] : h.majority) j["majority"][id] = answer;
    j["unresolved"] = h.unresolved;
    j["mean_confidence"] = h.mean_confidence;
    j["vote_count"] = h.vote_count;
    return j;
}

Json to_json(const EvaluationReport& r) {
    Json j;
    j["scorer_name"] = r.scorer_name;
    j["overall"] = tally_json(r.overall);
    j["partitions"] = Json::object();
    for (const auto& [p, t] : r.partitions) j["partitions"][std::string(to_string(p))] = tally_json(t);
    j["per_class"] = Json::object();
    for (const auto& [c, t] : r.per_class) j["per_class"][std::string(to_string(c))] = tally_json(t);
    j["errored"] = r.errored;
    j["missing"] = r.missing;
    if (r.overlap) j["overlap"] = to_json(*r.overlap);
    return j;
}

EvaluationReport report_from_json(const Json& j) {
    try {
        EvaluationReport r;
        r.scorer_name = j.at("scorer_name").get<std::string>();
        r.overall = tally_from_json(j.at("overall"));
        for (const auto& [name, t] : j.at("partitions").items()) r.partitions[parse_partition(name)] = tally_from_json(t);
        for (const auto& [name, t] : j.at("per_class").items()) r.per_class[parse_action_class(name)] = tally_from_json(t);
        r.errored = j.value("errored", std::size_t{0});
        r.missing = j.value("missing", std::size_t{0});
        if (auto it = j.find("overlap"); it != j.end()) {
            OverlapResult o;
            o.correct_a = it->at("correct_a").get<std::size_t>();
            o.correct_b = it->at("correct_b").get<std::size_t>();
            o.joint_correct = it->at("joint_correct").get<std::size_t>();
            o.union_correct = it->at("union_correct").get<std::size_t>();
            o.total = it->at("total").get<std::size_t>();
            r.overlap = o;
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed report: ") + e.what());
    }
}

std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", fraction * 100.0);
    return buf;
}

std::string emit_report(const std::vector<EvaluationReport>& reports, ReportFormat format) {
    if (format == ReportFormat::Json) {
        Json arr = Json::array();
        for (const auto& r : reports) arr.push_back(to_json(r));
        return arr.dump(2) + "\n";
    }

    std::set<Partition> partitions;
    std::set<ActionClass> classes;
    for (const auto& r : reports) {
        for (const auto& [p, _] : r.partitions) partitions.insert(p);
        for (const auto& [c, _] : r.per_class) classes.insert(c);
    }

    std::string out = "| Scorer |";
    std::string rule = "| --- |";
    for (Partition p : partitions) {
        out += " " + std::string(to_string(p)) + " |";
        rule += " ---: |";
    }
    out += " Avg |\n" + rule + " ---: |\n";
    for (const auto& r : reports) {
        out += "| " + r.scorer_name + " |";
        double sum = 0.0;
        std::size_t n = 0;
        for (Partition p : partitions) {
            auto it = r.partitions.find(p);
            if (it == r.partitions.end() || it->second.total == 0) {
                out += " - |";
                continue;
            }
            const double acc = it->second.accuracy();
            sum += acc;
            ++n;
            out += " " + format_percent(acc) + " |";
        }
        out += " " + (n ? format_percent(sum / static_cast<double>(n)) : std::string("-")) + " |\n";
    }

    if (!classes.empty()) {
        out += "\n| Scorer |";
        rule = "| --- |";
        for (ActionClass c : classes) {
            out += " " + std::string(to_string(c)) + " |";
            rule += " ---: |";
        }
        out += "\n" + rule + "\n";
        for (const auto& r : reports) {
            out += "| " + r.scorer_name + " |";
            for (ActionClass c : classes) {
                auto it = r.per_class.find(c);
                out += (it == r.per_class.end() || it->second.total == 0) ? std::string(" - |")
                                                                            : " " + format_percent(it->second.accuracy()) + " |";
            }
            out += "\n";
        }
    }
    return out;
}

std::vector<EvaluationReport> parse_report_json(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("malformed report JSON: ") + e.what());
    }
    if (!j.is_array()) throw ValidationError("report JSON must be an array");
    std::vector<EvaluationReport> out;
    for (const auto& r : j) out.push_back(report_from_json(r));
    return out;
}

}  // namespace roadqa
