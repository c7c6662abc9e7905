#include "roadqa/qa_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "roadqa/errors.hpp"

namespace roadqa {

namespace {

constexpr std::string_view kPartitionNames[] = {"BDD-EP", "BDD-CP", "HDT-2", "HDT-3", "HDT-4", "HDT-5"};
constexpr std::string_view kClassNames[] = {"accelerate", "slow", "stop", "merge", "turn"};

std::map<std::string, std::string> string_map_from_json(const Json& j, const char* field) {
    std::map<std::string, std::string> out;
    if (j.is_null()) return out;
    if (!j.is_object()) throw ValidationError(std::string(field) + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string()) {
            throw ValidationError(std::string(field) + "." + key + " must be a string");
        }
        out.emplace(key, value.get<std::string>());
    }
    return out;
}

const Json& require(const Json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end()) throw ValidationError(std::string("missing field \"") + field + "\"");
    return *it;
}

std::string require_string(const Json& j, const char* field) {
    const Json& v = require(j, field);
    if (!v.is_string()) throw ValidationError(std::string("field \"") + field + "\" must be a string");
    return v.get<std::string>();
}

int require_int(const Json& j, const char* field) {
    const Json& v = require(j, field);
    if (!v.is_number_integer()) {
        throw ValidationError(std::string("field \"") + field + "\" must be an integer");
    }
    return v.get<int>();
}

std::string dump_line(const Json& j) {
    try {
        return j.dump();
    } catch (const nlohmann::json::type_error& e) {
        // invalid UTF-8 in a string value
        throw ValidationError(e.what());
    }
}

}  // namespace

std::string_view to_string(Partition p) { return kPartitionNames[static_cast<int>(p)]; }
std::string_view to_string(ActionClass c) { return kClassNames[static_cast<int>(c)]; }

Partition parse_partition(std::string_view name) {
    for (Partition p : kAllPartitions) {
        if (to_string(p) == name) return p;
    }
    throw ValidationError("unknown partition \"" + std::string(name) + "\"");
}

ActionClass parse_action_class(std::string_view name) {
    for (ActionClass c : kAllActionClasses) {
        if (to_string(c) == name) return c;
    }
    throw ValidationError("unknown class label \"" + std::string(name) + "\"");
}

bool is_bdd(Partition p) { return p == Partition::BddEp || p == Partition::BddCp; }

int expected_candidate_count(Partition p) {
    switch (p) {
        case Partition::BddEp:
        case Partition::BddCp: return 3;
        case Partition::Hdt2: return 2;
        case Partition::Hdt3: return 3;
        case Partition::Hdt4: return 4;
        case Partition::Hdt5: return 5;
    }
    return 0;
}

void validate(const QAItem& item) {
    const std::string where = "item \"" + item.id + "\": ";
    if (item.id.empty()) throw ValidationError("item with empty id");
    if (item.question.empty()) throw ValidationError(where + "empty question");
    const auto n = static_cast<int>(item.candidates.size());
    if (n < 2 || n > 5) {
        throw ValidationError(where + "candidate count " + std::to_string(n) + " outside [2, 5]");
    }
    for (const auto& c : item.candidates) {
        if (c.empty()) throw ValidationError(where + "empty candidate");
    }
    if (item.answer_index < 0 || item.answer_index >= n) {
        throw ValidationError(where + "answer_index " + std::to_string(item.answer_index) +
                              " out of range for " + std::to_string(n) + " candidates");
    }
    if (n != expected_candidate_count(item.partition)) {
        throw ValidationError(where + "partition " + std::string(to_string(item.partition)) +
                              " requires " + std::to_string(expected_candidate_count(item.partition)) +
                              " candidates, got " + std::to_string(n));
    }
}

int argmax_lowest(const std::vector<double>& scores) {
    if (scores.empty()) return -1;
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return static_cast<int>(best);
}

PredictionRecord make_prediction(std::string item_id, std::vector<double> scores,
                                 std::string scorer_name) {
    PredictionRecord r;
    r.item_id = std::move(item_id);
    r.predicted_index = argmax_lowest(scores);
    r.candidate_scores = std::move(scores);
    r.scorer_name = std::move(scorer_name);
    return r;
}

void validate(const PredictionRecord& record) {
    const std::string where = "prediction for \"" + record.item_id + "\": ";
    if (record.item_id.empty()) throw ValidationError("prediction with empty item_id");
    if (record.errored()) {
        if (record.predicted_index != -1) {
            throw ValidationError(where + "errored record must have predicted_index -1");
        }
        return;
    }
    if (record.candidate_scores.empty()) throw ValidationError(where + "no candidate scores");
    if (record.predicted_index != argmax_lowest(record.candidate_scores)) {
        throw ValidationError(where + "predicted_index is not the argmax of candidate_scores");
    }
}

Json to_json(const QAItem& item) {
    Json j;
    j["id"] = item.id;
    j["question"] = item.question;
    j["candidates"] = item.candidates;
    j["answer_index"] = item.answer_index;
    j["partition"] = std::string(to_string(item.partition));
    j["class_label"] = item.class_label ? Json(std::string(to_string(*item.class_label))) : Json(nullptr);
    j["metadata"] = Json::object();
    for (const auto& [k, v] : item.metadata) j["metadata"][k] = v;
    return j;
}

QAItem qa_item_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("QA item must be a JSON object");
    QAItem item;
    item.id = require_string(j, "id");
    item.question = require_string(j, "question");
    const Json& cands = require(j, "candidates");
    if (!cands.is_array()) throw ValidationError("field \"candidates\" must be an array");
    for (const auto& c : cands) {
        if (!c.is_string()) throw ValidationError("candidates must be strings");
        item.candidates.push_back(c.get<std::string>());
    }
    item.answer_index = require_int(j, "answer_index");
    item.partition = parse_partition(require_string(j, "partition"));
    if (auto it = j.find("class_label"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw ValidationError("field \"class_label\" must be a string or null");
        item.class_label = parse_action_class(it->get<std::string>());
    }
    if (auto it = j.find("metadata"); it != j.end()) item.metadata = string_map_from_json(*it, "metadata");
    validate(item);
    return item;
}

Json to_json(const CausalPair& pair) {
    Json j;
    j["id"] = pair.id;
    j["cause"] = pair.cause;
    j["effect"] = pair.effect;
    j["source"] = pair.source;
    return j;
}

CausalPair causal_pair_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("causal pair must be a JSON object");
    CausalPair p;
    p.id = require_string(j, "id");
    p.cause = require_string(j, "cause");
    p.effect = require_string(j, "effect");
    if (auto it = j.find("source"); it != j.end() && it->is_string()) p.source = it->get<std::string>();
    return p;
}

Json to_json(const PredictionRecord& record) {
    Json j;
    j["item_id"] = record.item_id;
    j["predicted_index"] = record.predicted_index;
    j["candidate_scores"] = record.candidate_scores;
    j["scorer_name"] = record.scorer_name;
    if (!record.metadata.empty()) {
        j["metadata"] = Json::object();
        for (const auto& [k, v] : record.metadata) j["metadata"][k] = v;
    }
    if (record.error) j["error"] = *record.error;
    return j;
}

PredictionRecord prediction_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("prediction must be a JSON object");
    PredictionRecord r;
    r.item_id = require_string(j, "item_id");
    r.predicted_index = require_int(j, "predicted_index");
    const Json& scores = require(j, "candidate_scores");
    if (!scores.is_array()) throw ValidationError("field \"candidate_scores\" must be an array");
    for (const auto& s : scores) {
        if (!s.is_number()) throw ValidationError("candidate_scores must be numbers");
        r.candidate_scores.push_back(s.get<double>());
    }
    r.scorer_name = require_string(j, "scorer_name");
    if (auto it = j.find("metadata"); it != j.end()) r.metadata = string_map_from_json(*it, "metadata");
    if (auto it = j.find("error"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw ValidationError("field \"error\" must be a string");
        r.error = it->get<std::string>();
    }
    validate(r);
    return r;
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<Json> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
        if (!j.is_object()) throw ParseError(path.string(), line_no, "expected a JSON object");
        rows.push_back(std::move(j));
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
    return rows;
}

void write_jsonl(const std::vector<Json>& rows, const std::filesystem::path& path) {
    std::string out;
    for (const auto& row : rows) {
        out += dump_line(row);
        out += '\n';
    }
    write_text_file(path, out);
}

namespace {

// Runs a per-line converter, re-raising validation failures with the line
// number attached.
template <typename T, typename Convert>
std::vector<T> load_rows(const std::filesystem::path& path, Convert convert) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<T> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
        try {
            out.push_back(convert(j));
        } catch (const ParseError&) {
            throw;
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
    return out;
}

}  // namespace

std::vector<QAItem> load_qa_file(const std::filesystem::path& path) {
    auto items = load_rows<QAItem>(path, qa_item_from_json);
    std::set<std::string> seen;
    for (const auto& item : items) {
        if (!seen.insert(item.id).second) {
            throw ValidationError(path.string() + ": duplicate id \"" + item.id + "\"");
        }
    }
    return items;
}

void write_qa_file(const std::vector<QAItem>& items, const std::filesystem::path& path) {
    std::vector<Json> rows;
    rows.reserve(items.size());
    std::set<std::string> seen;
    for (const auto& item : items) {
        validate(item);
        if (!seen.insert(item.id).second) throw ValidationError("duplicate id \"" + item.id + "\"");
        rows.push_back(to_json(item));
    }
    write_jsonl(rows, path);
}

std::vector<CausalPair> load_pairs_file(const std::filesystem::path& path) {
    return load_rows<CausalPair>(path, causal_pair_from_json);
}

void write_pairs_file(const std::vector<CausalPair>& pairs, const std::filesystem::path& path) {
    std::vector<Json> rows;
    for (const auto& p : pairs) rows.push_back(to_json(p));
    write_jsonl(rows, path);
}

std::vector<PredictionRecord> load_predictions_file(const std::filesystem::path& path) {
    return load_rows<PredictionRecord>(path, prediction_from_json);
}

void write_predictions_file(const std::vector<PredictionRecord>& records,
                            const std::filesystem::path& path) {
    std::vector<Json> rows;
    for (const auto& r : records) {
        validate(r);
        rows.push_back(to_json(r));
    }
    write_jsonl(rows, path);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path.string());
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << contents;
    out.flush();
    if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace roadqa
