#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "roadqa/types.hpp"

namespace roadqa {

using Json = nlohmann::ordered_json;

Json to_json(const QAItem& item);
QAItem qa_item_from_json(const Json& j);

Json to_json(const CausalPair& pair);
CausalPair causal_pair_from_json(const Json& j);

Json to_json(const PredictionRecord& record);
PredictionRecord prediction_from_json(const Json& j);

/// Reads line-delimited JSON; blank lines are skipped. Every line must be an
/// object. Throws IoError if the file can't be opened and ParseError (with the
/// 1-based line number) on malformed JSON.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

/// Each value is dumped on its own line (UTF-8 preserved, no escaping of
/// non-ASCII). Throws IoError when the path is unwritable.
void write_jsonl(const std::vector<Json>& rows, const std::filesystem::path& path);

std::vector<QAItem> load_qa_file(const std::filesystem::path& path);
void write_qa_file(const std::vector<QAItem>& items, const std::filesystem::path& path);

std::vector<CausalPair> load_pairs_file(const std::filesystem::path& path);
void write_pairs_file(const std::vector<CausalPair>& pairs, const std::filesystem::path& path);

std::vector<PredictionRecord> load_predictions_file(const std::filesystem::path& path);
void write_predictions_file(const std::vector<PredictionRecord>& records,
                            const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace roadqa
