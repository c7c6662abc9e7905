#include <string>

#include "roadqa/backend.hpp"
#include "roadqa/errors.hpp"
#include "roadqa/qa_io.hpp"
#include "roadqa/rng.hpp"

namespace roadqa {

namespace {

std::string field(const Json& row, const char* name) {
    auto it = row.find(name);
    if (it == row.end() || !it->is_string()) {
        throw ValidationError(std::string("fixture entry needs string field \"") + name + "\"");
    }
    return it->get<std::string>();
}

template <typename Map, typename Key, typename Value>
void insert_unique(Map& map, Key key, Value value, const std::string& what) {
    if (!map.emplace(std::move(key), std::move(value)).second) {
        throw ValidationError("duplicate fixture entry for " + what);
    }
}

}  // namespace

FixtureBackend::FixtureBackend(const std::filesystem::path& path) {
    const std::string contents = read_text_file(path);
    content_hash_ = prompt_hash(contents);
    const auto rows = read_jsonl(path);
    std::size_t line = 0;
    for (const auto& row : rows) {
        ++line;
        try {
            const std::string kind = field(row, "kind");
            auto value = row.find("value");
            if (value == row.end()) throw ValidationError("fixture entry has no \"value\"");
            if (kind == "embed") {
                std::vector<float> values;
                for (const auto& x : *value) values.push_back(static_cast<float>(x.get<double>()));
                auto vec = EmbeddingVector::from_unit(std::move(values));
                if (dim_ == 0) dim_ = vec.dim();
                if (vec.dim() != dim_) throw ValidationError("fixture embeddings have mixed dimensions");
                const std::string text = field(row, "text");
                insert_unique(embeddings_, text, std::move(vec), "embed \"" + text + "\"");
            } else if (kind == "nli") {
                NLIScores s{value->at("entail").get<double>(), value->at("neutral").get<double>(),
                            value->at("contradict").get<double>()};
                validate(s);
                insert_unique(nli_, std::make_pair(field(row, "premise"), field(row, "hypothesis")), s,
                              "nli pair");
            } else if (kind == "plausibility") {
                const std::string statement = field(row, "statement");
                insert_unique(plausibility_, statement, value->get<double>(),
                              "plausibility \"" + statement + "\"");
            } else if (kind == "generate") {
                std::string key = row.contains("prompt") ? prompt_hash(field(row, "prompt"))
                                                         : field(row, "prompt_hash");
                insert_unique(generations_, key, value->get<std::string>(), "generate prompt " + key);
            } else {
                throw ValidationError("unknown fixture kind \"" + kind + "\"");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string(), line, e.what());
        } catch (const ParseError&) {
            throw;
        } catch (const ValidationError& e) {
            throw ParseError(path.string(), line, e.what());
        }
    }
}

std::vector<EmbeddingVector> FixtureBackend::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        auto it = embeddings_.find(t);
        if (it == embeddings_.end()) throw LookupError("no fixture embedding for \"" + t + "\"");
        out.push_back(it->second);
    }
    return out;
}

std::vector<NLIScores> FixtureBackend::nli(const std::vector<PremiseHypothesis>& pairs) {
    std::vector<NLIScores> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        auto it = nli_.find({p.premise, p.hypothesis});
        if (it == nli_.end()) {
            throw LookupError("no fixture NLI scores for (\"" + p.premise + "\", \"" + p.hypothesis + "\")");
        }
        out.push_back(it->second);
    }
    return out;
}

std::vector<double> FixtureBackend::plausibility(const std::vector<std::string>& statements) {
    std::vector<double> out;
    out.reserve(statements.size());
    for (const auto& s : statements) {
        auto it = plausibility_.find(s);
        if (it == plausibility_.end()) throw LookupError("no fixture plausibility for \"" + s + "\"");
        out.push_back(it->second);
    }
    return out;
}

std::string FixtureBackend::generate(const std::string& prompt, int max_length) {
    const std::string key = prompt_hash(prompt);
    auto it = generations_.find(key);
    if (it == generations_.end()) throw LookupError("no fixture generation for prompt hash " + key);
    std::string text = truncate_tokens(it->second, max_length);
    if (text.empty()) throw BackendError("fixture generation for prompt hash " + key + " is empty");
    return text;
}

std::string FixtureBackend::fingerprint() const {
    return "fixture:dim=" + std::to_string(dim_) + ":content=" + content_hash_;
}

}  // namespace roadqa
