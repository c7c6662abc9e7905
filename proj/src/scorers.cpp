#include "roadqa/scorers.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "roadqa/errors.hpp"

namespace roadqa {

namespace {

// Re-raises a backend failure with the item id prepended, keeping the
// LookupError/BackendError distinction.
template <typename Fn>
auto with_item_context(const QAItem& item, Fn fn) {
    try {
        return fn();
    } catch (const LookupError& e) {
        throw LookupError("item \"" + item.id + "\": " + e.what());
    } catch (const BackendError& e) {
        throw BackendError("item \"" + item.id + "\": " + e.what());
    }
}

std::vector<std::string> overlap_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

}  // namespace

std::string_view scorer_name(ScorerKind kind) {
    switch (kind) {
        case ScorerKind::Nli: return "nli";
        case ScorerKind::Plausibility: return "plausibility";
        case ScorerKind::OpenBook: return "openbook";
    }
    return "unknown";
}

std::string make_statement(const std::string& question, const std::string& candidate) {
    std::string out;
    bool filled = false;
    std::size_t i = 0;
    while (i < question.size()) {
        if (question[i] == '_') {
            std::size_t j = i;
            while (j < question.size() && question[j] == '_') ++j;
            if (j - i >= 3) {
                out += candidate;
                filled = true;
            } else {
                out.append(question, i, j - i);
            }
            i = j;
        } else {
            out += question[i++];
        }
    }
    if (filled) return out;
    return question + " " + candidate;
}

PredictionRecord predict_nli(const QAItem& item, ModelBackend& backend) {
    std::vector<PremiseHypothesis> pairs;
    pairs.reserve(item.candidates.size());
    for (const auto& c : item.candidates) pairs.push_back({item.question, c});
    const auto scores = with_item_context(item, [&] { return backend.nli(pairs); });
    if (scores.size() != pairs.size()) throw BackendError("item \"" + item.id + "\": NLI returned wrong count");
    std::vector<double> margins;
    margins.reserve(scores.size());
    for (const auto& s : scores) margins.push_back(s.entail - s.contradict);
    return make_prediction(item.id, std::move(margins), std::string(scorer_name(ScorerKind::Nli)));
}

PredictionRecord predict_plausibility(const QAItem& item, ModelBackend& backend) {
    std::vector<std::string> statements;
    statements.reserve(item.candidates.size());
    for (const auto& c : item.candidates) statements.push_back(make_statement(item.question, c));
    auto scores = with_item_context(item, [&] { return backend.plausibility(statements); });
    if (scores.size() != statements.size()) {
        throw BackendError("item \"" + item.id + "\": plausibility returned wrong count");
    }
    return make_prediction(item.id, std::move(scores), std::string(scorer_name(ScorerKind::Plausibility)));
}

std::string render_prompt(const std::string& question, const std::vector<std::string>& candidates,
                          const std::string& paragraph, const std::string& template_name) {
    if (template_name != "default") throw ConfigError("unknown prompt template \"" + template_name + "\"");
    if (candidates.size() > 26) throw ValidationError("too many candidates to letter");
    std::string out = question + "\n\n";
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        out += '(';
        out += static_cast<char>('A' + i);
        out += ") ";
        out += candidates[i];
        out += '\n';
    }
    out += "\ncontext: ";
    out += paragraph;
    return out;
}

double token_overlap(const std::string& a, const std::string& b) {
    const auto ta = overlap_tokens(a);
    const auto tb = overlap_tokens(b);
    if (ta.empty() || tb.empty()) return 0.0;
    std::map<std::string, int> counts;
    for (const auto& t : ta) ++counts[t];
    int common = 0;
    for (const auto& t : tb) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) return 0.0;
    const double precision = static_cast<double>(common) / static_cast<double>(tb.size());
    const double recall = static_cast<double>(common) / static_cast<double>(ta.size());
    return 2.0 * precision * recall / (precision + recall);
}

PredictionRecord predict_openbook(const QAItem& item, const ParagraphIndex& index, ModelBackend& backend,
                                  const ScorerConfig& config) {
    const std::string name(scorer_name(ScorerKind::OpenBook));
    if (index.empty()) throw ConfigError("open-book scoring needs a non-empty index");
    if (config.max_length < 1) throw ConfigError("max_length must be at least 1");

    const auto hits = with_item_context(item, [&] { return retrieve(index, item.question, 1, backend); });
    const Paragraph& selected = *hits.front().paragraph;
    const std::string prompt = render_prompt(item.question, item.candidates, selected.text, config.prompt_template);

    std::string generated;
    try {
        generated = backend.generate(prompt, config.max_length);
    } catch (const BackendError& e) {
        PredictionRecord failed;
        failed.item_id = item.id;
        failed.scorer_name = name;
        failed.metadata["paragraph_id"] = selected.id;
        failed.error = std::string("generation failed: ") + e.what();
        return failed;
    }

    std::vector<double> scores;
    scores.reserve(item.candidates.size());
    if (config.metric == AnswerMetric::EmbeddingCosine) {
        std::vector<std::string> texts{generated};
        texts.insert(texts.end(), item.candidates.begin(), item.candidates.end());
        const auto vectors = with_item_context(item, [&] { return backend.embed(texts); });
        if (vectors.size() != texts.size()) throw BackendError("item \"" + item.id + "\": embed returned wrong count");
        for (std::size_t i = 1; i < vectors.size(); ++i) scores.push_back(cosine(vectors[0], vectors[i]));
    } else {
        for (const auto& c : item.candidates) scores.push_back(token_overlap(generated, c));
    }

    auto record = make_prediction(item.id, std::move(scores), name);
    record.metadata["paragraph_id"] = selected.id;
    record.metadata["generated_answer"] = generated;
    return record;
}

std::vector<PredictionRecord> score_items(const std::vector<QAItem>& items, const ScorerConfig& config,
                                          ModelBackend& backend, const ParagraphIndex* index) {
    if (config.kind == ScorerKind::OpenBook) {
        if (index == nullptr) throw ConfigError("open-book scoring requires an index");
        check_compatible(*index, backend);
    }
    std::vector<PredictionRecord> out;
    out.reserve(items.size());
    for (const auto& item : items) {
        switch (config.kind) {
            case ScorerKind::Nli: out.push_back(predict_nli(item, backend)); break;
            case ScorerKind::Plausibility: out.push_back(predict_plausibility(item, backend)); break;
            case ScorerKind::OpenBook: out.push_back(predict_openbook(item, *index, backend, config)); break;
        }
    }
    return out;
}

}  // namespace roadqa
