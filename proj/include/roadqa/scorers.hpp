#pragma once

#include <string>
#include <vector>

#include "roadqa/backend.hpp"
#include "roadqa/retrieval.hpp"
#include "roadqa/types.hpp"

namespace roadqa {

enum class ScorerKind { Nli, Plausibility, OpenBook };

enum class AnswerMetric { EmbeddingCosine, TokenOverlap };

struct ScorerConfig {
    ScorerKind kind = ScorerKind::Nli;
    std::string prompt_template = "default";
    int max_length = 32;
    AnswerMetric metric = AnswerMetric::EmbeddingCosine;
};

std::string_view scorer_name(ScorerKind kind);

/// Fills every blank (a run of three or more underscores) with the candidate;
/// without a blank, appends the candidate after a single space.
std::string make_statement(const std::string& question, const std::string& candidate);

/// Margin P(entail) - P(contradict) of (question, candidate_i) per candidate.
PredictionRecord predict_nli(const QAItem& item, ModelBackend& backend);

/// Backend plausibility of make_statement(question, candidate_i).
PredictionRecord predict_plausibility(const QAItem& item, ModelBackend& backend);

/// The "default" template:
///
///     <question>
///
///     (A) <candidate 0>
///     (B) <candidate 1>
///     ...
///
///     context: <paragraph>
std::string render_prompt(const std::string& question, const std::vector<std::string>& candidates,
                          const std::string& paragraph, const std::string& template_name = "default");

/// F1 over lowercased alphanumeric token multisets.
double token_overlap(const std::string& a, const std::string& b);

/// Retrieve the best paragraph for the question, generate an answer with the
/// question, lettered candidates and paragraph as the prompt, then pick the
/// candidate most similar to the generated answer. A generation failure
/// yields an errored record instead of throwing.
PredictionRecord predict_openbook(const QAItem& item, const ParagraphIndex& index, ModelBackend& backend,
                                  const ScorerConfig& config);

/// Scores every item in input order. `index` is required for open-book.
std::vector<PredictionRecord> score_items(const std::vector<QAItem>& items, const ScorerConfig& config,
                                          ModelBackend& backend, const ParagraphIndex* index = nullptr);

}  // namespace roadqa
