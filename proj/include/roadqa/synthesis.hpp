#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "roadqa/backend.hpp"
#include "roadqa/kmeans.hpp"
#include "roadqa/rng.hpp"
#include "roadqa/types.hpp"

namespace roadqa {

enum class SynthesisMode { EffectPrediction, CausePrediction };

struct SynthesisConfig {
    double dedup_threshold = 0.9;
    /// Upper bound on cosine similarity between a distractor and the answer,
    /// and between any two distractors of one item.
    double distractor_upper_bound = 0.4;
    int num_candidates = 3;
    int max_resample_attempts = 100;
    std::uint64_t rng_seed = 0;
    SynthesisMode mode = SynthesisMode::EffectPrediction;
};

void validate(const SynthesisConfig& config);

/// Turns a raw action/justification phrase into a declarative sentence:
/// "to X" gains the subject "The car wants", a leading "because" is dropped,
/// the first letter is capitalized and a final period added when missing.
std::string normalize_justification(const std::string& text);

/// Applies normalize_justification to both sides of every pair.
std::vector<CausalPair> normalize_pairs(const std::vector<CausalPair>& pairs);

/// Greedy scan in input order: a pair is dropped when its cause is more
/// similar than `threshold` to the cause of any pair kept before it.
std::vector<CausalPair> deduplicate_pairs(const std::vector<CausalPair>& pairs, double threshold,
                                          ModelBackend& backend);

/// Same rule over precomputed cause vectors; returns the kept positions.
std::vector<std::size_t> deduplicate_indices(std::span<const EmbeddingVector> causes, double threshold);

/// Rejection sampling of `count` distinct pool positions whose vectors are
/// each below the similarity bound to `answer` and to one another. Each
/// attempt is a full fresh draw. Throws SamplingExhausted after
/// config.max_resample_attempts failed attempts.
std::vector<std::size_t> sample_distractor_indices(const EmbeddingVector& answer,
                                                   std::span<const EmbeddingVector> pool, std::size_t count,
                                                   const SynthesisConfig& config, Rng& rng);

std::vector<std::string> sample_distractors(const std::string& answer, const std::vector<std::string>& pool,
                                            std::size_t count, const SynthesisConfig& config,
                                            ModelBackend& backend, Rng& rng);

struct SynthesisResult {
    std::vector<QAItem> items;
    /// Pairs whose distractor sampling was exhausted.
    std::vector<std::string> skipped_pair_ids;
};

/// One item per pair. EP mode asks for the effect given the cause, CP mode
/// the reverse; distractors come from the other pairs' answers on the same
/// side. Throws ConfigError when there are fewer pairs than candidates.
SynthesisResult build_mcqa(const std::vector<CausalPair>& pairs, const SynthesisConfig& config,
                           ModelBackend& backend, Rng& rng);

struct PipelineResult {
    SynthesisResult synthesis;
    std::size_t input_pairs = 0;
    std::size_t deduplicated_pairs = 0;
    std::vector<CausalPair> kept_pairs;
};

/// normalize → deduplicate → build_mcqa with an Rng seeded from config.
PipelineResult synthesize(const std::vector<CausalPair>& raw_pairs, const SynthesisConfig& config,
                          ModelBackend& backend);

/// Labels each effect with the mapped class of its nearest centroid. Throws
/// ConfigError when a nearest cluster has no label_map entry.
std::vector<ActionClass> classify_actions(const std::vector<std::string>& effects, const ClusterModel& model,
                                          ModelBackend& backend);

/// Drops items that can't be answered from text alone: any candidate equal
/// (trimmed, case-insensitive) to "all of the above"/"none of the above", or
/// an "[image]" marker in the question or a candidate.
std::vector<QAItem> filter_domain_questions(const std::vector<QAItem>& items);

}  // namespace roadqa
