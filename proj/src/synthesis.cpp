#include "roadqa/synthesis.hpp"

#include <algorithm>
#include <cctype>

#include "roadqa/errors.hpp"

namespace roadqa {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string lower_ascii(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool starts_with_word(const std::string& text, const std::string& lowered_word) {
    if (text.size() < lowered_word.size()) return false;
    if (lower_ascii(text.substr(0, lowered_word.size())) != lowered_word) return false;
    return text.size() == lowered_word.size() || std::isspace(static_cast<unsigned char>(text[lowered_word.size()]));
}

}  // namespace

void validate(const SynthesisConfig& config) {
    const double t = config.distractor_upper_bound;
    if (!(t > 0.0 && t < config.dedup_threshold && config.dedup_threshold <= 1.0)) {
        throw ConfigError("synthesis thresholds must satisfy 0 < t < dedup_threshold <= 1");
    }
    if (config.num_candidates < 2) throw ConfigError("num_candidates must be at least 2");
    if (config.max_resample_attempts < 1) throw ConfigError("max_resample_attempts must be at least 1");
}

std::string normalize_justification(const std::string& text) {
    std::string s = trim(text);
    if (s.empty()) throw ValidationError("cannot normalize an empty sentence");

    if (starts_with_word(s, "because")) {
        s = trim(s.substr(7));
        if (s.empty()) throw ValidationError("justification has nothing after \"because\"");
    }
    if (starts_with_word(s, "to")) s = "The car wants " + s;

    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    const char last = s.back();
    if (last != '.' && last != '?' && last != '!') s += '.';
    return s;
}

std::vector<CausalPair> normalize_pairs(const std::vector<CausalPair>& pairs) {
    std::vector<CausalPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        CausalPair n = p;
        try {
            n.cause = normalize_justification(p.cause);
            n.effect = normalize_justification(p.effect);
        } catch (const ValidationError& e) {
            throw ValidationError("pair \"" + p.id + "\": " + e.what());
        }
        out.push_back(std::move(n));
    }
    return out;
}

std::vector<std::size_t> deduplicate_indices(std::span<const EmbeddingVector> causes, double threshold) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < causes.size(); ++i) {
        const bool near_duplicate = std::any_of(kept.begin(), kept.end(), [&](std::size_t j) {
            return cosine(causes[i], causes[j]) > threshold;
        });
        if (!near_duplicate) kept.push_back(i);
    }
    return kept;
}

std::vector<CausalPair> deduplicate_pairs(const std::vector<CausalPair>& pairs, double threshold,
                                          ModelBackend& backend) {
    if (pairs.empty()) return {};
    std::vector<std::string> causes;
    causes.reserve(pairs.size());
    for (const auto& p : pairs) causes.push_back(p.cause);
    const auto vectors = backend.embed(causes);
    if (vectors.size() != pairs.size()) throw BackendError("embed returned a wrong number of vectors");
    std::vector<CausalPair> out;
    for (std::size_t i : deduplicate_indices(vectors, threshold)) out.push_back(pairs[i]);
    return out;
}

namespace {

// `vector_at(j)` yields the embedding of pool position j in [0, pool_size).
template <typename VectorAt>
std::vector<std::size_t> draw_admissible(const EmbeddingVector& answer, std::size_t pool_size,
                                         VectorAt vector_at, std::size_t count,
                                         const SynthesisConfig& config, Rng& rng) {
    const double t = config.distractor_upper_bound;
    if (pool_size < count) {
        throw SamplingExhausted("pool of " + std::to_string(pool_size) + " cannot supply " +
                                std::to_string(count) + " distractors");
    }
    std::vector<std::size_t> chosen;
    for (int attempt = 0; attempt < config.max_resample_attempts; ++attempt) {
        chosen.clear();
        while (chosen.size() < count) {
            const std::size_t j = rng.uniform_index(pool_size);
            if (std::find(chosen.begin(), chosen.end(), j) == chosen.end()) chosen.push_back(j);
        }
        bool ok = true;
        for (std::size_t a = 0; a < count && ok; ++a) {
            const EmbeddingVector& va = vector_at(chosen[a]);
            if (cosine(va, answer) >= t) ok = false;
            for (std::size_t b = 0; b < a && ok; ++b) {
                if (cosine(va, vector_at(chosen[b])) >= t) ok = false;
            }
        }
        if (ok) return chosen;
    }
    throw SamplingExhausted("no admissible distractor set after " + std::to_string(config.max_resample_attempts) +
                            " attempts");
}

}  // namespace

std::vector<std::size_t> sample_distractor_indices(const EmbeddingVector& answer,
                                                   std::span<const EmbeddingVector> pool, std::size_t count,
                                                   const SynthesisConfig& config, Rng& rng) {
    validate(config);
    return draw_admissible(
        answer, pool.size(), [&](std::size_t j) -> const EmbeddingVector& { return pool[j]; }, count, config,
        rng);
}

std::vector<std::string> sample_distractors(const std::string& answer, const std::vector<std::string>& pool,
                                            std::size_t count, const SynthesisConfig& config,
                                            ModelBackend& backend, Rng& rng) {
    const EmbeddingVector answer_vec = backend.embed_one(answer);
    const auto pool_vecs = pool.empty() ? std::vector<EmbeddingVector>{} : backend.embed(pool);
    std::vector<std::string> out;
    for (std::size_t j : sample_distractor_indices(answer_vec, pool_vecs, count, config, rng)) {
        out.push_back(pool[j]);
    }
    return out;
}

SynthesisResult build_mcqa(const std::vector<CausalPair>& pairs, const SynthesisConfig& config,
                           ModelBackend& backend, Rng& rng) {
    validate(config);
    const int expected = expected_candidate_count(Partition::BddEp);
    if (config.num_candidates != expected) {
        throw ConfigError("BDD items have exactly " + std::to_string(expected) + " candidates");
    }
    const auto n_candidates = static_cast<std::size_t>(config.num_candidates);
    if (pairs.size() < n_candidates) {
        throw ConfigError("need at least " + std::to_string(n_candidates) + " pairs, got " +
                          std::to_string(pairs.size()));
    }

    const bool ep = config.mode == SynthesisMode::EffectPrediction;
    std::vector<std::string> answers;
    answers.reserve(pairs.size());
    for (const auto& p : pairs) answers.push_back(ep ? p.effect : p.cause);
    const auto vectors = backend.embed(answers);
    if (vectors.size() != answers.size()) throw BackendError("embed returned a wrong number of vectors");

    SynthesisResult result;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const CausalPair& pair = pairs[i];
        // The pool is every other pair; position j maps past the item's own pair.
        auto pool_to_pair = [i](std::size_t j) { return j < i ? j : j + 1; };
        std::vector<std::size_t> picks;
        try {
            picks = draw_admissible(
                vectors[i], pairs.size() - 1,
                [&](std::size_t j) -> const EmbeddingVector& { return vectors[pool_to_pair(j)]; },
                n_candidates - 1, config, rng);
        } catch (const SamplingExhausted&) {
            result.skipped_pair_ids.push_back(pair.id);
            continue;
        }

        std::vector<std::size_t> order{i};
        for (std::size_t j : picks) order.push_back(pool_to_pair(j));
        rng.shuffle(std::span<std::size_t>(order));

        QAItem item;
        item.id = (ep ? "ep-" : "cp-") + pair.id;
        item.question = ep ? pair.cause : pair.effect;
        for (std::size_t k = 0; k < order.size(); ++k) {
            item.candidates.push_back(answers[order[k]]);
            if (order[k] == i) item.answer_index = static_cast<int>(k);
        }
        item.partition = ep ? Partition::BddEp : Partition::BddCp;
        item.metadata["pair_id"] = pair.id;
        if (!pair.source.empty()) item.metadata["source"] = pair.source;
        validate(item);
        result.items.push_back(std::move(item));
    }
    return result;
}

PipelineResult synthesize(const std::vector<CausalPair>& raw_pairs, const SynthesisConfig& config,
                          ModelBackend& backend) {
    validate(config);
    PipelineResult out;
    out.input_pairs = raw_pairs.size();
    out.kept_pairs = deduplicate_pairs(normalize_pairs(raw_pairs), config.dedup_threshold, backend);
    out.deduplicated_pairs = raw_pairs.size() - out.kept_pairs.size();
    Rng rng(config.rng_seed);
    out.synthesis = build_mcqa(out.kept_pairs, config, backend, rng);
    return out;
}

std::vector<ActionClass> classify_actions(const std::vector<std::string>& effects, const ClusterModel& model,
                                          ModelBackend& backend) {
    if (model.centroids.empty()) throw ConfigError("cluster model has no centroids");
    if (effects.empty()) return {};
    const auto vectors = backend.embed(effects);
    std::vector<ActionClass> labels;
    labels.reserve(vectors.size());
    for (const auto& v : vectors) {
        const int cluster = nearest_centroid(v, model.centroids);
        auto it = model.label_map.find(cluster);
        if (it == model.label_map.end()) {
            throw ConfigError("label map has no entry for cluster " + std::to_string(cluster));
        }
        labels.push_back(it->second);
    }
    return labels;
}

std::vector<QAItem> filter_domain_questions(const std::vector<QAItem>& items) {
    auto is_catch_all = [](const std::string& c) {
        const std::string s = lower_ascii(trim(c));
        return s == "all of the above" || s == "none of the above";
    };
    auto has_image = [](const std::string& s) { return s.find("[image]") != std::string::npos; };

    std::vector<QAItem> out;
    for (const auto& item : items) {
        if (has_image(item.question)) continue;
        if (std::any_of(item.candidates.begin(), item.candidates.end(),
                        [&](const std::string& c) { return is_catch_all(c) || has_image(c); })) {
            continue;
        }
        out.push_back(item);
    }
    return out;
}

}  // namespace roadqa
