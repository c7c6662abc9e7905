#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "roadqa/embedding.hpp"

namespace roadqa {

/// Probability triple from an NLI classifier.
struct NLIScores {
    double entail = 0.0;
    double neutral = 0.0;
    double contradict = 0.0;

    bool operator==(const NLIScores&) const = default;
};

/// Throws ValidationError unless each probability is in [0, 1] and they sum
/// to 1 within 1e-4.
void validate(const NLIScores& scores);

struct PremiseHypothesis {
    std::string premise;
    std::string hypothesis;
};

enum class BackendKind { FixtureFile, DeterministicHash, Remote };

struct BackendConfig {
    BackendKind kind = BackendKind::DeterministicHash;
    std::string endpoint;                  // remote only
    std::filesystem::path fixture_path;    // fixture-file only
    std::size_t dimension = 768;
    std::chrono::milliseconds timeout{30000};
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;                // deterministic-hash only
};

void validate(const BackendConfig& config);

/// Every learned-model capability the pipelines need. Implementations are
/// pure functions of their inputs for a fixed configuration, and batched
/// outputs line up index-for-index with the inputs.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;

    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
    virtual std::vector<NLIScores> nli(const std::vector<PremiseHypothesis>& pairs) = 0;
    virtual std::vector<double> plausibility(const std::vector<std::string>& statements) = 0;
    /// Output has at most `max_length` whitespace tokens and is never empty.
    virtual std::string generate(const std::string& prompt, int max_length) = 0;

    /// Identifies the embedding space; indexes record it to detect staleness.
    virtual std::string fingerprint() const = 0;

    EmbeddingVector embed_one(const std::string& text);
};

std::unique_ptr<ModelBackend> make_backend(const BackendConfig& config);

/// Keeps the first `max_length` whitespace-separated tokens, re-joined with
/// single spaces.
std::string truncate_tokens(const std::string& text, int max_length);

std::vector<std::string> whitespace_tokens(const std::string& text);

/// Hex string of fnv1a64(prompt); generate fixtures may be keyed by it.
std::string prompt_hash(const std::string& prompt);

/// Lookup table backed by a JSONL fixture file. Each line is one of
///   {"kind":"embed","text":...,"value":[...]}
///   {"kind":"nli","premise":...,"hypothesis":...,"value":{"entail":..,"neutral":..,"contradict":..}}
///   {"kind":"plausibility","statement":...,"value":x}
///   {"kind":"generate","prompt":...|"prompt_hash":...,"value":"text"}
/// A miss raises LookupError.
class FixtureBackend final : public ModelBackend {
public:
    explicit FixtureBackend(const std::filesystem::path& path);

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::vector<NLIScores> nli(const std::vector<PremiseHypothesis>& pairs) override;
    std::vector<double> plausibility(const std::vector<std::string>& statements) override;
    std::string generate(const std::string& prompt, int max_length) override;
    std::string fingerprint() const override;

    std::size_t dimension() const { return dim_; }

private:
    std::map<std::string, EmbeddingVector> embeddings_;
    std::map<std::pair<std::string, std::string>, NLIScores> nli_;
    std::map<std::string, double> plausibility_;
    std::map<std::string, std::string> generations_;  // keyed by prompt hash
    std::size_t dim_ = 0;
    std::string content_hash_;
};

/// Reproducible pseudo-model: every output is derived from a hash of the
/// input mixed with a global seed.
class HashBackend final : public ModelBackend {
public:
    HashBackend(std::size_t dimension, std::uint64_t seed);

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::vector<NLIScores> nli(const std::vector<PremiseHypothesis>& pairs) override;
    std::vector<double> plausibility(const std::vector<std::string>& statements) override;
    /// Picks one of the "(A) ..." candidate lines in the prompt by hash and
    /// echoes its text; falls back to the prompt's leading tokens.
    std::string generate(const std::string& prompt, int max_length) override;
    std::string fingerprint() const override;

    EmbeddingVector embed_text(const std::string& text) const;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// Client for the JSON-over-HTTP backend protocol:
///   POST /v1/embed, /v1/nli, /v1/plausibility, /v1/generate
class RemoteBackend final : public ModelBackend {
public:
    explicit RemoteBackend(BackendConfig config);

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::vector<NLIScores> nli(const std::vector<PremiseHypothesis>& pairs) override;
    std::vector<double> plausibility(const std::vector<std::string>& statements) override;
    std::string generate(const std::string& prompt, int max_length) override;
    std::string fingerprint() const override;

private:
    BackendConfig config_;
};

}  // namespace roadqa
