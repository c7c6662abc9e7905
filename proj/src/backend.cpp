#include "roadqa/backend.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "roadqa/errors.hpp"
#include "roadqa/rng.hpp"

namespace roadqa {

void validate(const NLIScores& s) {
    for (double p : {s.entail, s.neutral, s.contradict}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("NLI probability outside [0, 1]");
    }
    if (std::abs(s.entail + s.neutral + s.contradict - 1.0) > 1e-4) {
        throw ValidationError("NLI probabilities do not sum to 1");
    }
}

void validate(const BackendConfig& config) {
    if (config.dimension == 0) throw ConfigError("embedding dimension must be positive");
    if (config.batch_size == 0) throw ConfigError("batch size must be positive");
    if (config.kind == BackendKind::Remote && config.endpoint.empty()) {
        throw ConfigError("remote backend requires an endpoint");
    }
    if (config.kind == BackendKind::FixtureFile && config.fixture_path.empty()) {
        throw ConfigError("fixture backend requires a fixture file");
    }
}

EmbeddingVector ModelBackend::embed_one(const std::string& text) {
    auto out = embed({text});
    if (out.size() != 1) throw BackendError("embed returned " + std::to_string(out.size()) + " vectors for 1 text");
    return std::move(out.front());
}

std::unique_ptr<ModelBackend> make_backend(const BackendConfig& config) {
    validate(config);
    switch (config.kind) {
        case BackendKind::FixtureFile: return std::make_unique<FixtureBackend>(config.fixture_path);
        case BackendKind::DeterministicHash: return std::make_unique<HashBackend>(config.dimension, config.seed);
        case BackendKind::Remote: return std::make_unique<RemoteBackend>(config);
    }
    throw ConfigError("unknown backend kind");
}

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

std::string truncate_tokens(const std::string& text, int max_length) {
    if (max_length < 1) throw ValidationError("max_length must be at least 1");
    const auto tokens = whitespace_tokens(text);
    std::string out;
    for (std::size_t i = 0; i < tokens.size() && i < static_cast<std::size_t>(max_length); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::string prompt_hash(const std::string& prompt) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(prompt)));
    return buf;
}

}  // namespace roadqa
