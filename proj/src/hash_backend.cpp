#include <regex>
#include <sstream>

#include "roadqa/backend.hpp"
#include "roadqa/errors.hpp"
#include "roadqa/rng.hpp"

namespace roadqa {

namespace {

// Distinct salts keep the per-operation streams independent for equal inputs.
constexpr std::uint64_t kNliSalt = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kPlausibilitySalt = 0xc2b2ae3d27d4eb4fULL;
constexpr std::uint64_t kGenerateSalt = 0x165667b19e3779f9ULL;

void require_text(const std::string& text, const char* what) {
    if (text.empty()) throw ValidationError(std::string(what) + " must be non-empty");
}

}  // namespace

HashBackend::HashBackend(std::size_t dimension, std::uint64_t seed) : dim_(dimension), seed_(seed) {
    if (dim_ == 0) throw ConfigError("embedding dimension must be positive");
}

EmbeddingVector HashBackend::embed_text(const std::string& text) const {
    require_text(text, "embedding text");
    Rng rng(fnv1a64(text) ^ seed_);
    std::vector<double> values(dim_);
    for (auto& v : values) v = rng.normal();
    return EmbeddingVector::normalized(std::span<const double>(values));
}

std::vector<EmbeddingVector> HashBackend::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_text(t));
    return out;
}

std::vector<NLIScores> HashBackend::nli(const std::vector<PremiseHypothesis>& pairs) {
    std::vector<NLIScores> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        require_text(p.premise, "premise");
        require_text(p.hypothesis, "hypothesis");
        Rng rng(fnv1a64(p.premise + '\x1f' + p.hypothesis) ^ seed_ ^ kNliSalt);
        const double e = rng.uniform01() + 0.01;
        const double n = rng.uniform01() + 0.01;
        const double c = rng.uniform01() + 0.01;
        const double sum = e + n + c;
        out.push_back({e / sum, n / sum, c / sum});
    }
    return out;
}

std::vector<double> HashBackend::plausibility(const std::vector<std::string>& statements) {
    std::vector<double> out;
    out.reserve(statements.size());
    for (const auto& s : statements) {
        require_text(s, "statement");
        Rng rng(fnv1a64(s) ^ seed_ ^ kPlausibilitySalt);
        out.push_back(rng.normal());
    }
    return out;
}

std::string HashBackend::generate(const std::string& prompt, int max_length) {
    require_text(prompt, "prompt");
    static const std::regex candidate_line(R"(^\([A-Z]\)\s+(.+)$)");
    std::vector<std::string> candidates;
    std::istringstream in(prompt);
    std::string line;
    while (std::getline(in, line)) {
        std::smatch m;
        if (std::regex_match(line, m, candidate_line)) candidates.push_back(m[1].str());
    }
    std::string text;
    if (!candidates.empty()) {
        Rng rng(fnv1a64(prompt) ^ seed_ ^ kGenerateSalt);
        text = truncate_tokens(candidates[rng.uniform_index(candidates.size())], max_length);
    }
    if (text.empty()) text = truncate_tokens(prompt, max_length);
    return text;
}

std::string HashBackend::fingerprint() const {
    return "hash:dim=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_);
}

}  // namespace roadqa
