#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "roadqa/backend.hpp"

namespace roadqa {

struct Paragraph {
    std::string id;
    std::string text;
    std::string source;
    int sentence_count = 0;
    int word_count = 0;

    bool operator==(const Paragraph&) const = default;
};

/// Splits at '.', '?' and '!' (the terminator stays with its sentence).
/// Trailing text without a terminator becomes the last sentence; fragments
/// are trimmed and empty ones dropped. No abbreviation handling.
std::vector<std::string> split_sentences(const std::string& text);

std::string collapse_whitespace(const std::string& text);

/// Sentence-level cleanup applied before chunking.
class TextNormalizer {
public:
    virtual ~TextNormalizer() = default;
    virtual std::string normalize(const std::string& sentence) = 0;
};

/// Whitespace collapse only.
class IdentityNormalizer final : public TextNormalizer {
public:
    std::string normalize(const std::string& sentence) override;
};

/// Rewrites each sentence through ModelBackend::generate (e.g. a grammar
/// correction model). Backend failures fall back to the identity normalizer
/// and log a warning to stderr.
class GenerativeNormalizer final : public TextNormalizer {
public:
    explicit GenerativeNormalizer(ModelBackend& backend, std::string prompt_prefix = "");

    std::string normalize(const std::string& sentence) override;

    std::size_t fallback_count() const { return fallbacks_; }

private:
    ModelBackend& backend_;
    std::string prefix_;
    std::size_t fallbacks_ = 0;
};

/// Result is empty when the sentence should be removed.
std::string clean_sentence(const std::string& text, TextNormalizer& normalizer);

/// Consecutive non-overlapping groups of `chunk_size` sentences, joined with a
/// single space; a final partial group is kept. Ids are "<source>#<n>".
std::vector<Paragraph> chunk_paragraphs(const std::vector<std::string>& sentences, int chunk_size = 10,
                                        const std::string& source = "");

struct CorpusStats {
    std::size_t paragraph_count = 0;
    double mean_word_count = 0.0;
};

/// Throws ValidationError for an empty list.
CorpusStats corpus_stats(const std::vector<Paragraph>& paragraphs);

/// Reads every .txt file under `root` in sorted path order; each file is one
/// manual whose source is its path relative to `root` without extension.
std::vector<Paragraph> ingest_directory(const std::filesystem::path& root, int chunk_size,
                                        TextNormalizer& normalizer);

std::vector<Paragraph> load_paragraphs_file(const std::filesystem::path& path);
void write_paragraphs_file(const std::vector<Paragraph>& paragraphs, const std::filesystem::path& path);

}  // namespace roadqa
