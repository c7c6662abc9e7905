#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "roadqa/backend.hpp"
#include "roadqa/corpus.hpp"

namespace roadqa {

/// Flat exact-search index over paragraph embeddings. Immutable once built.
class ParagraphIndex {
public:
    /// Embeds every paragraph with `backend`. Throws ValidationError for an
    /// empty paragraph list.
    static ParagraphIndex build(std::vector<Paragraph> paragraphs, ModelBackend& backend);

    ParagraphIndex(std::vector<Paragraph> paragraphs, std::vector<EmbeddingVector> vectors,
                   std::string fingerprint);

    std::size_t size() const { return paragraphs_.size(); }
    bool empty() const { return paragraphs_.empty(); }
    std::size_t dim() const { return vectors_.empty() ? 0 : vectors_.front().dim(); }
    const std::vector<Paragraph>& paragraphs() const { return paragraphs_; }
    const std::vector<EmbeddingVector>& vectors() const { return vectors_; }
    const std::string& fingerprint() const { return fingerprint_; }

    /// Writes <prefix>.paragraphs.jsonl and <prefix>.vectors.bin. The binary
    /// file starts with one JSON header line {dim, count, fingerprint}
    /// followed by count*dim little-endian float32 values, row-major.
    void save(const std::filesystem::path& prefix) const;
    static ParagraphIndex load(const std::filesystem::path& prefix);

private:
    std::vector<Paragraph> paragraphs_;
    std::vector<EmbeddingVector> vectors_;
    std::string fingerprint_;
};

struct RetrievalHit {
    std::size_t position = 0;
    const Paragraph* paragraph = nullptr;
    double score = 0.0;
};

/// Throws StaleIndexError if the index was embedded by a different backend.
void check_compatible(const ParagraphIndex& index, const ModelBackend& backend);

/// Top-k paragraphs by cosine to `query_vector`, descending; ties go to the
/// lower paragraph position. k larger than the index returns everything.
std::vector<RetrievalHit> search(const ParagraphIndex& index, const EmbeddingVector& query_vector, std::size_t k);

/// Embeds `query` and searches. Throws ValidationError for an empty query or
/// k < 1.
std::vector<RetrievalHit> retrieve(const ParagraphIndex& index, const std::string& query, std::size_t k,
                                   ModelBackend& backend);

}  // namespace roadqa
