#include "roadqa/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <numeric>

#include "roadqa/errors.hpp"
#include "roadqa/qa_io.hpp"

namespace roadqa {

namespace {

std::filesystem::path paragraphs_path(const std::filesystem::path& prefix) {
    return prefix.string() + ".paragraphs.jsonl";
}

std::filesystem::path vectors_path(const std::filesystem::path& prefix) { return prefix.string() + ".vectors.bin"; }

void put_le32(std::string& out, float value) {
    const auto bits = std::bit_cast<std::uint32_t>(value);
    for (int shift = 0; shift < 32; shift += 8) out += static_cast<char>((bits >> shift) & 0xffu);
}

float get_le32(const unsigned char* p) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

}  // namespace

ParagraphIndex::ParagraphIndex(std::vector<Paragraph> paragraphs, std::vector<EmbeddingVector> vectors,
                               std::string fingerprint)
    : paragraphs_(std::move(paragraphs)), vectors_(std::move(vectors)), fingerprint_(std::move(fingerprint)) {
    if (paragraphs_.size() != vectors_.size()) {
        throw ValidationError("index has " + std::to_string(paragraphs_.size()) + " paragraphs but " +
                              std::to_string(vectors_.size()) + " vectors");
    }
    for (const auto& v : vectors_) {
        if (v.dim() != vectors_.front().dim()) throw ValidationError("index vectors have mixed dimensions");
    }
}

ParagraphIndex ParagraphIndex::build(std::vector<Paragraph> paragraphs, ModelBackend& backend) {
    if (paragraphs.empty()) throw ValidationError("cannot build an index over zero paragraphs");
    std::vector<std::string> texts;
    texts.reserve(paragraphs.size());
    for (const auto& p : paragraphs) texts.push_back(p.text);
    auto vectors = backend.embed(texts);
    if (vectors.size() != paragraphs.size()) throw BackendError("embed returned a wrong number of vectors");
    return ParagraphIndex(std::move(paragraphs), std::move(vectors), backend.fingerprint());
}

void ParagraphIndex::save(const std::filesystem::path& prefix) const {
    write_paragraphs_file(paragraphs_, paragraphs_path(prefix));

    Json header;
    header["dim"] = dim();
    header["count"] = size();
    header["fingerprint"] = fingerprint_;
    std::string blob = header.dump();
    blob += '\n';
    blob.reserve(blob.size() + size() * dim() * 4);
    for (const auto& v : vectors_) {
        for (float x : v.values()) put_le32(blob, x);
    }
    write_text_file(vectors_path(prefix), blob);
}

ParagraphIndex ParagraphIndex::load(const std::filesystem::path& prefix) {
    auto paragraphs = load_paragraphs_file(paragraphs_path(prefix));
    const auto vpath = vectors_path(prefix);
    const std::string blob = read_text_file(vpath);
    const auto newline = blob.find('\n');
    if (newline == std::string::npos) throw ParseError(vpath.string(), 1, "missing header line");

    std::size_t dim = 0;
    std::size_t count = 0;
    std::string fingerprint;
    try {
        const Json header = Json::parse(blob.substr(0, newline));
        dim = header.at("dim").get<std::size_t>();
        count = header.at("count").get<std::size_t>();
        fingerprint = header.at("fingerprint").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(vpath.string(), 1, e.what());
    }
    if (count != paragraphs.size()) {
        throw ValidationError(vpath.string() + ": header count " + std::to_string(count) + " but " +
                              std::to_string(paragraphs.size()) + " paragraphs");
    }
    const std::size_t payload = blob.size() - newline - 1;
    if (payload != count * dim * 4) {
        throw ValidationError(vpath.string() + ": expected " + std::to_string(count * dim * 4) +
                              " bytes of vectors, found " + std::to_string(payload));
    }
    const auto* data = reinterpret_cast<const unsigned char*>(blob.data() + newline + 1);
    std::vector<EmbeddingVector> vectors;
    vectors.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<float> values(dim);
        for (std::size_t d = 0; d < dim; ++d) values[d] = get_le32(data + (i * dim + d) * 4);
        vectors.push_back(EmbeddingVector::from_unit(std::move(values)));
    }
    return ParagraphIndex(std::move(paragraphs), std::move(vectors), std::move(fingerprint));
}

void check_compatible(const ParagraphIndex& index, const ModelBackend& backend) {
    if (index.fingerprint() != backend.fingerprint()) {
        throw StaleIndexError("index was built with backend \"" + index.fingerprint() + "\" but queried with \"" +
                              backend.fingerprint() + "\"");
    }
}

std::vector<RetrievalHit> search(const ParagraphIndex& index, const EmbeddingVector& query_vector, std::size_t k) {
    if (k < 1) throw ValidationError("k must be at least 1");
    const auto& vectors = index.vectors();
    std::vector<double> scores(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) scores[i] = cosine(query_vector, vectors[i]);

    std::vector<std::size_t> order(vectors.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    std::vector<RetrievalHit> hits;
    hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        hits.push_back({order[i], &index.paragraphs()[order[i]], scores[order[i]]});
    }
    return hits;
}

std::vector<RetrievalHit> retrieve(const ParagraphIndex& index, const std::string& query, std::size_t k,
                                   ModelBackend& backend) {
    if (query.find_first_not_of(" \t\r\n") == std::string::npos) throw ValidationError("empty query");
    if (k < 1) throw ValidationError("k must be at least 1");
    if (index.empty()) throw ConfigError("index is empty");
    check_compatible(index, backend);
    return search(index, backend.embed_one(query), k);
}

}  // namespace roadqa
