#include "roadqa/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>

#include "roadqa/errors.hpp"
#include "roadqa/qa_io.hpp"

namespace roadqa {

namespace {

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\f\v");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        std::string s = trim(current);
        if (!s.empty()) out.push_back(std::move(s));
        current.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        current += text[i];
        // A run like "..." or "?!" closes a single sentence.
        if (is_terminator(text[i]) && (i + 1 == text.size() || !is_terminator(text[i + 1]))) flush();
    }
    flush();
    return out;
}

std::string collapse_whitespace(const std::string& text) {
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out += ' ';
            pending_space = false;
            out += c;
        }
    }
    return out;
}

std::string IdentityNormalizer::normalize(const std::string& sentence) { return collapse_whitespace(sentence); }

GenerativeNormalizer::GenerativeNormalizer(ModelBackend& backend, std::string prompt_prefix)
    : backend_(backend), prefix_(std::move(prompt_prefix)) {}

std::string GenerativeNormalizer::normalize(const std::string& sentence) {
    const std::string collapsed = collapse_whitespace(sentence);
    if (collapsed.empty()) return collapsed;
    const int budget = static_cast<int>(whitespace_tokens(collapsed).size()) * 2 + 8;
    try {
        return collapse_whitespace(backend_.generate(prefix_ + collapsed, budget));
    } catch (const BackendError& e) {
        ++fallbacks_;
        std::cerr << "warning: sentence normalizer failed, keeping original text: " << e.what() << '\n';
        return collapsed;
    }
}

std::string clean_sentence(const std::string& text, TextNormalizer& normalizer) {
    return trim(collapse_whitespace(normalizer.normalize(text)));
}

std::vector<Paragraph> chunk_paragraphs(const std::vector<std::string>& sentences, int chunk_size,
                                        const std::string& source) {
    if (chunk_size <= 0) throw ValidationError("chunk size must be positive");
    std::vector<Paragraph> out;
    const auto size = static_cast<std::size_t>(chunk_size);
    for (std::size_t start = 0; start < sentences.size(); start += size) {
        const std::size_t end = std::min(sentences.size(), start + size);
        Paragraph p;
        p.id = source + "#" + std::to_string(out.size());
        p.source = source;
        for (std::size_t i = start; i < end; ++i) {
            if (i > start) p.text += ' ';
            p.text += sentences[i];
        }
        p.sentence_count = static_cast<int>(end - start);
        p.word_count = static_cast<int>(whitespace_tokens(p.text).size());
        out.push_back(std::move(p));
    }
    return out;
}

CorpusStats corpus_stats(const std::vector<Paragraph>& paragraphs) {
    if (paragraphs.empty()) throw ValidationError("corpus statistics need at least one paragraph");
    long long words = 0;
    for (const auto& p : paragraphs) words += p.word_count;
    return {paragraphs.size(), static_cast<double>(words) / static_cast<double>(paragraphs.size())};
}

std::vector<Paragraph> ingest_directory(const std::filesystem::path& root, int chunk_size,
                                        TextNormalizer& normalizer) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw IoError(root.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<Paragraph> out;
    for (const auto& file : files) {
        fs::path rel = fs::relative(file, root);
        rel.replace_extension();
        const std::string source = rel.generic_string();
        std::vector<std::string> sentences;
        for (const auto& raw : split_sentences(read_text_file(file))) {
            std::string s = clean_sentence(raw, normalizer);
            if (!s.empty()) sentences.push_back(std::move(s));
        }
        for (auto& p : chunk_paragraphs(sentences, chunk_size, source)) out.push_back(std::move(p));
    }
    return out;
}

std::vector<Paragraph> load_paragraphs_file(const std::filesystem::path& path) {
    std::vector<Paragraph> out;
    std::size_t line = 0;
    for (const auto& row : read_jsonl(path)) {
        ++line;
        try {
            Paragraph p;
            p.id = row.at("id").get<std::string>();
            p.text = row.at("text").get<std::string>();
            p.source = row.value("source", std::string());
            p.sentence_count = row.at("sentence_count").get<int>();
            p.word_count = row.at("word_count").get<int>();
            if (p.word_count != static_cast<int>(whitespace_tokens(p.text).size())) {
                throw ValidationError("word_count does not match text");
            }
            if (p.sentence_count < 1) throw ValidationError("sentence_count must be positive");
            out.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string(), line, e.what());
        } catch (const ValidationError& e) {
            throw ParseError(path.string(), line, e.what());
        }
    }
    return out;
}

void write_paragraphs_file(const std::vector<Paragraph>& paragraphs, const std::filesystem::path& path) {
    std::vector<Json> rows;
    rows.reserve(paragraphs.size());
    for (const auto& p : paragraphs) {
        Json j;
        j["id"] = p.id;
        j["text"] = p.text;
        j["source"] = p.source;
        j["sentence_count"] = p.sentence_count;
        j["word_count"] = p.word_count;
        rows.push_back(std::move(j));
    }
    write_jsonl(rows, path);
}

}  // namespace roadqa
