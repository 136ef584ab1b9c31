#pragma once
// Corpus loading and paragraph-aligned chunking.
//
// Chunking rule: whole paragraphs are packed greedily into a chunk until the
// next paragraph would exceed max_words. A single paragraph longer than
// max_words becomes its own run of word windows (window size max_words,
// stride max_words - overlap_words), so consecutive window chunks share
// exactly overlap_words words. Overlap never crosses paragraph boundaries.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "graphhop/common.hpp"

namespace graphhop {

struct Document {
    std::string doc_id;
    std::string title;
    std::string text;
};

struct Chunk {
    std::string chunk_id;
    std::string doc_id;
    std::string text;
    std::size_t start_char = 0;  // offsets into the document text, half-open
    std::size_t end_char = 0;
    int word_count = 0;
    int seq = 0;  // ordinal position within the document
};

inline std::string make_chunk_id(const std::string& doc_id, int seq) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#c%05d", seq);
    return doc_id + buf;
}

// Identifiers end up inside <...> in the triple export and in file names, so
// whitespace and angle brackets are rejected up front.
inline void validate_doc_id(const std::string& doc_id, std::size_t line_no) {
    if (doc_id.empty())
        throw ValidationError("empty doc_id at line " + std::to_string(line_no));
    for (unsigned char c : doc_id) {
        if (c <= 0x20 || c == '<' || c == '>' || c == '"')
            throw ValidationError("doc_id \"" + doc_id + "\" at line " +
                                  std::to_string(line_no) +
                                  " contains whitespace or reserved characters");
    }
}

// JSONL corpus: one object per line with keys doc_id, title, text.
inline std::vector<Document> load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file: " + path);

    std::vector<Document> docs;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_ws(line).empty()) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object())
            throw ParseError("malformed corpus line " + std::to_string(line_no) +
                             " in " + path);
        if (!obj.contains("doc_id") || !obj["doc_id"].is_string() ||
            !obj.contains("title") || !obj["title"].is_string() ||
            !obj.contains("text") || !obj["text"].is_string())
            throw ParseError("corpus line " + std::to_string(line_no) +
                             " must carry string keys doc_id, title, text");

        Document doc{obj["doc_id"].get<std::string>(),
                     obj["title"].get<std::string>(),
                     obj["text"].get<std::string>()};
        validate_doc_id(doc.doc_id, line_no);
        if (normalize_ws(doc.text).empty())
            throw ValidationError("document \"" + doc.doc_id +
                                  "\" has empty text after whitespace normalization");
        if (!seen.insert(doc.doc_id).second)
            throw ValidationError("duplicate doc_id \"" + doc.doc_id + "\"");
        docs.push_back(std::move(doc));
    }
    return docs;
}

namespace detail {

// Paragraphs are runs of non-blank lines; a blank line is whitespace-only.
// Each paragraph is reduced to the byte spans of its words.
inline std::vector<std::vector<std::pair<std::size_t, std::size_t>>>
paragraph_word_spans(std::string_view text) {
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> paragraphs;
    std::vector<std::pair<std::size_t, std::size_t>> current;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::size_t end = (eol == std::string_view::npos) ? text.size() : eol;
        std::string_view line = text.substr(pos, end - pos);
        bool blank = normalize_ws(line).empty();
        if (blank) {
            if (!current.empty()) {
                paragraphs.push_back(std::move(current));
                current.clear();
            }
        } else {
            for (auto [ws, we] : word_spans(line))
                current.emplace_back(pos + ws, pos + we);
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    if (!current.empty()) paragraphs.push_back(std::move(current));
    return paragraphs;
}

inline Chunk make_chunk(const Document& doc, int seq,
                        const std::vector<std::pair<std::size_t, std::size_t>>& words,
                        std::size_t first, std::size_t count) {
    std::size_t start = words[first].first;
    std::size_t end = words[first + count - 1].second;
    Chunk c;
    c.chunk_id = make_chunk_id(doc.doc_id, seq);
    c.doc_id = doc.doc_id;
    c.text = doc.text.substr(start, end - start);
    c.start_char = start;
    c.end_char = end;
    c.word_count = static_cast<int>(count);
    c.seq = seq;
    return c;
}

}  // namespace detail

inline std::vector<Chunk> chunk_document(const Document& doc, int max_words = 240,
                                         int overlap_words = 40) {
    if (overlap_words < 0 || max_words <= overlap_words)
        throw ValidationError("chunking requires max_words > overlap_words >= 0");

    auto paragraphs = detail::paragraph_word_spans(doc.text);
    std::vector<Chunk> out;
    int seq = 0;

    // Buffer of pending whole paragraphs: word spans plus the running count.
    std::vector<std::pair<std::size_t, std::size_t>> pending;
    auto flush = [&] {
        if (pending.empty()) return;
        out.push_back(detail::make_chunk(doc, seq++, pending, 0, pending.size()));
        pending.clear();
    };

    for (const auto& para : paragraphs) {
        const std::size_t n = para.size();
        if (n == 0) continue;
        if (n > static_cast<std::size_t>(max_words)) {
            flush();
            const std::size_t stride = static_cast<std::size_t>(max_words - overlap_words);
            std::size_t s = 0;
            while (true) {
                std::size_t e = std::min(s + static_cast<std::size_t>(max_words), n);
                out.push_back(detail::make_chunk(doc, seq++, para, s, e - s));
                if (e == n) break;
                s += stride;
            }
        } else if (pending.size() + n > static_cast<std::size_t>(max_words)) {
            flush();
            pending = para;
        } else {
            pending.insert(pending.end(), para.begin(), para.end());
        }
    }
    flush();
    return out;
}

}  // namespace graphhop
