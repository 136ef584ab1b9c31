#pragma once
// Typed entities and mention spans: the built-in rule extractor, sidecar
// annotation loading, and the windowed fuzzy label score.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "graphhop/common.hpp"
#include "graphhop/corpus.hpp"

namespace graphhop {

enum class EntityType { PERSON, ORG, GPE, LOC };

inline const char* to_string(EntityType t) {
    switch (t) {
    case EntityType::PERSON: return "PERSON";
    case EntityType::ORG: return "ORG";
    case EntityType::GPE: return "GPE";
    case EntityType::LOC: return "LOC";
    }
    return "PERSON";
}

inline std::optional<EntityType> parse_entity_type(std::string_view s) {
    if (s == "PERSON") return EntityType::PERSON;
    if (s == "ORG") return EntityType::ORG;
    if (s == "GPE") return EntityType::GPE;
    if (s == "LOC") return EntityType::LOC;
    return std::nullopt;
}

struct Entity {
    std::string entity_uri;
    std::string label;  // canonical surface form, case preserved
    EntityType etype = EntityType::PERSON;
    int chunk_count = 0;
};

struct MentionSpan {
    std::string doc_id;
    std::size_t start_char = 0;
    std::size_t end_char = 0;
    std::string label;  // equals document.text[start_char, end_char)
    EntityType etype = EntityType::PERSON;
};

// URI is a pure function of (normalized label, type).
inline std::string make_entity_uri(std::string_view normalized_label, EntityType t) {
    return std::string("ent:") + to_string(t) + ":" + percent_encode(normalized_label);
}

// Normalized label -> type. Keys are normalized at load.
using Gazetteer = std::map<std::string, EntityType>;

inline Gazetteer load_gazetteer(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open gazetteer file: " + path);
    nlohmann::json obj = nlohmann::json::parse(in, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
        throw ParseError("gazetteer must be a flat JSON object: " + path);
    Gazetteer gaz;
    for (auto& [label, value] : obj.items()) {
        if (!value.is_string())
            throw ParseError("gazetteer value for \"" + label + "\" must be a string");
        auto t = parse_entity_type(value.get<std::string>());
        if (!t)
            throw ValidationError("gazetteer type for \"" + label +
                                  "\" must be one of PERSON, ORG, GPE, LOC");
        gaz[normalize_label(label)] = *t;
    }
    return gaz;
}

namespace detail {

// A token counts as capitalized when its first ASCII alphanumeric character
// is an uppercase letter. Sentence position is deliberately ignored.
inline bool is_capitalized_token(std::string_view tok) {
    for (char c : tok) {
        if (is_ascii_alnum(c)) return c >= 'A' && c <= 'Z';
    }
    return false;
}

}  // namespace detail

// Rule extractor: maximal runs of capitalized tokens, trimmed to their
// alphanumeric extent. Runs matching a gazetteer key take its type,
// everything else defaults to PERSON.
inline std::vector<MentionSpan> extract_entities_builtin(
    std::string_view text, const Gazetteer& gazetteer = {},
    const std::string& doc_id = "") {
    std::vector<MentionSpan> spans;
    auto words = word_spans(text);

    std::size_t i = 0;
    while (i < words.size()) {
        if (!detail::is_capitalized_token(text.substr(words[i].first,
                                                      words[i].second - words[i].first))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < words.size() &&
               detail::is_capitalized_token(text.substr(
                   words[j + 1].first, words[j + 1].second - words[j + 1].first)))
            ++j;

        // Trim non-alphanumeric characters off the run boundaries.
        std::size_t start = words[i].first;
        std::size_t end = words[j].second;
        while (start < end && !is_ascii_alnum(text[start])) ++start;
        while (end > start && !is_ascii_alnum(text[end - 1])) --end;
        if (end > start) {
            MentionSpan span;
            span.doc_id = doc_id;
            span.start_char = start;
            span.end_char = end;
            span.label = std::string(text.substr(start, end - start));
            auto it = gazetteer.find(normalize_label(span.label));
            span.etype = (it != gazetteer.end()) ? it->second : EntityType::PERSON;
            spans.push_back(std::move(span));
        }
        i = j + 1;
    }
    return spans;
}

// Sidecar annotations: JSONL with doc_id, start_char, end_char, label, etype.
// Every span must reproduce the document slice exactly.
inline std::vector<MentionSpan> load_annotations(const std::string& path,
                                                 const std::vector<Document>& docs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open annotations file: " + path);

    std::map<std::string, const Document*> by_id;
    for (const auto& d : docs) by_id[d.doc_id] = &d;

    std::vector<MentionSpan> spans;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_ws(line).empty()) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object())
            throw ParseError("malformed annotations line " + std::to_string(line_no) +
                             " in " + path);
        for (const char* key : {"doc_id", "label", "etype"})
            if (!obj.contains(key) || !obj[key].is_string())
                throw ParseError("annotations line " + std::to_string(line_no) +
                                 " missing string key " + key);
        for (const char* key : {"start_char", "end_char"})
            if (!obj.contains(key) || !obj[key].is_number_unsigned())
                throw ParseError("annotations line " + std::to_string(line_no) +
                                 " missing non-negative integer key " + key);

        MentionSpan span;
        span.doc_id = obj["doc_id"].get<std::string>();
        span.start_char = obj["start_char"].get<std::size_t>();
        span.end_char = obj["end_char"].get<std::size_t>();
        span.label = obj["label"].get<std::string>();
        auto t = parse_entity_type(obj["etype"].get<std::string>());
        if (!t)
            throw ValidationError("annotations line " + std::to_string(line_no) +
                                  ": etype must be one of PERSON, ORG, GPE, LOC");
        span.etype = *t;

        auto it = by_id.find(span.doc_id);
        if (it == by_id.end())
            throw ValidationError("annotations line " + std::to_string(line_no) +
                                  ": unknown doc_id \"" + span.doc_id + "\"");
        const std::string& text = it->second->text;
        if (span.end_char <= span.start_char || span.end_char > text.size() ||
            text.compare(span.start_char, span.end_char - span.start_char, span.label) != 0)
            throw ValidationError(
                "annotation span does not match document text: doc \"" + span.doc_id +
                "\" offsets [" + std::to_string(span.start_char) + ", " +
                std::to_string(span.end_char) + ")");
        spans.push_back(std::move(span));
    }
    return spans;
}

namespace detail {

// Unit-cost Levenshtein distance, two-row dynamic program over bytes.
inline int levenshtein(std::string_view a, std::string_view b) {
    const std::size_t n = b.size();
    std::vector<int> prev(n + 1), cur(n + 1);
    for (std::size_t j = 0; j <= n; ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= n; ++j) {
            int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

}  // namespace detail

// Best normalized-Levenshtein match of the shorter string against every
// window of the longer string of the same length, scaled to [0, 100].
// Ties on length resolve with `a` as the shorter side.
inline int partial_fuzzy_score(std::string_view a, std::string_view b) {
    std::string na = normalize_label(a);
    std::string nb = normalize_label(b);
    if (na.empty() || nb.empty()) return 0;

    std::string_view s = na, l = nb;
    if (nb.size() < na.size()) {
        s = nb;
        l = na;
    }
    const std::size_t m = s.size();
    int best = 0;
    for (std::size_t off = 0; off + m <= l.size(); ++off) {
        int dist = detail::levenshtein(s, l.substr(off, m));
        int score = static_cast<int>(
            std::llround(100.0 * (1.0 - static_cast<double>(dist) / static_cast<double>(m))));
        best = std::max(best, score);
        if (best == 100) break;
    }
    return best;
}

}  // namespace graphhop
