#pragma once
// Shared test fixtures: seeded random corpora, graphs, and indexes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "graphhop/common.hpp"
#include "graphhop/corpus.hpp"
#include "graphhop/embedding.hpp"
#include "graphhop/entity.hpp"
#include "graphhop/graph.hpp"

namespace testutil {

using graphhop::SplitMix64;

inline std::string random_word(SplitMix64& rng, int min_len = 2, int max_len = 8) {
    int len = min_len + static_cast<int>(rng.next_below(max_len - min_len + 1));
    std::string w;
    for (int i = 0; i < len; ++i)
        w.push_back(static_cast<char>('a' + rng.next_below(26)));
    return w;
}

// Document of numbered words "w0 w1 ..." in paragraphs of the given sizes.
inline graphhop::Document numbered_doc(const std::string& doc_id,
                                       const std::vector<int>& paragraph_sizes) {
    graphhop::Document doc;
    doc.doc_id = doc_id;
    doc.title = doc_id;
    int w = 0;
    for (std::size_t p = 0; p < paragraph_sizes.size(); ++p) {
        if (p > 0) doc.text += "\n\n";
        for (int i = 0; i < paragraph_sizes[p]; ++i) {
            if (i > 0) doc.text += " ";
            doc.text += "w" + std::to_string(w++);
        }
    }
    return doc;
}

inline graphhop::Document random_doc(SplitMix64& rng, const std::string& doc_id,
                                     int max_paragraphs = 6, int max_words = 600) {
    graphhop::Document doc;
    doc.doc_id = doc_id;
    doc.title = "T " + doc_id;
    int paragraphs = 1 + static_cast<int>(rng.next_below(max_paragraphs));
    for (int p = 0; p < paragraphs; ++p) {
        if (p > 0) doc.text += rng.next_below(2) ? "\n\n" : "\n \n";
        int words = 1 + static_cast<int>(rng.next_below(max_words));
        for (int i = 0; i < words; ++i) {
            if (i > 0) doc.text += rng.next_below(8) ? " " : "  ";
            doc.text += random_word(rng);
        }
    }
    return doc;
}

// Synthetic mention graph: `entities` labeled E0..E(n-1), `chunk_count`
// chunks, each chunk mentioning a random subset. Returns the graph plus the
// raw chunk->entity assignment used to build it.
struct RandomGraph {
    graphhop::MentionGraph graph;
    std::vector<std::string> entity_uris;                  // E0..E(n-1)
    std::vector<std::vector<int>> chunk_entities;          // per chunk, entity ordinals
    std::vector<std::string> chunk_ids;
};

inline RandomGraph random_graph(SplitMix64& rng, int entities, int chunk_count,
                                int max_entities_per_chunk = 4) {
    std::vector<graphhop::Document> docs;
    std::vector<graphhop::Chunk> chunks;
    std::vector<graphhop::MentionSpan> spans;
    RandomGraph out;

    graphhop::Document doc;
    doc.doc_id = "g";
    doc.title = "g";

    std::vector<std::string> labels;
    for (int e = 0; e < entities; ++e) labels.push_back("E" + std::to_string(e));

    for (int c = 0; c < chunk_count; ++c) {
        std::set<int> members;
        int m = static_cast<int>(rng.next_below(max_entities_per_chunk + 1));
        for (int i = 0; i < m && entities > 0; ++i)
            members.insert(static_cast<int>(rng.next_below(entities)));
        // Exactly 8 filler words per paragraph: one paragraph per chunk
        // under a 12-word budget, never two packed together.
        std::string para = "chunk " + std::to_string(c) + " fa fb fc fd fe ff";
        std::size_t base = doc.text.size() + (c > 0 ? 2 : 0);
        std::string prefix = (c > 0 ? std::string("\n\n") : std::string());
        for (int e : members) {
            std::size_t start = base + para.size() + 1;
            para += " " + labels[e];
            spans.push_back({doc.doc_id, start, start + labels[e].size(), labels[e],
                             graphhop::EntityType::PERSON});
        }
        doc.text += prefix + para;
        out.chunk_entities.emplace_back(members.begin(), members.end());
    }
    docs.push_back(doc);
    chunks = graphhop::chunk_document(doc, 12, 0);
    if (chunks.size() != static_cast<std::size_t>(chunk_count))
        throw std::logic_error("random_graph fixture produced unexpected chunking");
    out.graph = graphhop::build_graph(docs, chunks, spans);
    for (const auto& c : chunks) out.chunk_ids.push_back(c.chunk_id);
    for (int e = 0; e < entities; ++e)
        out.entity_uris.push_back(graphhop::make_entity_uri(
            graphhop::normalize_label(labels[e]), graphhop::EntityType::PERSON));
    return out;
}

// Random sentence of dictionary words, for index fixtures.
inline std::string random_sentence(SplitMix64& rng, int min_words = 3, int max_words = 12) {
    int n = min_words + static_cast<int>(rng.next_below(max_words - min_words + 1));
    std::string s;
    for (int i = 0; i < n; ++i) {
        if (i > 0) s += " ";
        s += random_word(rng, 3, 9);
    }
    return s;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("graphhop-test-" + tag + "-" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    return content;
}

}  // namespace testutil
