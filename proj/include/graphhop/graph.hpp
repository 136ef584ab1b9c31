#pragma once
// Bipartite chunk-entity mention graph with document membership, a label
// index, and materialized co-mention adjacency. Immutable after build; all
// queries are read-only.

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "graphhop/common.hpp"
#include "graphhop/corpus.hpp"
#include "graphhop/entity.hpp"

namespace graphhop {

struct DocumentRef {
    std::string doc_id;
    std::string title;
};

struct NeighborEntry {
    std::string uri;
    std::string label;
    int shared_chunks = 0;
};

class MentionGraph {
public:
    bool has_chunk(const std::string& chunk_id) const { return chunks_.count(chunk_id) > 0; }
    bool has_entity(const std::string& uri) const { return entities_.count(uri) > 0; }

    const Chunk& chunk(const std::string& chunk_id) const {
        auto it = chunks_.find(chunk_id);
        if (it == chunks_.end()) throw NotFoundError("unknown chunk: " + chunk_id);
        return it->second;
    }

    const Entity& entity(const std::string& uri) const {
        auto it = entities_.find(uri);
        if (it == entities_.end()) throw NotFoundError("unknown entity: " + uri);
        return it->second;
    }

    // Chunk ids ordered by (doc_id, seq).
    const std::vector<std::string>& chunks_for_entity(const std::string& uri) const {
        entity(uri);
        static const std::vector<std::string> empty;
        auto it = entity_chunks_.find(uri);
        return it == entity_chunks_.end() ? empty : it->second;
    }

    // Entity uris ordered by (normalized label, type).
    const std::vector<std::string>& entities_for_chunk(const std::string& chunk_id) const {
        chunk(chunk_id);
        static const std::vector<std::string> empty;
        auto it = chunk_entities_.find(chunk_id);
        return it == chunk_entities_.end() ? empty : it->second;
    }

    // Neighbors ordered by shared_chunks desc, then normalized label asc.
    const std::vector<NeighborEntry>& co_mention_neighbors(const std::string& uri) const {
        entity(uri);
        static const std::vector<NeighborEntry> empty;
        auto it = neighbors_.find(uri);
        return it == neighbors_.end() ? empty : it->second;
    }

    // Normalized label -> entity uris (sorted).
    const std::map<std::string, std::vector<std::string>>& label_index() const {
        return label_index_;
    }

    const std::vector<DocumentRef>& documents() const { return documents_; }
    const std::vector<std::string>& chunk_order() const { return chunk_order_; }
    const std::vector<std::string>& entity_order() const { return entity_order_; }
    std::size_t chunk_size() const { return chunks_.size(); }
    std::size_t entity_size() const { return entities_.size(); }
    std::size_t mention_edge_count() const { return mention_edge_count_; }

    // Fraction of gold chunks that mention at least one entity within h
    // co-mention hops of any seed. h = 0 means the seeds themselves.
    // Empty gold is vacuously 1.0; unknown seeds are skipped.
    double reachability_at_h(const std::vector<std::string>& seeds,
                             const std::set<std::string>& gold_chunks, int h) const {
        if (h < 0) throw ValidationError("reachability requires h >= 0");
        if (gold_chunks.empty()) return 1.0;

        std::unordered_set<std::string> reached;
        std::deque<std::pair<std::string, int>> queue;
        for (const auto& s : seeds) {
            if (has_entity(s) && reached.insert(s).second) queue.emplace_back(s, 0);
        }
        while (!queue.empty()) {
            auto [uri, depth] = queue.front();
            queue.pop_front();
            if (depth >= h) continue;
            for (const auto& nb : co_mention_neighbors(uri)) {
                if (reached.insert(nb.uri).second) queue.emplace_back(nb.uri, depth + 1);
            }
        }

        std::size_t hit = 0;
        for (const auto& g : gold_chunks) {
            if (!has_chunk(g)) continue;
            for (const auto& uri : entities_for_chunk(g)) {
                if (reached.count(uri)) {
                    ++hit;
                    break;
                }
            }
        }
        return static_cast<double>(hit) / static_cast<double>(gold_chunks.size());
    }

    // Line-oriented triples, sorted by (subject, predicate, object).
    void export_triples(std::ostream& out) const {
        auto quote = [](const std::string& s) {
            std::string esc;
            for (char c : s) {
                if (c == '\\' || c == '"') esc.push_back('\\');
                esc.push_back(c);
            }
            return "\"" + esc + "\"";
        };
        std::vector<std::array<std::string, 3>> triples;
        for (const auto& cid : chunk_order_) {
            triples.push_back({cid, "isChunkOf", "<" + chunks_.at(cid).doc_id + ">"});
            for (const auto& uri : entities_for_chunk(cid))
                triples.push_back({cid, "mentions", "<" + uri + ">"});
        }
        for (const auto& uri : entity_order_) {
            const Entity& e = entities_.at(uri);
            triples.push_back({uri, "label", quote(e.label)});
            triples.push_back({uri, "type", quote(to_string(e.etype))});
        }
        std::sort(triples.begin(), triples.end());
        for (const auto& t : triples)
            out << "<" << t[0] << "> <" << t[1] << "> " << t[2] << " .\n";
    }

    void export_triples(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write triples file: " + path);
        export_triples(out);
        if (!out) throw IoError("failed writing triples file: " + path);
    }

private:
    friend MentionGraph assemble_graph(std::vector<DocumentRef>, std::vector<Chunk>,
                                       std::vector<Entity>,
                                       const std::set<std::pair<std::string, std::string>>&);

    std::vector<DocumentRef> documents_;
    std::unordered_map<std::string, Chunk> chunks_;
    std::unordered_map<std::string, Entity> entities_;
    std::vector<std::string> chunk_order_;   // by (doc_id, seq)
    std::vector<std::string> entity_order_;  // by uri
    std::unordered_map<std::string, std::vector<std::string>> entity_chunks_;
    std::unordered_map<std::string, std::vector<std::string>> chunk_entities_;
    std::unordered_map<std::string, std::vector<NeighborEntry>> neighbors_;
    std::map<std::string, std::vector<std::string>> label_index_;
    std::size_t mention_edge_count_ = 0;
};

// Assemble a graph from resolved parts: document refs, chunks, entity
// definitions (chunk_count recomputed here), and the mention edge set.
// Shared by the span-resolving builder and by snapshot loading so both
// paths produce identical adjacency.
inline MentionGraph assemble_graph(std::vector<DocumentRef> docs, std::vector<Chunk> chunks,
                                   std::vector<Entity> entities,
                                   const std::set<std::pair<std::string, std::string>>& edges) {
    MentionGraph g;
    g.documents_ = std::move(docs);

    for (auto& c : chunks) {
        std::string id = c.chunk_id;
        g.chunk_order_.push_back(id);
        g.chunks_.emplace(std::move(id), std::move(c));
    }
    std::sort(g.chunk_order_.begin(), g.chunk_order_.end(),
              [&](const std::string& a, const std::string& b) {
                  const Chunk& ca = g.chunks_.at(a);
                  const Chunk& cb = g.chunks_.at(b);
                  return std::tie(ca.doc_id, ca.seq) < std::tie(cb.doc_id, cb.seq);
              });

    for (auto& e : entities) {
        e.chunk_count = 0;
        std::string uri = e.entity_uri;
        g.entity_order_.push_back(uri);
        g.entities_.emplace(std::move(uri), std::move(e));
    }
    std::sort(g.entity_order_.begin(), g.entity_order_.end());

    g.mention_edge_count_ = edges.size();
    for (const auto& [cid, uri] : edges) {
        if (!g.chunks_.count(cid))
            throw ValidationError("mention edge references unknown chunk " + cid);
        if (!g.entities_.count(uri))
            throw ValidationError("mention edge references unknown entity " + uri);
        g.entity_chunks_[uri].push_back(cid);
        g.chunk_entities_[cid].push_back(uri);
        g.entities_.at(uri).chunk_count += 1;
    }

    for (const auto& uri : g.entity_order_)
        g.label_index_[normalize_label(g.entities_.at(uri).label)].push_back(uri);
    for (auto& [label, uris] : g.label_index_) std::sort(uris.begin(), uris.end());

    auto label_key = [&](const std::string& uri) {
        const Entity& e = g.entities_.at(uri);
        return std::pair<std::string, int>(normalize_label(e.label),
                                           static_cast<int>(e.etype));
    };
    for (auto& [uri, list] : g.entity_chunks_)
        std::sort(list.begin(), list.end(), [&](const std::string& a, const std::string& b) {
            const Chunk& ca = g.chunks_.at(a);
            const Chunk& cb = g.chunks_.at(b);
            return std::tie(ca.doc_id, ca.seq) < std::tie(cb.doc_id, cb.seq);
        });
    for (auto& [cid, list] : g.chunk_entities_)
        std::sort(list.begin(), list.end(), [&](const std::string& a, const std::string& b) {
            return label_key(a) < label_key(b);
        });

    // Co-mention adjacency, materialized: shared-chunk counts per pair.
    std::map<std::pair<std::string, std::string>, int> pair_counts;
    for (const auto& [cid, uris] : g.chunk_entities_) {
        for (std::size_t i = 0; i < uris.size(); ++i)
            for (std::size_t j = i + 1; j < uris.size(); ++j) {
                auto key = uris[i] < uris[j] ? std::make_pair(uris[i], uris[j])
                                             : std::make_pair(uris[j], uris[i]);
                pair_counts[key] += 1;
            }
    }
    for (const auto& [key, count] : pair_counts) {
        const auto& [a, b] = key;
        g.neighbors_[a].push_back({b, g.entities_.at(b).label, count});
        g.neighbors_[b].push_back({a, g.entities_.at(a).label, count});
    }
    for (auto& [uri, list] : g.neighbors_)
        std::sort(list.begin(), list.end(), [&](const NeighborEntry& x, const NeighborEntry& y) {
            if (x.shared_chunks != y.shared_chunks) return x.shared_chunks > y.shared_chunks;
            return label_key(x.uri) < label_key(y.uri);
        });

    return g;
}

inline MentionGraph build_graph(const std::vector<Document>& docs,
                                const std::vector<Chunk>& chunks,
                                const std::vector<MentionSpan>& spans) {
    std::map<std::string, std::size_t> doc_index;
    std::vector<DocumentRef> doc_refs;
    for (const auto& d : docs) {
        doc_index.emplace(d.doc_id, doc_refs.size());
        doc_refs.push_back({d.doc_id, d.title});
    }

    // Chunks grouped per document, ordered by seq, for span assignment.
    std::map<std::string, std::vector<const Chunk*>> doc_chunks;
    for (const auto& c : chunks) {
        if (!doc_index.count(c.doc_id))
            throw ValidationError("chunk " + c.chunk_id + " references unknown doc " + c.doc_id);
        doc_chunks[c.doc_id].push_back(&c);
    }
    for (auto& [doc, list] : doc_chunks)
        std::sort(list.begin(), list.end(),
                  [](const Chunk* a, const Chunk* b) { return a->seq < b->seq; });

    // Deterministic span order: corpus document order, then offsets. The
    // first surface form seen becomes the entity's canonical label.
    std::vector<const MentionSpan*> ordered;
    ordered.reserve(spans.size());
    for (const auto& s : spans) ordered.push_back(&s);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [&](const MentionSpan* a, const MentionSpan* b) {
                         auto ia = doc_index.count(a->doc_id) ? doc_index.at(a->doc_id) : SIZE_MAX;
                         auto ib = doc_index.count(b->doc_id) ? doc_index.at(b->doc_id) : SIZE_MAX;
                         return std::tie(ia, a->start_char, a->end_char, a->etype) <
                                std::tie(ib, b->start_char, b->end_char, b->etype);
                     });

    std::map<std::string, Entity> entity_defs;  // uri -> definition
    std::set<std::pair<std::string, std::string>> mention_edges;
    for (const MentionSpan* span : ordered) {
        if (!doc_index.count(span->doc_id))
            throw ValidationError("mention span references unknown doc \"" + span->doc_id + "\"");

        std::string norm = normalize_label(span->label);
        if (norm.empty()) continue;
        std::string uri = make_entity_uri(norm, span->etype);
        auto [it, inserted] = entity_defs.try_emplace(uri);
        if (inserted) {
            it->second.entity_uri = uri;
            it->second.label = normalize_ws(span->label);
            it->second.etype = span->etype;
        }

        // A span lands in every chunk whose character range contains its
        // start offset; chunks in an overlap run may both claim it.
        bool assigned = false;
        for (const Chunk* c : doc_chunks[span->doc_id]) {
            if (span->start_char >= c->start_char && span->start_char < c->end_char) {
                mention_edges.emplace(c->chunk_id, uri);
                assigned = true;
            }
        }
        if (!assigned)
            throw ValidationError("mention span at doc \"" + span->doc_id + "\" offset " +
                                  std::to_string(span->start_char) +
                                  " falls outside every chunk");
    }

    std::vector<Entity> entities;
    entities.reserve(entity_defs.size());
    for (auto& [uri, e] : entity_defs) entities.push_back(std::move(e));
    return assemble_graph(std::move(doc_refs), chunks, std::move(entities), mention_edges);
}

}  // namespace graphhop
