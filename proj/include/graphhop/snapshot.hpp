#pragma once
// Versioned on-disk snapshot of a built graph and vector index. Plain JSON
// with sorted keys and sorted arrays, so identical inputs serialize to
// identical bytes and a load/save round trip is stable.

#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "graphhop/common.hpp"
#include "graphhop/embedding.hpp"
#include "graphhop/graph.hpp"

namespace graphhop {

constexpr const char* kSnapshotVersion = "graphhop-snapshot-v1";

struct Snapshot {
    MentionGraph graph;
    VectorIndex index;
    nlohmann::json settings;  // dim plus the build parameters
};

inline nlohmann::json snapshot_to_json(const MentionGraph& graph, const VectorIndex& index,
                                       const nlohmann::json& settings) {
    nlohmann::json docs = nlohmann::json::array();
    for (const auto& d : graph.documents())
        docs.push_back({{"doc_id", d.doc_id}, {"title", d.title}});

    nlohmann::json chunks = nlohmann::json::array();
    for (const auto& cid : graph.chunk_order()) {
        const Chunk& c = graph.chunk(cid);
        chunks.push_back({{"chunk_id", c.chunk_id}, {"doc_id", c.doc_id}, {"text", c.text},
                          {"start_char", c.start_char}, {"end_char", c.end_char},
                          {"word_count", c.word_count}, {"seq", c.seq}});
    }

    nlohmann::json entities = nlohmann::json::array();
    for (const auto& uri : graph.entity_order()) {
        const Entity& e = graph.entity(uri);
        entities.push_back({{"uri", e.entity_uri}, {"label", e.label},
                            {"etype", to_string(e.etype)}});
    }

    nlohmann::json mentions = nlohmann::json::array();
    for (const auto& cid : graph.chunk_order())
        for (const auto& uri : graph.entities_for_chunk(cid))
            mentions.push_back({cid, uri});

    nlohmann::json embeddings = nlohmann::json::array();
    for (const auto& cid : index.chunk_ids())
        embeddings.push_back({cid, index.at(cid).values});

    nlohmann::json merged_settings = settings;
    merged_settings["dim"] = index.dim();

    return {{"version", kSnapshotVersion}, {"settings", merged_settings},
            {"documents", docs}, {"chunks", chunks}, {"entities", entities},
            {"mentions", mentions}, {"embeddings", embeddings}};
}

inline void save_snapshot(const std::string& path, const MentionGraph& graph,
                          const VectorIndex& index,
                          const nlohmann::json& settings = nlohmann::json::object()) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write snapshot file: " + path);
    out << snapshot_to_json(graph, index, settings).dump(2) << "\n";
    if (!out) throw IoError("failed writing snapshot file: " + path);
}

inline Snapshot load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot file: " + path);
    nlohmann::json obj = nlohmann::json::parse(in, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
        throw ParseError("snapshot is not valid JSON: " + path);
    if (obj.value("version", "") != kSnapshotVersion)
        throw ValidationError("snapshot " + path + " has unsupported version \"" +
                              obj.value("version", "") + "\"");

    std::vector<DocumentRef> docs;
    for (const auto& d : obj["documents"])
        docs.push_back({d.value("doc_id", ""), d.value("title", "")});

    std::vector<Chunk> chunks;
    for (const auto& c : obj["chunks"]) {
        Chunk chunk;
        chunk.chunk_id = c.value("chunk_id", "");
        chunk.doc_id = c.value("doc_id", "");
        chunk.text = c.value("text", "");
        chunk.start_char = c.value("start_char", std::size_t{0});
        chunk.end_char = c.value("end_char", std::size_t{0});
        chunk.word_count = c.value("word_count", 0);
        chunk.seq = c.value("seq", 0);
        chunks.push_back(std::move(chunk));
    }

    std::vector<Entity> entities;
    for (const auto& e : obj["entities"]) {
        Entity ent;
        ent.entity_uri = e.value("uri", "");
        ent.label = e.value("label", "");
        auto t = parse_entity_type(e.value("etype", ""));
        if (!t) throw ValidationError("snapshot entity with invalid etype: " + ent.entity_uri);
        ent.etype = *t;
        entities.push_back(std::move(ent));
    }

    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& m : obj["mentions"]) {
        if (!m.is_array() || m.size() != 2)
            throw ParseError("snapshot mention edges must be [chunk_id, uri] pairs");
        edges.emplace(m[0].get<std::string>(), m[1].get<std::string>());
    }

    int dim = obj["settings"].value("dim", 0);
    if (dim < 1) throw ValidationError("snapshot settings missing a valid dim");

    Snapshot snap{assemble_graph(std::move(docs), std::move(chunks), std::move(entities), edges),
                  VectorIndex(dim), obj["settings"]};
    for (const auto& entry : obj["embeddings"]) {
        if (!entry.is_array() || entry.size() != 2)
            throw ParseError("snapshot embeddings must be [chunk_id, values] pairs");
        Embedding e;
        for (const auto& v : entry[1]) e.values.push_back(v.get<double>());
        snap.index.upsert(entry[0].get<std::string>(), std::move(e));
    }
    return snap;
}

}  // namespace graphhop
