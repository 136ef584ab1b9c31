#pragma once
// Provider-agnostic tool-calling boundary. The gateway only ever *names*
// tools; execution stays on this side. ScriptedGateway replays a canned
// conversation so whole controller runs become pure functions of
// (question, graph, script).

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "graphhop/common.hpp"

namespace graphhop {

struct ToolSchema {
    std::string name;
    std::string description;
    nlohmann::json params;  // param name -> {"type": ..., "required": bool}
};

inline const std::vector<ToolSchema>& tool_schemas() {
    static const std::vector<ToolSchema> schemas = {
        {"entity_search", "Find seed entities for a query via label lookup",
         {{"query", {{"type", "string"}, {"required", true}}}}},
        {"get_chunks_for_entity", "Return chunks mentioning an entity",
         {{"uri", {{"type", "string"}, {"required", true}}}}},
        {"vector_search", "Semantic similarity search over chunks",
         {{"query", {{"type", "string"}, {"required", true}}},
          {"k", {{"type", "integer"}, {"required", false}}}}},
        {"expand_neighbors", "Find co-mentioned entities via shared chunks",
         {{"uri", {{"type", "string"}, {"required", true}}}}},
        {"read_chunk", "Read full text and entity list of a chunk",
         {{"chunk_id", {{"type", "string"}, {"required", true}}}}},
        {"sub_query", "Recursive sub-query over a chunk subset",
         {{"question", {{"type", "string"}, {"required", true}}},
          {"chunk_ids", {{"type", "array"}, {"required", true}}}}},
        {"summarize_chunks", "Compress gathered evidence",
         {{"chunk_ids", {{"type", "array"}, {"required", true}}},
          {"focus", {{"type", "string"}, {"required", true}}}}},
        {"collect_chunk", "Mark a chunk as relevant evidence",
         {{"chunk_id", {{"type", "string"}, {"required", true}}},
          {"relevance", {{"type", "string"}, {"required", true}}}}},
        {"rerank_evidence", "Re-rank collected chunks by vector similarity",
         {{"question", {{"type", "string"}, {"required", true}}}}},
    };
    return schemas;
}

inline const ToolSchema* find_tool_schema(const std::string& name) {
    for (const auto& s : tool_schemas())
        if (s.name == name) return &s;
    return nullptr;
}

struct ToolAction {
    std::string tool;
    nlohmann::json args;
};

struct TurnRequest {
    std::string system_prompt;
    std::string question;
    std::string state_summary;       // regenerated from state every turn
    nlohmann::json history;          // prior turns: tool calls plus results
    const std::vector<ToolSchema>* tools = nullptr;

    nlohmann::json to_json() const {
        nlohmann::json t = nlohmann::json::array();
        if (tools)
            for (const auto& s : *tools)
                t.push_back({{"name", s.name}, {"description", s.description},
                             {"params", s.params}});
        return {{"system", system_prompt}, {"question", question},
                {"state_summary", state_summary}, {"history", history}, {"tools", t}};
    }
};

// Exactly one of the two variants: tool actions, or a final text.
struct TurnResponse {
    std::vector<ToolAction> actions;
    std::optional<std::string> final_text;

    bool is_final() const { return final_text.has_value(); }

    nlohmann::json to_json() const {
        if (final_text) return {{"final", *final_text}};
        nlohmann::json a = nlohmann::json::array();
        for (const auto& act : actions) a.push_back({{"tool", act.tool}, {"args", act.args}});
        return {{"actions", a}};
    }
};

class Gateway {
public:
    virtual ~Gateway() = default;
    virtual TurnResponse turn(const TurnRequest& req) = 0;
    virtual std::string oneshot(const std::string& prompt) = 0;
};

constexpr const char* kSystemPromptVersion = "graphhop-prompt-v1";

inline const std::string& default_system_prompt() {
    static const std::string prompt = std::string(kSystemPromptVersion) + "\n" +
        R"(You are a retrieval navigator over a mention graph of text chunks and the
named entities they mention. Gather the evidence chunks needed to answer the
question by calling tools; do not answer from memory.

Follow three phases:

Phase 1: Entity Discovery (turns 1 to 3). Call entity_search with the
question to find seed entities. For each promising seed call
get_chunks_for_entity to surface entity-linked chunks, and read the most
promising ones with read_chunk to build context.

Phase 2: Graph Expansion (turns 4 to 7). For key entities call
expand_neighbors to discover related entities through shared chunks. For new
neighbors call get_chunks_for_entity to surface additional evidence. Mark
every relevant chunk with collect_chunk, giving a short relevance note. Use
vector_search with targeted sub-questions (not the original question
verbatim) to fill gaps.

Phase 3: Verification and Extraction (turns 8 and later). Use sub_query to
verify facts across chunk clusters and summarize_chunks to compress long
evidence. Check your ranking with rerank_evidence. Collect the final
evidence set with collect_chunk.

The state summary lists chunks collected, entities explored, and the
frontier of unexplored entities; prefer the frontier over re-exploring.
When the collected evidence is sufficient, reply with a final text answer
instead of tool calls.)";
    return prompt;
}

// Replayable script: an ordered list of turn responses plus a digest-keyed
// table for one-shot completions.
//
//   {"turns": [{"actions": [{"tool": ..., "args": {...}}]}, {"final": "..."}],
//    "oneshot": {"<fnv64 hex of prompt>": "reply"},
//    "oneshot_default": "fallback reply"}        (optional)
class ScriptedGateway final : public Gateway {
public:
    explicit ScriptedGateway(nlohmann::json script) : script_(std::move(script)) {
        if (!script_.is_object())
            throw ParseError("gateway script must be a JSON object");
        if (script_.contains("turns") && !script_["turns"].is_array())
            throw ParseError("gateway script key \"turns\" must be an array");
    }

    TurnResponse turn(const TurnRequest&) override {
        const auto& turns = script_.contains("turns") ? script_["turns"] : empty_turns();
        if (cursor_ >= turns.size())
            throw GatewayError("script exhausted after " + std::to_string(cursor_) + " turns");
        const nlohmann::json& entry = turns[cursor_++];
        return parse_turn(entry);
    }

    std::string oneshot(const std::string& prompt) override {
        std::string key = digest(prompt);
        if (script_.contains("oneshot") && script_["oneshot"].contains(key))
            return script_["oneshot"][key].get<std::string>();
        if (script_.contains("oneshot_default"))
            return script_["oneshot_default"].get<std::string>();
        throw GatewayError("no scripted oneshot reply for prompt digest " + key);
    }

    static TurnResponse parse_turn(const nlohmann::json& entry) {
        if (!entry.is_object())
            throw ParseError("script turn entries must be objects");
        TurnResponse resp;
        if (entry.contains("final")) {
            resp.final_text = entry["final"].get<std::string>();
            return resp;
        }
        if (!entry.contains("actions") || !entry["actions"].is_array())
            throw ParseError("script turn needs either \"final\" or \"actions\"");
        for (const auto& a : entry["actions"]) {
            if (!a.is_object() || !a.contains("tool") || !a["tool"].is_string())
                throw ParseError("script action needs a string \"tool\" key");
            resp.actions.push_back(
                {a["tool"].get<std::string>(),
                 a.contains("args") ? a["args"] : nlohmann::json::object()});
        }
        return resp;
    }

private:
    static const nlohmann::json& empty_turns() {
        static const nlohmann::json empty = nlohmann::json::array();
        return empty;
    }

    nlohmann::json script_;
    std::size_t cursor_ = 0;
};

inline nlohmann::json load_script_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open script file: " + path);
    nlohmann::json script = nlohmann::json::parse(in, nullptr, false);
    if (script.is_discarded())
        throw ParseError("script file is not valid JSON: " + path);
    return script;
}

// Per-question script selection for batch runs: either one shared script or
// a {"by_question": {qid or question text: script}} table.
inline nlohmann::json select_script(const nlohmann::json& script, const std::string& qid,
                                    const std::string& question) {
    if (script.is_object() && script.contains("by_question")) {
        const auto& table = script["by_question"];
        if (table.contains(qid)) return table[qid];
        if (table.contains(question)) return table[question];
        throw ValidationError("script has no entry for question \"" + qid + "\"");
    }
    return script;
}

}  // namespace graphhop
