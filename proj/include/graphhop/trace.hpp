#pragma once
// Per-question trace files: a metadata header line, one tool call per line,
// gateway accounting lines, and a terminal state summary. JSONL, replayable.

#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "graphhop/common.hpp"
#include "graphhop/controllers.hpp"
#include "graphhop/tools.hpp"

namespace graphhop {

struct TraceMeta {
    std::string controller;
    std::string qid;
    std::string question;
    nlohmann::json config;
};

inline void write_trace(std::ostream& out, const TraceMeta& meta,
                        const ExplorationState& state, const EvidenceList& evidence,
                        const std::optional<std::string>& error = std::nullopt) {
    nlohmann::json header = {{"type", "header"}, {"controller", meta.controller},
                             {"qid", meta.qid}, {"question", meta.question},
                             {"config", meta.config}};
    out << header.dump() << "\n";

    for (const auto& call : state.tool_calls) {
        nlohmann::json line = {{"type", "tool_call"}, {"turn", call.turn},
                               {"tool", call.tool}, {"args", call.args},
                               {"result_digest", call.result_digest},
                               {"token_estimate", call.token_estimate},
                               {"wall_ms", call.wall_ms}};
        out << line.dump() << "\n";
    }
    for (const auto& call : state.gateway_calls) {
        nlohmann::json line = {{"type", "gateway_call"}, {"turn", call.turn},
                               {"kind", call.kind}, {"token_estimate", call.token_estimate},
                               {"wall_ms", call.wall_ms}, {"failed", call.failed}};
        out << line.dump() << "\n";
    }

    nlohmann::json collected = nlohmann::json::array();
    for (const auto& [cid, note] : state.collected) collected.push_back({cid, note});
    nlohmann::json items = nlohmann::json::array();
    for (const auto& item : evidence.items)
        items.push_back({{"chunk_id", item.chunk_id}, {"score", item.score},
                         {"source", to_string(item.source)}});
    nlohmann::json summary = {{"type", "summary"},
                              {"explored", state.explored},
                              {"collected", collected},
                              {"frontier", state.frontier},
                              {"turns", state.turn},
                              {"total_token_estimate", evidence.token_estimate},
                              {"gateway_tokens", evidence.gateway_tokens},
                              {"wall_ms", evidence.wall_ms},
                              {"evidence", items}};
    if (error) summary["error"] = *error;
    out << summary.dump() << "\n";
}

inline void write_trace_file(const std::string& path, const TraceMeta& meta,
                             const ExplorationState& state, const EvidenceList& evidence,
                             const std::optional<std::string>& error = std::nullopt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write trace file: " + path);
    write_trace(out, meta, state, evidence, error);
    if (!out) throw IoError("failed writing trace file: " + path);
}

struct Trace {
    TraceMeta meta;
    std::vector<ToolCall> calls;
    nlohmann::json summary;
};

inline Trace parse_trace(std::istream& in, const std::string& origin = "<stream>") {
    Trace trace;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_ws(line).empty()) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("type"))
            throw ParseError("malformed trace line " + std::to_string(line_no) + " in " +
                             origin);
        std::string type = obj["type"].get<std::string>();
        if (type == "header") {
            trace.meta.controller = obj.value("controller", "");
            trace.meta.qid = obj.value("qid", "");
            trace.meta.question = obj.value("question", "");
            trace.meta.config = obj.value("config", nlohmann::json::object());
        } else if (type == "tool_call") {
            ToolCall call;
            call.turn = obj.value("turn", 0);
            call.tool = obj.value("tool", "");
            call.args = obj.value("args", nlohmann::json::object());
            call.result_digest = obj.value("result_digest", "");
            call.token_estimate = obj.value("token_estimate", 0LL);
            call.wall_ms = obj.value("wall_ms", 0LL);
            trace.calls.push_back(std::move(call));
        } else if (type == "summary") {
            trace.summary = obj;
        }
        // gateway_call lines only matter for accounting already present in
        // the summary; skip them on read.
    }
    return trace;
}

inline Trace load_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open trace file: " + path);
    return parse_trace(in, path);
}

}  // namespace graphhop
