#pragma once
// The nine navigator tools over (graph, index, state, gateway). Every
// execution appends exactly one ToolCall to the per-question log. Tool
// failures come back as in-band {"error": ...} results so a controller
// loop survives bad calls.
//
// State transitions: entity_search and expand_neighbors grow the frontier,
// get_chunks_for_entity moves frontier -> explored, collect_chunk grows the
// collected pool. Everything else is read-only.

#include <algorithm>
#include <chrono>
#include <functional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "graphhop/common.hpp"
#include "graphhop/embedding.hpp"
#include "graphhop/entity_search.hpp"
#include "graphhop/gateway.hpp"
#include "graphhop/graph.hpp"

namespace graphhop {

constexpr std::size_t kChunkPreviewChars = 200;

struct ToolCall {
    int turn = 0;
    std::string tool;
    nlohmann::json args;
    std::string result_digest;
    long long token_estimate = 0;
    long long wall_ms = 0;
};

// Accounting entry for traffic through the LLM gateway (decision turns and
// one-shot completions spawned by tools).
struct GatewayCall {
    int turn = 0;
    std::string kind;  // "turn" or "oneshot"
    long long token_estimate = 0;
    long long wall_ms = 0;
    bool failed = false;
};

struct ExplorationState {
    std::vector<std::string> explored;  // insertion-ordered, unique
    std::vector<std::pair<std::string, std::string>> collected;  // chunk -> note
    std::vector<std::string> frontier;  // insertion-ordered, unique
    int stall_counter = 0;
    int turn = 0;
    std::vector<ToolCall> tool_calls;
    std::vector<GatewayCall> gateway_calls;

    bool is_explored(const std::string& uri) const { return explored_set_.count(uri) > 0; }
    bool in_frontier(const std::string& uri) const { return frontier_set_.count(uri) > 0; }
    bool is_collected(const std::string& chunk_id) const {
        return collected_pos_.count(chunk_id) > 0;
    }

    void add_frontier(const std::string& uri) {
        if (explored_set_.count(uri) || !frontier_set_.insert(uri).second) return;
        frontier.push_back(uri);
    }

    void mark_explored(const std::string& uri) {
        if (frontier_set_.erase(uri) > 0)
            frontier.erase(std::find(frontier.begin(), frontier.end(), uri));
        if (explored_set_.insert(uri).second) explored.push_back(uri);
    }

    // Re-collection refreshes the note but keeps the original position.
    void collect(const std::string& chunk_id, const std::string& note) {
        auto it = collected_pos_.find(chunk_id);
        if (it != collected_pos_.end()) {
            collected[it->second].second = note;
            return;
        }
        collected_pos_.emplace(chunk_id, collected.size());
        collected.emplace_back(chunk_id, note);
    }

    long long tool_token_total() const {
        long long total = 0;
        for (const auto& c : tool_calls) total += c.token_estimate;
        return total;
    }

    long long gateway_token_total() const {
        long long total = 0;
        for (const auto& c : gateway_calls) total += c.token_estimate;
        return total;
    }

private:
    std::unordered_set<std::string> explored_set_;
    std::unordered_set<std::string> frontier_set_;
    std::unordered_map<std::string, std::size_t> collected_pos_;
};

using Clock = std::function<long long()>;  // milliseconds

inline Clock steady_clock_ms() {
    return [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    };
}

struct ToolContext {
    const MentionGraph* graph = nullptr;
    const VectorIndex* index = nullptr;
    Embedder* embedder = nullptr;
    Gateway* gateway = nullptr;
    int n_seed = 10;
};

class ToolRuntime {
public:
    ToolRuntime(const ToolContext& ctx, ExplorationState& state, Clock clock = steady_clock_ms())
        : ctx_(ctx), state_(state), clock_(std::move(clock)) {
        if (!ctx_.graph || !ctx_.index || !ctx_.embedder)
            throw ValidationError("tool runtime needs graph, index, and embedder");
    }

    ExplorationState& state() { return state_; }
    const ToolContext& context() const { return ctx_; }

    // Dispatch by name; logs one ToolCall regardless of outcome.
    nlohmann::json execute(const std::string& tool, const nlohmann::json& args) {
        long long t0 = clock_();
        nlohmann::json result = dispatch(tool, args);
        long long t1 = clock_();

        ToolCall call;
        call.turn = state_.turn;
        call.tool = tool;
        call.args = args;
        std::string serialized_result = result.dump();
        call.result_digest = digest(serialized_result);
        call.token_estimate = estimate_tokens(args.dump()) + estimate_tokens(serialized_result);
        call.wall_ms = t1 - t0;
        state_.tool_calls.push_back(std::move(call));
        return result;
    }

private:
    static nlohmann::json error_result(const std::string& message) {
        return {{"error", message}};
    }

    std::string preview(const std::string& text) const {
        return text.size() <= kChunkPreviewChars ? text : text.substr(0, kChunkPreviewChars);
    }

    nlohmann::json dispatch(const std::string& tool, const nlohmann::json& args) {
        if (tool == "entity_search") return run_entity_search(args);
        if (tool == "get_chunks_for_entity") return run_get_chunks(args);
        if (tool == "vector_search") return run_vector_search(args);
        if (tool == "expand_neighbors") return run_expand_neighbors(args);
        if (tool == "read_chunk") return run_read_chunk(args);
        if (tool == "collect_chunk") return run_collect_chunk(args);
        if (tool == "rerank_evidence") return run_rerank(args);
        if (tool == "sub_query") return run_sub_query(args);
        if (tool == "summarize_chunks") return run_summarize(args);
        return error_result("unknown tool: " + tool);
    }

    nlohmann::json run_entity_search(const nlohmann::json& args) {
        if (!args.contains("query") || !args["query"].is_string())
            return error_result("entity_search needs a string \"query\"");
        auto hits = entity_search(args["query"].get<std::string>(), *ctx_.graph, ctx_.n_seed);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& h : hits) {
            out.push_back({{"entity_uri", h.uri}, {"label", h.label},
                           {"chunk_count", h.chunk_count}});
            state_.add_frontier(h.uri);
        }
        return out;
    }

    nlohmann::json run_get_chunks(const nlohmann::json& args) {
        if (!args.contains("uri") || !args["uri"].is_string())
            return error_result("get_chunks_for_entity needs a string \"uri\"");
        std::string uri = args["uri"].get<std::string>();
        if (!ctx_.graph->has_entity(uri)) return error_result("unknown entity: " + uri);
        state_.mark_explored(uri);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& cid : ctx_.graph->chunks_for_entity(uri))
            out.push_back({{"chunk_id", cid},
                           {"text_preview", preview(ctx_.graph->chunk(cid).text)}});
        return out;
    }

    nlohmann::json run_vector_search(const nlohmann::json& args) {
        if (!args.contains("query") || !args["query"].is_string())
            return error_result("vector_search needs a string \"query\"");
        int k = 10;
        if (args.contains("k")) {
            if (!args["k"].is_number_integer() || args["k"].get<int>() < 1)
                return error_result("vector_search \"k\" must be a positive integer");
            k = args["k"].get<int>();
        }
        Embedding q = ctx_.embedder->embed(args["query"].get<std::string>());
        nlohmann::json out = nlohmann::json::array();
        for (const auto& [cid, sim] : ctx_.index->search_top_k(q, k))
            out.push_back({{"chunk_id", cid}, {"similarity", sim},
                           {"text_preview", preview(ctx_.graph->chunk(cid).text)}});
        return out;
    }

    nlohmann::json run_expand_neighbors(const nlohmann::json& args) {
        if (!args.contains("uri") || !args["uri"].is_string())
            return error_result("expand_neighbors needs a string \"uri\"");
        std::string uri = args["uri"].get<std::string>();
        if (!ctx_.graph->has_entity(uri)) return error_result("unknown entity: " + uri);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& nb : ctx_.graph->co_mention_neighbors(uri)) {
            out.push_back({{"neighbor_uri", nb.uri}, {"label", nb.label},
                           {"shared_chunks", nb.shared_chunks}});
            state_.add_frontier(nb.uri);
        }
        return out;
    }

    nlohmann::json run_read_chunk(const nlohmann::json& args) {
        if (!args.contains("chunk_id") || !args["chunk_id"].is_string())
            return error_result("read_chunk needs a string \"chunk_id\"");
        std::string cid = args["chunk_id"].get<std::string>();
        if (!ctx_.graph->has_chunk(cid)) return error_result("unknown chunk: " + cid);
        const Chunk& c = ctx_.graph->chunk(cid);
        nlohmann::json entities = nlohmann::json::array();
        for (const auto& uri : ctx_.graph->entities_for_chunk(cid))
            entities.push_back({{"uri", uri}, {"label", ctx_.graph->entity(uri).label}});
        return {{"text", c.text}, {"entities", entities}, {"doc_id", c.doc_id}};
    }

    nlohmann::json run_collect_chunk(const nlohmann::json& args) {
        if (!args.contains("chunk_id") || !args["chunk_id"].is_string() ||
            !args.contains("relevance") || !args["relevance"].is_string())
            return error_result("collect_chunk needs string \"chunk_id\" and \"relevance\"");
        std::string cid = args["chunk_id"].get<std::string>();
        if (!ctx_.graph->has_chunk(cid)) return error_result("unknown chunk: " + cid);
        state_.collect(cid, args["relevance"].get<std::string>());
        return {{"ok", true}, {"collected_count", state_.collected.size()}};
    }

    nlohmann::json run_rerank(const nlohmann::json& args) {
        if (!args.contains("question") || !args["question"].is_string())
            return error_result("rerank_evidence needs a string \"question\"");
        Embedding q = ctx_.embedder->embed(args["question"].get<std::string>());
        std::vector<std::pair<std::string, double>> scored;
        for (const auto& [cid, note] : state_.collected) {
            const Embedding* e = ctx_.index->find(cid);
            scored.emplace_back(cid, e ? cosine01(q, *e) : 0.0);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        nlohmann::json out = nlohmann::json::array();
        for (const auto& [cid, sim] : scored)
            out.push_back({{"chunk_id", cid}, {"similarity", sim}});
        return out;
    }

    // Deterministic prompt layout shared by sub_query and summarize_chunks;
    // the scripted gateway keys replies on its digest.
    nlohmann::json gather_chunk_texts(const nlohmann::json& ids, std::string& joined) {
        if (!ids.is_array() || ids.empty())
            return error_result("chunk_ids must be a non-empty array");
        for (const auto& id : ids) {
            if (!id.is_string()) return error_result("chunk_ids must contain strings");
            std::string cid = id.get<std::string>();
            if (!ctx_.graph->has_chunk(cid)) return error_result("unknown chunk: " + cid);
            joined += "[" + cid + "]\n" + ctx_.graph->chunk(cid).text + "\n\n";
        }
        return nlohmann::json();
    }

    nlohmann::json run_oneshot_tool(const std::string& prompt, const char* reply_key) {
        if (!ctx_.gateway) return error_result("no gateway configured");
        long long t0 = clock_();
        GatewayCall gc;
        gc.turn = state_.turn;
        gc.kind = "oneshot";
        try {
            std::string reply = ctx_.gateway->oneshot(prompt);
            gc.token_estimate = estimate_tokens(prompt) + estimate_tokens(reply);
            gc.wall_ms = clock_() - t0;
            state_.gateway_calls.push_back(gc);
            return {{reply_key, reply}};
        } catch (const GatewayError& e) {
            gc.token_estimate = estimate_tokens(prompt);
            gc.wall_ms = clock_() - t0;
            gc.failed = true;
            state_.gateway_calls.push_back(gc);
            return error_result(std::string("gateway failure: ") + e.what());
        }
    }

    nlohmann::json run_sub_query(const nlohmann::json& args) {
        if (!args.contains("question") || !args["question"].is_string())
            return error_result("sub_query needs a string \"question\"");
        if (!args.contains("chunk_ids")) return error_result("sub_query needs \"chunk_ids\"");
        std::string joined;
        nlohmann::json err = gather_chunk_texts(args["chunk_ids"], joined);
        if (!err.is_null()) return err;
        std::string prompt = "Answer using only the following chunks.\nQuestion: " +
                             args["question"].get<std::string>() + "\n\n" + joined;
        return run_oneshot_tool(prompt, "answer");
    }

    nlohmann::json run_summarize(const nlohmann::json& args) {
        if (!args.contains("focus") || !args["focus"].is_string())
            return error_result("summarize_chunks needs a string \"focus\"");
        if (!args.contains("chunk_ids"))
            return error_result("summarize_chunks needs \"chunk_ids\"");
        std::string joined;
        nlohmann::json err = gather_chunk_texts(args["chunk_ids"], joined);
        if (!err.is_null()) return err;
        std::string prompt = "Summarize the following chunks with focus on: " +
                             args["focus"].get<std::string>() + "\n\n" + joined;
        return run_oneshot_tool(prompt, "summary");
    }

    ToolContext ctx_;
    ExplorationState& state_;
    Clock clock_;
};

}  // namespace graphhop
