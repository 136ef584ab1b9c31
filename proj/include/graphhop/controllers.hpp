#pragma once
// The four retrieval controllers, all mapping (question, graph, index) to a
// ranked evidence list under the same chunk budget k:
//
//   vector_only    top-k dense retrieval
//   graphrag_local vector seed -> entity expansion -> vector re-rank
//   heuristic_rlm  breadth-first co-mention traversal with fixed rules
//   llm_rlm        gateway-driven tool selection with stall/budget stopping
//
// plus the shared final stage: collection-boosted scoring with vector
// backfill.

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "graphhop/common.hpp"
#include "graphhop/embedding.hpp"
#include "graphhop/gateway.hpp"
#include "graphhop/tools.hpp"

namespace graphhop {

struct ControllerConfig {
    int k = 20;                    // evidence budget
    int seed_k = 8;                // vector seeds for graphrag_local
    int expand_entities = 12;      // entities expanded by graphrag_local
    int per_entity_chunk_cap = 12; // chunk cap per expanded entity
    int bfs_depth = 3;             // max traversal depth for heuristic_rlm
    int max_turns = 25;            // gateway turn budget B
    int stall_break_heuristic = 2;
    int stall_break_llm = 4;
    double boost = 0.10;           // additive bonus for collected chunks
    double backfill_discount = 0.9;
    int n_seed = 10;               // entity_search result cap

    void validate() const {
        if (k < 1 || seed_k < 1 || expand_entities < 1 || per_entity_chunk_cap < 1 ||
            bfs_depth < 1 || max_turns < 1 || stall_break_heuristic < 1 ||
            stall_break_llm < 1 || n_seed < 1)
            throw ValidationError("controller config: counts must be positive");
        if (boost < 0.0 || boost >= 1.0)
            throw ValidationError("controller config: boost must lie in [0, 1)");
        if (backfill_discount <= 0.0 || backfill_discount > 1.0)
            throw ValidationError("controller config: backfill_discount must lie in (0, 1]");
    }

    nlohmann::json to_json() const {
        return {{"k", k}, {"seed_k", seed_k}, {"expand_entities", expand_entities},
                {"per_entity_chunk_cap", per_entity_chunk_cap}, {"bfs_depth", bfs_depth},
                {"max_turns", max_turns}, {"stall_break_heuristic", stall_break_heuristic},
                {"stall_break_llm", stall_break_llm}, {"boost", boost},
                {"backfill_discount", backfill_discount}, {"n_seed", n_seed}};
    }
};

enum class EvidenceSource { seed, expansion, explored, backfill };

inline const char* to_string(EvidenceSource s) {
    switch (s) {
    case EvidenceSource::seed: return "seed";
    case EvidenceSource::expansion: return "expansion";
    case EvidenceSource::explored: return "explored";
    case EvidenceSource::backfill: return "backfill";
    }
    return "seed";
}

struct EvidenceItem {
    std::string chunk_id;
    double score = 0.0;
    EvidenceSource source = EvidenceSource::seed;
};

struct EvidenceList {
    std::vector<EvidenceItem> items;
    std::string controller;
    long long token_estimate = 0;   // sum over the tool-call log
    long long gateway_tokens = 0;   // sum over gateway traffic; 0 for non-LLM runs
    long long wall_ms = 0;
};

struct ControllerResult {
    EvidenceList evidence;
    ExplorationState state;
    std::optional<std::string> error;
};

inline const std::vector<std::string>& controller_names() {
    static const std::vector<std::string> names = {"vector_only", "graphrag_local",
                                                   "heuristic_rlm", "llm_rlm"};
    return names;
}

namespace detail {

inline void sort_evidence(std::vector<EvidenceItem>& items) {
    std::sort(items.begin(), items.end(), [](const EvidenceItem& a, const EvidenceItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
}

inline void finish(ControllerResult& r, const char* name, long long t0, Clock& clock) {
    r.evidence.controller = name;
    r.evidence.token_estimate = r.state.tool_token_total();
    r.evidence.gateway_tokens = r.state.gateway_token_total();
    r.evidence.wall_ms = clock() - t0;
}

}  // namespace detail

// Collected chunks score min(cosine + boost, 1.0); remaining slots fill from
// vector search at the discount, skipping ids already present.
inline EvidenceList score_and_backfill(
    const std::vector<std::pair<std::string, std::string>>& collected,
    const std::string& question, const ToolContext& ctx, const ControllerConfig& cfg) {
    cfg.validate();
    Embedding q = ctx.embedder->embed(question);

    EvidenceList out;
    std::unordered_set<std::string> present;
    for (const auto& [cid, note] : collected) {
        const Embedding* e = ctx.index->find(cid);
        if (!e || !present.insert(cid).second) continue;
        double score = std::min(cosine01(q, *e) + cfg.boost, 1.0);
        out.items.push_back({cid, score, EvidenceSource::explored});
    }
    if (out.items.size() < static_cast<std::size_t>(cfg.k) && ctx.index->size() > 0) {
        auto ranked = ctx.index->search_top_k(
            q, static_cast<int>(std::min<std::size_t>(ctx.index->size(),
                                                      cfg.k + present.size())));
        for (const auto& [cid, sim] : ranked) {
            if (out.items.size() >= static_cast<std::size_t>(cfg.k)) break;
            if (!present.insert(cid).second) continue;
            out.items.push_back({cid, cfg.backfill_discount * sim, EvidenceSource::backfill});
        }
    }
    detail::sort_evidence(out.items);
    if (out.items.size() > static_cast<std::size_t>(cfg.k)) out.items.resize(cfg.k);
    return out;
}

inline ControllerResult run_vector_only(const std::string& question, const ToolContext& ctx,
                                        const ControllerConfig& cfg,
                                        Clock clock = steady_clock_ms()) {
    cfg.validate();
    ControllerResult r;
    long long t0 = clock();
    ToolRuntime runtime(ctx, r.state, clock);
    r.state.turn = 1;
    nlohmann::json hits =
        runtime.execute("vector_search", {{"query", question}, {"k", cfg.k}});
    for (const auto& h : hits)
        r.evidence.items.push_back(
            {h["chunk_id"].get<std::string>(), h["similarity"].get<double>(),
             EvidenceSource::seed});
    detail::finish(r, "vector_only", t0, clock);
    return r;
}

// Five steps: vector seed, entity counting over seeds, expansion of the top
// entities (chunk cap per entity chosen by cosine), merge, vector re-rank.
inline ControllerResult run_graphrag_local(const std::string& question, const ToolContext& ctx,
                                           const ControllerConfig& cfg,
                                           Clock clock = steady_clock_ms()) {
    cfg.validate();
    ControllerResult r;
    long long t0 = clock();
    ToolRuntime runtime(ctx, r.state, clock);
    Embedding q = ctx.embedder->embed(question);

    r.state.turn = 1;
    nlohmann::json seed_hits =
        runtime.execute("vector_search", {{"query", question}, {"k", cfg.seed_k}});
    std::vector<std::string> seeds;
    std::unordered_set<std::string> seed_set;
    for (const auto& h : seed_hits) {
        seeds.push_back(h["chunk_id"].get<std::string>());
        seed_set.insert(seeds.back());
    }

    std::unordered_map<std::string, int> entity_counts;
    for (const auto& cid : seeds)
        for (const auto& uri : ctx.graph->entities_for_chunk(cid)) entity_counts[uri] += 1;

    std::vector<std::pair<std::string, int>> ranked_entities(entity_counts.begin(),
                                                             entity_counts.end());
    std::sort(ranked_entities.begin(), ranked_entities.end(),
              [&](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  const Entity& ea = ctx.graph->entity(a.first);
                  const Entity& eb = ctx.graph->entity(b.first);
                  if (ea.chunk_count != eb.chunk_count) return ea.chunk_count > eb.chunk_count;
                  std::string la = normalize_label(ea.label), lb = normalize_label(eb.label);
                  if (la != lb) return la < lb;
                  return a.first < b.first;
              });
    if (ranked_entities.size() > static_cast<std::size_t>(cfg.expand_entities))
        ranked_entities.resize(cfg.expand_entities);

    std::vector<std::string> merged = seeds;
    std::unordered_set<std::string> merged_set = seed_set;
    r.state.turn = 2;
    for (const auto& [uri, count] : ranked_entities) {
        nlohmann::json chunk_hits = runtime.execute("get_chunks_for_entity", {{"uri", uri}});
        std::vector<std::pair<std::string, double>> scored;
        for (const auto& h : chunk_hits) {
            std::string cid = h["chunk_id"].get<std::string>();
            const Embedding* e = ctx.index->find(cid);
            scored.emplace_back(cid, e ? cosine01(q, *e) : 0.0);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (scored.size() > static_cast<std::size_t>(cfg.per_entity_chunk_cap))
            scored.resize(cfg.per_entity_chunk_cap);
        for (const auto& [cid, sim] : scored)
            if (merged_set.insert(cid).second) merged.push_back(cid);
    }

    for (const auto& cid : merged) {
        const Embedding* e = ctx.index->find(cid);
        r.evidence.items.push_back({cid, e ? cosine01(q, *e) : 0.0,
                                    seed_set.count(cid) ? EvidenceSource::seed
                                                        : EvidenceSource::expansion});
    }
    detail::sort_evidence(r.evidence.items);
    if (r.evidence.items.size() > static_cast<std::size_t>(cfg.k))
        r.evidence.items.resize(cfg.k);
    detail::finish(r, "graphrag_local", t0, clock);
    return r;
}

// Fixed-rule traversal: FIFO frontier from entity_search seeds, per-entity
// chunk collection scored by cosine, neighbor expansion below the depth cap,
// stop on empty frontier, full budget, or two zero-yield iterations.
// Never touches the gateway.
inline ControllerResult run_heuristic_rlm(const std::string& question, const ToolContext& ctx,
                                          const ControllerConfig& cfg,
                                          Clock clock = steady_clock_ms()) {
    cfg.validate();
    ControllerResult r;
    long long t0 = clock();
    ToolRuntime runtime(ctx, r.state, clock);
    Embedding q = ctx.embedder->embed(question);

    nlohmann::json seed_hits = runtime.execute("entity_search", {{"query", question}});
    std::deque<std::string> frontier;
    std::unordered_map<std::string, int> depth_map;
    for (const auto& h : seed_hits) {
        std::string uri = h["entity_uri"].get<std::string>();
        frontier.push_back(uri);
        depth_map[uri] = 0;
    }

    std::unordered_set<std::string> visited;
    std::map<std::string, double> collected;  // chunk -> cosine score
    int stall = 0;

    while (!frontier.empty() && collected.size() < static_cast<std::size_t>(cfg.k)) {
        std::string uri = frontier.front();
        frontier.pop_front();
        if (visited.count(uri)) continue;
        visited.insert(uri);
        r.state.turn += 1;

        nlohmann::json chunk_hits = runtime.execute("get_chunks_for_entity", {{"uri", uri}});
        int new_this_iter = 0;
        if (chunk_hits.is_array()) {
            for (const auto& h : chunk_hits) {
                std::string cid = h["chunk_id"].get<std::string>();
                const Embedding* e = ctx.index->find(cid);
                double score = e ? cosine01(q, *e) : 0.0;
                if (collected.emplace(cid, score).second) {
                    new_this_iter += 1;
                    r.state.collect(cid, "");
                }
            }
        }

        if (depth_map[uri] < cfg.bfs_depth) {
            nlohmann::json neighbors = runtime.execute("expand_neighbors", {{"uri", uri}});
            if (neighbors.is_array()) {
                for (const auto& nb : neighbors) {
                    std::string n = nb["neighbor_uri"].get<std::string>();
                    if (!visited.count(n)) {
                        frontier.push_back(n);
                        depth_map[n] = depth_map[uri] + 1;
                    }
                }
            }
        }

        if (new_this_iter == 0)
            stall += 1;
        else
            stall = 0;
        r.state.stall_counter = stall;
        if (stall >= cfg.stall_break_heuristic) break;
    }

    for (const auto& [cid, score] : collected)
        r.evidence.items.push_back({cid, score, EvidenceSource::explored});
    if (collected.size() < static_cast<std::size_t>(cfg.k) && ctx.index->size() > 0) {
        int gap = cfg.k - static_cast<int>(collected.size());
        nlohmann::json fill =
            runtime.execute("vector_search", {{"query", question}, {"k", gap}});
        for (const auto& h : fill) {
            std::string cid = h["chunk_id"].get<std::string>();
            if (collected.count(cid)) continue;
            r.evidence.items.push_back({cid,
                                        cfg.backfill_discount * h["similarity"].get<double>(),
                                        EvidenceSource::backfill});
        }
    }
    detail::sort_evidence(r.evidence.items);
    if (r.evidence.items.size() > static_cast<std::size_t>(cfg.k))
        r.evidence.items.resize(cfg.k);
    detail::finish(r, "heuristic_rlm", t0, clock);
    return r;
}

inline std::string render_state_summary(const ExplorationState& state) {
    std::ostringstream out;
    out << "Collected chunks (" << state.collected.size() << "):";
    for (const auto& [cid, note] : state.collected) {
        out << " " << cid;
        if (!note.empty()) out << " [" << note << "]";
    }
    out << "\nExplored entities (" << state.explored.size() << "):";
    for (const auto& uri : state.explored) out << " " << uri;
    out << "\nFrontier (" << state.frontier.size() << "):";
    for (const auto& uri : state.frontier) out << " " << uri;
    return out.str();
}

namespace detail {

// Registry validation plus exact within-turn dedup. Cross-turn repeats are
// allowed; the model may legitimately re-read.
inline std::vector<ToolAction> validate_and_dedup(const std::vector<ToolAction>& proposed) {
    std::vector<ToolAction> valid;
    std::unordered_set<std::string> seen;
    for (const auto& action : proposed) {
        const ToolSchema* schema = find_tool_schema(action.tool);
        if (!schema) continue;
        if (!action.args.is_object()) continue;
        bool ok = true;
        for (const auto& [pname, pspec] : schema->params.items()) {
            bool required = pspec.value("required", false);
            if (!action.args.contains(pname)) {
                if (required) ok = false;
                continue;
            }
            const auto& v = action.args[pname];
            std::string type = pspec.value("type", "string");
            if ((type == "string" && !v.is_string()) ||
                (type == "integer" && !v.is_number_integer()) ||
                (type == "array" && !v.is_array()))
                ok = false;
        }
        if (!ok) continue;
        std::string key = action.tool + "\x1f" + action.args.dump();
        if (seen.insert(key).second) valid.push_back(action);
    }
    return valid;
}

}  // namespace detail

// Gateway-driven loop. Stops on: a final text response; stall >= the break
// threshold once at least half the budget is spent; or budget exhaustion.
// Zero valid actions in a turn trigger a vector_search fallback. A hard
// gateway failure aborts with partial evidence.
inline ControllerResult run_llm_rlm(const std::string& question, const ToolContext& ctx,
                                    const ControllerConfig& cfg,
                                    Clock clock = steady_clock_ms()) {
    cfg.validate();
    if (!ctx.gateway) throw ValidationError("llm_rlm requires a configured gateway");

    ControllerResult r;
    long long t0 = clock();
    ToolRuntime runtime(ctx, r.state, clock);
    nlohmann::json history = nlohmann::json::array();
    int stalled = 0;

    for (int t = 1; t <= cfg.max_turns; ++t) {
        r.state.turn = t;
        TurnRequest req;
        req.system_prompt = default_system_prompt();
        req.question = question;
        req.state_summary = render_state_summary(r.state);
        req.history = history;
        req.tools = &tool_schemas();

        std::size_t collected_before = r.state.collected.size();
        GatewayCall gc;
        gc.turn = t;
        gc.kind = "turn";
        long long g0 = clock();
        TurnResponse resp;
        bool turn_failed = false;
        try {
            resp = ctx.gateway->turn(req);
            gc.token_estimate =
                estimate_tokens(req.to_json().dump()) + estimate_tokens(resp.to_json().dump());
        } catch (const GatewayError& e) {
            if (!e.retriable()) {
                gc.failed = true;
                gc.wall_ms = clock() - g0;
                r.state.gateway_calls.push_back(gc);
                r.error = std::string("gateway failure: ") + e.what();
                break;
            }
            // Retriable failure: the turn is spent, nothing executes.
            turn_failed = true;
            gc.failed = true;
            gc.token_estimate = estimate_tokens(req.to_json().dump());
        }
        gc.wall_ms = clock() - g0;
        r.state.gateway_calls.push_back(gc);

        if (!turn_failed) {
            if (resp.is_final()) {
                history.push_back({{"turn", t}, {"final", *resp.final_text}});
                break;
            }
            auto actions = detail::validate_and_dedup(resp.actions);
            if (actions.empty())
                actions.push_back({"vector_search",
                                   {{"query", question}, {"k", cfg.k}}});
            nlohmann::json steps = nlohmann::json::array();
            for (const auto& action : actions) {
                nlohmann::json result = runtime.execute(action.tool, action.args);
                steps.push_back(
                    {{"tool", action.tool}, {"args", action.args}, {"result", result}});
            }
            history.push_back({{"turn", t}, {"steps", steps}});
        } else {
            history.push_back({{"turn", t}, {"error", "gateway turn failed"}});
        }

        if (r.state.collected.size() == collected_before)
            stalled += 1;
        else
            stalled = 0;
        r.state.stall_counter = stalled;
        if (stalled >= cfg.stall_break_llm && 2 * t >= cfg.max_turns) break;
    }

    EvidenceList scored = score_and_backfill(r.state.collected, question, ctx, cfg);
    r.evidence.items = std::move(scored.items);
    detail::finish(r, "llm_rlm", t0, clock);
    return r;
}

inline ControllerResult run_controller(const std::string& name, const std::string& question,
                                       const ToolContext& ctx, const ControllerConfig& cfg,
                                       Clock clock = steady_clock_ms()) {
    if (name == "vector_only") return run_vector_only(question, ctx, cfg, clock);
    if (name == "graphrag_local") return run_graphrag_local(question, ctx, cfg, clock);
    if (name == "heuristic_rlm") return run_heuristic_rlm(question, ctx, cfg, clock);
    if (name == "llm_rlm") return run_llm_rlm(question, ctx, cfg, clock);
    throw ValidationError("unknown controller: " + name);
}

}  // namespace graphhop
