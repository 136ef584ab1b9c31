#pragma once
// Per-question failure categorization from eval records and traces.
// Decision rules:
//   coverage      no seed entity links to a gold chunk, or every gold chunk
//                 retrieved arrived via vector backfill
//   connectivity  some gold chunk is unreachable within 3 co-mention hops
//                 of the seeds
//   queryability  many tool calls with little gold yield
// A question may match several categories; "none" marks records without
// findings.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "graphhop/entity_search.hpp"
#include "graphhop/evaluation.hpp"
#include "graphhop/graph.hpp"
#include "graphhop/trace.hpp"

namespace graphhop {

constexpr int kQueryabilityCallFloor = 10;
constexpr double kQueryabilityYieldCeiling = 0.1;

inline nlohmann::json categorize_failures(const std::vector<EvalRecord>& records,
                                          const std::vector<Trace>& traces,
                                          const MentionGraph& graph,
                                          const std::vector<Question>& questions,
                                          int n_seed = 10) {
    std::map<std::string, const Question*> by_qid;
    for (const auto& q : questions) by_qid[q.qid] = &q;
    std::map<std::pair<std::string, std::string>, const Trace*> trace_table;
    for (const auto& t : traces) trace_table[{t.meta.controller, t.meta.qid}] = &t;

    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : records) {
        auto qit = by_qid.find(r.qid);
        if (qit == by_qid.end()) continue;
        const Question& q = *qit->second;
        if (q.gold_chunks.empty()) continue;

        std::vector<std::string> categories;
        auto seeds = entity_search(q.question, graph, n_seed);
        std::vector<std::string> seed_uris;
        for (const auto& s : seeds) seed_uris.push_back(s.uri);

        bool seed_hit = false;
        for (const auto& uri : seed_uris) {
            for (const auto& cid : graph.chunks_for_entity(uri))
                if (q.gold_chunks.count(cid)) {
                    seed_hit = true;
                    break;
                }
            if (seed_hit) break;
        }
        if (!seed_hit) categories.push_back("coverage");

        if (graph.reachability_at_h(seed_uris, q.gold_chunks, 3) < 1.0)
            categories.push_back("connectivity");

        std::size_t gold_retrieved = 0, gold_backfilled = 0;
        for (const auto& item : r.evidence) {
            if (!q.gold_chunks.count(item.chunk_id)) continue;
            ++gold_retrieved;
            if (item.source == EvidenceSource::backfill) ++gold_backfilled;
        }
        if (gold_retrieved > 0 && gold_retrieved == gold_backfilled && !seed_hit) {
            // already coverage via seed miss
        } else if (gold_retrieved > 0 && gold_retrieved == gold_backfilled) {
            categories.push_back("coverage");
        }

        auto tit = trace_table.find({r.controller, r.qid});
        if (tit != trace_table.end()) {
            std::size_t calls = tit->second->calls.size();
            double yield = calls == 0 ? 0.0
                                      : static_cast<double>(gold_retrieved) /
                                            static_cast<double>(calls);
            if (calls >= kQueryabilityCallFloor && yield < kQueryabilityYieldCeiling)
                categories.push_back("queryability");
        }

        if (categories.empty()) categories.push_back("none");
        out.push_back({{"qid", r.qid}, {"controller", r.controller}, {"f1", r.f1},
                       {"categories", categories}});
    }
    return out;
}

}  // namespace graphhop
