#pragma once
// Evaluation harness: gold evidence mapping, chunk-level P/R/F1, paired
// bootstrap significance, win/tie/loss, scatter bins, and graph-health
// diagnostics computed from traces.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "graphhop/common.hpp"
#include "graphhop/controllers.hpp"
#include "graphhop/embedding.hpp"
#include "graphhop/entity_search.hpp"
#include "graphhop/graph.hpp"
#include "graphhop/trace.hpp"

namespace graphhop {

enum class QuestionType { FactRetrieval, ComplexReasoning, ContextualSummarization,
                          CreativeGeneration };

inline const char* to_string(QuestionType t) {
    switch (t) {
    case QuestionType::FactRetrieval: return "FactRetrieval";
    case QuestionType::ComplexReasoning: return "ComplexReasoning";
    case QuestionType::ContextualSummarization: return "ContextualSummarization";
    case QuestionType::CreativeGeneration: return "CreativeGeneration";
    }
    return "FactRetrieval";
}

inline std::optional<QuestionType> parse_question_type(std::string_view s) {
    std::string key = normalize_label(s);
    key.erase(std::remove(key.begin(), key.end(), ' '), key.end());
    if (key == "factretrieval") return QuestionType::FactRetrieval;
    if (key == "complexreasoning") return QuestionType::ComplexReasoning;
    if (key == "contextualsummarization") return QuestionType::ContextualSummarization;
    if (key == "creativegeneration") return QuestionType::CreativeGeneration;
    return std::nullopt;
}

struct Question {
    std::string qid;
    std::string question;
    QuestionType qtype = QuestionType::FactRetrieval;
    std::vector<std::string> gold_evidence;
    std::set<std::string> gold_chunks;
    std::vector<std::string> unmapped_sentences;
};

// Questions JSONL: {qid, question, type, gold_evidence: [sentence...]}.
inline std::vector<Question> load_questions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open questions file: " + path);
    std::vector<Question> questions;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_ws(line).empty()) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object())
            throw ParseError("malformed questions line " + std::to_string(line_no) + " in " +
                             path);
        for (const char* key : {"qid", "question", "type"})
            if (!obj.contains(key) || !obj[key].is_string())
                throw ParseError("questions line " + std::to_string(line_no) +
                                 " missing string key " + key);
        Question q;
        q.qid = obj["qid"].get<std::string>();
        q.question = obj["question"].get<std::string>();
        auto t = parse_question_type(obj["type"].get<std::string>());
        if (!t)
            throw ValidationError("questions line " + std::to_string(line_no) +
                                  ": unknown question type \"" +
                                  obj["type"].get<std::string>() + "\"");
        q.qtype = *t;
        if (obj.contains("gold_evidence")) {
            if (!obj["gold_evidence"].is_array())
                throw ParseError("questions line " + std::to_string(line_no) +
                                 ": gold_evidence must be an array");
            for (const auto& s : obj["gold_evidence"])
                q.gold_evidence.push_back(s.get<std::string>());
        }
        if (!seen.insert(q.qid).second)
            throw ValidationError("duplicate qid \"" + q.qid + "\"");
        questions.push_back(std::move(q));
    }
    return questions;
}

struct GoldMapping {
    std::set<std::string> chunks;
    std::vector<std::string> unmapped_sentences;
};

// Two stages per sentence: case-insensitive whitespace-normalized substring
// containment against every chunk; if nothing contains it, the top
// k_fallback chunks by embedding similarity at or above the threshold.
inline GoldMapping map_evidence_to_chunks(const std::vector<std::string>& sentences,
                                          const MentionGraph& graph, const VectorIndex& index,
                                          Embedder& embedder, int k_fallback = 5,
                                          double sim_threshold = 0.25) {
    GoldMapping mapping;
    std::vector<std::pair<std::string, std::string>> normalized_chunks;  // (id, normalized)
    for (const auto& cid : graph.chunk_order())
        normalized_chunks.emplace_back(cid, normalize_label(graph.chunk(cid).text));

    for (const auto& sentence : sentences) {
        std::string needle = normalize_label(sentence);
        bool mapped = false;
        if (!needle.empty()) {
            for (const auto& [cid, haystack] : normalized_chunks) {
                if (haystack.find(needle) != std::string::npos) {
                    mapping.chunks.insert(cid);
                    mapped = true;
                }
            }
        }
        if (!mapped) {
            Embedding q = embedder.embed(sentence);
            for (const auto& [cid, sim] : index.search_top_k(q, k_fallback)) {
                if (sim >= sim_threshold) {
                    mapping.chunks.insert(cid);
                    mapped = true;
                }
            }
        }
        if (!mapped) mapping.unmapped_sentences.push_back(sentence);
    }
    return mapping;
}

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline Prf prf1(const std::set<std::string>& retrieved, const std::set<std::string>& gold) {
    std::size_t inter = 0;
    for (const auto& id : retrieved) inter += gold.count(id);
    Prf out;
    out.precision = retrieved.empty()
                        ? 0.0
                        : static_cast<double>(inter) / static_cast<double>(retrieved.size());
    out.recall = gold.empty() ? 1.0
                              : static_cast<double>(inter) / static_cast<double>(gold.size());
    out.f1 = (out.precision + out.recall) == 0.0
                 ? 0.0
                 : 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

constexpr double kTieTolerance = 1e-9;

struct BootstrapReport {
    double mean_delta = 0.0;  // percentage points
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_two_sided = 1.0;
    int resamples = 10000;
    int wins = 0;
    int ties = 0;
    int losses = 0;

    nlohmann::json to_json() const {
        return {{"mean_delta_pp", mean_delta}, {"ci_low_pp", ci_low},
                {"ci_high_pp", ci_high}, {"p_two_sided", p_two_sided},
                {"resamples", resamples}, {"wins", wins}, {"ties", ties},
                {"losses", losses}};
    }
};

// Percentile bootstrap over per-question deltas (SplitMix64 resampling,
// nearest-rank percentiles, sign-fraction two-sided p with a 1/B floor).
inline BootstrapReport paired_bootstrap(const std::vector<double>& deltas, int resamples = 10000,
                                        std::uint64_t seed = 17) {
    const std::size_t n = deltas.size();
    if (n < 2) throw ValidationError("paired bootstrap requires at least 2 deltas");
    if (resamples < 1) throw ValidationError("paired bootstrap requires resamples >= 1");

    SplitMix64 rng(seed);
    std::vector<double> means;
    means.reserve(resamples);
    for (int b = 0; b < resamples; ++b) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += deltas[rng.next_below(n)];
        means.push_back(sum / static_cast<double>(n));
    }
    std::sort(means.begin(), means.end());

    auto nearest_rank = [&](double pct) {
        std::size_t rank = static_cast<std::size_t>(
            std::ceil(pct / 100.0 * static_cast<double>(resamples)));
        if (rank < 1) rank = 1;
        if (rank > means.size()) rank = means.size();
        return means[rank - 1];
    };

    std::size_t le = 0, ge = 0;
    for (double m : means) {
        if (m <= 0.0) ++le;
        if (m >= 0.0) ++ge;
    }
    double p = 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(resamples);
    p = std::max(p, 1.0 / static_cast<double>(resamples));
    p = std::min(p, 1.0);

    BootstrapReport report;
    double mean = 0.0;
    for (double d : deltas) mean += d;
    mean /= static_cast<double>(n);
    report.mean_delta = 100.0 * mean;
    report.ci_low = 100.0 * nearest_rank(2.5);
    report.ci_high = 100.0 * nearest_rank(97.5);
    report.p_two_sided = p;
    report.resamples = resamples;
    for (double d : deltas) {
        if (std::abs(d) < kTieTolerance)
            report.ties += 1;
        else if (d > 0.0)
            report.wins += 1;
        else
            report.losses += 1;
    }
    return report;
}

// Gold-count bins: 1-5, 6-10, 11+. A zero count lands in bin 1; callers
// flag those questions separately.
inline int scatter_bin(int gold_count) {
    if (gold_count <= 5) return 1;
    if (gold_count <= 10) return 2;
    return 3;
}

inline const char* scatter_bin_name(int bin) {
    switch (bin) {
    case 1: return "1-5";
    case 2: return "6-10";
    default: return "11+";
    }
}

struct EvalRecord {
    std::string qid;
    std::string controller;
    std::vector<std::string> retrieved;  // evidence order
    std::vector<EvidenceItem> evidence;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int scatter = 1;
    std::string trace_ref;
    long long token_estimate = 0;
    long long gateway_tokens = 0;
    long long wall_ms = 0;
    bool flagged = false;  // empty gold or controller failure
    std::optional<std::string> error;

    nlohmann::json to_json() const {
        nlohmann::json items = nlohmann::json::array();
        for (const auto& item : evidence)
            items.push_back({{"chunk_id", item.chunk_id}, {"score", item.score},
                             {"source", to_string(item.source)}});
        nlohmann::json obj = {{"qid", qid}, {"controller", controller},
                              {"retrieved", retrieved}, {"evidence", items},
                              {"precision", precision}, {"recall", recall}, {"f1", f1},
                              {"scatter_bin", scatter_bin_name(scatter)},
                              {"trace_ref", trace_ref},
                              {"token_estimate", token_estimate},
                              {"gateway_tokens", gateway_tokens},
                              {"wall_ms", wall_ms}, {"flagged", flagged}};
        if (error) obj["error"] = *error;
        return obj;
    }

    static EvalRecord from_json(const nlohmann::json& obj) {
        EvalRecord r;
        r.qid = obj.value("qid", "");
        r.controller = obj.value("controller", "");
        if (obj.contains("retrieved"))
            for (const auto& id : obj["retrieved"]) r.retrieved.push_back(id.get<std::string>());
        if (obj.contains("evidence")) {
            for (const auto& item : obj["evidence"]) {
                EvidenceItem e;
                e.chunk_id = item.value("chunk_id", "");
                e.score = item.value("score", 0.0);
                std::string src = item.value("source", "seed");
                e.source = src == "expansion"  ? EvidenceSource::expansion
                           : src == "explored" ? EvidenceSource::explored
                           : src == "backfill" ? EvidenceSource::backfill
                                               : EvidenceSource::seed;
                r.evidence.push_back(std::move(e));
            }
        }
        r.precision = obj.value("precision", 0.0);
        r.recall = obj.value("recall", 0.0);
        r.f1 = obj.value("f1", 0.0);
        std::string bin = obj.value("scatter_bin", "1-5");
        r.scatter = bin == "6-10" ? 2 : bin == "11+" ? 3 : 1;
        r.trace_ref = obj.value("trace_ref", "");
        r.token_estimate = obj.value("token_estimate", 0LL);
        r.gateway_tokens = obj.value("gateway_tokens", 0LL);
        r.wall_ms = obj.value("wall_ms", 0LL);
        r.flagged = obj.value("flagged", false);
        if (obj.contains("error")) r.error = obj["error"].get<std::string>();
        return r;
    }
};

struct KgHealthReport {
    std::optional<double> seed_hit_rate;
    std::optional<double> reachability_at_1;
    std::optional<double> reachability_at_2;
    std::optional<double> reachability_at_3;
    std::optional<double> hop_efficiency;
    std::optional<double> neighborhood_noise;
    std::optional<double> backfill_reliance;
    std::optional<double> evidence_redundancy;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const {
        auto opt = [](const std::optional<double>& v) {
            return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
        };
        return {{"seed_hit_rate", opt(seed_hit_rate)},
                {"reachability_at_1", opt(reachability_at_1)},
                {"reachability_at_2", opt(reachability_at_2)},
                {"reachability_at_3", opt(reachability_at_3)},
                {"hop_efficiency", opt(hop_efficiency)},
                {"neighborhood_noise", opt(neighborhood_noise)},
                {"backfill_reliance", opt(backfill_reliance)},
                {"evidence_redundancy", opt(evidence_redundancy)},
                {"warnings", warnings}};
    }
};

namespace detail {

inline double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::unordered_set<std::string> sa(a.begin(), a.end());
    std::size_t inter = 0;
    std::unordered_set<std::string> uni(a.begin(), a.end());
    for (const auto& x : b) {
        if (sa.count(x)) ++inter;
        uni.insert(x);
    }
    return static_cast<double>(inter) / static_cast<double>(uni.size());
}

inline double mean_pairwise_entity_jaccard(const std::vector<std::string>& chunk_ids,
                                           const MentionGraph& graph) {
    std::vector<const std::vector<std::string>*> entity_sets;
    for (const auto& cid : chunk_ids)
        if (graph.has_chunk(cid)) entity_sets.push_back(&graph.entities_for_chunk(cid));
    if (entity_sets.size() < 2) return 0.0;
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < entity_sets.size(); ++i)
        for (std::size_t j = i + 1; j < entity_sets.size(); ++j) {
            total += jaccard(*entity_sets[i], *entity_sets[j]);
            ++pairs;
        }
    return total / static_cast<double>(pairs);
}

}  // namespace detail

// Health metrics over a batch of records and their traces. Seed and
// reachability metrics re-run the deterministic seed lookup per question;
// trace-driven metrics replay the logged tool sequence against the graph.
inline KgHealthReport compute_kg_health(const std::vector<EvalRecord>& records,
                                        const std::vector<Trace>& traces,
                                        const MentionGraph& graph,
                                        const std::vector<Question>& questions,
                                        int n_seed = 10) {
    KgHealthReport report;

    // Question-level metrics: seed hit rate and reachability@h, over
    // questions with non-empty gold.
    std::size_t considered = 0, seed_hits = 0;
    double reach1 = 0.0, reach2 = 0.0, reach3 = 0.0;
    for (const auto& q : questions) {
        if (q.gold_chunks.empty()) continue;
        ++considered;
        auto seeds = entity_search(q.question, graph, n_seed);
        std::vector<std::string> seed_uris;
        for (const auto& s : seeds) seed_uris.push_back(s.uri);

        bool hit = false;
        for (const auto& uri : seed_uris) {
            for (const auto& cid : graph.chunks_for_entity(uri)) {
                if (q.gold_chunks.count(cid)) {
                    hit = true;
                    break;
                }
            }
            if (hit) break;
        }
        seed_hits += hit ? 1 : 0;
        reach1 += graph.reachability_at_h(seed_uris, q.gold_chunks, 1);
        reach2 += graph.reachability_at_h(seed_uris, q.gold_chunks, 2);
        reach3 += graph.reachability_at_h(seed_uris, q.gold_chunks, 3);
    }
    if (considered > 0) {
        report.seed_hit_rate = static_cast<double>(seed_hits) / considered;
        report.reachability_at_1 = reach1 / considered;
        report.reachability_at_2 = reach2 / considered;
        report.reachability_at_3 = reach3 / considered;
    } else {
        report.warnings.push_back("no questions with mapped gold chunks");
    }

    std::map<std::string, const Question*> by_qid;
    for (const auto& q : questions) by_qid[q.qid] = &q;
    std::map<std::pair<std::string, std::string>, const Trace*> trace_table;
    for (const auto& t : traces) trace_table[{t.meta.controller, t.meta.qid}] = &t;

    // Hop efficiency: gold chunks retrieved per tool call, pooled.
    long long gold_found = 0, tool_calls = 0;
    bool missing_traces = false;
    for (const auto& r : records) {
        auto qit = by_qid.find(r.qid);
        if (qit == by_qid.end()) continue;
        for (const auto& cid : r.retrieved) gold_found += qit->second->gold_chunks.count(cid);
        auto tit = trace_table.find({r.controller, r.qid});
        if (tit == trace_table.end()) {
            missing_traces = true;
            continue;
        }
        tool_calls += static_cast<long long>(tit->second->calls.size());
    }
    if (tool_calls > 0)
        report.hop_efficiency = static_cast<double>(gold_found) / static_cast<double>(tool_calls);
    else
        report.warnings.push_back("no tool calls found in traces");
    if (missing_traces) report.warnings.push_back("some records have no matching trace");

    // Neighborhood noise: per expand_neighbors call, neighbors returned over
    // neighbors explored later in the same trace (floor 1).
    std::vector<double> noise_ratios;
    for (const auto& t : traces) {
        for (std::size_t i = 0; i < t.calls.size(); ++i) {
            const ToolCall& call = t.calls[i];
            if (call.tool != "expand_neighbors" || !call.args.contains("uri")) continue;
            std::string uri = call.args["uri"].get<std::string>();
            if (!graph.has_entity(uri)) continue;
            const auto& neighbors = graph.co_mention_neighbors(uri);
            std::unordered_set<std::string> neighbor_set;
            for (const auto& nb : neighbors) neighbor_set.insert(nb.uri);
            std::size_t used = 0;
            std::unordered_set<std::string> counted;
            for (std::size_t j = i + 1; j < t.calls.size(); ++j) {
                const ToolCall& later = t.calls[j];
                if (later.tool != "get_chunks_for_entity" || !later.args.contains("uri"))
                    continue;
                std::string explored = later.args["uri"].get<std::string>();
                if (neighbor_set.count(explored) && counted.insert(explored).second) ++used;
            }
            noise_ratios.push_back(static_cast<double>(neighbors.size()) /
                                   static_cast<double>(std::max<std::size_t>(1, used)));
        }
    }
    if (!noise_ratios.empty()) {
        std::sort(noise_ratios.begin(), noise_ratios.end());
        std::size_t n = noise_ratios.size();
        report.neighborhood_noise = (n % 2 == 1)
                                        ? noise_ratios[n / 2]
                                        : 0.5 * (noise_ratios[n / 2 - 1] + noise_ratios[n / 2]);
    }

    // Backfill reliance and evidence redundancy over the final evidence.
    if (!records.empty()) {
        double backfill_sum = 0.0, redundancy_sum = 0.0;
        std::size_t counted = 0;
        for (const auto& r : records) {
            ++counted;
            if (!r.evidence.empty()) {
                std::size_t backfilled = 0;
                for (const auto& item : r.evidence)
                    backfilled += item.source == EvidenceSource::backfill ? 1 : 0;
                backfill_sum +=
                    static_cast<double>(backfilled) / static_cast<double>(r.evidence.size());
            }
            redundancy_sum += detail::mean_pairwise_entity_jaccard(r.retrieved, graph);
        }
        report.backfill_reliance = backfill_sum / static_cast<double>(counted);
        report.evidence_redundancy = redundancy_sum / static_cast<double>(counted);
    } else {
        report.warnings.push_back("no records supplied");
    }

    return report;
}

}  // namespace graphhop
