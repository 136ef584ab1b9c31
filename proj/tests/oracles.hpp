#pragma once
// Independent oracle implementations used to check the library. These share
// types with the implementation but recompute results through their own
// code paths (full-matrix edit distance, level-set reachability, a second
// expansion pipeline, an index-based traversal).

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "graphhop/common.hpp"
#include "graphhop/embedding.hpp"
#include "graphhop/entity.hpp"
#include "graphhop/graph.hpp"

namespace oracle {

// Full (m+1) x (n+1) matrix edit distance.
inline int edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1, 0));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j) {
            int best = std::min(d[i - 1][j], d[i][j - 1]) + 1;
            best = std::min(best, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1));
            d[i][j] = best;
        }
    return d[a.size()][b.size()];
}

inline int windowed_fuzzy(const std::string& raw_a, const std::string& raw_b) {
    std::string a = graphhop::normalize_label(raw_a);
    std::string b = graphhop::normalize_label(raw_b);
    if (a.empty() || b.empty()) return 0;
    std::string s = a, l = b;
    if (b.size() < a.size()) std::swap(s, l);
    int best = 0;
    for (std::size_t off = 0; off + s.size() <= l.size(); ++off) {
        int dist = edit_distance(s, l.substr(off, s.size()));
        double frac = 1.0 - static_cast<double>(dist) / static_cast<double>(s.size());
        best = std::max(best, static_cast<int>(std::llround(100.0 * frac)));
    }
    return best;
}

// Four-step seed lookup, written against the published procedure rather
// than the library internals.
inline std::vector<std::string> entity_search_uris(const std::string& question,
                                                   const graphhop::MentionGraph& graph,
                                                   int n_seed) {
    auto spans = graphhop::extract_entities_builtin(question);
    std::set<std::string> found;
    for (const auto& span : spans) {
        auto it = graph.label_index().find(graphhop::normalize_label(span.label));
        if (it != graph.label_index().end())
            for (const auto& uri : it->second) found.insert(uri);
    }
    if (found.size() < 3) {
        for (const auto& span : spans) {
            std::vector<std::pair<int, std::string>> cands;
            for (const auto& [label, uris] : graph.label_index()) {
                int score = windowed_fuzzy(span.label, label);
                if (score >= 90) cands.push_back({score, label});
            }
            std::sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) {
                return x.first != y.first ? x.first > y.first : x.second < y.second;
            });
            if (cands.size() > 20) cands.resize(20);
            for (const auto& [score, label] : cands)
                for (const auto& uri : graph.label_index().at(label)) found.insert(uri);
        }
    }
    struct Row {
        std::string uri, norm;
        int count;
    };
    std::vector<Row> rows;
    for (const auto& uri : found) {
        const auto& e = graph.entity(uri);
        rows.push_back({uri, graphhop::normalize_label(e.label), e.chunk_count});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
        if (x.count != y.count) return x.count > y.count;
        if (x.norm != y.norm) return x.norm < y.norm;
        return x.uri < y.uri;
    });
    if (rows.size() > static_cast<std::size_t>(n_seed)) rows.resize(n_seed);
    std::vector<std::string> uris;
    for (const auto& r : rows) uris.push_back(r.uri);
    return uris;
}

// Reachability by level sets instead of a queue.
inline double reachability(const graphhop::MentionGraph& graph,
                           const std::vector<std::string>& seeds,
                           const std::set<std::string>& gold, int h) {
    if (gold.empty()) return 1.0;
    std::set<std::string> reached;
    std::set<std::string> level;
    for (const auto& s : seeds)
        if (graph.has_entity(s)) level.insert(s);
    reached = level;
    for (int depth = 0; depth < h; ++depth) {
        std::set<std::string> next;
        for (const auto& uri : level)
            for (const auto& nb : graph.co_mention_neighbors(uri))
                if (!reached.count(nb.uri)) next.insert(nb.uri);
        reached.insert(next.begin(), next.end());
        level = std::move(next);
        if (level.empty()) break;
    }
    int hit = 0;
    for (const auto& g : gold) {
        if (!graph.has_chunk(g)) continue;
        bool ok = false;
        for (const auto& uri : graph.entities_for_chunk(g)) ok = ok || reached.count(uri) > 0;
        hit += ok ? 1 : 0;
    }
    return static_cast<double>(hit) / static_cast<double>(gold.size());
}

// Full-scan ranking with an explicit schwartzian sort.
inline std::vector<std::pair<std::string, double>> top_k(
    const graphhop::VectorIndex& index, const graphhop::Embedding& query, int k) {
    struct Row {
        double neg_sim;
        std::string id;
    };
    std::vector<Row> rows;
    for (const auto& id : index.chunk_ids()) {
        double dot = 0.0;
        const auto& e = index.at(id);
        for (std::size_t i = 0; i < e.values.size(); ++i) dot += e.values[i] * query.values[i];
        if (dot < 0.0) dot = 0.0;
        if (dot > 1.0) dot = 1.0;
        rows.push_back({-dot, id});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.neg_sim != b.neg_sim) return a.neg_sim < b.neg_sim;
        return a.id < b.id;
    });
    std::vector<std::pair<std::string, double>> out;
    for (const auto& r : rows) {
        if (static_cast<int>(out.size()) >= k) break;
        out.push_back({r.id, -r.neg_sim});
    }
    return out;
}

// Second implementation of the five-step local expansion recipe.
inline std::vector<std::pair<std::string, double>> graphrag_local(
    const std::string& question, const graphhop::MentionGraph& graph,
    const graphhop::VectorIndex& index, graphhop::Embedder& embedder, int seed_k,
    int expand_entities, int per_entity_cap, int k) {
    graphhop::Embedding q = embedder.embed(question);

    auto seeds = top_k(index, q, seed_k);
    std::set<std::string> candidate_set;
    std::vector<std::string> candidates;
    for (const auto& [cid, sim] : seeds)
        if (candidate_set.insert(cid).second) candidates.push_back(cid);

    std::map<std::string, int> counts;
    for (const auto& [cid, sim] : seeds)
        for (const auto& uri : graph.entities_for_chunk(cid)) counts[uri] += 1;

    struct ERow {
        int count;
        int chunk_count;
        std::string norm;
        std::string uri;
    };
    std::vector<ERow> rows;
    for (const auto& [uri, count] : counts) {
        const auto& e = graph.entity(uri);
        rows.push_back({count, e.chunk_count, graphhop::normalize_label(e.label), uri});
    }
    std::sort(rows.begin(), rows.end(), [](const ERow& a, const ERow& b) {
        if (a.count != b.count) return a.count > b.count;
        if (a.chunk_count != b.chunk_count) return a.chunk_count > b.chunk_count;
        if (a.norm != b.norm) return a.norm < b.norm;
        return a.uri < b.uri;
    });
    if (rows.size() > static_cast<std::size_t>(expand_entities)) rows.resize(expand_entities);

    for (const auto& row : rows) {
        std::vector<std::pair<double, std::string>> scored;
        for (const auto& cid : graph.chunks_for_entity(row.uri))
            scored.push_back({graphhop::cosine01(q, index.at(cid)), cid});
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        if (scored.size() > static_cast<std::size_t>(per_entity_cap))
            scored.resize(per_entity_cap);
        for (const auto& [sim, cid] : scored)
            if (candidate_set.insert(cid).second) candidates.push_back(cid);
    }

    std::vector<std::pair<std::string, double>> ranked;
    for (const auto& cid : candidates) ranked.push_back({cid, graphhop::cosine01(q, index.at(cid))});
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(k);
    return ranked;
}

// Index-based rendition of the fixed-rule traversal: same semantics,
// different data structures (vector scan instead of a deque).
struct HeuristicTrace {
    std::vector<std::string> visited_order;
    std::set<std::string> collected;
};

inline HeuristicTrace heuristic_bfs(const std::string& question,
                                    const graphhop::MentionGraph& graph, int n_seed, int depth_cap,
                                    int k, int stall_break) {
    HeuristicTrace out;
    std::vector<std::string> frontier = entity_search_uris(question, graph, n_seed);
    std::map<std::string, int> depth;
    for (const auto& uri : frontier) depth[uri] = 0;

    std::set<std::string> visited;
    int stall = 0;
    std::size_t cursor = 0;
    while (cursor < frontier.size() && out.collected.size() < static_cast<std::size_t>(k)) {
        std::string uri = frontier[cursor++];
        if (visited.count(uri)) continue;
        visited.insert(uri);
        out.visited_order.push_back(uri);

        int fresh = 0;
        for (const auto& cid : graph.chunks_for_entity(uri))
            if (out.collected.insert(cid).second) fresh += 1;

        if (depth[uri] < depth_cap) {
            for (const auto& nb : graph.co_mention_neighbors(uri)) {
                if (!visited.count(nb.uri)) {
                    frontier.push_back(nb.uri);
                    depth[nb.uri] = depth[uri] + 1;
                }
            }
        }
        if (fresh == 0)
            stall += 1;
        else
            stall = 0;
        if (stall >= stall_break) break;
    }
    return out;
}

// Deterministic standard normal via Box-Muller over SplitMix64.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

    double next(double mean, double stddev) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = 0.0;
        do {
            u1 = rng_.next_unit();
        } while (u1 <= 1e-300);
        double u2 = rng_.next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return mean + stddev * r * std::cos(theta);
    }

private:
    graphhop::SplitMix64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace oracle
