#pragma once
// Deterministic seed-entity lookup: extract spans from the question, try
// exact normalized-label hits, fall back to fuzzy label matching when fewer
// than three distinct entities were found, rank by chunk count.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "graphhop/entity.hpp"
#include "graphhop/graph.hpp"

namespace graphhop {

struct EntityHit {
    std::string uri;
    std::string label;
    int chunk_count = 0;
};

constexpr int kFuzzyThreshold = 90;
constexpr int kFuzzyTopK = 20;
constexpr int kExactHitsBeforeFuzzy = 3;

inline std::vector<EntityHit> entity_search(const std::string& question,
                                            const MentionGraph& graph, int n_seed = 10) {
    if (n_seed < 1) throw ValidationError("entity_search requires n_seed >= 1");

    // Question-side spans always come from the rule extractor; questions are
    // not part of the corpus, so sidecar annotations cannot cover them.
    auto spans = extract_entities_builtin(question);

    const auto& index = graph.label_index();
    std::set<std::string> found;
    for (const auto& span : spans) {
        auto it = index.find(normalize_label(span.label));
        if (it != index.end())
            for (const auto& uri : it->second) found.insert(uri);
    }

    if (static_cast<int>(found.size()) < kExactHitsBeforeFuzzy) {
        for (const auto& span : spans) {
            std::vector<std::pair<int, std::string>> candidates;  // (score, label)
            for (const auto& [label, uris] : index) {
                int score = partial_fuzzy_score(span.label, label);
                if (score >= kFuzzyThreshold) candidates.emplace_back(score, label);
            }
            std::sort(candidates.begin(), candidates.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                      });
            if (candidates.size() > static_cast<std::size_t>(kFuzzyTopK))
                candidates.resize(kFuzzyTopK);
            for (const auto& [score, label] : candidates)
                for (const auto& uri : index.at(label)) found.insert(uri);
        }
    }

    std::vector<EntityHit> hits;
    hits.reserve(found.size());
    for (const auto& uri : found) {
        const Entity& e = graph.entity(uri);
        hits.push_back({uri, e.label, e.chunk_count});
    }
    std::sort(hits.begin(), hits.end(), [](const EntityHit& a, const EntityHit& b) {
        if (a.chunk_count != b.chunk_count) return a.chunk_count > b.chunk_count;
        std::string la = normalize_label(a.label), lb = normalize_label(b.label);
        if (la != lb) return la < lb;
        return a.uri < b.uri;
    });
    if (hits.size() > static_cast<std::size_t>(n_seed)) hits.resize(n_seed);
    return hits;
}

}  // namespace graphhop
