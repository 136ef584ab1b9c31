#pragma once
// Embedding contract, the deterministic signed-hashing reference embedder,
// and an exact cosine top-k index over chunk embeddings.
//
// Reference embedder: lowercase, split on non-alphanumeric bytes, FNV-1a
// each token, bucket = hash mod d, sign from the top hash bit, accumulate,
// L2-normalize. Fully pinned so independent implementations agree bit for
// bit. A text with no surviving signal maps to the first basis vector.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "graphhop/common.hpp"

namespace graphhop {

struct Embedding {
    std::vector<double> values;
    std::size_t dim() const { return values.size(); }
};

inline double l2_norm(const Embedding& e) {
    double acc = 0.0;
    for (double v : e.values) acc += v * v;
    return std::sqrt(acc);
}

inline Embedding embed_reference(std::string_view text, int d = 256) {
    if (d < 8) throw ValidationError("reference embedder requires d >= 8");
    Embedding e;
    e.values.assign(static_cast<std::size_t>(d), 0.0);

    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        std::uint64_t h = fnv1a64(token);
        std::size_t bucket = static_cast<std::size_t>(h % static_cast<std::uint64_t>(d));
        e.values[bucket] += (h >> 63) ? -1.0 : 1.0;
        token.clear();
    };
    for (char raw : text) {
        char c = raw;
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        bool alnum = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
        if (alnum)
            token.push_back(c);
        else
            flush();
    }
    flush();

    double norm = l2_norm(e);
    if (norm == 0.0) {
        e.values[0] = 1.0;
        return e;
    }
    for (double& v : e.values) v /= norm;
    return e;
}

// Cosine clamped to [0, 1]; inputs are unit vectors, so the dot product is
// the cosine and negatives clamp to zero.
inline double cosine01(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim())
        throw ValidationError("cosine01 dimension mismatch: " + std::to_string(a.dim()) +
                              " vs " + std::to_string(b.dim()));
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return std::clamp(dot, 0.0, 1.0);
}

// Contract for pluggable embedders: deterministic, unit-norm, fixed d.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Embedding embed(const std::string& text) = 0;
    virtual int dim() const = 0;
};

class ReferenceEmbedder final : public Embedder {
public:
    explicit ReferenceEmbedder(int d = 256) : d_(d) {
        if (d < 8) throw ValidationError("reference embedder requires d >= 8");
    }
    Embedding embed(const std::string& text) override { return embed_reference(text, d_); }
    int dim() const override { return d_; }

private:
    int d_;
};

class VectorIndex {
public:
    explicit VectorIndex(int d) : d_(d) {
        if (d < 1) throw ValidationError("vector index requires d >= 1");
    }

    int dim() const { return d_; }
    std::size_t size() const { return entries_.size(); }
    bool contains(const std::string& chunk_id) const { return entries_.count(chunk_id) > 0; }

    // Idempotent upsert by chunk id. Stored vectors stay unit-norm; inputs
    // that drift beyond 1e-6 are renormalized.
    void upsert(const std::string& chunk_id, Embedding embedding) {
        if (embedding.dim() != static_cast<std::size_t>(d_))
            throw ValidationError("embedding for " + chunk_id + " has dimension " +
                                  std::to_string(embedding.dim()) + ", index expects " +
                                  std::to_string(d_));
        double norm = l2_norm(embedding);
        if (norm == 0.0)
            throw ValidationError("zero-norm embedding for " + chunk_id);
        if (std::abs(norm - 1.0) > 1e-6)
            for (double& v : embedding.values) v /= norm;
        auto it = entries_.find(chunk_id);
        if (it != entries_.end()) {
            it->second = std::move(embedding);
        } else {
            entries_.emplace(chunk_id, std::move(embedding));
            order_.insert(std::lower_bound(order_.begin(), order_.end(), chunk_id), chunk_id);
        }
    }

    const Embedding* find(const std::string& chunk_id) const {
        auto it = entries_.find(chunk_id);
        return it == entries_.end() ? nullptr : &it->second;
    }

    const Embedding& at(const std::string& chunk_id) const {
        const Embedding* e = find(chunk_id);
        if (!e) throw NotFoundError("no embedding for chunk: " + chunk_id);
        return *e;
    }

    const std::vector<std::string>& chunk_ids() const { return order_; }

    // Exact full-scan top-k: similarity desc, chunk id asc.
    std::vector<std::pair<std::string, double>> search_top_k(const Embedding& query,
                                                             int k) const {
        if (k < 1) throw ValidationError("search_top_k requires k >= 1");
        std::vector<std::pair<std::string, double>> scored;
        scored.reserve(entries_.size());
        for (const auto& id : order_) scored.emplace_back(id, cosine01(query, entries_.at(id)));
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (scored.size() > static_cast<std::size_t>(k)) scored.resize(k);
        return scored;
    }

private:
    int d_;
    std::unordered_map<std::string, Embedding> entries_;
    std::vector<std::string> order_;  // sorted chunk ids
};

}  // namespace graphhop
