#pragma once
// HTTP adapters: a remote embedder and a remote tool-calling gateway.
// Both speak plain JSON over POST; provider-specific translation lives
// outside this project.
//
//   embedder:  POST <url>         {"texts": [s...]} -> {"embeddings": [[f...]...]}
//   gateway:   POST <url>/turn    TurnRequest JSON  -> {"actions":[...]} | {"final": s}
//              POST <url>/oneshot {"prompt": s}     -> {"text": s}

#include <cstdlib>
#include <memory>
#include <string>

#include "httplib.h"
#include "json.hpp"

#include "graphhop/common.hpp"
#include "graphhop/embedding.hpp"
#include "graphhop/gateway.hpp"

namespace graphhop {

namespace detail {

struct SplitUrl {
    std::string base;  // scheme://host:port
    std::string path;  // leading slash, possibly "/"
};

inline SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ValidationError("URL must start with http:// or https://: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::string join_path(const std::string& base, const std::string& leaf) {
    if (base.empty() || base == "/") return "/" + leaf;
    if (base.back() == '/') return base + leaf;
    return base + "/" + leaf;
}

}  // namespace detail

class HttpEmbedder final : public Embedder {
public:
    HttpEmbedder(std::string url, int d) : url_(detail::split_url(url)), d_(d) {
        if (d < 1) throw ValidationError("embedder dimension must be >= 1");
    }

    Embedding embed(const std::string& text) override {
        httplib::Client client(url_.base);
        client.set_read_timeout(30, 0);
        nlohmann::json body = {{"texts", {text}}};
        auto res = client.Post(url_.path, body.dump(), "application/json");
        if (!res || res->status != 200)
            throw GatewayError("embedder request to " + url_.base + " failed", true);
        nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("embeddings") ||
            !reply["embeddings"].is_array() || reply["embeddings"].size() != 1)
            throw GatewayError("embedder returned malformed payload");
        const auto& vec = reply["embeddings"][0];
        if (!vec.is_array() || vec.size() != static_cast<std::size_t>(d_))
            throw ValidationError("embedder returned dimension " +
                                  std::to_string(vec.size()) + ", expected " +
                                  std::to_string(d_));
        Embedding e;
        e.values.reserve(vec.size());
        for (const auto& v : vec) e.values.push_back(v.get<double>());
        double norm = l2_norm(e);
        if (norm == 0.0) {
            e.values.assign(static_cast<std::size_t>(d_), 0.0);
            e.values[0] = 1.0;
            return e;
        }
        for (double& v : e.values) v /= norm;
        return e;
    }

    int dim() const override { return d_; }

private:
    detail::SplitUrl url_;
    int d_;
};

// EMBEDDER_URL selects the HTTP adapter; unset means the reference embedder.
inline std::unique_ptr<Embedder> make_embedder_from_env(int d) {
    const char* url = std::getenv("EMBEDDER_URL");
    if (url && *url) return std::make_unique<HttpEmbedder>(url, d);
    return std::make_unique<ReferenceEmbedder>(d);
}

class HttpGateway final : public Gateway {
public:
    explicit HttpGateway(std::string url, std::string api_key = "")
        : url_(detail::split_url(std::move(url))), api_key_(std::move(api_key)) {}

    TurnResponse turn(const TurnRequest& req) override {
        nlohmann::json reply = post(detail::join_path(url_.path, "turn"), req.to_json());
        TurnResponse resp;
        if (reply.contains("final") && reply["final"].is_string()) {
            resp.final_text = reply["final"].get<std::string>();
            return resp;
        }
        // Anything malformed degrades to zero valid actions; the controller
        // falls back rather than aborting.
        if (!reply.contains("actions") || !reply["actions"].is_array()) return resp;
        for (const auto& a : reply["actions"]) {
            if (!a.is_object() || !a.contains("tool") || !a["tool"].is_string()) continue;
            std::string name = a["tool"].get<std::string>();
            if (req.tools) {
                bool known = false;
                for (const auto& s : *req.tools) known = known || s.name == name;
                if (!known) continue;
            }
            resp.actions.push_back(
                {name, a.contains("args") ? a["args"] : nlohmann::json::object()});
        }
        return resp;
    }

    std::string oneshot(const std::string& prompt) override {
        nlohmann::json reply =
            post(detail::join_path(url_.path, "oneshot"), {{"prompt", prompt}});
        if (!reply.contains("text") || !reply["text"].is_string())
            throw GatewayError("oneshot endpoint returned malformed payload");
        return reply["text"].get<std::string>();
    }

private:
    nlohmann::json post(const std::string& path, const nlohmann::json& body) {
        httplib::Client client(url_.base);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res)
            throw GatewayError("gateway request to " + url_.base + " failed", true);
        if (res->status != 200)
            throw GatewayError("gateway returned HTTP " + std::to_string(res->status), true);
        nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
        if (reply.is_discarded())
            throw GatewayError("gateway returned invalid JSON", true);
        return reply;
    }

    detail::SplitUrl url_;
    std::string api_key_;
};

}  // namespace graphhop
