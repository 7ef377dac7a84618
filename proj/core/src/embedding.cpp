#include "diarylens/embedding.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "diarylens/util.hpp"

namespace diarylens {

namespace {

using nlohmann::json;

std::string cache_key(const std::string& provider_id, const std::string& model,
                      const std::string& text) {
    return provider_id + '\x1f' + model + '\x1f' + hex64(fnv1a(text));
}

bool whitespace_only(const std::string& text) {
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

}  // namespace

HashedEmbedding hash_embed(const std::string& text, int dim, std::uint64_t seed) {
    if (dim < 8) {
        throw EmbeddingError(EmbeddingError::Kind::Config,
                             "hash_embed: dim must be >= 8, got " + std::to_string(dim));
    }
    HashedEmbedding out;
    out.vector.assign(static_cast<std::size_t>(dim), 0.0);

    const auto tokens = tokenize(text);
    if (tokens.empty()) {
        out.empty_text = true;
        return out;
    }
    const std::uint64_t bucket_salt = fnv1a_u64(seed);
    const std::uint64_t sign_salt = fnv1a_u64(seed ^ 0x9e3779b97f4a7c15ull);
    for (const auto& tok : tokens) {
        const std::uint64_t bucket = fnv1a(tok, bucket_salt) % static_cast<std::uint64_t>(dim);
        const double sign = (fnv1a(tok, sign_salt) & 1u) ? 1.0 : -1.0;
        out.vector[bucket] += sign;
    }
    double norm2 = 0;
    for (double v : out.vector) norm2 += v * v;
    if (norm2 > 0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& v : out.vector) v *= inv;
    }
    return out;
}

HashEmbedder::HashEmbedder(int dim, std::uint64_t seed, std::string model_name)
    : dim_(dim), seed_(seed), model_name_(std::move(model_name)) {
    if (dim < 8) {
        throw EmbeddingError(EmbeddingError::Kind::Config,
                             "hash embedder: dim must be >= 8, got " + std::to_string(dim));
    }
}

Vector HashEmbedder::embed(const std::string& text) {
    return hash_embed(text, dim_, seed_).vector;
}

RemoteEmbedder::RemoteEmbedder(ProviderConfig config) : config_(std::move(config)) {
    if (config_.dim < 1) {
        throw EmbeddingError(EmbeddingError::Kind::Config, "remote embedder: dim must be >= 1");
    }
    if (config_.endpoint_url.empty()) {
        throw EmbeddingError(EmbeddingError::Kind::Config, "remote embedder: endpoint_url not set");
    }
    try {
        split_url(config_.endpoint_url);  // validate early
    } catch (const std::invalid_argument& e) {
        throw EmbeddingError(EmbeddingError::Kind::Config, e.what());
    }
}

Vector RemoteEmbedder::embed(const std::string& text) {
    if (whitespace_only(text)) return Vector(static_cast<std::size_t>(config_.dim), 0.0);

    const auto [origin, path] = split_url(config_.endpoint_url);
    httplib::Client client(origin);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);

    httplib::Headers headers;
    if (!config_.api_key_env_var.empty()) {
        if (const char* key = std::getenv(config_.api_key_env_var.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    const std::string body = json{{"model", config_.model_name}, {"input", text}}.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0 && config_.backoff_initial_ms > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.backoff_initial_ms << (attempt - 1)));
        }
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = "connection error: " + httplib::to_string(res.error());
            continue;  // retryable
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "status " + std::to_string(res->status);
            continue;  // retryable
        }
        if (res->status != 200) {
            throw EmbeddingError(EmbeddingError::Kind::Transport,
                                 "embedding request failed with status " +
                                     std::to_string(res->status));
        }
        const json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("data") || !reply["data"].is_array() ||
            reply["data"].empty() || !reply["data"][0].contains("embedding")) {
            throw EmbeddingError(EmbeddingError::Kind::Transport,
                                 "embedding response malformed");
        }
        Vector v;
        for (const auto& x : reply["data"][0]["embedding"]) {
            if (!x.is_number()) {
                throw EmbeddingError(EmbeddingError::Kind::Transport,
                                     "embedding response contains a non-numeric value");
            }
            v.push_back(x.get<double>());
        }
        if (static_cast<int>(v.size()) != config_.dim) {
            throw EmbeddingError(EmbeddingError::Kind::DimMismatch,
                                 "provider returned " + std::to_string(v.size()) +
                                     " values, configured dim is " + std::to_string(config_.dim));
        }
        return v;
    }
    throw EmbeddingError(EmbeddingError::Kind::Transport,
                         "embedding request failed after " +
                             std::to_string(config_.max_retries + 1) + " attempts (" +
                             last_error + ")");
}

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config) {
    if (config.provider == "hash") {
        return std::make_unique<HashEmbedder>(config.dim, config.seed, config.model_name);
    }
    if (config.provider == "remote") {
        return std::make_unique<RemoteEmbedder>(config);
    }
    throw EmbeddingError(EmbeddingError::Kind::Config,
                         "unknown embedding provider '" + config.provider + "'");
}

EmbeddingCache::EmbeddingCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // nothing persisted yet
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("provider") || !j.contains("model") ||
            !j.contains("text_hash") || !j.contains("vector")) {
            continue;  // tolerate a torn trailing line from an interrupted run
        }
        Vector v;
        for (const auto& x : j["vector"]) v.push_back(x.get<double>());
        entries_[j["provider"].get<std::string>() + '\x1f' + j["model"].get<std::string>() +
                 '\x1f' + j["text_hash"].get<std::string>()] = std::move(v);
    }
}

std::optional<Vector> EmbeddingCache::get(const std::string& provider_id, const std::string& model,
                                          const std::string& text) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(cache_key(provider_id, model, text));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::put(const std::string& provider_id, const std::string& model,
                         const std::string& text, const Vector& vector) {
    std::lock_guard lock(mu_);
    const auto [it, inserted] = entries_.emplace(cache_key(provider_id, model, text), vector);
    if (!inserted || path_.empty()) return;
    std::ofstream out(path_, std::ios::app);
    out << json{{"provider", provider_id},
                {"model", model},
                {"text_hash", hex64(fnv1a(text))},
                {"vector", vector}}
               .dump()
        << '\n';
}

std::size_t EmbeddingCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<EmbeddingProvider> inner,
                                 std::shared_ptr<EmbeddingCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

Vector CachingEmbedder::embed(const std::string& text) {
    if (auto hit = cache_->get(inner_->id(), inner_->model_name(), text)) return *hit;
    Vector v = inner_->embed(text);
    ++delegated_calls_;
    cache_->put(inner_->id(), inner_->model_name(), text, v);
    return v;
}

}  // namespace diarylens
