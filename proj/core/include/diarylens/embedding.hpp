#pragma once
// Text embedding providers behind one interface: a deterministic offline
// hash embedder for tests and demos, and a remote HTTP provider for hosted
// embedding models. A persistent cache keyed by (provider, model, text hash)
// makes reruns free and keeps transport usage auditable.

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "diarylens/vectorstore.hpp"

namespace diarylens {

class EmbeddingError : public std::runtime_error {
public:
    enum class Kind {
        Config,       // bad provider configuration
        Transport,    // HTTP failure after retries
        DimMismatch,  // provider returned a vector of the wrong length
    };

    EmbeddingError(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual int dim() const = 0;
    // Stable identifier used in cache keys ("hash", "remote").
    virtual std::string id() const = 0;
    virtual std::string model_name() const = 0;
    // Returns a dim-length vector; whitespace-only text maps to the zero
    // vector without any transport call (such entries are excluded from
    // retrieval pools by the pipeline).
    virtual Vector embed(const std::string& text) = 0;
};

struct HashedEmbedding {
    Vector vector;
    bool empty_text = false;  // zero vector, nothing to hash
};

// Bag-of-words signed random projection: tokens are lowercased, hashed into
// dim buckets with a +/-1 contribution each, and the result is L2-normalized.
// Identical texts give identical vectors; token order never matters.
// Requires dim >= 8.
HashedEmbedding hash_embed(const std::string& text, int dim, std::uint64_t seed);

struct ProviderConfig {
    std::string provider = "hash";  // "hash" | "remote"
    int dim = 64;
    std::string model_name = "hash-v1";
    std::string endpoint_url;       // remote only, full URL
    std::string api_key_env_var = "DIARYLENS_API_KEY";
    std::uint64_t seed = 0;         // hash provider only
    int timeout_seconds = 30;
    int max_retries = 3;
    int backoff_initial_ms = 200;
};

class HashEmbedder : public EmbeddingProvider {
public:
    HashEmbedder(int dim, std::uint64_t seed, std::string model_name = "hash-v1");
    int dim() const override { return dim_; }
    std::string id() const override { return "hash"; }
    std::string model_name() const override { return model_name_; }
    Vector embed(const std::string& text) override;

private:
    int dim_;
    std::uint64_t seed_;
    std::string model_name_;
};

// POSTs {model, input} to the configured endpoint and expects an
// OpenAI-style {data:[{embedding:[...]}]} reply. Retries transient failures
// (connection errors, 429, 5xx) with exponential backoff. The API key is
// read from the configured environment variable at request time and never
// logged.
class RemoteEmbedder : public EmbeddingProvider {
public:
    explicit RemoteEmbedder(ProviderConfig config);
    int dim() const override { return config_.dim; }
    std::string id() const override { return "remote"; }
    std::string model_name() const override { return config_.model_name; }
    Vector embed(const std::string& text) override;

private:
    ProviderConfig config_;
};

// Throws EmbeddingError{Config} on unknown provider names or bad dims.
std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config);

// In-memory map with optional JSONL persistence. Entries are immutable once
// written; concurrent puts of the same key are idempotent.
class EmbeddingCache {
public:
    EmbeddingCache() = default;
    // Loads existing entries from path; subsequent puts append to it.
    explicit EmbeddingCache(std::string path);

    std::optional<Vector> get(const std::string& provider_id, const std::string& model,
                              const std::string& text) const;
    void put(const std::string& provider_id, const std::string& model, const std::string& text,
             const Vector& vector);
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::string path_;  // empty = memory only
    std::map<std::string, Vector> entries_;
};

// Consults the cache before delegating; counts actual provider calls so
// tests and the CLI can assert cache hits.
class CachingEmbedder : public EmbeddingProvider {
public:
    CachingEmbedder(std::shared_ptr<EmbeddingProvider> inner,
                    std::shared_ptr<EmbeddingCache> cache);
    int dim() const override { return inner_->dim(); }
    std::string id() const override { return inner_->id(); }
    std::string model_name() const override { return inner_->model_name(); }
    Vector embed(const std::string& text) override;

    int delegated_calls() const { return delegated_calls_; }

private:
    std::shared_ptr<EmbeddingProvider> inner_;
    std::shared_ptr<EmbeddingCache> cache_;
    std::atomic<int> delegated_calls_{0};
};

}  // namespace diarylens
