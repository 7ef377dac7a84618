#pragma once
// Run configuration shared by every subcommand: a key = value file layered
// under command-line flags, plus builders for the embedding provider and
// response source the configuration describes. The description written into
// each output directory uses the same key = value syntax, so it can be fed
// back through --config to reproduce a run.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "diarylens/corpus.hpp"
#include "diarylens/embedding.hpp"
#include "diarylens/inference.hpp"
#include "diarylens/prompting.hpp"

namespace diarylens::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;        // finished with warnings
inline constexpr int kExitInvalidInput = 2;   // bad file, flag or config
inline constexpr int kExitEnvironment = 3;    // transport or missing credentials

struct RunConfig {
    std::string corpus_path;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int folds = 5;
    bool serial = false;

    std::string provider = "hash";  // "hash" | "remote"
    int provider_dim = 64;
    std::string provider_model = "hash-v1";
    std::string provider_endpoint;
    std::string provider_api_key_env = "DIARYLENS_API_KEY";
    std::uint64_t provider_seed = 0;

    std::string llm_endpoint;
    std::string llm_model = "gpt-4o-mini";
    double llm_temperature = 0.3;
    int llm_max_tokens = 1000;
    int llm_max_retries = 3;
    int llm_max_in_flight = 4;
    std::string llm_api_key_env = "DIARYLENS_API_KEY";

    // "majority_echo" | "keyword_oracle" | "calibrated" | "fixed:<p>";
    // empty means the real chat endpoint.
    std::string mock;

    std::vector<std::string> grid_history = {"none", "current_day", "last_day"};
    std::vector<int> grid_k = {0, 1, 5, 10, 20};
    std::vector<std::string> baselines;  // majority | bow | tfidf | embedding
    std::vector<std::string> analyses = {"confidence", "length", "nextday", "warmstart"};
    std::string cache_path;  // embedding cache JSONL; empty = no persistence
};

// Parses "key = value" lines; '#' starts a comment, blank lines are
// skipped, lists are comma-separated. Unknown keys throw
// std::invalid_argument naming the key and line.
RunConfig load_run_config(const std::string& path);

// The reproducible description written to <out>/run-config.txt.
std::string describe_run(const RunConfig& config, const std::string& command,
                         const std::string& code_version);

// "none" | "current_day" | "last_day" (case-insensitive, underscores
// optional); used for grid cell directory names.
HistoryMode parse_history_token(const std::string& token);
std::string history_token(HistoryMode mode);

ProviderConfig provider_config(const RunConfig& config);

// Provider with the configured cache layered on top when cache_path or
// cache is set; cache_out receives the caching wrapper for call counting
// (may be null).
std::shared_ptr<EmbeddingProvider> make_run_provider(
    const RunConfig& config, std::shared_ptr<CachingEmbedder>* cache_out = nullptr);

// Mock source per config.mock, or the real chat endpoint. labels may be
// null when no mock needs ground truth; throws std::invalid_argument when a
// label-dependent mock is requested without labels.
std::shared_ptr<ResponseSource> make_run_source(
    const RunConfig& config, const std::map<std::string, LabelSet>* labels);

}  // namespace diarylens::cli
