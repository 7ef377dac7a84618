#pragma once
// Chat-completion inference: transport with retry, backoff and a global
// in-flight bound; <PREDICTIONS> tagged-JSON parsing; 0.5-threshold
// binarization; deterministic mock response sources; and predict_entry, the
// per-record composition of embed -> retrieve -> prompt -> complete ->
// parse -> binarize with full provenance.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "diarylens/corpus.hpp"
#include "diarylens/embedding.hpp"
#include "diarylens/prompting.hpp"
#include "diarylens/vectorstore.hpp"

namespace diarylens {

struct LlmConfig {
    std::string endpoint_url;
    std::string model_name = "gpt-4o-mini";
    double temperature = 0.3;
    int max_tokens = 1000;
    int timeout_seconds = 60;
    int max_retries = 3;
    int max_in_flight = 4;
    std::string api_key_env_var = "DIARYLENS_API_KEY";
    int backoff_initial_ms = 200;  // doubles per retry; 0 disables sleeping
};

class TransportError : public std::runtime_error {
public:
    TransportError(std::string message, bool retryable, std::string correlation_id = {})
        : std::runtime_error(std::move(message)),
          retryable_(retryable),
          correlation_id_(std::move(correlation_id)) {}
    bool retryable() const { return retryable_; }
    const std::string& correlation_id() const { return correlation_id_; }

private:
    bool retryable_;
    std::string correlation_id_;
};

struct ChatRequest {
    std::string model;
    double temperature = 0.3;
    int max_tokens = 1000;
    std::string system_text;
    std::string user_text;
    std::string correlation_id;
};

// One delivery attempt; retry policy lives in ChatClient.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    virtual std::string send(const ChatRequest& request) = 0;  // assistant text
};

// POSTs the standard chat-completion payload {model, temperature,
// max_tokens, messages:[system,user]} and returns the assistant message.
// The API key comes from the configured environment variable at request
// time; only the variable's name ever appears in errors or logs.
class HttpChatTransport : public ChatTransport {
public:
    explicit HttpChatTransport(LlmConfig config);
    std::string send(const ChatRequest& request) override;

private:
    LlmConfig config_;
};

struct Completion {
    std::string text;
    int retries = 0;  // attempts beyond the first
    double latency_ms = 0;
    std::string correlation_id;
};

// Retry with exponential backoff on retryable transport errors, plus a
// process-wide cap of max_in_flight concurrent sends.
class ChatClient {
public:
    ChatClient(LlmConfig config, std::shared_ptr<ChatTransport> transport);
    Completion complete(const std::string& system_text, const std::string& user_text);
    const LlmConfig& config() const { return config_; }

private:
    LlmConfig config_;
    std::shared_ptr<ChatTransport> transport_;
    std::atomic<std::uint64_t> next_request_{0};
    std::mutex gate_mu_;
    std::condition_variable gate_cv_;
    int gate_slots_;
};

struct ParseError {
    enum class Kind { MissingTags, MalformedJson, MissingKey, OutOfRange };
    Kind kind = Kind::MissingTags;
    std::string key;    // MissingKey / OutOfRange
    double value = 0;   // OutOfRange
    std::string message;
};

std::string parse_error_name(ParseError::Kind kind);

struct PredictionSet {
    std::map<ConstructId, double> probabilities;  // every configured construct, in [0,1]
    std::map<ConstructId, double> continuous;     // raw score estimates when present
    std::vector<std::string> warnings;            // surplus keys and the like
    std::string raw_response;
    std::string model_name;
    double latency_ms = 0;
};

using ParseResult = std::variant<PredictionSet, ParseError>;

// Extracts the first well-formed <PREDICTIONS>...</PREDICTIONS> span, parses
// one JSON object and validates every configured construct key. Total over
// arbitrary bytes: always returns a value or a typed error, never throws.
// Continuous score keys are copied through unvalidated; unknown keys are
// ignored with a warning.
ParseResult parse_predictions(const std::string& raw,
                              const std::vector<ConstructId>& constructs);

struct BinaryPredictions {
    std::map<ConstructId, bool> decisions;    // p > 0.5; exactly 0.5 -> False
    std::map<ConstructId, double> confidence; // |p - 0.5|
};

BinaryPredictions binarize(const PredictionSet& pred);

// Everything a response source may inspect. Mocks read the structured
// fields (retrieved entries with labels, query text) rather than scraping
// the rendered prompt.
struct PromptContext {
    const PromptBundle& bundle;
    const DiaryRecord& query;
    const std::vector<SearchHit>& retrieved;
    const std::vector<ConstructId>& constructs;
    int attempt = 0;                // 0 first ask, 1 repair re-ask
    std::string extra_instruction;  // appended to the user message on repair
};

struct SourceReply {
    std::string text;
    double latency_ms = 0;
    int retries = 0;
};

class ResponseSource {
public:
    virtual ~ResponseSource() = default;
    virtual SourceReply respond(const PromptContext& context) = 0;
    virtual std::string model_name() const = 0;
};

// Real LLM behind the source interface.
class ChatResponseSource : public ResponseSource {
public:
    explicit ChatResponseSource(std::shared_ptr<ChatClient> client);
    SourceReply respond(const PromptContext& context) override;
    std::string model_name() const override;

private:
    std::shared_ptr<ChatClient> client_;
};

// Serializes probabilities as the tagged JSON a well-behaved model would
// emit; shared by all mock sources.
std::string wrap_predictions_json(const std::map<ConstructId, double>& probabilities);

// Emits the fraction of retrieved examples labeled True per construct, 0.5
// when nothing was retrieved (or nothing carries that label).
class MajorityEchoSource : public ResponseSource {
public:
    SourceReply respond(const PromptContext& context) override;
    std::string model_name() const override { return "mock-majority-echo"; }
};

// Reads the planted marker vocabulary of synthetic corpora from the query
// text: 0.95 for a high marker, 0.05 for low, 0.5 when no marker matches.
class KeywordOracleSource : public ResponseSource {
public:
    SourceReply respond(const PromptContext& context) override;
    std::string model_name() const override { return "mock-keyword-oracle"; }
};

class FixedSource : public ResponseSource {
public:
    explicit FixedSource(double probability);
    SourceReply respond(const PromptContext& context) override;
    std::string model_name() const override { return "mock-fixed"; }

private:
    double probability_;
};

// Emits probability p drawn uniformly per (record, construct) and is correct
// with probability max(p, 1-p) against the supplied ground truth; the
// confidence-triage analysis relies on exactly this calibration.
class CalibratedSource : public ResponseSource {
public:
    CalibratedSource(const std::map<std::string, LabelSet>* labels, std::uint64_t seed);
    SourceReply respond(const PromptContext& context) override;
    std::string model_name() const override { return "mock-calibrated"; }

private:
    const std::map<std::string, LabelSet>* labels_;
    std::uint64_t seed_;
};

// Replays a fixed list of raw replies (the last repeats when exhausted);
// exercises the parser and the repair retry.
class ScriptedSource : public ResponseSource {
public:
    explicit ScriptedSource(std::vector<std::string> replies);
    SourceReply respond(const PromptContext& context) override;
    std::string model_name() const override { return "mock-scripted"; }
    int calls() const { return calls_; }

private:
    std::vector<std::string> replies_;
    std::atomic<int> calls_{0};
};

// "majority_echo" | "keyword_oracle" | "calibrated" | "fixed:<p>"; labels
// may be null for sources that do not need ground truth.
std::unique_ptr<ResponseSource> make_mock_source(const std::string& name,
                                                 const std::map<std::string, LabelSet>* labels,
                                                 std::uint64_t seed);

class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& message)
        : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
    // "embed" | "retrieve" | "prompt" | "complete" | "parse"
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct PipelineDeps {
    const FlatIndex* index = nullptr;
    EmbeddingProvider* embedder = nullptr;
    const Corpus* corpus = nullptr;
    ResponseSource* source = nullptr;
    PromptConfig prompt_config;
    // Optional per-participant side pools merged into that participant's
    // candidate set (warm-start personalization).
    const std::map<std::string, FlatIndex>* extra_pools = nullptr;
};

struct PredictionOutcome {
    PredictionSet predictions;
    BinaryPredictions binary;
    PromptBundle bundle;
    std::vector<SearchHit> retrieved;
    std::string prompt_hash;  // FNV-1a of the rendered prompt, hex
    int repair_attempts = 0;
};

// Full per-record pipeline. One repair re-ask on MissingTags/MalformedJson;
// all other failures surface as PipelineError tagged with the stage.
PredictionOutcome predict_entry(const PipelineDeps& deps, const DiaryRecord& query,
                                const RetrievalFilter& filter);

struct ProvenanceRecord {
    std::string record_id;
    std::string prompt_hash;
    std::vector<std::pair<std::string, double>> retrieved;  // (entry_id, distance)
    std::map<ConstructId, double> probabilities;
    std::map<ConstructId, bool> decisions;
    std::string model_name;
    double latency_ms = 0;
};

ProvenanceRecord make_provenance(const PredictionOutcome& outcome, const std::string& record_id);
std::string provenance_to_json(const ProvenanceRecord& record);         // one JSONL line
ProvenanceRecord provenance_from_json(const std::string& line);         // throws on bad input

// Append-only JSONL sink, safe for concurrent appends.
class ProvenanceLog {
public:
    explicit ProvenanceLog(const std::string& path);
    void append(const ProvenanceRecord& record);

private:
    std::mutex mu_;
    std::ofstream out_;
};

}  // namespace diarylens
