#pragma once
// Shared test scaffolding: independently coded metric oracles, deterministic
// fixture corpora and corpus transforms, instrumented transports and
// response sources, and small file utilities.

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "diarylens/corpus.hpp"
#include "diarylens/evaluation.hpp"
#include "diarylens/inference.hpp"
#include "diarylens/vectorstore.hpp"

namespace diarylens::testing {

// Brute-force scan with the same per-entry accumulation order as the index,
// so distances must agree to the last bit.
std::vector<SearchHit> naive_top_k(const std::vector<IndexedEntry>& entries,
                                   const Vector& query, int k,
                                   const RetrievalFilter& filter = {});

// Sensitivity/specificity formulation, written independently of the library.
double brute_balanced_accuracy(const std::vector<bool>& decisions,
                               const std::vector<bool>& labels);

// O(n^2) positive-negative pair counting with ties worth half.
double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& labels);

// Two hand-built participants around a midnight boundary; stable input for
// the golden prompt fixtures. The query record is "pa-q" (2024-03-08 13:10),
// participant "p-alpha"; "p-beta" provides a five-entry retrieval pool.
Corpus fixture_corpus();

// Adds a twin participant per original whose records copy the original's
// texts, scores and timestamps (ids get a "t" prefix); every text then
// appears at least twice across participants.
Corpus with_twin_participants(const Corpus& base);

// Appends a second week per participant: each record of the participant's
// first seven calendar days is cloned seven days later with the same text
// and scores (ids get a "+w2" suffix).
Corpus with_duplicated_week(const Corpus& base);

// Memorizes the training labels by record id and answers unseen records
// with a deterministic pseudo-coin, so any train/test leakage shows up as
// above-chance accuracy.
PredictorFactory memorizing_probe_factory();

// Always answers with the given body after recording the call.
class CountingTransport : public ChatTransport {
public:
    explicit CountingTransport(std::string reply) : reply_(std::move(reply)) {}
    std::string send(const ChatRequest& request) override;
    int calls() const { return calls_; }
    ChatRequest last_request() const;

private:
    std::string reply_;
    std::atomic<int> calls_{0};
    mutable std::mutex mu_;
    ChatRequest last_;
};

// Fails the first fail_count sends with a retryable error, then succeeds.
class FlakyTransport : public ChatTransport {
public:
    FlakyTransport(int fail_count, std::string reply)
        : fail_count_(fail_count), reply_(std::move(reply)) {}
    std::string send(const ChatRequest& request) override;
    int calls() const { return calls_; }

private:
    int fail_count_;
    std::string reply_;
    std::atomic<int> calls_{0};
};

// Tracks the peak number of concurrent sends; each send blocks briefly so
// overlap actually happens.
class ConcurrencyProbeTransport : public ChatTransport {
public:
    explicit ConcurrencyProbeTransport(std::string reply) : reply_(std::move(reply)) {}
    std::string send(const ChatRequest& request) override;
    int peak() const { return peak_; }

private:
    std::string reply_;
    std::mutex mu_;
    int current_ = 0;
    int peak_ = 0;
};

// Delegates to another source, remembering which entry ids were retrieved
// for each query record.
class RecordingSource : public ResponseSource {
public:
    explicit RecordingSource(std::shared_ptr<ResponseSource> inner)
        : inner_(std::move(inner)) {}
    SourceReply respond(const PromptContext& context) override;
    std::string model_name() const override { return inner_->model_name(); }
    std::map<std::string, std::vector<std::string>> retrieved_ids() const;

private:
    std::shared_ptr<ResponseSource> inner_;
    mutable std::mutex mu_;
    std::map<std::string, std::vector<std::string>> retrieved_;
};

// Fresh directory under the system temp root; caller owns cleanup (or
// leaves it to the OS).
std::filesystem::path unique_temp_dir(const std::string& tag);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace diarylens::testing
