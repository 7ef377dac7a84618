// Microbenchmarks for the hot paths: exhaustive retrieval, hash embedding,
// prompt rendering and reply parsing. Run with --benchmark_filter=... to
// narrow; counters report entries scanned per second for retrieval.

#include <map>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "diarylens/corpus.hpp"
#include "diarylens/embedding.hpp"
#include "diarylens/inference.hpp"
#include "diarylens/prompting.hpp"
#include "diarylens/synth.hpp"
#include "diarylens/util.hpp"
#include "diarylens/vectorstore.hpp"

namespace {

using namespace diarylens;

std::vector<IndexedEntry> make_entries(int n, int dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<IndexedEntry> entries;
    entries.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        IndexedEntry e;
        e.entry_id = "e" + std::to_string(i);
        e.participant_id = "p" + std::to_string(i % 50);
        e.vector.resize(static_cast<std::size_t>(dim));
        for (auto& v : e.vector) v = rng.uniform() * 2.0 - 1.0;
        entries.push_back(std::move(e));
    }
    return entries;
}

const FlatIndex& shared_index() {
    static const FlatIndex index = FlatIndex::build(make_entries(10000, 256, 42));
    return index;
}

Vector random_query(int dim, std::uint64_t seed) {
    Rng rng(seed);
    Vector query(static_cast<std::size_t>(dim));
    for (auto& v : query) v = rng.uniform() * 2.0 - 1.0;
    return query;
}

void BM_FlatTopK(benchmark::State& state) {
    const auto& index = shared_index();
    const auto query = random_query(256, 7);
    const int k = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto hits = index.top_k(query, k);
        benchmark::DoNotOptimize(hits);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(index.size()));
}
BENCHMARK(BM_FlatTopK)->Arg(1)->Arg(5)->Arg(20);

void BM_FlatTopKFiltered(benchmark::State& state) {
    const auto& index = shared_index();
    const auto query = random_query(256, 7);
    RetrievalFilter filter;
    filter.excluded_participants.insert("p3");
    for (auto _ : state) {
        auto hits = index.top_k(query, 20, filter);
        benchmark::DoNotOptimize(hits);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(index.size()));
}
BENCHMARK(BM_FlatTopKFiltered);

void BM_HashEmbed(benchmark::State& state) {
    const std::string text =
        "today the clinic visit went better than expected and i felt calm "
        "walking home through the park with my sister before dinner";
    const int dim = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto embedding = hash_embed(text, dim, 1);
        benchmark::DoNotOptimize(embedding);
    }
}
BENCHMARK(BM_HashEmbed)->Arg(64)->Arg(256);

void BM_BuildPrompt(benchmark::State& state) {
    static const Corpus corpus =
        generate_synthetic_corpus({.n_participants = 6, .days = 7, .seed = 3});
    static const auto labels = derive_binary_labels(corpus);
    static const FlatIndex index = [] {
        std::vector<IndexedEntry> entries;
        for (const auto& r : corpus.records()) {
            IndexedEntry e;
            e.entry_id = r.record_id;
            e.vector = hash_embed(r.text, 64, 1).vector;
            e.participant_id = r.participant_id;
            if (const auto it = labels.find(r.record_id); it != labels.end()) {
                e.labels = it->second.labels;
                e.continuous = it->second.continuous;
            }
            e.traits = *corpus.participant(r.participant_id);
            e.text = r.text;
            entries.push_back(std::move(e));
        }
        return FlatIndex::build(std::move(entries));
    }();

    const DiaryRecord& query = corpus.records().back();
    const Participant& traits = *corpus.participant(query.participant_id);
    RetrievalFilter filter;
    filter.excluded_participants.insert(query.participant_id);
    const auto hits = index.top_k(hash_embed(query.text, 64, 1).vector, 5, filter);
    const auto history = select_history(corpus, query.participant_id, query.timestamp,
                                        HistoryMode::LastDay, query.record_id);
    PromptConfig config;
    config.history_mode = HistoryMode::LastDay;
    config.k_examples = 5;
    config.constructs = corpus.constructs();

    for (auto _ : state) {
        auto bundle = build_prompt(config, query, traits, history, hits);
        benchmark::DoNotOptimize(bundle);
    }
}
BENCHMARK(BM_BuildPrompt);

void BM_ParsePredictions(benchmark::State& state) {
    const auto constructs = core_constructs();
    std::map<ConstructId, double> probabilities;
    double p = 0.15;
    for (const auto& c : constructs) {
        probabilities[c] = p;
        p += 0.17;
    }
    const std::string raw = "Considering the entry against the writer's usual levels:\n" +
                            wrap_predictions_json(probabilities);
    for (auto _ : state) {
        auto result = parse_predictions(raw, constructs);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_ParsePredictions);

}  // namespace

BENCHMARK_MAIN();
