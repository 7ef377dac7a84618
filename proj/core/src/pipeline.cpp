#include "diarylens/pipeline.hpp"

#include <stdexcept>
#include <utility>

#include "diarylens/util.hpp"

namespace diarylens {

FlatIndex build_retrieval_index(const Corpus& corpus,
                                const std::map<std::string, LabelSet>& labels,
                                const std::set<std::string>& participants,
                                EmbeddingProvider& embedder,
                                bool include_empty_texts) {
    std::vector<IndexedEntry> entries;
    for (const auto& pid : participants) {
        const Participant* traits = corpus.participant(pid);
        if (traits == nullptr) {
            throw std::invalid_argument("build_retrieval_index: unknown participant " + pid);
        }
        for (const DiaryRecord* r : corpus.records_of(pid)) {
            const auto label_it = labels.find(r->record_id);
            if (label_it == labels.end()) continue;
            if (!include_empty_texts && word_count(r->text) == 0) continue;
            IndexedEntry entry;
            entry.entry_id = r->record_id;
            entry.vector = embedder.embed(r->text);
            entry.participant_id = pid;
            entry.labels = label_it->second.labels;
            entry.continuous = label_it->second.continuous;
            entry.traits = *traits;
            entry.text = r->text;
            entries.push_back(std::move(entry));
        }
    }
    return FlatIndex::build(std::move(entries));
}

namespace {

void check_config(const PipelineFactoryConfig& config) {
    if (!config.embedder) throw std::invalid_argument("pipeline: embedder must not be null");
    if (!config.source) throw std::invalid_argument("pipeline: response source must not be null");
}

class PipelinePredictor final : public Predictor {
public:
    PipelinePredictor(PipelineFactoryConfig config, const Corpus& corpus,
                      std::shared_ptr<const FlatIndex> index,
                      std::shared_ptr<const std::map<std::string, FlatIndex>> extra_pools)
        : config_(std::move(config)),
          corpus_(corpus),
          index_(std::move(index)),
          extra_pools_(std::move(extra_pools)) {}

    std::map<ConstructId, double> predict(const DiaryRecord& query) override {
        PipelineDeps deps;
        deps.index = index_.get();
        deps.embedder = config_.embedder.get();
        deps.corpus = &corpus_;
        deps.source = config_.source.get();
        deps.prompt_config = config_.prompt;
        deps.extra_pools = extra_pools_ ? extra_pools_.get() : nullptr;

        RetrievalFilter filter;
        filter.excluded_participants.insert(query.participant_id);
        filter.exclude_entry = query.record_id;

        const PredictionOutcome outcome = predict_entry(deps, query, filter);
        if (config_.provenance) {
            config_.provenance->append(make_provenance(outcome, query.record_id));
        }
        return outcome.predictions.probabilities;
    }

    std::string name() const override {
        return "pipeline[" + config_.source->model_name() + "]";
    }

private:
    PipelineFactoryConfig config_;
    const Corpus& corpus_;
    std::shared_ptr<const FlatIndex> index_;
    std::shared_ptr<const std::map<std::string, FlatIndex>> extra_pools_;
};

}  // namespace

PredictorFactory make_pipeline_factory(PipelineFactoryConfig config) {
    check_config(config);
    return [config](const TrainContext& ctx) -> std::unique_ptr<Predictor> {
        auto index = std::make_shared<FlatIndex>(build_retrieval_index(
            ctx.corpus, ctx.labels, ctx.train_participants, *config.embedder,
            config.include_empty_texts));
        return std::make_unique<PipelinePredictor>(config, ctx.corpus, std::move(index),
                                                   nullptr);
    };
}

WarmPredictorFactory make_warm_pipeline_factory(PipelineFactoryConfig config,
                                                const Corpus& corpus) {
    check_config(config);
    const auto labels =
        std::make_shared<std::map<std::string, LabelSet>>(derive_binary_labels(corpus));

    std::set<std::string> everyone;
    for (const auto& p : corpus.participants()) everyone.insert(p.participant_id);
    // peer filtering happens per query, so one shared index serves them all
    const auto shared_index = std::make_shared<FlatIndex>(build_retrieval_index(
        corpus, *labels, everyone, *config.embedder, config.include_empty_texts));

    return [config, &corpus, labels, shared_index](
               const std::map<std::string, std::set<std::string>>& own_allowed)
               -> std::unique_ptr<Predictor> {
        std::shared_ptr<std::map<std::string, FlatIndex>> pools;
        if (!own_allowed.empty()) {
            pools = std::make_shared<std::map<std::string, FlatIndex>>();
            for (const auto& [pid, record_ids] : own_allowed) {
                std::vector<IndexedEntry> entries;
                for (const IndexedEntry& entry : shared_index->entries()) {
                    if (entry.participant_id == pid && record_ids.count(entry.entry_id)) {
                        entries.push_back(entry);
                    }
                }
                if (!entries.empty()) {
                    pools->emplace(pid, FlatIndex::build(std::move(entries)));
                }
            }
        }
        return std::make_unique<PipelinePredictor>(config, corpus, shared_index,
                                                   std::move(pools));
    };
}

}  // namespace diarylens
