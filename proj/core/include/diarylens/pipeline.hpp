#pragma once
// Bridges the per-record pipeline into the evaluation predictor interface:
// per-fold retrieval indexes over training participants, plus the
// warm-start variant with per-participant own-history side pools.

#include <map>
#include <memory>
#include <set>
#include <string>

#include "diarylens/corpus.hpp"
#include "diarylens/embedding.hpp"
#include "diarylens/evaluation.hpp"
#include "diarylens/inference.hpp"
#include "diarylens/vectorstore.hpp"

namespace diarylens {

// Index over the labeled records of the given participants. Whitespace-only
// texts stay out of the pool unless include_empty_texts is set; records
// without a label set are skipped.
FlatIndex build_retrieval_index(const Corpus& corpus,
                                const std::map<std::string, LabelSet>& labels,
                                const std::set<std::string>& participants,
                                EmbeddingProvider& embedder,
                                bool include_empty_texts = false);

struct PipelineFactoryConfig {
    PromptConfig prompt;
    std::shared_ptr<EmbeddingProvider> embedder;
    std::shared_ptr<ResponseSource> source;
    std::shared_ptr<ProvenanceLog> provenance;  // optional
    bool include_empty_texts = false;
};

// Cross-validation flavor: each fold's predictor retrieves from the
// training participants only and always excludes the query writer.
PredictorFactory make_pipeline_factory(PipelineFactoryConfig config);

// Warm-start flavor: one shared index over the whole corpus, filtered to
// peers at query time; own_allowed record ids become per-participant side
// pools merged into that participant's candidate set. The query record
// itself is always excluded.
WarmPredictorFactory make_warm_pipeline_factory(PipelineFactoryConfig config,
                                                const Corpus& corpus);

}  // namespace diarylens
