#pragma once
// Classical reference predictors: per-construct majority vote and balanced
// logistic regression over bag-of-words, tf-idf or dense embedding features.
// Everything here trains from the training-fold participants only; the
// leakage test retrains with garbled test texts and expects identical model
// dumps.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "diarylens/constructs.hpp"
#include "diarylens/embedding.hpp"
#include "diarylens/evaluation.hpp"

namespace diarylens {

// Token list ordered by (document frequency desc, token asc) so indices are
// stable across runs. Tokens below min_df are dropped.
struct Vocabulary {
    std::vector<std::string> tokens;
    std::unordered_map<std::string, int> index;
    std::vector<int> df;  // parallel to tokens
    int n_docs = 0;
    int min_df = 2;

    static Vocabulary build(const std::vector<std::string>& texts, int min_df = 2);
    int size() const { return static_cast<int>(tokens.size()); }
};

// (feature index, value) pairs, indices strictly ascending.
using SparseRow = std::vector<std::pair<int, double>>;

// Raw token counts; out-of-vocabulary tokens are dropped.
SparseRow bow_features(const Vocabulary& vocab, const std::string& text);

// Smoothed idf; equals exactly 1 for a token present in every document.
double idf(const Vocabulary& vocab, int token_index);

// count * idf, then the row is L2-normalized (empty rows stay empty).
SparseRow tfidf_features(const Vocabulary& vocab, const std::string& text);

struct LinearHyper {
    double learning_rate = 0.5;
    int epochs = 300;
    double l2 = 1e-4;  // applied to weights, not the bias
    std::uint64_t seed = 0;
};

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    bool degenerate = false;  // single-class training data
    double prior = 0.5;       // constant output when degenerate
    std::string warning;
};

// Full-batch gradient descent on class-balanced logistic loss. Deterministic
// for a given hyper (zero init, fixed epoch count). Single-class labels give
// a degenerate constant-prior model with a warning; empty labels throw.
LinearModel train_linear(const std::vector<SparseRow>& rows,
                         const std::vector<bool>& labels, int n_features,
                         const LinearHyper& hyper = {});

double predict_linear(const LinearModel& model, const SparseRow& row);

// Versioned dump of one trained text-feature predictor: vocabulary, weights,
// hyperparameters and seed. Round-trips through text_model_from_json.
struct TextModelBundle {
    int version = 1;
    Vocabulary vocab;
    bool use_tfidf = false;
    LinearHyper hyper;
    std::map<ConstructId, LinearModel> models;
};

std::string text_model_to_json(const TextModelBundle& bundle);
TextModelBundle text_model_from_json(const std::string& text);

// Trains one linear model per construct of the corpus over the training
// participants' records; exposed separately so tests can compare dumps.
TextModelBundle train_text_models(const TrainContext& ctx, bool use_tfidf,
                                  LinearHyper hyper = {});

// Constant per-construct majority vote from the training labels; ties
// predict False. Throws if a construct has no training labels at all.
PredictorFactory make_majority_factory();

PredictorFactory make_bow_factory(LinearHyper hyper = {});
PredictorFactory make_tfidf_factory(LinearHyper hyper = {});

// Logistic regression over provider embeddings of the entry text.
PredictorFactory make_embedding_linear_factory(
    std::shared_ptr<EmbeddingProvider> provider, LinearHyper hyper = {});

}  // namespace diarylens
