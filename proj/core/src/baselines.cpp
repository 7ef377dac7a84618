#include "diarylens/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

#include "diarylens/util.hpp"

namespace diarylens {

namespace {

using nlohmann::json;

double stable_sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, int min_df) {
    if (min_df < 1) throw std::invalid_argument("vocabulary: min_df must be >= 1");
    std::map<std::string, int> df_map;
    for (const auto& text : texts) {
        std::set<std::string> seen;
        for (const auto& tok : tokenize(text)) seen.insert(tok);
        for (const auto& tok : seen) ++df_map[tok];
    }

    std::vector<std::pair<std::string, int>> kept;
    for (const auto& [tok, df] : df_map) {
        if (df >= min_df) kept.emplace_back(tok, df);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary vocab;
    vocab.n_docs = static_cast<int>(texts.size());
    vocab.min_df = min_df;
    for (const auto& [tok, df] : kept) {
        vocab.index[tok] = static_cast<int>(vocab.tokens.size());
        vocab.tokens.push_back(tok);
        vocab.df.push_back(df);
    }
    return vocab;
}

SparseRow bow_features(const Vocabulary& vocab, const std::string& text) {
    std::map<int, int> counts;
    for (const auto& tok : tokenize(text)) {
        const auto it = vocab.index.find(tok);
        if (it != vocab.index.end()) ++counts[it->second];
    }
    SparseRow row;
    row.reserve(counts.size());
    for (const auto& [idx, count] : counts) row.emplace_back(idx, count);
    return row;
}

double idf(const Vocabulary& vocab, int token_index) {
    if (token_index < 0 || token_index >= vocab.size()) {
        throw std::out_of_range("idf: token index out of range");
    }
    return std::log((1.0 + vocab.n_docs) / (1.0 + vocab.df[token_index])) + 1.0;
}

SparseRow tfidf_features(const Vocabulary& vocab, const std::string& text) {
    SparseRow row = bow_features(vocab, text);
    double norm_sq = 0;
    for (auto& [idx, value] : row) {
        value *= idf(vocab, idx);
        norm_sq += value * value;
    }
    if (norm_sq > 0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& [idx, value] : row) value *= inv;
    }
    return row;
}

LinearModel train_linear(const std::vector<SparseRow>& rows,
                         const std::vector<bool>& labels, int n_features,
                         const LinearHyper& hyper) {
    if (rows.size() != labels.size()) {
        throw std::invalid_argument("train_linear: rows/labels size mismatch");
    }
    if (rows.empty()) throw std::invalid_argument("train_linear: no training data");
    if (n_features < 0) throw std::invalid_argument("train_linear: negative feature count");

    const auto n = static_cast<double>(rows.size());
    const auto positives =
        static_cast<double>(std::count(labels.begin(), labels.end(), true));
    const double negatives = n - positives;

    LinearModel model;
    model.weights.assign(static_cast<std::size_t>(n_features), 0.0);
    if (positives == 0 || negatives == 0) {
        model.degenerate = true;
        model.prior = positives > 0 ? 1.0 : 0.0;
        model.warning = "single-class training data; constant-prior model";
        return model;
    }

    // inverse-frequency class weights keep the loss balanced
    const double w_pos = n / (2.0 * positives);
    const double w_neg = n / (2.0 * negatives);

    std::vector<double> grad(static_cast<std::size_t>(n_features), 0.0);
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double z = model.bias;
            for (const auto& [idx, value] : rows[i]) z += model.weights[idx] * value;
            const double y = labels[i] ? 1.0 : 0.0;
            const double g = (labels[i] ? w_pos : w_neg) * (stable_sigmoid(z) - y);
            grad_bias += g;
            for (const auto& [idx, value] : rows[i]) grad[idx] += g * value;
        }
        for (std::size_t j = 0; j < model.weights.size(); ++j) {
            model.weights[j] -=
                hyper.learning_rate * (grad[j] / n + hyper.l2 * model.weights[j]);
        }
        model.bias -= hyper.learning_rate * grad_bias / n;
    }
    return model;
}

double predict_linear(const LinearModel& model, const SparseRow& row) {
    if (model.degenerate) return model.prior;
    double z = model.bias;
    for (const auto& [idx, value] : row) {
        if (idx < 0 || idx >= static_cast<int>(model.weights.size())) {
            throw std::out_of_range("predict_linear: feature index out of range");
        }
        z += model.weights[idx] * value;
    }
    return stable_sigmoid(z);
}

std::string text_model_to_json(const TextModelBundle& bundle) {
    json models = json::object();
    for (const auto& [c, model] : bundle.models) {
        models[c.key()] = json{{"weights", model.weights},
                               {"bias", model.bias},
                               {"degenerate", model.degenerate},
                               {"prior", model.prior},
                               {"warning", model.warning}};
    }
    return json{{"version", bundle.version},
                {"use_tfidf", bundle.use_tfidf},
                {"hyper",
                 json{{"learning_rate", bundle.hyper.learning_rate},
                      {"epochs", bundle.hyper.epochs},
                      {"l2", bundle.hyper.l2},
                      {"seed", bundle.hyper.seed}}},
                {"vocab",
                 json{{"min_df", bundle.vocab.min_df},
                      {"n_docs", bundle.vocab.n_docs},
                      {"tokens", bundle.vocab.tokens},
                      {"df", bundle.vocab.df}}},
                {"models", models}}
        .dump(2);
}

TextModelBundle text_model_from_json(const std::string& text) {
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::invalid_argument("model dump is not a JSON object");
    }
    try {
        TextModelBundle bundle;
        bundle.version = j.at("version").get<int>();
        if (bundle.version != 1) {
            throw std::invalid_argument("unsupported model dump version " +
                                        std::to_string(bundle.version));
        }
        bundle.use_tfidf = j.at("use_tfidf").get<bool>();
        const auto& hyper = j.at("hyper");
        bundle.hyper.learning_rate = hyper.at("learning_rate").get<double>();
        bundle.hyper.epochs = hyper.at("epochs").get<int>();
        bundle.hyper.l2 = hyper.at("l2").get<double>();
        bundle.hyper.seed = hyper.at("seed").get<std::uint64_t>();
        const auto& vocab = j.at("vocab");
        bundle.vocab.min_df = vocab.at("min_df").get<int>();
        bundle.vocab.n_docs = vocab.at("n_docs").get<int>();
        bundle.vocab.tokens = vocab.at("tokens").get<std::vector<std::string>>();
        bundle.vocab.df = vocab.at("df").get<std::vector<int>>();
        if (bundle.vocab.tokens.size() != bundle.vocab.df.size()) {
            throw std::invalid_argument("model dump: tokens/df length mismatch");
        }
        for (int i = 0; i < bundle.vocab.size(); ++i) {
            bundle.vocab.index[bundle.vocab.tokens[i]] = i;
        }
        for (const auto& [key, value] : j.at("models").items()) {
            const auto c = ConstructId::from_key(key);
            if (!c) continue;
            LinearModel model;
            model.weights = value.at("weights").get<std::vector<double>>();
            model.bias = value.at("bias").get<double>();
            model.degenerate = value.at("degenerate").get<bool>();
            model.prior = value.at("prior").get<double>();
            model.warning = value.at("warning").get<std::string>();
            bundle.models[*c] = std::move(model);
        }
        return bundle;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("model dump malformed: ") + e.what());
    }
}

namespace {

// training records in deterministic order: participants ascending, then the
// per-participant timestamp order the corpus maintains
std::vector<const DiaryRecord*> train_records(const TrainContext& ctx) {
    std::vector<const DiaryRecord*> records;
    for (const auto& pid : ctx.train_participants) {
        const auto& recs = ctx.corpus.records_of(pid);
        records.insert(records.end(), recs.begin(), recs.end());
    }
    return records;
}

class MajorityPredictor final : public Predictor {
public:
    explicit MajorityPredictor(const TrainContext& ctx) {
        const auto records = train_records(ctx);
        for (const auto& c : ctx.corpus.constructs()) {
            int trues = 0, total = 0;
            for (const DiaryRecord* r : records) {
                const auto label_it = ctx.labels.find(r->record_id);
                if (label_it == ctx.labels.end()) continue;
                const auto it = label_it->second.labels.find(c);
                if (it == label_it->second.labels.end()) continue;
                ++total;
                if (it->second) ++trues;
            }
            if (total == 0) {
                throw std::invalid_argument(
                    "majority baseline: no training labels for construct " + c.key());
            }
            constant_[c] = trues * 2 > total ? 1.0 : 0.0;  // tie predicts False
        }
    }

    std::map<ConstructId, double> predict(const DiaryRecord&) override {
        return constant_;
    }
    std::string name() const override { return "majority"; }

private:
    std::map<ConstructId, double> constant_;
};

class TextPredictor final : public Predictor {
public:
    explicit TextPredictor(TextModelBundle bundle) : bundle_(std::move(bundle)) {}

    std::map<ConstructId, double> predict(const DiaryRecord& query) override {
        const SparseRow row = bundle_.use_tfidf
                                  ? tfidf_features(bundle_.vocab, query.text)
                                  : bow_features(bundle_.vocab, query.text);
        std::map<ConstructId, double> out;
        for (const auto& [c, model] : bundle_.models) {
            out[c] = predict_linear(model, row);
        }
        return out;
    }
    std::string name() const override {
        return bundle_.use_tfidf ? "tfidf_logistic" : "bow_logistic";
    }

private:
    TextModelBundle bundle_;
};

SparseRow dense_to_sparse(const Vector& v) {
    SparseRow row;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0.0) row.emplace_back(static_cast<int>(i), v[i]);
    }
    return row;
}

class EmbeddingPredictor final : public Predictor {
public:
    EmbeddingPredictor(const TrainContext& ctx,
                       std::shared_ptr<EmbeddingProvider> provider, LinearHyper hyper)
        : provider_(std::move(provider)) {
        hyper.seed = ctx.seed;
        const auto records = train_records(ctx);
        std::vector<SparseRow> features;
        features.reserve(records.size());
        for (const DiaryRecord* r : records) {
            features.push_back(dense_to_sparse(provider_->embed(r->text)));
        }
        for (const auto& c : ctx.corpus.constructs()) {
            std::vector<SparseRow> rows;
            std::vector<bool> labels;
            for (std::size_t i = 0; i < records.size(); ++i) {
                const auto label_it = ctx.labels.find(records[i]->record_id);
                if (label_it == ctx.labels.end()) continue;
                const auto it = label_it->second.labels.find(c);
                if (it == label_it->second.labels.end()) continue;
                rows.push_back(features[i]);
                labels.push_back(it->second);
            }
            if (rows.empty()) continue;
            models_[c] = train_linear(rows, labels, provider_->dim(), hyper);
        }
    }

    std::map<ConstructId, double> predict(const DiaryRecord& query) override {
        const SparseRow row = dense_to_sparse(provider_->embed(query.text));
        std::map<ConstructId, double> out;
        for (const auto& [c, model] : models_) out[c] = predict_linear(model, row);
        return out;
    }
    std::string name() const override { return "embedding_logistic"; }

private:
    std::shared_ptr<EmbeddingProvider> provider_;
    std::map<ConstructId, LinearModel> models_;
};

}  // namespace

TextModelBundle train_text_models(const TrainContext& ctx, bool use_tfidf,
                                  LinearHyper hyper) {
    hyper.seed = ctx.seed;
    const auto records = train_records(ctx);
    std::vector<std::string> texts;
    texts.reserve(records.size());
    for (const DiaryRecord* r : records) texts.push_back(r->text);

    TextModelBundle bundle;
    bundle.use_tfidf = use_tfidf;
    bundle.hyper = hyper;
    bundle.vocab = Vocabulary::build(texts);

    std::vector<SparseRow> features;
    features.reserve(records.size());
    for (const DiaryRecord* r : records) {
        features.push_back(use_tfidf ? tfidf_features(bundle.vocab, r->text)
                                     : bow_features(bundle.vocab, r->text));
    }
    for (const auto& c : ctx.corpus.constructs()) {
        std::vector<SparseRow> rows;
        std::vector<bool> labels;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto label_it = ctx.labels.find(records[i]->record_id);
            if (label_it == ctx.labels.end()) continue;
            const auto it = label_it->second.labels.find(c);
            if (it == label_it->second.labels.end()) continue;
            rows.push_back(features[i]);
            labels.push_back(it->second);
        }
        if (rows.empty()) continue;  // construct never labeled in training
        bundle.models[c] = train_linear(rows, labels, bundle.vocab.size(), hyper);
    }
    return bundle;
}

PredictorFactory make_majority_factory() {
    return [](const TrainContext& ctx) -> std::unique_ptr<Predictor> {
        return std::make_unique<MajorityPredictor>(ctx);
    };
}

PredictorFactory make_bow_factory(LinearHyper hyper) {
    return [hyper](const TrainContext& ctx) -> std::unique_ptr<Predictor> {
        return std::make_unique<TextPredictor>(train_text_models(ctx, false, hyper));
    };
}

PredictorFactory make_tfidf_factory(LinearHyper hyper) {
    return [hyper](const TrainContext& ctx) -> std::unique_ptr<Predictor> {
        return std::make_unique<TextPredictor>(train_text_models(ctx, true, hyper));
    };
}

PredictorFactory make_embedding_linear_factory(
    std::shared_ptr<EmbeddingProvider> provider, LinearHyper hyper) {
    if (!provider) {
        throw std::invalid_argument("embedding baseline: provider must not be null");
    }
    return [provider, hyper](const TrainContext& ctx) -> std::unique_ptr<Predictor> {
        return std::make_unique<EmbeddingPredictor>(ctx, provider, hyper);
    };
}

}  // namespace diarylens
