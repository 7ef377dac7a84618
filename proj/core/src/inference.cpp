#include "diarylens/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "diarylens/synth.hpp"
#include "diarylens/util.hpp"

namespace diarylens {

namespace {

using nlohmann::json;

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace

HttpChatTransport::HttpChatTransport(LlmConfig config) : config_(std::move(config)) {
    if (config_.endpoint_url.empty()) {
        throw TransportError("chat transport: endpoint_url not set", false);
    }
    try {
        split_url(config_.endpoint_url);
    } catch (const std::invalid_argument& e) {
        throw TransportError(e.what(), false);
    }
}

std::string HttpChatTransport::send(const ChatRequest& request) {
    const auto [origin, path] = split_url(config_.endpoint_url);
    httplib::Client client(origin);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);

    httplib::Headers headers;
    if (!config_.api_key_env_var.empty()) {
        const char* key = std::getenv(config_.api_key_env_var.c_str());
        if (!key || !*key) {
            throw TransportError("environment variable " + config_.api_key_env_var +
                                     " is not set",
                                 false, request.correlation_id);
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const std::string body = json{{"model", request.model},
                                  {"temperature", request.temperature},
                                  {"max_tokens", request.max_tokens},
                                  {"messages",
                                   json::array({json{{"role", "system"},
                                                     {"content", request.system_text}},
                                                json{{"role", "user"},
                                                     {"content", request.user_text}}})}}
                                 .dump();

    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
        throw TransportError("connection error: " + httplib::to_string(res.error()), true,
                             request.correlation_id);
    }
    if (res->status == 429 || res->status >= 500) {
        throw TransportError("status " + std::to_string(res->status), true,
                             request.correlation_id);
    }
    if (res->status != 200) {
        throw TransportError("status " + std::to_string(res->status), false,
                             request.correlation_id);
    }
    const json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty() || !reply["choices"][0].contains("message") ||
        !reply["choices"][0]["message"].contains("content") ||
        !reply["choices"][0]["message"]["content"].is_string()) {
        throw TransportError("chat response malformed", false, request.correlation_id);
    }
    return reply["choices"][0]["message"]["content"].get<std::string>();
}

ChatClient::ChatClient(LlmConfig config, std::shared_ptr<ChatTransport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      gate_slots_(std::max(1, config_.max_in_flight)) {}

Completion ChatClient::complete(const std::string& system_text, const std::string& user_text) {
    const std::string cid = "req-" + std::to_string(next_request_.fetch_add(1) + 1);
    {
        std::unique_lock lock(gate_mu_);
        gate_cv_.wait(lock, [this] { return gate_slots_ > 0; });
        --gate_slots_;
    }
    struct SlotRelease {
        ChatClient* client;
        ~SlotRelease() {
            {
                std::lock_guard lock(client->gate_mu_);
                ++client->gate_slots_;
            }
            client->gate_cv_.notify_one();
        }
    } release{this};

    ChatRequest request{config_.model_name, config_.temperature, config_.max_tokens,
                        system_text,        user_text,           cid};
    const auto start = std::chrono::steady_clock::now();
    int attempt = 0;
    for (;;) {
        try {
            Completion done;
            done.text = transport_->send(request);
            done.retries = attempt;
            done.latency_ms = elapsed_ms(start);
            done.correlation_id = cid;
            return done;
        } catch (const TransportError& e) {
            if (!e.retryable() || attempt >= config_.max_retries) {
                throw TransportError(std::string(e.what()) + " [" + cid + "]", e.retryable(),
                                     cid);
            }
            if (config_.backoff_initial_ms > 0) {
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(config_.backoff_initial_ms << attempt));
            }
            ++attempt;
        }
    }
}

std::string parse_error_name(ParseError::Kind kind) {
    switch (kind) {
        case ParseError::Kind::MissingTags: return "MissingTags";
        case ParseError::Kind::MalformedJson: return "MalformedJson";
        case ParseError::Kind::MissingKey: return "MissingKey";
        case ParseError::Kind::OutOfRange: return "OutOfRange";
    }
    return "Unknown";
}

ParseResult parse_predictions(const std::string& raw,
                              const std::vector<ConstructId>& constructs) {
    constexpr std::string_view open_tag = "<PREDICTIONS>";
    constexpr std::string_view close_tag = "</PREDICTIONS>";

    // first tagged span whose body parses as a json object; a dangling open
    // tag ahead of the real span is skipped rather than poisoning it
    json payload;
    bool saw_span = false, have_payload = false;
    for (std::size_t at = raw.find(open_tag); at != std::string::npos;
         at = raw.find(open_tag, at + 1)) {
        const auto close = raw.find(close_tag, at + open_tag.size());
        if (close == std::string::npos) continue;
        saw_span = true;
        const auto begin = at + open_tag.size();
        json candidate = json::parse(raw.substr(begin, close - begin), nullptr, false);
        if (!candidate.is_discarded() && candidate.is_object()) {
            payload = std::move(candidate);
            have_payload = true;
            break;
        }
    }
    if (!saw_span) {
        return ParseError{ParseError::Kind::MissingTags, "", 0,
                          "no <PREDICTIONS></PREDICTIONS> span found"};
    }
    if (!have_payload) {
        return ParseError{ParseError::Kind::MalformedJson, "", 0,
                          "tagged span is not a JSON object"};
    }

    PredictionSet out;
    out.raw_response = raw;
    std::set<std::string> binary_keys;
    std::map<std::string, ConstructId> score_keys;
    for (const auto& c : constructs) {
        binary_keys.insert(c.key());
        if (!c.score_key().empty()) score_keys.emplace(c.score_key(), c);
    }

    for (const auto& c : constructs) {
        const auto it = payload.find(c.key());
        if (it == payload.end()) {
            return ParseError{ParseError::Kind::MissingKey, c.key(), 0,
                              "key '" + c.key() + "' absent from payload"};
        }
        if (!it->is_number()) {
            return ParseError{ParseError::Kind::MalformedJson, c.key(), 0,
                              "value for '" + c.key() + "' is not a number"};
        }
        const double p = it->get<double>();
        if (!(p >= 0.0 && p <= 1.0)) {
            return ParseError{ParseError::Kind::OutOfRange, c.key(), p,
                              "probability for '" + c.key() + "' outside [0,1]"};
        }
        out.probabilities[c] = p;
    }

    for (const auto& [key, value] : payload.items()) {
        if (binary_keys.count(key)) continue;
        const auto score_it = score_keys.find(key);
        if (score_it != score_keys.end()) {
            if (value.is_number()) {
                out.continuous[score_it->second] = value.get<double>();
            } else {
                out.warnings.push_back("non-numeric score for key '" + key + "' ignored");
            }
            continue;
        }
        out.warnings.push_back("ignored surplus key '" + key + "'");
    }
    return out;
}

BinaryPredictions binarize(const PredictionSet& pred) {
    BinaryPredictions out;
    for (const auto& [c, p] : pred.probabilities) {
        out.decisions[c] = p > 0.5;
        out.confidence[c] = std::abs(p - 0.5);
    }
    return out;
}

ChatResponseSource::ChatResponseSource(std::shared_ptr<ChatClient> client)
    : client_(std::move(client)) {}

SourceReply ChatResponseSource::respond(const PromptContext& context) {
    std::string user_text = context.bundle.rendered;
    if (!context.extra_instruction.empty()) {
        user_text += "\n" + context.extra_instruction + "\n";
    }
    const Completion done = client_->complete(kSystemText, user_text);
    return SourceReply{done.text, done.latency_ms, done.retries};
}

std::string ChatResponseSource::model_name() const { return client_->config().model_name; }

std::string wrap_predictions_json(const std::map<ConstructId, double>& probabilities) {
    json obj = json::object();
    for (const auto& [c, p] : probabilities) obj[c.key()] = p;
    return "<PREDICTIONS>" + obj.dump() + "</PREDICTIONS>";
}

SourceReply MajorityEchoSource::respond(const PromptContext& context) {
    std::map<ConstructId, double> probabilities;
    for (const auto& c : context.constructs) {
        int n = 0, truthy = 0;
        for (const auto& hit : context.retrieved) {
            const auto it = hit.entry->labels.find(c);
            if (it == hit.entry->labels.end()) continue;
            ++n;
            if (it->second) ++truthy;
        }
        probabilities[c] = n == 0 ? 0.5 : static_cast<double>(truthy) / n;
    }
    return SourceReply{wrap_predictions_json(probabilities)};
}

SourceReply KeywordOracleSource::respond(const PromptContext& context) {
    std::map<ConstructId, double> probabilities;
    for (const auto& c : context.constructs) {
        const auto state = planted_state(c, context.query.text);
        probabilities[c] = !state ? 0.5 : (*state ? 0.95 : 0.05);
    }
    return SourceReply{wrap_predictions_json(probabilities)};
}

FixedSource::FixedSource(double probability) : probability_(probability) {
    if (!(probability >= 0.0 && probability <= 1.0)) {
        throw std::invalid_argument("fixed source probability outside [0,1]");
    }
}

SourceReply FixedSource::respond(const PromptContext& context) {
    std::map<ConstructId, double> probabilities;
    for (const auto& c : context.constructs) probabilities[c] = probability_;
    return SourceReply{wrap_predictions_json(probabilities)};
}

CalibratedSource::CalibratedSource(const std::map<std::string, LabelSet>* labels,
                                   std::uint64_t seed)
    : labels_(labels), seed_(seed) {
    if (!labels_) throw std::invalid_argument("calibrated source needs ground-truth labels");
}

SourceReply CalibratedSource::respond(const PromptContext& context) {
    std::map<ConstructId, double> probabilities;
    const auto label_it = labels_->find(context.query.record_id);
    for (const auto& c : context.constructs) {
        std::optional<bool> label;
        if (label_it != labels_->end()) {
            const auto it = label_it->second.labels.find(c);
            if (it != label_it->second.labels.end()) label = it->second;
        }
        if (!label) {
            probabilities[c] = 0.5;
            continue;
        }
        Rng rng(fnv1a(c.key(), fnv1a(context.query.record_id, fnv1a_u64(seed_))));
        const double u = rng.uniform();
        const bool correct = rng.bernoulli(std::max(u, 1.0 - u));
        const bool decision_of_u = u > 0.5;
        const bool keep_orientation = (decision_of_u == *label) == correct;
        probabilities[c] = keep_orientation ? u : 1.0 - u;
    }
    return SourceReply{wrap_predictions_json(probabilities)};
}

ScriptedSource::ScriptedSource(std::vector<std::string> replies)
    : replies_(std::move(replies)) {
    if (replies_.empty()) throw std::invalid_argument("scripted source needs >= 1 reply");
}

SourceReply ScriptedSource::respond(const PromptContext& context) {
    (void)context;
    const auto idx = static_cast<std::size_t>(calls_.fetch_add(1));
    return SourceReply{replies_[std::min(idx, replies_.size() - 1)]};
}

std::unique_ptr<ResponseSource> make_mock_source(const std::string& name,
                                                 const std::map<std::string, LabelSet>* labels,
                                                 std::uint64_t seed) {
    if (name == "majority_echo") return std::make_unique<MajorityEchoSource>();
    if (name == "keyword_oracle") return std::make_unique<KeywordOracleSource>();
    if (name == "calibrated") return std::make_unique<CalibratedSource>(labels, seed);
    if (name.rfind("fixed:", 0) == 0) {
        return std::make_unique<FixedSource>(std::stod(name.substr(6)));
    }
    throw std::invalid_argument("unknown mock source '" + name + "'");
}

PredictionOutcome predict_entry(const PipelineDeps& deps, const DiaryRecord& query,
                                const RetrievalFilter& filter) {
    if (!deps.index || !deps.embedder || !deps.corpus || !deps.source) {
        throw std::invalid_argument("predict_entry: incomplete pipeline deps");
    }
    const PromptConfig& cfg = deps.prompt_config;
    PredictionOutcome out;

    if (cfg.k_examples > 0) {
        Vector query_vec;
        try {
            query_vec = deps.embedder->embed(query.text);
        } catch (const EmbeddingError& e) {
            throw PipelineError("embed", e.what());
        }
        try {
            auto hits = deps.index->top_k(query_vec, cfg.k_examples, filter);
            if (deps.extra_pools) {
                const auto pool = deps.extra_pools->find(query.participant_id);
                if (pool != deps.extra_pools->end() && !pool->second.empty()) {
                    RetrievalFilter own;
                    own.exclude_entry = query.record_id;
                    hits = FlatIndex::merge_hits(
                        {hits, pool->second.top_k(query_vec, cfg.k_examples, own)},
                        cfg.k_examples);
                }
            }
            out.retrieved = std::move(hits);
        } catch (const IndexError& e) {
            throw PipelineError("retrieve", e.what());
        }
    }

    const Participant* traits = deps.corpus->participant(query.participant_id);
    if (!traits) {
        throw PipelineError("prompt", "unknown participant '" + query.participant_id + "'");
    }
    const auto history = select_history(*deps.corpus, query.participant_id, query.timestamp,
                                        cfg.history_mode, query.record_id);
    try {
        out.bundle = build_prompt(cfg, query, *traits, history, out.retrieved);
    } catch (const std::invalid_argument& e) {
        throw PipelineError("prompt", e.what());
    }
    out.prompt_hash = hex64(fnv1a(out.bundle.rendered));

    SourceReply reply;
    try {
        reply = deps.source->respond(
            PromptContext{out.bundle, query, out.retrieved, cfg.constructs, 0, {}});
    } catch (const TransportError& e) {
        throw PipelineError("complete", e.what());
    }
    double total_latency = reply.latency_ms;

    ParseResult parsed = parse_predictions(reply.text, cfg.constructs);
    if (const auto* err = std::get_if<ParseError>(&parsed)) {
        const bool repairable = err->kind == ParseError::Kind::MissingTags ||
                                err->kind == ParseError::Kind::MalformedJson;
        if (repairable) {
            out.repair_attempts = 1;
            try {
                reply = deps.source->respond(PromptContext{
                    out.bundle, query, out.retrieved, cfg.constructs, 1,
                    "Reminder: respond with only the JSON object wrapped in "
                    "<PREDICTIONS></PREDICTIONS> tags."});
            } catch (const TransportError& e) {
                throw PipelineError("complete", e.what());
            }
            total_latency += reply.latency_ms;
            parsed = parse_predictions(reply.text, cfg.constructs);
        }
    }
    if (const auto* err = std::get_if<ParseError>(&parsed)) {
        throw PipelineError("parse", parse_error_name(err->kind) + ": " + err->message);
    }

    out.predictions = std::get<PredictionSet>(std::move(parsed));
    out.predictions.model_name = deps.source->model_name();
    out.predictions.latency_ms = total_latency;
    out.binary = binarize(out.predictions);
    return out;
}

ProvenanceRecord make_provenance(const PredictionOutcome& outcome,
                                 const std::string& record_id) {
    ProvenanceRecord rec;
    rec.record_id = record_id;
    rec.prompt_hash = outcome.prompt_hash;
    for (const auto& hit : outcome.retrieved) rec.retrieved.emplace_back(hit.entry_id, hit.distance);
    rec.probabilities = outcome.predictions.probabilities;
    rec.decisions = outcome.binary.decisions;
    rec.model_name = outcome.predictions.model_name;
    rec.latency_ms = outcome.predictions.latency_ms;
    return rec;
}

std::string provenance_to_json(const ProvenanceRecord& record) {
    json retrieved = json::array();
    for (const auto& [id, dist] : record.retrieved) {
        retrieved.push_back(json{{"entry_id", id}, {"distance", dist}});
    }
    json probabilities = json::object(), decisions = json::object();
    for (const auto& [c, p] : record.probabilities) probabilities[c.key()] = p;
    for (const auto& [c, d] : record.decisions) decisions[c.key()] = d;
    return json{{"record_id", record.record_id},
                {"prompt_hash", record.prompt_hash},
                {"retrieved", retrieved},
                {"probabilities", probabilities},
                {"decisions", decisions},
                {"model_name", record.model_name},
                {"latency_ms", record.latency_ms}}
        .dump();
}

ProvenanceRecord provenance_from_json(const std::string& line) {
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::invalid_argument("provenance line is not a JSON object");
    }
    try {
        ProvenanceRecord rec;
        rec.record_id = j.at("record_id").get<std::string>();
        rec.prompt_hash = j.at("prompt_hash").get<std::string>();
        for (const auto& hit : j.at("retrieved")) {
            rec.retrieved.emplace_back(hit.at("entry_id").get<std::string>(),
                                       hit.at("distance").get<double>());
        }
        for (const auto& [key, value] : j.at("probabilities").items()) {
            if (auto c = ConstructId::from_key(key)) rec.probabilities[*c] = value.get<double>();
        }
        for (const auto& [key, value] : j.at("decisions").items()) {
            if (auto c = ConstructId::from_key(key)) rec.decisions[*c] = value.get<bool>();
        }
        rec.model_name = j.at("model_name").get<std::string>();
        rec.latency_ms = j.at("latency_ms").get<double>();
        return rec;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("provenance line malformed: ") + e.what());
    }
}

ProvenanceLog::ProvenanceLog(const std::string& path) : out_(path, std::ios::app) {
    if (!out_) throw std::runtime_error("cannot open provenance log '" + path + "'");
}

void ProvenanceLog::append(const ProvenanceRecord& record) {
    std::lock_guard lock(mu_);
    out_ << provenance_to_json(record) << '\n';
    out_.flush();
}

}  // namespace diarylens
