// Command-line front end. Subcommands: synth, ingest, embed, index,
// evaluate, posthoc, predict. Exit codes: 0 success, 1 finished with
// warnings or partial failures, 2 invalid input, 3 transport or missing
// credentials. Output directories always receive a run-config.txt that can
// be fed back through --config.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "diarylens/baselines.hpp"
#include "diarylens/corpus.hpp"
#include "diarylens/evaluation.hpp"
#include "diarylens/inference.hpp"
#include "diarylens/pipeline.hpp"
#include "diarylens/prompting.hpp"
#include "diarylens/synth.hpp"
#include "diarylens/util.hpp"

#include "run_config.hpp"

#ifndef DIARYLENS_CODE_VERSION
#define DIARYLENS_CODE_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace diarylens;
using namespace diarylens::cli;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    return content;
}

void write_run_description(const RunConfig& config, const std::string& command) {
    fs::create_directories(config.out_dir);
    write_file(fs::path(config.out_dir) / "run-config.txt",
               describe_run(config, command, DIARYLENS_CODE_VERSION));
}

bool is_transport_failure(const std::exception& e) {
    if (dynamic_cast<const TransportError*>(&e) != nullptr) return true;
    if (const auto* pipeline = dynamic_cast<const PipelineError*>(&e)) {
        return pipeline->stage() == "complete" || pipeline->stage() == "embed";
    }
    if (const auto* embedding = dynamic_cast<const EmbeddingError*>(&e)) {
        return embedding->kind() == EmbeddingError::Kind::Transport;
    }
    return false;
}

Corpus load_or_exit(const std::string& path, int& exit_code) {
    if (path.empty()) {
        std::cerr << "error: no corpus configured (set corpus = <file> or --corpus)\n";
        exit_code = kExitInvalidInput;
        return Corpus{};
    }
    try {
        return load_corpus(path);
    } catch (const CorpusError& e) {
        std::cerr << "error: " << path << ": " << e.what() << "\n";
        exit_code = kExitInvalidInput;
        return Corpus{};
    }
}

std::string short_construct(const ConstructId& c) {
    static const std::map<std::string, std::string> kShort = {
        {"positive_affect_high", "pos_aff"},
        {"negative_affect_high", "neg_aff"},
        {"regulation_desire_high", "reg_des"},
        {"social_quality_high", "soc_qual"},
        {"intervention_available", "avail"},
    };
    const auto it = kShort.find(c.key());
    if (it != kShort.end()) return it->second;
    return c.key().size() > 10 ? c.key().substr(0, 10) : c.key();
}

// synth ---------------------------------------------------------------------

struct SynthFlags {
    int participants = 40;
    int days = 14;
    double block_presence = 0.85;
    double social_missing = 0.10;
    double mean_words = 7.0;
    std::vector<std::string> extras;
    std::string output;
};

int cmd_synth(const RunConfig& config, const SynthFlags& flags) {
    SynthConfig sc;
    sc.n_participants = flags.participants;
    sc.days = flags.days;
    sc.block_presence = flags.block_presence;
    sc.social_missing_rate = flags.social_missing;
    sc.mean_words = flags.mean_words;
    sc.extra_states = flags.extras;
    sc.seed = config.seed;
    try {
        const Corpus corpus = generate_synthetic_corpus(sc);
        const fs::path output = flags.output.empty()
                                    ? fs::path(config.out_dir) / "corpus.jsonl"
                                    : fs::path(flags.output);
        if (output.has_parent_path()) fs::create_directories(output.parent_path());
        save_corpus(corpus, output.string());
        write_file(output.parent_path() / "corpus-effects.txt", planted_effects_description());
        write_run_description(config, "synth");
        std::cout << "wrote " << corpus.participants().size() << " participants, "
                  << corpus.records().size() << " records to " << output.string() << "\n";
        return kExitOk;
    } catch (const CorpusError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
}

// ingest --------------------------------------------------------------------

int cmd_ingest(const RunConfig& config, const std::string& file_arg) {
    const std::string path = file_arg.empty() ? config.corpus_path : file_arg;
    int exit_code = kExitOk;
    const Corpus corpus = load_or_exit(path, exit_code);
    if (exit_code != kExitOk) return exit_code;

    const ValidationReport report = validate_corpus(corpus);
    if (!report.ok()) std::cout << report.to_text();
    std::cout << "ingested " << corpus.participants().size() << " participants, "
              << corpus.records().size() << " records, " << corpus.constructs().size()
              << " constructs (" << report.warnings.size() << " warnings)\n";
    return kExitOk;
}

// embed ---------------------------------------------------------------------

int cmd_embed(RunConfig config) {
    int exit_code = kExitOk;
    const Corpus corpus = load_or_exit(config.corpus_path, exit_code);
    if (exit_code != kExitOk) return exit_code;

    if (config.cache_path.empty()) {
        fs::create_directories(config.out_dir);
        config.cache_path = (fs::path(config.out_dir) / "embeddings.jsonl").string();
    }
    try {
        std::shared_ptr<CachingEmbedder> caching;
        const auto provider = make_run_provider(config, &caching);
        for (const DiaryRecord& r : corpus.records()) provider->embed(r.text);
        write_run_description(config, "embed");
        std::cout << "embedded " << corpus.records().size() << " records, "
                  << caching->delegated_calls() << " provider calls, cache "
                  << config.cache_path << "\n";
        return kExitOk;
    } catch (const EmbeddingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == EmbeddingError::Kind::Transport ? kExitEnvironment
                                                           : kExitInvalidInput;
    }
}

// index ---------------------------------------------------------------------

int cmd_index(const RunConfig& config, const std::string& output_flag,
              bool include_empty) {
    int exit_code = kExitOk;
    const Corpus corpus = load_or_exit(config.corpus_path, exit_code);
    if (exit_code != kExitOk) return exit_code;

    try {
        const auto labels = derive_binary_labels(corpus);
        std::set<std::string> everyone;
        for (const auto& p : corpus.participants()) everyone.insert(p.participant_id);
        const auto provider = make_run_provider(config);
        const FlatIndex index =
            build_retrieval_index(corpus, labels, everyone, *provider, include_empty);
        const fs::path output = output_flag.empty()
                                    ? fs::path(config.out_dir) / "index.bin"
                                    : fs::path(output_flag);
        if (output.has_parent_path()) fs::create_directories(output.parent_path());
        index.save(output.string());
        write_run_description(config, "index");
        std::cout << "indexed " << index.size() << " entries, dim " << index.dim()
                  << " -> " << output.string() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_transport_failure(e) ? kExitEnvironment : kExitInvalidInput;
    }
}

// evaluate ------------------------------------------------------------------

struct SummaryRow {
    std::string label;
    std::map<std::string, std::string> cells;  // construct key -> "mean+-std"
};

SummaryRow summary_from_report(const fs::path& report_path, const std::string& fallback) {
    SummaryRow row;
    row.label = fallback;
    const json j = json::parse(read_file(report_path));
    row.label = j.value("predictor_name", fallback);
    for (const auto& cj : j.at("constructs")) {
        const std::string key = cj.at("construct").get<std::string>();
        const auto& mean = cj.at("mean_balanced_accuracy");
        if (mean.at("value").is_null()) {
            row.cells[key] = "--";
            continue;
        }
        const auto& std_dev = cj.at("std_balanced_accuracy");
        const double m = mean.at("value").get<double>() * 100.0;
        const double s = std_dev.at("value").is_null()
                             ? 0.0
                             : std_dev.at("value").get<double>() * 100.0;
        row.cells[key] = format_fixed(m, 2) + "+-" + format_fixed(s, 2);
    }
    return row;
}

std::string render_summary(const std::vector<ConstructId>& constructs,
                           const std::vector<SummaryRow>& rows) {
    std::string out = "balanced accuracy, mean+-std across folds (percent)\n\n";
    std::string header = "predictor";
    header.resize(28, ' ');
    for (const auto& c : constructs) {
        std::string col = short_construct(c);
        col.resize(16, ' ');
        header += col;
    }
    out += header + "\n";
    for (const auto& row : rows) {
        std::string line = row.label;
        line.resize(28, ' ');
        for (const auto& c : constructs) {
            const auto it = row.cells.find(c.key());
            std::string cell = it == row.cells.end() ? "--" : it->second;
            cell.resize(16, ' ');
            line += cell;
        }
        out += line + "\n";
    }
    return out;
}

PredictorFactory baseline_factory(const std::string& name,
                                  const std::shared_ptr<EmbeddingProvider>& provider) {
    if (name == "majority") return make_majority_factory();
    if (name == "bow") return make_bow_factory();
    if (name == "tfidf") return make_tfidf_factory();
    if (name == "embedding") return make_embedding_linear_factory(provider);
    throw std::invalid_argument("unknown baseline '" + name +
                                "' (expected majority, bow, tfidf or embedding)");
}

// Runs one evaluation cell into its directory; returns false on failure and
// records whether the failure was transport-shaped.
bool run_cell(const fs::path& dir, const PredictorFactory& factory, const Corpus& corpus,
              const FoldAssignment& folds, const EvalOptions& opts, bool resume,
              bool* transport_failure) {
    const fs::path report_path = dir / "report.json";
    if (resume && fs::exists(report_path)) {
        std::cout << "cell " << dir.filename().string() << ": resumed (report exists)\n";
        return true;
    }
    fs::create_directories(dir);
    fs::remove(dir / "FAILED");
    try {
        const EvalReport report = cross_validate(factory, corpus, folds, opts);
        std::string lines;
        for (const auto& row : report.rows) lines += prediction_row_to_json(row) + "\n";
        write_file(dir / "predictions.jsonl", lines);
        write_file(dir / "table.txt", eval_report_table(report));
        write_file(report_path, eval_report_to_json(report));
        std::cout << "cell " << dir.filename().string() << ": ok (" << report.rows.size()
                  << " predictions)\n";
        return true;
    } catch (const std::exception& e) {
        if (is_transport_failure(e) && transport_failure != nullptr) {
            *transport_failure = true;
        }
        write_file(dir / "FAILED", std::string(e.what()) + "\n");
        std::cerr << "cell " << dir.filename().string() << ": FAILED (" << e.what()
                  << ")\n";
        return false;
    }
}

int cmd_evaluate(const RunConfig& config, bool fresh) {
    int exit_code = kExitOk;
    const Corpus corpus = load_or_exit(config.corpus_path, exit_code);
    if (exit_code != kExitOk) return exit_code;

    // validate the grid before any work
    std::vector<HistoryMode> modes;
    try {
        for (const auto& token : config.grid_history) {
            modes.push_back(parse_history_token(token));
        }
        for (int k : config.grid_k) {
            if (k < 0) throw std::invalid_argument("grid.k values must be >= 0");
        }
        for (const auto& name : config.baselines) {
            if (name != "majority" && name != "bow" && name != "tfidf" &&
                name != "embedding") {
                throw std::invalid_argument(
                    "unknown baseline '" + name +
                    "' (expected majority, bow, tfidf or embedding)");
            }
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }

    const auto labels =
        std::make_shared<std::map<std::string, LabelSet>>(derive_binary_labels(corpus));
    FoldAssignment folds;
    try {
        folds = split_grouped_folds(corpus, config.folds, config.seed);
    } catch (const CorpusError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    const auto constructs = corpus.constructs();

    std::shared_ptr<EmbeddingProvider> provider;
    std::shared_ptr<ResponseSource> source;
    try {
        provider = make_run_provider(config);
        source = make_run_source(config, labels.get());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_transport_failure(e) ? kExitEnvironment : kExitInvalidInput;
    }

    write_run_description(config, "evaluate");
    const fs::path out(config.out_dir);
    const bool resume = !fresh;
    bool transport_failure = false;
    bool baseline_failure = false;
    std::vector<fs::path> summary_sources;

    for (const auto& name : config.baselines) {
        const fs::path dir = out / ("baseline_" + name);
        EvalOptions opts;
        opts.constructs = constructs;
        opts.seed = config.seed;
        opts.predictor_name = "baseline_" + name;
        opts.model_name = name == "embedding" ? config.provider_model : "none";
        opts.config_summary = "baseline=" + name;
        opts.parallel = !config.serial;
        if (run_cell(dir, baseline_factory(name, provider), corpus, folds, opts, resume,
                     &transport_failure)) {
            summary_sources.push_back(dir / "report.json");
        } else {
            baseline_failure = true;
        }
    }

    int grid_failed = 0;
    int grid_total = 0;
    for (const HistoryMode mode : modes) {
        for (int k : config.grid_k) {
            ++grid_total;
            const std::string name = history_token(mode) + "_k" + std::to_string(k);
            const fs::path dir = out / name;

            PromptConfig prompt;
            prompt.history_mode = mode;
            prompt.k_examples = k;
            prompt.constructs = constructs;

            PipelineFactoryConfig pipeline;
            pipeline.prompt = prompt;
            pipeline.embedder = provider;
            pipeline.source = source;
            if (!(resume && fs::exists(dir / "report.json"))) {
                fs::create_directories(dir);
                // clear any stale log before the appender opens its handle
                fs::remove(dir / "provenance.jsonl");
                pipeline.provenance =
                    std::make_shared<ProvenanceLog>((dir / "provenance.jsonl").string());
            }

            EvalOptions opts;
            opts.constructs = constructs;
            opts.seed = config.seed;
            opts.predictor_name = "pipeline_" + name;
            opts.model_name = source->model_name();
            opts.config_summary = "history=" + history_token(mode) +
                                  "|k=" + std::to_string(k) +
                                  "|provider=" + config.provider + "|mock=" + config.mock;
            opts.parallel = !config.serial;

            if (run_cell(dir, make_pipeline_factory(pipeline), corpus, folds, opts, resume,
                         &transport_failure)) {
                summary_sources.push_back(dir / "report.json");
            } else {
                ++grid_failed;
            }
        }
    }

    std::vector<SummaryRow> rows;
    for (const auto& path : summary_sources) {
        try {
            rows.push_back(summary_from_report(path, path.parent_path().filename().string()));
        } catch (const std::exception& e) {
            std::cerr << "warning: cannot summarize " << path.string() << ": " << e.what()
                      << "\n";
        }
    }
    const std::string summary = render_summary(constructs, rows);
    write_file(out / "summary.txt", summary);
    std::cout << "\n" << summary;

    if (grid_total > 0 && grid_failed == grid_total) {
        std::cerr << "error: all " << grid_total << " grid cells failed\n";
        return transport_failure ? kExitEnvironment : kExitPartial;
    }
    if (grid_failed > 0 || baseline_failure) {
        std::cerr << "warning: " << grid_failed << "/" << grid_total
                  << " grid cells failed; see FAILED markers\n";
    }
    return kExitOk;
}

// posthoc -------------------------------------------------------------------

struct PosthocFlags {
    std::vector<std::string> analyses;  // empty = config.analyses
    std::string cell;                   // restrict confidence/length to one cell
    std::string history = "last_day";   // live analyses
    int k = 5;
};

PredictionLog load_prediction_log(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    PredictionLog log;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        log.push_back(prediction_row_from_json(line));
    }
    return log;
}

int cmd_posthoc(const RunConfig& config, const PosthocFlags& flags) {
    int exit_code = kExitOk;
    const Corpus corpus = load_or_exit(config.corpus_path, exit_code);
    if (exit_code != kExitOk) return exit_code;

    std::set<std::string> analyses(config.analyses.begin(), config.analyses.end());
    if (!flags.analyses.empty()) {
        analyses = std::set<std::string>(flags.analyses.begin(), flags.analyses.end());
    }
    for (const auto& name : analyses) {
        if (name != "confidence" && name != "length" && name != "nextday" &&
            name != "warmstart") {
            std::cerr << "error: unknown analysis '" << name
                      << "' (expected confidence, length, nextday or warmstart)\n";
            return kExitInvalidInput;
        }
    }

    const fs::path out(config.out_dir);
    const fs::path posthoc = out / "posthoc";
    fs::create_directories(posthoc);
    write_run_description(config, "posthoc");

    bool partial = false;
    bool transport_failure = false;

    if (analyses.count("confidence") || analyses.count("length")) {
        std::vector<fs::path> logs;
        if (!flags.cell.empty()) {
            logs.push_back(out / flags.cell / "predictions.jsonl");
        } else if (fs::exists(out)) {
            for (const auto& entry : fs::directory_iterator(out)) {
                if (entry.is_directory() && fs::exists(entry.path() / "predictions.jsonl")) {
                    logs.push_back(entry.path() / "predictions.jsonl");
                }
            }
            std::sort(logs.begin(), logs.end());
        }
        if (logs.empty() || !fs::exists(logs.front())) {
            std::cerr << "error: no prediction logs under " << out.string()
                      << "; run `diarylens evaluate` first\n";
            return kExitInvalidInput;
        }
        for (const auto& log_path : logs) {
            const std::string cell = log_path.parent_path().filename().string();
            try {
                const PredictionLog log = load_prediction_log(log_path);
                if (analyses.count("confidence")) {
                    write_file(posthoc / ("confidence_" + cell + ".json"),
                               confidence_curve_to_json(confidence_curve(log)));
                }
                if (analyses.count("length")) {
                    write_file(posthoc / ("length_" + cell + ".json"),
                               length_report_to_json(length_stratified_eval(log)));
                }
                std::cout << "posthoc " << cell << ": ok\n";
            } catch (const std::exception& e) {
                std::cerr << "posthoc " << cell << ": FAILED (" << e.what() << ")\n";
                partial = true;
            }
        }
    }

    if (analyses.count("nextday") || analyses.count("warmstart")) {
        try {
            const auto labels = std::make_shared<std::map<std::string, LabelSet>>(
                derive_binary_labels(corpus));
            const auto provider = make_run_provider(config);
            const auto source = make_run_source(config, labels.get());
            const auto constructs = corpus.constructs();

            EvalOptions opts;
            opts.constructs = constructs;
            opts.seed = config.seed;
            opts.model_name = source->model_name();
            opts.parallel = !config.serial;

            if (analyses.count("nextday")) {
                // trajectory must cover the source day, so LastDay is forced
                PromptConfig prompt;
                prompt.history_mode = HistoryMode::LastDay;
                prompt.k_examples = flags.k;
                prompt.constructs = constructs;
                PipelineFactoryConfig pipeline;
                pipeline.prompt = prompt;
                pipeline.embedder = provider;
                pipeline.source = source;
                opts.predictor_name = "pipeline_nextday_k" + std::to_string(flags.k);
                const FoldAssignment folds =
                    split_grouped_folds(corpus, config.folds, config.seed);
                const NextDayReport report =
                    next_day_eval(make_pipeline_factory(pipeline), corpus, folds, opts);
                write_file(posthoc / "nextday.json", next_day_report_to_json(report));
                std::cout << "posthoc nextday: ok (" << report.rows.size() << " tasks)\n";
            }

            if (analyses.count("warmstart")) {
                PromptConfig prompt;
                prompt.history_mode = parse_history_token(flags.history);
                prompt.k_examples = flags.k;
                prompt.constructs = constructs;
                PipelineFactoryConfig pipeline;
                pipeline.prompt = prompt;
                pipeline.embedder = provider;
                pipeline.source = source;
                opts.predictor_name = "pipeline_warmstart_k" + std::to_string(flags.k);
                const WarmStartReport report = warm_start_eval(
                    make_warm_pipeline_factory(pipeline, corpus), corpus, opts);
                write_file(posthoc / "warmstart.json", warm_start_report_to_json(report));
                std::cout << "posthoc warmstart: ok (" << report.participants.size()
                          << " participants)\n";
            }
        } catch (const std::exception& e) {
            std::cerr << "posthoc live analyses FAILED: " << e.what() << "\n";
            if (is_transport_failure(e)) transport_failure = true;
            partial = true;
        }
    }

    if (transport_failure) return kExitEnvironment;
    return partial ? kExitPartial : kExitOk;
}

// predict -------------------------------------------------------------------

int cmd_predict(const RunConfig& config, const std::string& record_id,
                const std::string& history, int k, bool show_prompt) {
    int exit_code = kExitOk;
    const Corpus corpus = load_or_exit(config.corpus_path, exit_code);
    if (exit_code != kExitOk) return exit_code;

    const DiaryRecord* query = corpus.record(record_id);
    if (query == nullptr) {
        std::cerr << "error: unknown record id '" << record_id << "'\n";
        return kExitInvalidInput;
    }

    try {
        const auto labels = derive_binary_labels(corpus);
        const auto provider = make_run_provider(config);
        const auto source = make_run_source(config, &labels);

        std::set<std::string> peers;
        for (const auto& p : corpus.participants()) {
            if (p.participant_id != query->participant_id) peers.insert(p.participant_id);
        }
        const FlatIndex index = build_retrieval_index(corpus, labels, peers, *provider);

        PromptConfig prompt;
        prompt.history_mode = parse_history_token(history);
        prompt.k_examples = k;
        prompt.constructs = corpus.constructs();

        PipelineDeps deps;
        deps.index = &index;
        deps.embedder = provider.get();
        deps.corpus = &corpus;
        deps.source = source.get();
        deps.prompt_config = prompt;

        RetrievalFilter filter;
        filter.excluded_participants.insert(query->participant_id);
        filter.exclude_entry = query->record_id;

        const PredictionOutcome outcome = predict_entry(deps, *query, filter);
        if (show_prompt) std::cerr << outcome.bundle.rendered << "\n";

        json probabilities = json::object(), decisions = json::object(),
             confidence = json::object();
        for (const auto& [c, p] : outcome.predictions.probabilities) {
            probabilities[c.key()] = p;
        }
        for (const auto& [c, d] : outcome.binary.decisions) decisions[c.key()] = d;
        for (const auto& [c, v] : outcome.binary.confidence) confidence[c.key()] = v;
        json retrieved = json::array();
        for (const auto& hit : outcome.retrieved) {
            retrieved.push_back(json{{"entry_id", hit.entry_id}, {"distance", hit.distance}});
        }
        std::cout << json{{"record_id", record_id},
                          {"model_name", outcome.predictions.model_name},
                          {"template_version", prompt.template_version},
                          {"prompt_hash", outcome.prompt_hash},
                          {"probabilities", probabilities},
                          {"decisions", decisions},
                          {"confidence", confidence},
                          {"retrieved", retrieved},
                          {"warnings", outcome.predictions.warnings}}
                         .dump(2)
                  << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_transport_failure(e) ? kExitEnvironment : kExitPartial;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"context-aware emotion inference over short diary entries"};
    app.require_subcommand(1);

    std::string config_path, out_dir, provider, mock, corpus_path;
    std::uint64_t seed = 1;
    bool serial = false;
    auto* opt_config =
        app.add_option("--config", config_path, "key = value run configuration file");
    auto* opt_seed = app.add_option("--seed", seed, "base seed for folds and mocks");
    auto* opt_serial =
        app.add_flag("--serial", serial, "single-threaded, deterministic log order");
    auto* opt_out = app.add_option("--out", out_dir, "output directory");
    auto* opt_provider =
        app.add_option("--provider", provider, "embedding provider: hash or remote");
    auto* opt_mock = app.add_option(
        "--mock", mock,
        "response source: majority_echo, keyword_oracle, calibrated or fixed:<p>");
    auto* opt_corpus = app.add_option("--corpus", corpus_path, "corpus JSONL file");

    SynthFlags synth_flags;
    auto* synth = app.add_subcommand("synth", "generate a planted-effect synthetic corpus");
    synth->fallthrough();
    synth->add_option("--participants", synth_flags.participants, "participant count");
    synth->add_option("--days", synth_flags.days, "study length in days");
    synth->add_option("--block-presence", synth_flags.block_presence,
                      "per-block entry probability");
    synth->add_option("--social-missing", synth_flags.social_missing,
                      "probability the social item is skipped");
    synth->add_option("--mean-words", synth_flags.mean_words, "target mean words per entry");
    synth->add_option("--extra", synth_flags.extras, "extra named state (repeatable)");
    synth->add_option("--output", synth_flags.output, "corpus file (default <out>/corpus.jsonl)");

    std::string ingest_file;
    auto* ingest = app.add_subcommand("ingest", "load and validate a corpus file");
    ingest->fallthrough();
    ingest->add_option("file", ingest_file, "corpus JSONL file");

    auto* embed = app.add_subcommand("embed", "precompute text embeddings into the cache");
    embed->fallthrough();
    std::string embed_cache;
    embed->add_option("--cache", embed_cache, "cache file (default <out>/embeddings.jsonl)");

    auto* index = app.add_subcommand("index", "build and save a retrieval index");
    index->fallthrough();
    std::string index_output;
    bool index_empty = false;
    index->add_option("--output", index_output, "index file (default <out>/index.bin)");
    index->add_flag("--include-empty", index_empty, "keep whitespace-only texts in the pool");

    auto* evaluate =
        app.add_subcommand("evaluate", "grouped cross-validation over the context grid");
    evaluate->fallthrough();
    bool fresh = false;
    evaluate->add_flag("--fresh", fresh, "recompute cells even when a report exists");

    PosthocFlags posthoc_flags;
    auto* posthoc = app.add_subcommand("posthoc", "post-hoc analyses over evaluation outputs");
    posthoc->fallthrough();
    posthoc->add_option("--analyses", posthoc_flags.analyses,
                        "subset of confidence,length,nextday,warmstart")
        ->delimiter(',');
    posthoc->add_option("--cell", posthoc_flags.cell,
                        "restrict confidence/length to one grid cell");
    posthoc->add_option("--history", posthoc_flags.history,
                        "history mode for the warm-start run");
    posthoc->add_option("--k", posthoc_flags.k, "retrieved examples for live analyses");

    std::string predict_record, predict_history = "none";
    int predict_k = 0;
    bool predict_show = false;
    auto* predict = app.add_subcommand("predict", "one-off prediction for a single record");
    predict->fallthrough();
    predict->add_option("record", predict_record, "record id from the corpus")->required();
    predict->add_option("--history", predict_history, "none, current_day or last_day");
    predict->add_option("--k", predict_k, "retrieved peer examples");
    predict->add_flag("--show-prompt", predict_show, "print the rendered prompt to stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalidInput;
    }

    RunConfig config;
    try {
        if (*opt_config) config = load_run_config(config_path);
        if (*opt_seed) config.seed = seed;
        if (*opt_serial) config.serial = true;
        if (*opt_out) config.out_dir = out_dir;
        if (*opt_provider) config.provider = provider;
        if (*opt_mock) config.mock = mock;
        if (*opt_corpus) config.corpus_path = corpus_path;
        if (embed->count("--cache") > 0) config.cache_path = embed_cache;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }

    try {
        if (app.got_subcommand(synth)) return cmd_synth(config, synth_flags);
        if (app.got_subcommand(ingest)) return cmd_ingest(config, ingest_file);
        if (app.got_subcommand(embed)) return cmd_embed(config);
        if (app.got_subcommand(index)) return cmd_index(config, index_output, index_empty);
        if (app.got_subcommand(evaluate)) return cmd_evaluate(config, fresh);
        if (app.got_subcommand(posthoc)) return cmd_posthoc(config, posthoc_flags);
        if (app.got_subcommand(predict)) {
            return cmd_predict(config, predict_record, predict_history, predict_k,
                               predict_show);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_transport_failure(e) ? kExitEnvironment : kExitPartial;
    }
    return kExitInvalidInput;
}
