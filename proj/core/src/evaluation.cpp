#include "diarylens/evaluation.hpp"

#include <algorithm>
#include <thread>

#include "json.hpp"

#include "diarylens/util.hpp"

namespace diarylens {

namespace {

using nlohmann::json;

std::vector<ConstructId> effective_constructs(const Corpus& corpus, const EvalOptions& opts) {
    return opts.constructs.empty() ? corpus.constructs() : opts.constructs;
}

struct Collected {
    std::vector<bool> decisions;
    std::vector<bool> labels;
    std::vector<double> scores;
};

template <typename Row>
Collected collect(const std::vector<Row>& rows, const ConstructId& c) {
    Collected out;
    for (const auto& row : rows) {
        const auto label = row.labels.find(c);
        const auto prob = row.probabilities.find(c);
        if (label == row.labels.end() || prob == row.probabilities.end()) continue;
        out.labels.push_back(label->second);
        out.scores.push_back(prob->second);
        out.decisions.push_back(prob->second > 0.5);
    }
    return out;
}

MaybeMetric safe_bacc(const Collected& c) {
    MaybeMetric m;
    if (c.labels.empty()) {
        m.missing_reason = "no labeled rows";
        return m;
    }
    try {
        m.value = balanced_accuracy(c.decisions, c.labels);
    } catch (const MetricUndefined& e) {
        m.missing_reason = e.what();
    }
    return m;
}

MaybeMetric safe_auc(const Collected& c) {
    MaybeMetric m;
    if (c.labels.empty()) {
        m.missing_reason = "no labeled rows";
        return m;
    }
    try {
        m.value = roc_auc(c.scores, c.labels);
    } catch (const MetricUndefined& e) {
        m.missing_reason = e.what();
    }
    return m;
}

MaybeMetric aggregate_mean(const std::vector<double>& values, const char* why_empty) {
    MaybeMetric m;
    if (values.empty()) {
        m.missing_reason = why_empty;
        return m;
    }
    double sum = 0;
    for (double v : values) sum += v;
    m.value = sum / static_cast<double>(values.size());
    return m;
}

MaybeMetric aggregate_std(const std::vector<double>& values, const char* why_empty) {
    MaybeMetric m;
    if (values.empty()) {
        m.missing_reason = why_empty;
        return m;
    }
    m.value = population_std(values);
    return m;
}

json maybe_to_json(const MaybeMetric& m) {
    json j;
    j["value"] = m.value ? json(*m.value) : json(nullptr);
    if (!m.missing_reason.empty()) j["missing_reason"] = m.missing_reason;
    return j;
}

template <typename V>
json construct_map_to_json(const std::map<ConstructId, V>& map) {
    json j = json::object();
    for (const auto& [c, v] : map) {
        if constexpr (std::is_same_v<V, MaybeMetric>) {
            j[c.key()] = maybe_to_json(v);
        } else {
            j[c.key()] = v;
        }
    }
    return j;
}

// Wilcoxon vs. BH over whatever constructs produced a defined raw p.
void adjust_p_values(const std::vector<ConstructId>& constructs,
                     std::map<ConstructId, MaybeMetric>& p_raw,
                     std::map<ConstructId, MaybeMetric>& p_adj) {
    std::vector<ConstructId> defined;
    std::vector<double> raw;
    for (const auto& c : constructs) {
        const auto it = p_raw.find(c);
        if (it != p_raw.end() && it->second.value) {
            defined.push_back(c);
            raw.push_back(*it->second.value);
        }
    }
    if (!raw.empty()) {
        const auto adjusted = bh_adjust(raw);
        for (std::size_t i = 0; i < defined.size(); ++i) {
            p_adj[defined[i]].value = adjusted[i];
        }
    }
    for (const auto& c : constructs) {
        if (p_adj.find(c) != p_adj.end()) continue;
        const auto it = p_raw.find(c);
        p_adj[c].missing_reason =
            it != p_raw.end() && !it->second.missing_reason.empty()
                ? it->second.missing_reason
                : std::string("raw p-value undefined");
    }
}

// Per-participant mean agreement with ground truth for one construct.
template <typename Row>
std::map<std::string, std::pair<int, int>> per_participant_hits(const std::vector<Row>& rows,
                                                                 const ConstructId& c) {
    std::map<std::string, std::pair<int, int>> hits;  // pid -> (correct, total)
    for (const auto& row : rows) {
        const auto label = row.labels.find(c);
        const auto prob = row.probabilities.find(c);
        if (label == row.labels.end() || prob == row.probabilities.end()) continue;
        auto& [correct, total] = hits[row.participant_id];
        ++total;
        if ((prob->second > 0.5) == label->second) ++correct;
    }
    return hits;
}

MaybeMetric wilcoxon_p(const std::vector<double>& diffs) {
    MaybeMetric m;
    if (diffs.empty()) {
        m.missing_reason = "no participants with evaluable records";
        return m;
    }
    try {
        m.value = wilcoxon_signed_rank(diffs).p_value;
    } catch (const MetricUndefined& e) {
        m.missing_reason = e.what();
    }
    return m;
}

}  // namespace

std::string prediction_row_to_json(const PredictionRow& row) {
    return json{{"record_id", row.record_id},
                {"participant_id", row.participant_id},
                {"fold", row.fold},
                {"word_count", row.word_count},
                {"probabilities", construct_map_to_json(row.probabilities)},
                {"decisions", construct_map_to_json(row.decisions)},
                {"labels", construct_map_to_json(row.labels)}}
        .dump();
}

PredictionRow prediction_row_from_json(const std::string& line) {
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::invalid_argument("prediction row is not a JSON object");
    }
    try {
        PredictionRow row;
        row.record_id = j.at("record_id").get<std::string>();
        row.participant_id = j.at("participant_id").get<std::string>();
        row.fold = j.at("fold").get<int>();
        row.word_count = j.at("word_count").get<int>();
        for (const auto& [key, value] : j.at("probabilities").items()) {
            if (auto c = ConstructId::from_key(key)) row.probabilities[*c] = value.get<double>();
        }
        for (const auto& [key, value] : j.at("decisions").items()) {
            if (auto c = ConstructId::from_key(key)) row.decisions[*c] = value.get<bool>();
        }
        for (const auto& [key, value] : j.at("labels").items()) {
            if (auto c = ConstructId::from_key(key)) row.labels[*c] = value.get<bool>();
        }
        return row;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("prediction row malformed: ") + e.what());
    }
}

EvalReport cross_validate(const PredictorFactory& factory, const Corpus& corpus,
                          const FoldAssignment& folds, const EvalOptions& opts) {
    if (folds.n_folds < 1) throw std::invalid_argument("cross_validate: no folds");
    const auto labels = derive_binary_labels(corpus);
    const auto constructs = effective_constructs(corpus, opts);

    EvalReport report;
    report.predictor_name = opts.predictor_name;
    report.model_name = opts.model_name;
    report.template_version = opts.template_version;
    report.seed = opts.seed;
    report.n_folds = folds.n_folds;
    report.config_hash =
        hex64(fnv1a(opts.predictor_name + '|' + opts.model_name + '|' + opts.template_version +
                    '|' + std::to_string(opts.seed) + '|' + std::to_string(folds.n_folds) + '|' +
                    opts.config_summary));

    std::vector<PredictionLog> fold_rows(static_cast<std::size_t>(folds.n_folds));
    // original exceptions are rethrown so callers keep the error type
    std::vector<std::exception_ptr> fold_errors(static_cast<std::size_t>(folds.n_folds));

    const auto run_fold = [&](int f) {
        try {
            const auto train = folds.participants_not_in(f);
            const auto test = folds.participants_in(f);
            TrainContext ctx{corpus, labels, train, f, opts.seed};
            const auto predictor = factory(ctx);
            for (const auto& pid : test) {
                for (const DiaryRecord* r : corpus.records_of(pid)) {
                    const auto label_it = labels.find(r->record_id);
                    if (label_it == labels.end()) continue;
                    PredictionRow row;
                    row.record_id = r->record_id;
                    row.participant_id = pid;
                    row.fold = f;
                    row.word_count = word_count(r->text);
                    row.probabilities = predictor->predict(*r);
                    for (const auto& [c, p] : row.probabilities) row.decisions[c] = p > 0.5;
                    for (const auto& c : constructs) {
                        const auto it = label_it->second.labels.find(c);
                        if (it != label_it->second.labels.end()) row.labels[c] = it->second;
                    }
                    fold_rows[static_cast<std::size_t>(f)].push_back(std::move(row));
                }
            }
        } catch (...) {
            fold_errors[static_cast<std::size_t>(f)] = std::current_exception();
        }
    };

    if (opts.parallel && folds.n_folds > 1) {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(folds.n_folds));
        for (int f = 0; f < folds.n_folds; ++f) workers.emplace_back(run_fold, f);
        for (auto& w : workers) w.join();
    } else {
        for (int f = 0; f < folds.n_folds; ++f) run_fold(f);
    }
    for (const auto& error : fold_errors) {
        if (error) std::rethrow_exception(error);
    }

    for (const auto& c : constructs) {
        ConstructSummary summary;
        summary.construct = c;
        std::vector<double> baccs, aucs;
        for (int f = 0; f < folds.n_folds; ++f) {
            const auto collected = collect(fold_rows[static_cast<std::size_t>(f)], c);
            FoldMetric fm;
            fm.fold = f;
            fm.n = static_cast<int>(collected.labels.size());
            fm.positives = static_cast<int>(
                std::count(collected.labels.begin(), collected.labels.end(), true));
            fm.balanced_accuracy = safe_bacc(collected);
            fm.roc_auc = safe_auc(collected);
            if (fm.balanced_accuracy.value) baccs.push_back(*fm.balanced_accuracy.value);
            if (fm.roc_auc.value) aucs.push_back(*fm.roc_auc.value);
            summary.folds.push_back(std::move(fm));
        }
        summary.mean_balanced_accuracy = aggregate_mean(baccs, "no fold with both classes");
        summary.std_balanced_accuracy = aggregate_std(baccs, "no fold with both classes");
        summary.mean_roc_auc = aggregate_mean(aucs, "no fold with both classes");
        summary.std_roc_auc = aggregate_std(aucs, "no fold with both classes");
        report.constructs.push_back(std::move(summary));
    }

    for (auto& rows : fold_rows) {
        report.rows.insert(report.rows.end(), std::make_move_iterator(rows.begin()),
                           std::make_move_iterator(rows.end()));
    }
    return report;
}

std::vector<double> default_confidence_thresholds() {
    std::vector<double> out;
    for (int i = 0; i < 10; ++i) out.push_back(i * 0.05);
    return out;
}

ConfidenceCurve confidence_curve(const PredictionLog& log,
                                 const std::vector<double>& thresholds) {
    if (thresholds.empty()) {
        throw std::invalid_argument("confidence thresholds must be non-empty");
    }
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (thresholds[i] < 0.0 || thresholds[i] > 0.5 ||
            (i > 0 && thresholds[i] <= thresholds[i - 1])) {
            throw std::invalid_argument(
                "confidence thresholds must be strictly ascending within [0, 0.5]");
        }
    }
    std::set<ConstructId> constructs;
    for (const auto& row : log) {
        for (const auto& [c, p] : row.probabilities) {
            if (row.labels.count(c)) constructs.insert(c);
        }
    }

    ConfidenceCurve curve;
    for (double t : thresholds) {
        ConfidencePoint point;
        point.threshold = t;
        for (const auto& c : constructs) {
            Collected kept;
            int total = 0;
            for (const auto& row : log) {
                const auto label = row.labels.find(c);
                const auto prob = row.probabilities.find(c);
                if (label == row.labels.end() || prob == row.probabilities.end()) continue;
                ++total;
                if (std::abs(prob->second - 0.5) > t) {
                    kept.labels.push_back(label->second);
                    kept.scores.push_back(prob->second);
                    kept.decisions.push_back(prob->second > 0.5);
                }
            }
            point.retained[c] =
                total == 0 ? 0.0 : static_cast<double>(kept.labels.size()) / total;
            point.balanced_accuracy[c] = safe_bacc(kept);
        }
        curve.points.push_back(std::move(point));
    }
    return curve;
}

LengthReport length_stratified_eval(const PredictionLog& log, int min_words, int max_words) {
    if (min_words < 1 || max_words < min_words) {
        throw std::invalid_argument("length_stratified_eval: bad word range");
    }
    std::set<ConstructId> constructs;
    for (const auto& row : log) {
        for (const auto& [c, p] : row.probabilities) {
            if (row.labels.count(c)) constructs.insert(c);
        }
    }

    LengthReport report;
    const std::vector<ConstructId> ordered(constructs.begin(), constructs.end());
    for (const auto& c : ordered) {
        for (int w = min_words; w <= max_words; ++w) {
            Collected subset;
            for (const auto& row : log) {
                if (row.word_count < w) continue;
                const auto label = row.labels.find(c);
                const auto prob = row.probabilities.find(c);
                if (label == row.labels.end() || prob == row.probabilities.end()) continue;
                subset.labels.push_back(label->second);
                subset.scores.push_back(prob->second);
                subset.decisions.push_back(prob->second > 0.5);
            }
            LengthPoint point;
            point.min_words = w;
            point.n = static_cast<int>(subset.labels.size());
            point.balanced_accuracy = safe_bacc(subset);
            report.points[c].push_back(std::move(point));
        }

        std::vector<double> xs, ys;
        for (const auto& point : report.points[c]) {
            if (point.balanced_accuracy.value) {
                xs.push_back(point.min_words);
                ys.push_back(*point.balanced_accuracy.value);
            }
        }
        if (xs.size() < 3) {
            report.rho[c].missing_reason = "fewer than 3 thresholds with a defined accuracy";
            report.p_raw[c].missing_reason = report.rho[c].missing_reason;
            continue;
        }
        try {
            const auto result = spearman_test(xs, ys);
            report.rho[c].value = result.rho;
            report.p_raw[c].value = result.p_value;
        } catch (const MetricUndefined& e) {
            report.rho[c].missing_reason = e.what();
            report.p_raw[c].missing_reason = e.what();
        }
    }
    adjust_p_values(ordered, report.p_raw, report.p_adj);
    return report;
}

NextDayReport next_day_eval(const PredictorFactory& factory, const Corpus& corpus,
                            const FoldAssignment& folds, const EvalOptions& opts) {
    if (folds.n_folds < 1) throw std::invalid_argument("next_day_eval: no folds");
    const auto labels = derive_binary_labels(corpus);
    const auto constructs = effective_constructs(corpus, opts);

    NextDayReport report;
    std::vector<std::vector<NextDayRow>> fold_rows(static_cast<std::size_t>(folds.n_folds));
    std::vector<std::exception_ptr> fold_errors(static_cast<std::size_t>(folds.n_folds));

    const auto run_fold = [&](int f) {
        try {
            const auto train = folds.participants_not_in(f);
            const auto test = folds.participants_in(f);
            TrainContext ctx{corpus, labels, train, f, opts.seed};
            const auto predictor = factory(ctx);
            for (const auto& pid : test) {
                // group this participant's records by calendar day
                std::map<std::int64_t, std::vector<const DiaryRecord*>> days;
                for (const DiaryRecord* r : corpus.records_of(pid)) {
                    days[r->timestamp.day_number()].push_back(r);
                }
                for (const auto& [day, source] : days) {
                    const auto target_it = days.find(day + 1);
                    if (target_it == days.end()) continue;  // not consecutive

                    std::string joined;
                    for (const DiaryRecord* r : source) {
                        if (!joined.empty()) joined += "; ";
                        joined += r->text;
                    }
                    for (const DiaryRecord* target : target_it->second) {
                        const auto label_it = labels.find(target->record_id);
                        if (label_it == labels.end()) continue;

                        DiaryRecord probe;
                        probe.record_id = target->record_id + ":nextday";
                        probe.participant_id = pid;
                        probe.timestamp = target->timestamp.start_of_day();
                        probe.time_block = target->time_block;
                        probe.text = joined;

                        NextDayRow row;
                        row.participant_id = pid;
                        row.target_record_id = target->record_id;
                        row.fold = f;
                        row.source_count = static_cast<int>(source.size());
                        row.target_block = target->time_block;
                        row.probabilities = predictor->predict(probe);
                        for (const auto& [c, p] : row.probabilities) {
                            row.decisions[c] = p > 0.5;
                        }
                        for (const auto& c : constructs) {
                            const auto it = label_it->second.labels.find(c);
                            if (it != label_it->second.labels.end()) row.labels[c] = it->second;
                        }
                        fold_rows[static_cast<std::size_t>(f)].push_back(std::move(row));
                    }
                }
            }
        } catch (...) {
            fold_errors[static_cast<std::size_t>(f)] = std::current_exception();
        }
    };

    if (opts.parallel && folds.n_folds > 1) {
        std::vector<std::thread> workers;
        for (int f = 0; f < folds.n_folds; ++f) workers.emplace_back(run_fold, f);
        for (auto& w : workers) w.join();
    } else {
        for (int f = 0; f < folds.n_folds; ++f) run_fold(f);
    }
    for (const auto& error : fold_errors) {
        if (error) std::rethrow_exception(error);
    }
    for (auto& rows : fold_rows) {
        report.rows.insert(report.rows.end(), std::make_move_iterator(rows.begin()),
                           std::make_move_iterator(rows.end()));
    }

    // strata by (source-day entry count, target block)
    std::map<std::pair<int, int>, std::vector<NextDayRow>> strata;
    for (const auto& row : report.rows) {
        strata[{row.source_count, static_cast<int>(row.target_block)}].push_back(row);
    }
    for (const auto& [key, rows] : strata) {
        NextDayStratum stratum;
        stratum.source_count = key.first;
        stratum.target_block = static_cast<TimeBlock>(key.second);
        stratum.n = static_cast<int>(rows.size());
        for (const auto& c : constructs) {
            stratum.balanced_accuracy[c] = safe_bacc(collect(rows, c));
        }
        report.strata.push_back(std::move(stratum));
    }

    for (const auto& c : constructs) {
        report.overall_balanced_accuracy[c] = safe_bacc(collect(report.rows, c));
        std::vector<double> diffs;
        for (const auto& [pid, hits] : per_participant_hits(report.rows, c)) {
            diffs.push_back(static_cast<double>(hits.first) / hits.second - 0.5);
        }
        report.p_raw[c] = wilcoxon_p(diffs);
    }
    adjust_p_values(constructs, report.p_raw, report.p_adj);
    return report;
}

WarmStartSplit warm_start_split(const Corpus& corpus) {
    WarmStartSplit split;
    for (const auto& p : corpus.participants()) {
        const auto& recs = corpus.records_of(p.participant_id);
        if (recs.empty()) continue;
        const std::int64_t first_day = recs.front()->timestamp.day_number();
        std::set<std::string> week1;
        std::vector<const DiaryRecord*> later;
        for (const DiaryRecord* r : recs) {
            if (r->timestamp.day_number() < first_day + 7) {
                week1.insert(r->record_id);
            } else {
                later.push_back(r);
            }
        }
        if (week1.empty() || later.empty()) continue;  // nothing to personalize or test
        split.week1[p.participant_id] = std::move(week1);
        split.later[p.participant_id] = std::move(later);
    }
    return split;
}

WarmStartReport warm_start_eval(const WarmPredictorFactory& make_predictor,
                                const Corpus& corpus, const EvalOptions& opts) {
    const auto labels = derive_binary_labels(corpus);
    const auto constructs = effective_constructs(corpus, opts);
    const auto split = warm_start_split(corpus);

    WarmStartReport report;
    report.week1 = split.week1;
    for (const auto& [pid, recs] : split.later) report.participants.push_back(pid);

    const auto peer = make_predictor({});
    const auto warm = make_predictor(split.week1);

    const auto predict_rows = [&](Predictor& predictor, PredictionLog& rows) {
        for (const auto& pid : report.participants) {
            for (const DiaryRecord* r : split.later.at(pid)) {
                const auto label_it = labels.find(r->record_id);
                if (label_it == labels.end()) continue;
                PredictionRow row;
                row.record_id = r->record_id;
                row.participant_id = pid;
                row.word_count = word_count(r->text);
                row.probabilities = predictor.predict(*r);
                for (const auto& [c, p] : row.probabilities) row.decisions[c] = p > 0.5;
                for (const auto& c : constructs) {
                    const auto it = label_it->second.labels.find(c);
                    if (it != label_it->second.labels.end()) row.labels[c] = it->second;
                }
                rows.push_back(std::move(row));
            }
        }
    };
    predict_rows(*peer, report.peer_rows);
    predict_rows(*warm, report.warm_rows);

    for (const auto& c : constructs) {
        report.peer_balanced_accuracy[c] = safe_bacc(collect(report.peer_rows, c));
        report.warm_balanced_accuracy[c] = safe_bacc(collect(report.warm_rows, c));

        const auto peer_hits = per_participant_hits(report.peer_rows, c);
        const auto warm_hits = per_participant_hits(report.warm_rows, c);
        std::vector<double> diffs;
        for (const auto& [pid, wh] : warm_hits) {
            const auto ph = peer_hits.find(pid);
            if (ph == peer_hits.end()) continue;
            const double warm_acc = static_cast<double>(wh.first) / wh.second;
            const double peer_acc =
                static_cast<double>(ph->second.first) / ph->second.second;
            diffs.push_back(warm_acc - peer_acc);
        }
        report.p_raw[c] = wilcoxon_p(diffs);
    }
    adjust_p_values(constructs, report.p_raw, report.p_adj);
    return report;
}

std::string eval_report_to_json(const EvalReport& report) {
    json constructs = json::array();
    for (const auto& summary : report.constructs) {
        json folds = json::array();
        for (const auto& fm : summary.folds) {
            folds.push_back(json{{"fold", fm.fold},
                                 {"n", fm.n},
                                 {"positives", fm.positives},
                                 {"balanced_accuracy", maybe_to_json(fm.balanced_accuracy)},
                                 {"roc_auc", maybe_to_json(fm.roc_auc)}});
        }
        constructs.push_back(
            json{{"construct", summary.construct.key()},
                 {"folds", folds},
                 {"mean_balanced_accuracy", maybe_to_json(summary.mean_balanced_accuracy)},
                 {"std_balanced_accuracy", maybe_to_json(summary.std_balanced_accuracy)},
                 {"mean_roc_auc", maybe_to_json(summary.mean_roc_auc)},
                 {"std_roc_auc", maybe_to_json(summary.std_roc_auc)}});
    }
    return json{{"predictor_name", report.predictor_name},
                {"model_name", report.model_name},
                {"template_version", report.template_version},
                {"seed", report.seed},
                {"n_folds", report.n_folds},
                {"config_hash", report.config_hash},
                {"n_rows", report.rows.size()},
                {"constructs", constructs}}
        .dump(2);
}

std::string confidence_curve_to_json(const ConfidenceCurve& curve) {
    json points = json::array();
    for (const auto& point : curve.points) {
        points.push_back(json{{"threshold", point.threshold},
                              {"retained", construct_map_to_json(point.retained)},
                              {"balanced_accuracy",
                               construct_map_to_json(point.balanced_accuracy)}});
    }
    return json{{"points", points}}.dump(2);
}

std::string length_report_to_json(const LengthReport& report) {
    json points = json::object();
    for (const auto& [c, pts] : report.points) {
        json arr = json::array();
        for (const auto& point : pts) {
            arr.push_back(json{{"min_words", point.min_words},
                               {"n", point.n},
                               {"balanced_accuracy", maybe_to_json(point.balanced_accuracy)}});
        }
        points[c.key()] = arr;
    }
    return json{{"points", points},
                {"rho", construct_map_to_json(report.rho)},
                {"p_raw", construct_map_to_json(report.p_raw)},
                {"p_adj", construct_map_to_json(report.p_adj)}}
        .dump(2);
}

std::string next_day_report_to_json(const NextDayReport& report) {
    json strata = json::array();
    for (const auto& stratum : report.strata) {
        strata.push_back(json{{"source_count", stratum.source_count},
                              {"target_block",
                               std::string(time_block_name(stratum.target_block))},
                              {"n", stratum.n},
                              {"balanced_accuracy",
                               construct_map_to_json(stratum.balanced_accuracy)}});
    }
    return json{{"n_tasks", report.rows.size()},
                {"strata", strata},
                {"overall_balanced_accuracy",
                 construct_map_to_json(report.overall_balanced_accuracy)},
                {"p_raw", construct_map_to_json(report.p_raw)},
                {"p_adj", construct_map_to_json(report.p_adj)}}
        .dump(2);
}

std::string warm_start_report_to_json(const WarmStartReport& report) {
    return json{{"participants", report.participants},
                {"n_test_records", report.peer_rows.size()},
                {"peer_balanced_accuracy",
                 construct_map_to_json(report.peer_balanced_accuracy)},
                {"warm_balanced_accuracy",
                 construct_map_to_json(report.warm_balanced_accuracy)},
                {"p_raw", construct_map_to_json(report.p_raw)},
                {"p_adj", construct_map_to_json(report.p_adj)}}
        .dump(2);
}

std::string eval_report_table(const EvalReport& report) {
    const auto cell = [](const MaybeMetric& mean, const MaybeMetric& std) -> std::string {
        if (!mean.value) return "--";
        return format_fixed(*mean.value * 100.0, 2) + "+-" +
               format_fixed(std.value ? *std.value * 100.0 : 0.0, 2);
    };
    std::string out = report.predictor_name + " (" + std::to_string(report.n_folds) +
                      " folds, seed " + std::to_string(report.seed) + ")\n";
    out += "construct                 bacc            auc             folds\n";
    for (const auto& summary : report.constructs) {
        int defined = 0;
        for (const auto& fm : summary.folds) {
            if (fm.balanced_accuracy.value) ++defined;
        }
        std::string line = summary.construct.key();
        line.resize(26, ' ');
        std::string bacc = cell(summary.mean_balanced_accuracy, summary.std_balanced_accuracy);
        bacc.resize(16, ' ');
        std::string auc = cell(summary.mean_roc_auc, summary.std_roc_auc);
        auc.resize(16, ' ');
        out += line + bacc + auc + std::to_string(defined) + "/" +
               std::to_string(report.n_folds) + "\n";
    }
    return out;
}

}  // namespace diarylens
