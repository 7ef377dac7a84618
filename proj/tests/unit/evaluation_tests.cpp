#include <algorithm>
#include <mutex>
#include <set>

#include "doctest.h"

#include "json.hpp"

#include "diarylens/embedding.hpp"
#include "diarylens/evaluation.hpp"
#include "diarylens/synth.hpp"
#include "diarylens/util.hpp"
#include "helpers.hpp"

using namespace diarylens;
namespace dt = diarylens::testing;
using nlohmann::json;

namespace {

// Cheats by reading the full label map: handy for coverage and metric-shape
// tests where leakage is not the property under test.
PredictorFactory perfect_factory(double high = 0.9, double low = 0.1) {
    return [high, low](const TrainContext& ctx) -> std::unique_ptr<Predictor> {
        class Perfect : public Predictor {
        public:
            Perfect(const std::map<std::string, LabelSet>& labels, double high, double low)
                : labels_(labels), high_(high), low_(low) {}
            std::map<ConstructId, double> predict(const DiaryRecord& query) override {
                std::map<ConstructId, double> out;
                const auto it = labels_.find(query.record_id);
                if (it == labels_.end()) return out;
                for (const auto& [c, y] : it->second.labels) out[c] = y ? high_ : low_;
                return out;
            }
            std::string name() const override { return "perfect"; }

        private:
            const std::map<std::string, LabelSet>& labels_;
            double high_, low_;
        };
        return std::make_unique<Perfect>(ctx.labels, high, low);
    };
}

// Collects every query record handed to predict().
struct QueryTrace {
    std::mutex mu;
    std::vector<DiaryRecord> queries;
};

PredictorFactory tracing_factory(std::shared_ptr<QueryTrace> trace, double p = 0.75) {
    return [trace, p](const TrainContext& ctx) -> std::unique_ptr<Predictor> {
        class Tracing : public Predictor {
        public:
            Tracing(std::shared_ptr<QueryTrace> trace, std::vector<ConstructId> constructs,
                    double p)
                : trace_(std::move(trace)), constructs_(std::move(constructs)), p_(p) {}
            std::map<ConstructId, double> predict(const DiaryRecord& query) override {
                {
                    std::lock_guard lock(trace_->mu);
                    trace_->queries.push_back(query);
                }
                std::map<ConstructId, double> out;
                for (const auto& c : constructs_) out[c] = p_;
                return out;
            }
            std::string name() const override { return "tracing"; }

        private:
            std::shared_ptr<QueryTrace> trace_;
            std::vector<ConstructId> constructs_;
            double p_;
        };
        return std::make_unique<Tracing>(trace, ctx.corpus.constructs(), p);
    };
}

PredictionRow make_row(const std::string& rid, const std::string& pid, double p, bool label,
                       int word_count = 5) {
    PredictionRow row;
    row.record_id = rid;
    row.participant_id = pid;
    row.fold = 0;
    row.word_count = word_count;
    const auto c = ConstructId::pos_aff();
    row.probabilities[c] = p;
    row.decisions[c] = p > 0.5;
    row.labels[c] = label;
    return row;
}

DiaryRecord day_record(const std::string& id, const std::string& pid, DateTime ts,
                       TimeBlock block, const std::string& text, int reg) {
    DiaryRecord r;
    r.record_id = id;
    r.participant_id = pid;
    r.timestamp = ts;
    r.time_block = block;
    r.text = text;
    r.regulation_desire = reg;
    r.social_quality = 5;
    return r;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("cross-validation covers every labeled record exactly once") {
    const Corpus corpus =
        generate_synthetic_corpus({.n_participants = 15, .days = 5, .seed = 8});
    const auto folds = split_grouped_folds(corpus, 3, 8);
    const auto labels = derive_binary_labels(corpus);

    EvalOptions opts;
    opts.predictor_name = "perfect";
    const auto report = cross_validate(perfect_factory(), corpus, folds, opts);

    CHECK(report.rows.size() == labels.size());
    std::set<std::string> seen;
    for (const auto& row : report.rows) {
        CHECK(seen.insert(row.record_id).second);
        CHECK(row.fold == folds.fold_of.at(row.participant_id));
        CHECK(row.word_count == word_count(corpus.record(row.record_id)->text));
        for (const auto& [c, p] : row.probabilities) {
            CHECK(row.decisions.at(c) == (p > 0.5));
        }
        for (const auto& [c, y] : row.labels) {
            CHECK(y == labels.at(row.record_id).labels.at(c));
        }
    }
}

TEST_CASE("a perfect predictor scores 1.0 everywhere") {
    const Corpus corpus =
        generate_synthetic_corpus({.n_participants = 12, .days = 6, .seed = 2});
    const auto folds = split_grouped_folds(corpus, 4, 3);
    const auto report = cross_validate(perfect_factory(), corpus, folds, {});

    REQUIRE_FALSE(report.constructs.empty());
    for (const auto& summary : report.constructs) {
        REQUIRE_MESSAGE(summary.mean_balanced_accuracy.value.has_value(),
                        summary.construct.key());
        CHECK(*summary.mean_balanced_accuracy.value == doctest::Approx(1.0));
        CHECK(*summary.std_balanced_accuracy.value == doctest::Approx(0.0));
        CHECK(*summary.mean_roc_auc.value == doctest::Approx(1.0));
        CHECK(static_cast<int>(summary.folds.size()) == folds.n_folds);
    }
}

TEST_CASE("aggregates are recomputable from the per-fold values") {
    const Corpus corpus =
        generate_synthetic_corpus({.n_participants = 10, .days = 5, .seed = 13});
    const auto folds = split_grouped_folds(corpus, 3, 5);
    // noisy predictor: wrong with some spread so folds differ
    const auto report = cross_validate(perfect_factory(0.7, 0.4), corpus, folds, {});

    for (const auto& summary : report.constructs) {
        std::vector<double> defined;
        for (const auto& fm : summary.folds) {
            if (fm.balanced_accuracy.value) defined.push_back(*fm.balanced_accuracy.value);
        }
        if (defined.empty()) {
            CHECK_FALSE(summary.mean_balanced_accuracy.value.has_value());
            continue;
        }
        double mean = 0;
        for (double v : defined) mean += v;
        mean /= static_cast<double>(defined.size());
        CHECK(*summary.mean_balanced_accuracy.value == doctest::Approx(mean).epsilon(1e-12));
        CHECK(*summary.std_balanced_accuracy.value ==
              doctest::Approx(population_std(defined)).epsilon(1e-12));
    }
}

TEST_CASE("single-class folds surface as missing metrics with a reason") {
    // two participants, two folds; p-all-true holds constant availability
    std::vector<Participant> participants{
        {"p-all-true", 50, "female", "White", "Breast", 1, false},
        {"p-mixed", 55, "male", "White", "Lung", 2, false},
    };
    std::vector<DiaryRecord> records;
    for (int i = 0; i < 4; ++i) {
        auto r = day_record("a" + std::to_string(i), "p-all-true",
                            {2024, 3, 4 + i, 9, 0, 0}, TimeBlock::Morning, "steady note",
                            i % 2 ? 3 : 7);
        r.availability = true;
        records.push_back(r);
        auto s = day_record("b" + std::to_string(i), "p-mixed", {2024, 3, 4 + i, 9, 0, 0},
                            TimeBlock::Morning, "shifting note", i % 2 ? 3 : 7);
        s.availability = i % 2 == 0;
        records.push_back(s);
    }
    const Corpus corpus(std::move(participants), std::move(records));
    const auto folds = split_grouped_folds(corpus, 2, 1);

    EvalOptions opts;
    opts.constructs = {ConstructId::int_avail()};
    const auto report = cross_validate(perfect_factory(), corpus, folds, opts);

    REQUIRE(report.constructs.size() == 1);
    const auto& summary = report.constructs[0];
    int defined = 0, missing = 0;
    for (const auto& fm : summary.folds) {
        if (fm.balanced_accuracy.value) {
            ++defined;
        } else {
            ++missing;
            CHECK(fm.balanced_accuracy.missing_reason.find("positive") != std::string::npos);
        }
    }
    CHECK(defined == 1);
    CHECK(missing == 1);
    // the mean is over the defined fold only
    CHECK(*summary.mean_balanced_accuracy.value == doctest::Approx(1.0));
}

TEST_CASE("parallel and serial cross-validation agree") {
    const Corpus corpus =
        generate_synthetic_corpus({.n_participants = 9, .days = 4, .seed = 21});
    const auto folds = split_grouped_folds(corpus, 3, 2);
    EvalOptions serial;
    serial.parallel = false;
    EvalOptions parallel;
    parallel.parallel = true;

    auto a = cross_validate(perfect_factory(), corpus, folds, serial);
    auto b = cross_validate(perfect_factory(), corpus, folds, parallel);
    REQUIRE(a.rows.size() == b.rows.size());
    const auto by_id = [](const PredictionRow& x, const PredictionRow& y) {
        return x.record_id < y.record_id;
    };
    std::sort(a.rows.begin(), a.rows.end(), by_id);
    std::sort(b.rows.begin(), b.rows.end(), by_id);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].record_id == b.rows[i].record_id);
        CHECK(a.rows[i].probabilities == b.rows[i].probabilities);
    }
    CHECK(a.config_hash == b.config_hash);
}

TEST_CASE("fold worker exceptions keep their type") {
    const Corpus corpus = generate_synthetic_corpus({.n_participants = 6, .days = 4, .seed = 4});
    const auto folds = split_grouped_folds(corpus, 2, 1);
    const PredictorFactory failing = [](const TrainContext&) -> std::unique_ptr<Predictor> {
        throw EmbeddingError(EmbeddingError::Kind::Transport, "provider unreachable");
    };
    CHECK_THROWS_AS(cross_validate(failing, corpus, folds, {}), EmbeddingError);
}

TEST_CASE("prediction rows round-trip through json") {
    auto row = make_row("r1", "p1", 0.8, true, 12);
    row.fold = 3;
    const auto line = prediction_row_to_json(row);
    const auto back = prediction_row_from_json(line);
    CHECK(back.record_id == row.record_id);
    CHECK(back.participant_id == row.participant_id);
    CHECK(back.fold == 3);
    CHECK(back.word_count == 12);
    CHECK(back.probabilities == row.probabilities);
    CHECK(back.decisions == row.decisions);
    CHECK(back.labels == row.labels);
    CHECK_THROWS_AS(prediction_row_from_json("nope"), std::invalid_argument);
}

TEST_CASE("confidence triage keeps only confident rows") {
    const PredictionLog log{
        make_row("r1", "p1", 0.9, true),    // confidence 0.4
        make_row("r2", "p1", 0.55, false),  // confidence 0.05
        make_row("r3", "p2", 0.2, false),   // confidence 0.3
    };
    const auto curve = confidence_curve(log, {0.0, 0.1, 0.35});
    REQUIRE(curve.points.size() == 3);
    const auto c = ConstructId::pos_aff();

    // t=0: everything with nonzero confidence stays; the hedged 0.55 row is a
    // false positive, so one of two negatives is wrong
    CHECK(curve.points[0].retained.at(c) == doctest::Approx(1.0));
    CHECK(*curve.points[0].balanced_accuracy.at(c).value == doctest::Approx(0.75));

    // t=0.1 drops the hedged 0.55 row
    CHECK(curve.points[1].retained.at(c) == doctest::Approx(2.0 / 3.0));
    CHECK(*curve.points[1].balanced_accuracy.at(c).value == doctest::Approx(1.0));

    // t=0.35 keeps only the 0.9 row: single class, metric missing
    CHECK(curve.points[2].retained.at(c) == doctest::Approx(1.0 / 3.0));
    CHECK_FALSE(curve.points[2].balanced_accuracy.at(c).value.has_value());
    CHECK_FALSE(curve.points[2].balanced_accuracy.at(c).missing_reason.empty());
}

TEST_CASE("an exactly-uncertain row is dropped at every threshold") {
    const PredictionLog log{
        make_row("r1", "p1", 0.5, true),
        make_row("r2", "p1", 0.6, true),
        make_row("r3", "p1", 0.3, false),
    };
    const auto curve = confidence_curve(log, {0.0});
    const auto c = ConstructId::pos_aff();
    CHECK(curve.points[0].retained.at(c) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("confidence thresholds are validated") {
    const PredictionLog log{make_row("r1", "p1", 0.9, true)};
    CHECK_THROWS_AS(confidence_curve(log, {0.2, 0.1}), std::invalid_argument);
    CHECK_THROWS_AS(confidence_curve(log, {-0.1}), std::invalid_argument);
    CHECK_THROWS_AS(confidence_curve(log, {0.6}), std::invalid_argument);
    CHECK_THROWS_AS(confidence_curve(log, {}), std::invalid_argument);
}

TEST_CASE("retention never increases along the threshold grid") {
    Rng rng(3);
    PredictionLog log;
    for (int i = 0; i < 400; ++i) {
        log.push_back(make_row("r" + std::to_string(i), "p" + std::to_string(i % 17),
                               rng.uniform(), rng.bernoulli(0.5)));
    }
    const auto curve = confidence_curve(log);
    const auto c = ConstructId::pos_aff();
    REQUIRE(curve.points.size() == 10);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        CHECK(curve.points[i].retained.at(c) <= curve.points[i - 1].retained.at(c) + 1e-12);
    }
    CHECK(curve.points[0].threshold == doctest::Approx(0.0));
    CHECK(curve.points.back().threshold == doctest::Approx(0.45));
}

TEST_CASE("an empty log still yields one point per threshold") {
    const auto curve = confidence_curve({}, {0.0, 0.2});
    REQUIRE(curve.points.size() == 2);
    for (const auto& point : curve.points) CHECK(point.retained.empty());
}

TEST_CASE("constant accuracy across length thresholds gives rho zero") {
    PredictionLog log;
    int id = 0;
    for (int w = 3; w <= 15; ++w) {
        // two rows per class at every length, always correct
        log.push_back(make_row("r" + std::to_string(id++), "p1", 0.9, true, w));
        log.push_back(make_row("r" + std::to_string(id++), "p1", 0.8, true, w));
        log.push_back(make_row("r" + std::to_string(id++), "p2", 0.1, false, w));
        log.push_back(make_row("r" + std::to_string(id++), "p2", 0.2, false, w));
    }
    const auto report = length_stratified_eval(log);
    const auto c = ConstructId::pos_aff();
    REQUIRE(report.rho.at(c).value.has_value());
    CHECK(*report.rho.at(c).value == doctest::Approx(0.0));
    REQUIRE(report.points.at(c).size() == 13);
    for (const auto& point : report.points.at(c)) {
        CHECK(*point.balanced_accuracy.value == doctest::Approx(1.0));
    }
}

TEST_CASE("degrading accuracy with length turns rho negative") {
    PredictionLog log;
    int id = 0;
    for (int w = 3; w <= 15; ++w) {
        const bool correct = w <= 9;
        log.push_back(make_row("r" + std::to_string(id++), "p1", correct ? 0.9 : 0.1, true, w));
        log.push_back(make_row("r" + std::to_string(id++), "p2", correct ? 0.1 : 0.9, false, w));
    }
    const auto report = length_stratified_eval(log);
    const auto c = ConstructId::pos_aff();
    REQUIRE(report.rho.at(c).value.has_value());
    CHECK(*report.rho.at(c).value < -0.8);
    REQUIRE(report.p_raw.at(c).value.has_value());
    REQUIRE(report.p_adj.at(c).value.has_value());
    CHECK(*report.p_adj.at(c).value >= *report.p_raw.at(c).value - 1e-12);
}

TEST_CASE("length report skips constructs with too few defined points") {
    // both classes exist only at the shortest length: every longer subset is
    // single-class or empty, leaving one defined point
    PredictionLog log{
        make_row("r1", "p1", 0.9, true, 3),
        make_row("r2", "p2", 0.1, false, 3),
        make_row("r3", "p1", 0.9, true, 10),
    };
    const auto report = length_stratified_eval(log);
    const auto c = ConstructId::pos_aff();
    CHECK_FALSE(report.rho.at(c).value.has_value());
    CHECK(report.rho.at(c).missing_reason.find("fewer than 3") != std::string::npos);
    CHECK_FALSE(report.p_adj.at(c).value.has_value());
}

TEST_CASE("next-day tasks use a stand-in query at the target's midnight") {
    std::vector<Participant> participants{
        {"p1", 50, "female", "White", "Breast", 1, false},
        {"p2", 60, "male", "White", "Lung", 2, false},
    };
    std::vector<DiaryRecord> records{
        day_record("s1", "p1", {2024, 3, 4, 9, 0, 0}, TimeBlock::Morning, "first entry", 2),
        day_record("s2", "p1", {2024, 3, 4, 19, 30, 0}, TimeBlock::Evening, "second entry", 4),
        day_record("t1", "p1", {2024, 3, 5, 10, 0, 0}, TimeBlock::Morning, "target text", 6),
        day_record("u1", "p2", {2024, 3, 4, 9, 0, 0}, TimeBlock::Morning, "solo source", 3),
        day_record("u2", "p2", {2024, 3, 5, 14, 0, 0}, TimeBlock::Afternoon, "their target", 7),
    };
    const Corpus corpus(std::move(participants), std::move(records));
    const auto folds = split_grouped_folds(corpus, 2, 1);

    auto trace = std::make_shared<QueryTrace>();
    const auto report = next_day_eval(tracing_factory(trace), corpus, folds, {});

    REQUIRE(report.rows.size() == 2);
    REQUIRE(trace->queries.size() == 2);

    const auto p1_probe =
        std::find_if(trace->queries.begin(), trace->queries.end(),
                     [](const DiaryRecord& r) { return r.participant_id == "p1"; });
    REQUIRE(p1_probe != trace->queries.end());
    CHECK(p1_probe->record_id == "t1:nextday");
    CHECK(p1_probe->text == "first entry; second entry");
    CHECK(p1_probe->timestamp == DateTime{2024, 3, 5, 0, 0, 0});
    CHECK(p1_probe->time_block == TimeBlock::Morning);

    for (const auto& row : report.rows) {
        if (row.participant_id == "p1") {
            CHECK(row.target_record_id == "t1");
            CHECK(row.source_count == 2);
            CHECK(row.target_block == TimeBlock::Morning);
            CHECK(row.labels.at(ConstructId::reg_desire()) == true);
        } else {
            CHECK(row.source_count == 1);
            CHECK(row.target_block == TimeBlock::Afternoon);
        }
    }

    // one stratum per (source_count, block) pair here
    CHECK(report.strata.size() == 2);
    for (const auto& stratum : report.strata) CHECK(stratum.n == 1);
}

TEST_CASE("gap days produce no next-day tasks") {
    std::vector<Participant> participants{
        {"p1", 50, "female", "White", "Breast", 1, false},
        {"p2", 60, "male", "White", "Lung", 2, false},
    };
    std::vector<DiaryRecord> records{
        day_record("a1", "p1", {2024, 3, 4, 9, 0, 0}, TimeBlock::Morning, "day one", 2),
        day_record("a2", "p1", {2024, 3, 6, 9, 0, 0}, TimeBlock::Morning, "day three", 8),
        day_record("b1", "p2", {2024, 3, 4, 9, 0, 0}, TimeBlock::Morning, "day one", 2),
        day_record("b2", "p2", {2024, 3, 7, 9, 0, 0}, TimeBlock::Morning, "day four", 8),
    };
    const Corpus corpus(std::move(participants), std::move(records));
    const auto folds = split_grouped_folds(corpus, 2, 1);
    const auto report = next_day_eval(tracing_factory(std::make_shared<QueryTrace>()), corpus,
                                      folds, {});
    CHECK(report.rows.empty());
}

TEST_CASE("next-day chance-level predictions give a null test") {
    const Corpus corpus =
        generate_synthetic_corpus({.n_participants = 14, .days = 8, .seed = 17});
    const auto folds = split_grouped_folds(corpus, 2, 3);
    // fixed 0.75: decisions are always True regardless of the label
    auto trace = std::make_shared<QueryTrace>();
    const auto report = next_day_eval(tracing_factory(trace, 0.75), corpus, folds, {});
    REQUIRE_FALSE(report.rows.empty());
    for (const auto& [c, m] : report.overall_balanced_accuracy) {
        if (!m.value) continue;
        CHECK(*m.value == doctest::Approx(0.5));  // all-True decisions
    }
}

TEST_CASE("warm-start split separates the first week from later records") {
    std::vector<Participant> participants{
        {"p1", 50, "female", "White", "Breast", 1, false},
        {"p2", 60, "male", "White", "Lung", 2, false},
    };
    std::vector<DiaryRecord> records{
        // p1 first record on 03-04: week 1 covers 03-04 .. 03-10
        day_record("w1", "p1", {2024, 3, 4, 9, 0, 0}, TimeBlock::Morning, "start", 2),
        day_record("w2", "p1", {2024, 3, 6, 9, 0, 0}, TimeBlock::Morning, "still week one", 4),
        day_record("e1", "p1", {2024, 3, 11, 9, 0, 0}, TimeBlock::Morning, "exactly day eight",
                   6),
        day_record("e2", "p1", {2024, 3, 13, 9, 0, 0}, TimeBlock::Morning, "later", 8),
        // p2 never leaves the first week: does not qualify
        day_record("o1", "p2", {2024, 3, 4, 9, 0, 0}, TimeBlock::Morning, "one", 3),
        day_record("o2", "p2", {2024, 3, 9, 9, 0, 0}, TimeBlock::Morning, "two", 7),
    };
    const Corpus corpus(std::move(participants), std::move(records));
    const auto split = warm_start_split(corpus);

    REQUIRE(split.week1.count("p1") == 1);
    CHECK(split.week1.at("p1") == std::set<std::string>{"w1", "w2"});
    REQUIRE(split.later.count("p1") == 1);
    std::vector<std::string> later_ids;
    for (const auto* r : split.later.at("p1")) later_ids.push_back(r->record_id);
    CHECK(later_ids == std::vector<std::string>{"e1", "e2"});

    CHECK(split.week1.count("p2") == 0);
    CHECK(split.later.count("p2") == 0);
}

TEST_CASE("warm-start evaluates identical records under both conditions") {
    const Corpus corpus =
        generate_synthetic_corpus({.n_participants = 8, .days = 12, .seed = 23});
    const auto split = warm_start_split(corpus);
    REQUIRE_FALSE(split.week1.empty());
    const auto labels = derive_binary_labels(corpus);

    std::vector<std::map<std::string, std::set<std::string>>> calls;
    const WarmPredictorFactory factory =
        [&](const std::map<std::string, std::set<std::string>>& own_allowed)
        -> std::unique_ptr<Predictor> {
        calls.push_back(own_allowed);
        class Fixed : public Predictor {
        public:
            explicit Fixed(std::vector<ConstructId> constructs)
                : constructs_(std::move(constructs)) {}
            std::map<ConstructId, double> predict(const DiaryRecord&) override {
                std::map<ConstructId, double> out;
                for (const auto& c : constructs_) out[c] = 0.6;
                return out;
            }
            std::string name() const override { return "fixed"; }

        private:
            std::vector<ConstructId> constructs_;
        };
        return std::make_unique<Fixed>(corpus.constructs());
    };

    const auto report = warm_start_eval(factory, corpus, {});

    // one peer-only build (empty map) and one warm build (the week-1 sets)
    REQUIRE(calls.size() == 2);
    const bool first_is_peer = calls[0].empty();
    const auto& warm_call = first_is_peer ? calls[1] : calls[0];
    CHECK((first_is_peer ? calls[0] : calls[1]).empty());
    CHECK(warm_call == report.week1);
    CHECK(report.week1 == split.week1);

    // both conditions predicted exactly the later records, same order
    REQUIRE(report.peer_rows.size() == report.warm_rows.size());
    std::set<std::string> week1_ids;
    for (const auto& [pid, ids] : split.week1) week1_ids.insert(ids.begin(), ids.end());
    for (std::size_t i = 0; i < report.peer_rows.size(); ++i) {
        CHECK(report.peer_rows[i].record_id == report.warm_rows[i].record_id);
        CHECK(week1_ids.count(report.peer_rows[i].record_id) == 0);
    }
    std::size_t later_total = 0;
    for (const auto& [pid, recs] : split.later) later_total += recs.size();
    CHECK(report.peer_rows.size() == later_total);

    // identical predictors under both conditions: every paired difference is
    // zero, so the test statistic is undefined and stays missing
    for (const auto& [c, m] : report.p_raw) {
        CHECK_FALSE(m.value.has_value());
    }
    CHECK(report.participants.size() == split.later.size());
    CHECK(std::is_sorted(report.participants.begin(), report.participants.end()));
}

TEST_CASE("report serialization is valid json with maybe-metric entries") {
    const Corpus corpus = generate_synthetic_corpus({.n_participants = 8, .days = 4, .seed = 6});
    const auto folds = split_grouped_folds(corpus, 2, 9);
    EvalOptions opts;
    opts.predictor_name = "perfect";
    opts.model_name = "mock";
    const auto report = cross_validate(perfect_factory(), corpus, folds, opts);

    const auto parsed = json::parse(eval_report_to_json(report));
    CHECK(parsed.at("predictor_name") == "perfect");
    CHECK(parsed.at("n_folds") == 2);
    CHECK_FALSE(parsed.at("config_hash").get<std::string>().empty());
    REQUIRE(parsed.at("constructs").is_array());
    const auto& first = parsed.at("constructs").at(0);
    CHECK(first.contains("mean_balanced_accuracy"));
    CHECK(first.at("mean_balanced_accuracy").contains("value"));
    // rows ship separately as jsonl; the report only carries the count
    CHECK(parsed.at("n_rows") == report.rows.size());

    const auto table = eval_report_table(report);
    for (const auto& summary : report.constructs) {
        CHECK(table.find(summary.construct.key()) != std::string::npos);
    }

    // the other report forms parse too
    const auto curve = confidence_curve(report.rows);
    CHECK_NOTHROW(json::parse(confidence_curve_to_json(curve)));
    const auto length = length_stratified_eval(report.rows);
    CHECK_NOTHROW(json::parse(length_report_to_json(length)));
}

TEST_CASE("config hash tracks the options") {
    const Corpus corpus = generate_synthetic_corpus({.n_participants = 6, .days = 4, .seed = 3});
    const auto folds = split_grouped_folds(corpus, 2, 4);
    EvalOptions a;
    a.predictor_name = "one";
    EvalOptions b;
    b.predictor_name = "two";
    const auto ra = cross_validate(perfect_factory(), corpus, folds, a);
    const auto rb = cross_validate(perfect_factory(), corpus, folds, b);
    CHECK(ra.config_hash != rb.config_hash);
}

}  // TEST_SUITE
