#pragma once
// Grouped cross-validation over arbitrary predictors plus the four post-hoc
// analyses: confidence triage, entry-length stratification, next-day
// prediction and warm-start personalization. Reports carry per-fold values
// so aggregates are always recomputable, and undefined metrics stay visible
// as missing values with a reason instead of disappearing.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "diarylens/corpus.hpp"
#include "diarylens/prompting.hpp"
#include "diarylens/stats.hpp"

namespace diarylens {

// Everything a predictor may learn from: training-fold participants only.
// Factories must not touch records of other participants.
struct TrainContext {
    const Corpus& corpus;
    const std::map<std::string, LabelSet>& labels;
    const std::set<std::string>& train_participants;
    int fold = -1;  // -1 outside cross-validation
    std::uint64_t seed = 0;
};

class Predictor {
public:
    virtual ~Predictor() = default;
    // Probability in [0,1] per construct for one query record.
    virtual std::map<ConstructId, double> predict(const DiaryRecord& query) = 0;
    virtual std::string name() const = 0;
};

using PredictorFactory = std::function<std::unique_ptr<Predictor>(const TrainContext&)>;

struct MaybeMetric {
    std::optional<double> value;
    std::string missing_reason;  // why value is absent
};

struct PredictionRow {
    std::string record_id;
    std::string participant_id;
    int fold = -1;
    int word_count = 0;
    std::map<ConstructId, double> probabilities;
    std::map<ConstructId, bool> decisions;  // p > 0.5
    std::map<ConstructId, bool> labels;     // ground truth where defined
};
using PredictionLog = std::vector<PredictionRow>;

std::string prediction_row_to_json(const PredictionRow& row);  // one JSONL line
PredictionRow prediction_row_from_json(const std::string& line);

struct FoldMetric {
    int fold = 0;
    MaybeMetric balanced_accuracy;
    MaybeMetric roc_auc;
    int n = 0;          // labeled records in the fold
    int positives = 0;  // of which labeled True
};

struct ConstructSummary {
    ConstructId construct;
    std::vector<FoldMetric> folds;
    // across defined folds; population std (divide by fold count)
    MaybeMetric mean_balanced_accuracy, std_balanced_accuracy;
    MaybeMetric mean_roc_auc, std_roc_auc;
};

struct EvalReport {
    std::string predictor_name;
    std::string model_name;
    std::string template_version;
    std::uint64_t seed = 0;
    int n_folds = 0;
    std::string config_hash;  // FNV over the run configuration, hex
    std::vector<ConstructSummary> constructs;
    PredictionLog rows;
};

struct EvalOptions {
    std::vector<ConstructId> constructs;  // empty = corpus.constructs()
    std::uint64_t seed = 0;
    std::string predictor_name;
    std::string model_name;
    std::string template_version = kTemplateVersion;
    std::string config_summary;  // extra text folded into config_hash
    bool parallel = true;        // evaluate folds on separate threads
};

// For each fold: builds a predictor from the other folds' participants and
// predicts every labeled record of the fold's participants. Metrics are per
// construct per fold; single-class folds are recorded as missing with the
// class counts as reason.
EvalReport cross_validate(const PredictorFactory& factory, const Corpus& corpus,
                          const FoldAssignment& folds, const EvalOptions& opts = {});

struct ConfidencePoint {
    double threshold = 0;
    std::map<ConstructId, double> retained;  // fraction of evaluable rows kept
    std::map<ConstructId, MaybeMetric> balanced_accuracy;
};

struct ConfidenceCurve {
    std::vector<ConfidencePoint> points;  // one per threshold, ascending
};

std::vector<double> default_confidence_thresholds();  // 0, 0.05, ..., 0.45

// At threshold t keep rows with |p - 0.5| > t; thresholds must be ascending
// within [0, 0.5].
ConfidenceCurve confidence_curve(const PredictionLog& log,
                                 const std::vector<double>& thresholds =
                                     default_confidence_thresholds());

struct LengthPoint {
    int min_words = 0;  // subset: rows with word_count >= min_words
    MaybeMetric balanced_accuracy;
    int n = 0;
};

struct LengthReport {
    std::map<ConstructId, std::vector<LengthPoint>> points;
    std::map<ConstructId, MaybeMetric> rho;    // Spearman over (threshold, accuracy)
    std::map<ConstructId, MaybeMetric> p_raw;
    std::map<ConstructId, MaybeMetric> p_adj;  // Benjamini-Hochberg across constructs
};

LengthReport length_stratified_eval(const PredictionLog& log, int min_words = 3,
                                    int max_words = 15);

struct NextDayRow {
    std::string participant_id;
    std::string target_record_id;
    int fold = -1;
    int source_count = 0;  // diary entries in the source day
    TimeBlock target_block = TimeBlock::Morning;
    std::map<ConstructId, double> probabilities;
    std::map<ConstructId, bool> decisions;
    std::map<ConstructId, bool> labels;
};

struct NextDayStratum {
    int source_count = 0;
    TimeBlock target_block = TimeBlock::Morning;
    int n = 0;
    std::map<ConstructId, MaybeMetric> balanced_accuracy;
};

struct NextDayReport {
    std::vector<NextDayRow> rows;
    std::vector<NextDayStratum> strata;  // by (source_count, target_block)
    std::map<ConstructId, MaybeMetric> overall_balanced_accuracy;
    // per-participant accuracy vs. chance, Wilcoxon signed-rank + BH
    std::map<ConstructId, MaybeMetric> p_raw;
    std::map<ConstructId, MaybeMetric> p_adj;
};

// Pairs of consecutive days with entries on both sides: each target-day
// record becomes one task, predicted from a stand-in query whose text joins
// the source day's entries and whose timestamp is the target day's midnight,
// so a LastDay trajectory window covers exactly the source day. Slots
// without ground truth are skipped. Predictors are built per fold as in
// cross_validate.
NextDayReport next_day_eval(const PredictorFactory& factory, const Corpus& corpus,
                            const FoldAssignment& folds, const EvalOptions& opts = {});

// Warm-start condition builder: own_allowed lists, per test participant,
// their own record ids permitted in the retrieval pool (empty = peer-only).
using WarmPredictorFactory = std::function<std::unique_ptr<Predictor>(
    const std::map<std::string, std::set<std::string>>& own_allowed)>;

struct WarmStartSplit {
    // first-week record ids per participant (first 7 calendar days from
    // that participant's first record)
    std::map<std::string, std::set<std::string>> week1;
    // later-week records per participant; only participants with both
    // week-1 and later records qualify
    std::map<std::string, std::vector<const DiaryRecord*>> later;
};

WarmStartSplit warm_start_split(const Corpus& corpus);

struct WarmStartReport {
    std::vector<std::string> participants;  // qualifying, sorted
    std::map<std::string, std::set<std::string>> week1;
    PredictionLog peer_rows;  // peer-only condition
    PredictionLog warm_rows;  // own week-1 added to the pool
    std::map<ConstructId, MaybeMetric> peer_balanced_accuracy;  // pooled
    std::map<ConstructId, MaybeMetric> warm_balanced_accuracy;
    // paired per-participant accuracy differences (warm - peer),
    // Wilcoxon signed-rank + BH
    std::map<ConstructId, MaybeMetric> p_raw;
    std::map<ConstructId, MaybeMetric> p_adj;
};

// Both conditions predict the identical later-week records; week-1 records
// are never tested.
WarmStartReport warm_start_eval(const WarmPredictorFactory& make_predictor,
                                const Corpus& corpus, const EvalOptions& opts = {});

// Machine-readable report forms for run directories.
std::string eval_report_to_json(const EvalReport& report);
std::string confidence_curve_to_json(const ConfidenceCurve& curve);
std::string length_report_to_json(const LengthReport& report);
std::string next_day_report_to_json(const NextDayReport& report);
std::string warm_start_report_to_json(const WarmStartReport& report);

// Fixed-width per-construct summary ("construct  bacc mean+-std  auc
// mean+-std  folds") for console output.
std::string eval_report_table(const EvalReport& report);

}  // namespace diarylens
