#pragma once
// Data model for diary corpora: participants, diary records with their survey
// item scores, per-participant binary labels, grouped fold assignment, and
// corpus validation. Corpora are immutable after load and safe to share
// across threads.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "diarylens/constructs.hpp"
#include "diarylens/datetime.hpp"

namespace diarylens {

struct Participant {
    std::string participant_id;
    int age = 0;                   // years, > 0
    std::string gender;
    std::string race_ethnicity;
    std::string cancer_type;
    int cancer_stage = 0;          // 0-4
    bool on_treatment = false;
};

struct DiaryRecord {
    std::string record_id;
    std::string participant_id;
    DateTime timestamp;
    TimeBlock time_block = TimeBlock::Morning;
    std::string text;

    // "In the past hour, how much did you feel ..." 0-10 each.
    int happy = 0;
    int cheerful = 0;
    int pleased = 0;
    int sad = 0;
    int afraid = 0;
    int miserable = 0;

    int regulation_desire = 0;                 // 0-10
    std::optional<int> social_quality;         // 0-10, may be skipped
    bool availability = false;                 // yes/no
    std::map<std::string, int> extra_states;   // e.g. grateful, worried, lonely, pain
};

// Positive affect = happy + cheerful + pleased, negative = sad + afraid +
// miserable, each on 0-30.
std::pair<int, int> composite_affect(const DiaryRecord& record);

struct LabelSet {
    std::string record_id;
    std::map<ConstructId, bool> labels;
    std::map<ConstructId, double> continuous;
};

class CorpusError : public std::runtime_error {
public:
    CorpusError(std::string message, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                      : message),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

class Corpus {
public:
    Corpus() = default;
    Corpus(std::vector<Participant> participants, std::vector<DiaryRecord> records);

    const std::vector<Participant>& participants() const { return participants_; }
    const std::vector<DiaryRecord>& records() const { return records_; }

    const Participant* participant(const std::string& id) const;
    const DiaryRecord* record(const std::string& id) const;

    // Records of one participant, ascending by (timestamp, record_id).
    const std::vector<const DiaryRecord*>& records_of(const std::string& participant_id) const;

    // Core five plus one extra construct per distinct extra-state name.
    std::vector<ConstructId> constructs() const;

private:
    std::vector<Participant> participants_;
    std::vector<DiaryRecord> records_;
    std::unordered_map<std::string, std::size_t> participant_index_;
    std::unordered_map<std::string, std::size_t> record_index_;
    std::unordered_map<std::string, std::vector<const DiaryRecord*>> by_participant_;
};

// Newline-delimited records, one JSON object per line, discriminated by a
// "kind" field ("participant" | "diary"). Throws CorpusError with the
// offending line number on parse errors, duplicate ids, unknown participant
// references or out-of-range scores.
Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);

// Per participant, per construct: mean over that participant's non-missing
// scores; label True iff the score strictly exceeds the mean. Availability
// passes through as its own boolean. Missing scores yield absent labels.
std::map<std::string, LabelSet> derive_binary_labels(const Corpus& corpus);

struct FoldAssignment {
    int n_folds = 0;
    std::map<std::string, int> fold_of;  // participant_id -> [0, n_folds)

    std::set<std::string> participants_in(int fold) const;
    std::set<std::string> participants_not_in(int fold) const;
};

// Deterministic under seed; participant counts per fold differ by at most 1.
// Throws CorpusError when there are fewer participants than folds.
FoldAssignment split_grouped_folds(const Corpus& corpus, int n_folds, std::uint64_t seed);

struct ValidationWarning {
    std::string code;       // EMPTY_TEXT, OUT_OF_WINDOW, FEW_RECORDS, DUP_TIMESTAMP
    std::string record_id;  // participant_id for participant-level warnings
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationWarning> warnings;
    bool ok() const { return warnings.empty(); }
    // "WARN <code> <record_id> <message>" lines
    std::string to_text() const;
};

ValidationReport validate_corpus(const Corpus& corpus);

}  // namespace diarylens
