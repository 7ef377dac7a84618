#pragma once
// Deterministic prompt assembly. The rendered prompt has five sections in a
// fixed order: diary entry introduction, metric definitions, optional recent
// trajectory, optional similar peer cases, and the response-format
// restriction. Identical inputs produce identical bytes; golden-file tests
// pin the wording per template version.

#include <string>
#include <utility>
#include <vector>

#include "diarylens/corpus.hpp"
#include "diarylens/vectorstore.hpp"

namespace diarylens {

// Bump when any rendered wording changes; recorded in every report and
// provenance line. The layout is documented in docs/prompt-template-v1.md.
inline constexpr const char* kTemplateVersion = "v1";

// System message sent alongside every rendered prompt.
inline constexpr const char* kSystemText =
    "You are an emotion analysis assistant specifically trained for cancer survivors. "
    "You assess short mobile diary entries and estimate the writer's momentary emotional "
    "states relative to their own typical levels.";

enum class HistoryMode { None, CurrentDay, LastDay };

std::string history_mode_name(HistoryMode mode);       // "None" | "CurrentDay" | "LastDay"
HistoryMode parse_history_mode(const std::string& name);  // throws std::invalid_argument

struct PromptConfig {
    HistoryMode history_mode = HistoryMode::None;
    int k_examples = 0;  // 0-20 retrieved peer cases
    std::vector<ConstructId> constructs;
    bool include_continuous = false;  // also ask for raw score estimates
    std::string template_version = kTemplateVersion;
};

struct PromptBundle {
    std::string query_record_id;
    std::string traits_text;
    std::vector<std::pair<std::string, std::string>> history;   // (timestamp, text)
    std::vector<std::pair<std::string, std::string>> examples;  // (text, outcome summary)
    std::string rendered;
};

// Participant entries inside the history window, ascending by (timestamp,
// record_id). Windows are half-open [start, query_time) where start is the
// query day's local midnight (CurrentDay) or the previous day's midnight
// (LastDay); None selects nothing. exclude_record_id drops the query entry
// itself when timestamps collide.
std::vector<const DiaryRecord*> select_history(const Corpus& corpus,
                                               const std::string& participant_id,
                                               const DateTime& query_time, HistoryMode mode,
                                               const std::string& exclude_record_id = "");

// "60-year-old female, stage II Breast cancer, currently receiving
// treatment"; stages 1-4 render as roman numerals, stage 0 as "0".
std::string format_traits(const Participant& p);

// "2024-03-08 19:30 (evening)"
std::string format_prompt_timestamp(const DateTime& ts, TimeBlock block);

// Numbered case blocks with each peer's diary text and ground-truth
// outcomes; never contains participant or record identifiers. Empty input
// renders the "No similar cases available." placeholder.
std::string format_examples(const std::vector<SearchHit>& retrieved,
                            const std::vector<ConstructId>& constructs);

// Assembles the full prompt. history must already satisfy the mode's window
// (callers use select_history); retrieved must be ascending by distance and
// no longer than k_examples. Throws std::invalid_argument on an empty
// construct list or an oversized example list.
PromptBundle build_prompt(const PromptConfig& config, const DiaryRecord& query,
                          const Participant& traits,
                          const std::vector<const DiaryRecord*>& history,
                          const std::vector<SearchHit>& retrieved);

}  // namespace diarylens
