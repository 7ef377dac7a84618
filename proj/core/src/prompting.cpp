#include "diarylens/prompting.hpp"

#include <cstdio>
#include <stdexcept>

#include "diarylens/util.hpp"

namespace diarylens {

namespace {

const char* roman_stage(int stage) {
    switch (stage) {
        case 0: return "0";
        case 1: return "I";
        case 2: return "II";
        case 3: return "III";
        case 4: return "IV";
    }
    throw std::invalid_argument("cancer stage out of range: " + std::to_string(stage));
}

// One definition line per construct for the metrics section.
std::string metric_line(const ConstructId& c) {
    switch (c.kind()) {
        case ConstructId::Kind::PosAff:
            return "- positive_affect_high: positive affect, the sum of the happy, cheerful and "
                   "pleased ratings (0-30); present when above the writer's personal average.";
        case ConstructId::Kind::NegAff:
            return "- negative_affect_high: negative affect, the sum of the sad, afraid and "
                   "miserable ratings (0-30); present when above the writer's personal average.";
        case ConstructId::Kind::IntAvail:
            return "- intervention_available: whether the writer is available for a brief "
                   "support exercise (yes/no).";
        default: {
            const auto [lo, hi] = c.scale();
            return "- " + c.key() + ": " + c.display_name() + ", rated " + std::to_string(lo) +
                   "-" + std::to_string(hi) +
                   "; present when above the writer's personal average.";
        }
    }
}

// "positive affect 21/30 (high: yes), ..., intervention availability: no"
std::string outcome_summary(const IndexedEntry& entry,
                            const std::vector<ConstructId>& constructs) {
    std::string out;
    for (const auto& c : constructs) {
        const auto label = entry.labels.find(c);
        if (label == entry.labels.end()) continue;  // not scored on this entry
        if (!out.empty()) out += ", ";
        if (c.kind() == ConstructId::Kind::IntAvail) {
            out += c.display_name() + ": " + (label->second ? "yes" : "no");
            continue;
        }
        out += c.display_name();
        const auto score = entry.continuous.find(c);
        if (score != entry.continuous.end()) {
            out += " " + format_fixed(score->second, 0) + "/" + std::to_string(c.scale().second);
        }
        out += std::string(" (high: ") + (label->second ? "yes" : "no") + ")";
    }
    if (out.empty()) out = "no outcome data";
    return out;
}

}  // namespace

std::string history_mode_name(HistoryMode mode) {
    switch (mode) {
        case HistoryMode::None: return "None";
        case HistoryMode::CurrentDay: return "CurrentDay";
        case HistoryMode::LastDay: return "LastDay";
    }
    return "None";
}

HistoryMode parse_history_mode(const std::string& name) {
    if (name == "None") return HistoryMode::None;
    if (name == "CurrentDay") return HistoryMode::CurrentDay;
    if (name == "LastDay") return HistoryMode::LastDay;
    throw std::invalid_argument("unknown history mode '" + name + "'");
}

std::vector<const DiaryRecord*> select_history(const Corpus& corpus,
                                               const std::string& participant_id,
                                               const DateTime& query_time, HistoryMode mode,
                                               const std::string& exclude_record_id) {
    if (mode == HistoryMode::None) return {};
    const DateTime start = mode == HistoryMode::CurrentDay ? query_time.start_of_day()
                                                           : query_time.start_of_day().plus_days(-1);
    std::vector<const DiaryRecord*> out;
    for (const DiaryRecord* r : corpus.records_of(participant_id)) {
        if (r->record_id == exclude_record_id) continue;
        if (r->timestamp >= start && r->timestamp < query_time) out.push_back(r);
    }
    return out;  // records_of is already chronologically sorted
}

std::string format_traits(const Participant& p) {
    std::string out = std::to_string(p.age) + "-year-old " + p.gender + ", stage " +
                      roman_stage(p.cancer_stage) + " " + p.cancer_type + " cancer";
    if (p.on_treatment) out += ", currently receiving treatment";
    return out;
}

std::string format_prompt_timestamp(const DateTime& ts, TimeBlock block) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d", ts.year, ts.month, ts.day,
                  ts.hour, ts.minute);
    return std::string(buf) + " (" + std::string(time_block_lower(block)) + ")";
}

std::string format_examples(const std::vector<SearchHit>& retrieved,
                            const std::vector<ConstructId>& constructs) {
    if (retrieved.empty()) return "No similar cases available.\n";
    std::string out;
    for (std::size_t i = 0; i < retrieved.size(); ++i) {
        const IndexedEntry& entry = *retrieved[i].entry;
        if (i) out += "\n";
        out += "Case " + std::to_string(i + 1) + ":\n";
        out += "\"" + entry.text + "\"\n";
        out += "Outcomes: " + outcome_summary(entry, constructs) + "\n";
    }
    return out;
}

PromptBundle build_prompt(const PromptConfig& config, const DiaryRecord& query,
                          const Participant& traits,
                          const std::vector<const DiaryRecord*>& history,
                          const std::vector<SearchHit>& retrieved) {
    if (config.constructs.empty()) {
        throw std::invalid_argument("build_prompt: construct list is empty");
    }
    if (static_cast<int>(retrieved.size()) > config.k_examples) {
        throw std::invalid_argument("build_prompt: " + std::to_string(retrieved.size()) +
                                    " examples exceed k=" + std::to_string(config.k_examples));
    }

    PromptBundle bundle;
    bundle.query_record_id = query.record_id;
    bundle.traits_text = format_traits(traits);

    std::string p;
    // 1. diary entry introduction
    p += "## Diary entry\n\n";
    p += "Writer: " + bundle.traits_text + "\n";
    p += "Time: " + format_prompt_timestamp(query.timestamp, query.time_block) + "\n";
    p += "Text: \"" + query.text + "\"\n";

    // 2. metric definitions
    p += "\n## Metrics\n\n";
    p += "Assess the writer's momentary states at the time of this entry. Binary states are "
         "relative to the writer's own typical level, not to other people.\n";
    for (const auto& c : config.constructs) p += metric_line(c) + "\n";

    // 3. recent trajectory (history modes only)
    if (config.history_mode != HistoryMode::None) {
        p += "\n## Recent trajectory\n\n";
        p += config.history_mode == HistoryMode::CurrentDay
                 ? "Earlier entries by the same writer since midnight:\n"
                 : "Earlier entries by the same writer since the previous day:\n";
        if (history.empty()) {
            p += "(no earlier entries in this window)\n";
        }
        for (const DiaryRecord* r : history) {
            const std::string ts = format_prompt_timestamp(r->timestamp, r->time_block);
            bundle.history.emplace_back(ts, r->text);
            p += "- " + ts + ": \"" + r->text + "\"\n";
        }
    }

    // 4. similar peer cases (k > 0 only)
    if (config.k_examples > 0) {
        p += "\n## Similar cases\n\n";
        p += "Diary entries from other cancer survivors with similar content, closest first, "
             "with their ground-truth outcomes:\n\n";
        p += format_examples(retrieved, config.constructs);
        for (const auto& hit : retrieved) {
            bundle.examples.emplace_back(hit.entry->text,
                                         outcome_summary(*hit.entry, config.constructs));
        }
    }

    // 5. response format restriction
    p += "\n## Response format\n\n";
    p += "Respond with a single JSON object mapping each of these keys to a probability "
         "between 0.0 and 1.0 that the state is present, where 0.5 means uncertain: ";
    for (std::size_t i = 0; i < config.constructs.size(); ++i) {
        if (i) p += ", ";
        p += config.constructs[i].key();
    }
    p += ".";
    if (config.include_continuous) {
        std::string score_keys;
        for (const auto& c : config.constructs) {
            if (c.score_key().empty()) continue;
            if (!score_keys.empty()) score_keys += ", ";
            const auto [lo, hi] = c.scale();
            score_keys +=
                c.score_key() + " (" + std::to_string(lo) + "-" + std::to_string(hi) + ")";
        }
        if (!score_keys.empty()) {
            p += " Also include raw score estimates under these keys: " + score_keys + ".";
        }
    }
    p += " Wrap the object in <PREDICTIONS></PREDICTIONS> tags and output nothing else.\n";

    bundle.rendered = std::move(p);
    return bundle;
}

}  // namespace diarylens
