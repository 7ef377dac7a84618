#include "diarylens/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "diarylens/util.hpp"

namespace diarylens {

using nlohmann::json;

std::pair<int, int> composite_affect(const DiaryRecord& r) {
    return {r.happy + r.cheerful + r.pleased, r.sad + r.afraid + r.miserable};
}

Corpus::Corpus(std::vector<Participant> participants, std::vector<DiaryRecord> records)
    : participants_(std::move(participants)), records_(std::move(records)) {
    for (std::size_t i = 0; i < participants_.size(); ++i) {
        const auto& id = participants_[i].participant_id;
        if (!participant_index_.emplace(id, i).second) {
            throw CorpusError("duplicate participant_id '" + id + "'");
        }
    }
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (!record_index_.emplace(r.record_id, i).second) {
            throw CorpusError("duplicate record_id '" + r.record_id + "'");
        }
        if (!participant_index_.count(r.participant_id)) {
            throw CorpusError("record '" + r.record_id + "' references unknown participant '" +
                              r.participant_id + "'");
        }
        auto check_item = [&](const char* name, int value) {
            if (value < 0 || value > 10) {
                throw CorpusError("record '" + r.record_id + "': " + name + " score " +
                                  std::to_string(value) + " outside 0-10");
            }
        };
        check_item("happy", r.happy);
        check_item("cheerful", r.cheerful);
        check_item("pleased", r.pleased);
        check_item("sad", r.sad);
        check_item("afraid", r.afraid);
        check_item("miserable", r.miserable);
        check_item("regulation_desire", r.regulation_desire);
        if (r.social_quality) check_item("social_quality", *r.social_quality);
        for (const auto& [name, value] : r.extra_states) check_item(name.c_str(), value);
        by_participant_[r.participant_id].push_back(&records_[i]);
    }
    for (auto& [id, list] : by_participant_) {
        std::sort(list.begin(), list.end(), [](const DiaryRecord* a, const DiaryRecord* b) {
            if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
            return a->record_id < b->record_id;
        });
    }
}

const Participant* Corpus::participant(const std::string& id) const {
    auto it = participant_index_.find(id);
    return it == participant_index_.end() ? nullptr : &participants_[it->second];
}

const DiaryRecord* Corpus::record(const std::string& id) const {
    auto it = record_index_.find(id);
    return it == record_index_.end() ? nullptr : &records_[it->second];
}

const std::vector<const DiaryRecord*>& Corpus::records_of(
    const std::string& participant_id) const {
    static const std::vector<const DiaryRecord*> empty;
    auto it = by_participant_.find(participant_id);
    return it == by_participant_.end() ? empty : it->second;
}

std::vector<ConstructId> Corpus::constructs() const {
    std::set<std::string> extras;
    for (const auto& r : records_) {
        for (const auto& [name, value] : r.extra_states) extras.insert(name);
    }
    auto out = core_constructs();
    for (const auto& name : extras) out.push_back(ConstructId::extra(name));
    return out;
}

namespace {

int require_score(const json& obj, const char* field, int line, int lo = 0, int hi = 10) {
    if (!obj.contains(field) || !obj[field].is_number_integer()) {
        throw CorpusError(std::string("missing or non-integer field '") + field + "'", line);
    }
    const int v = obj[field].get<int>();
    if (v < lo || v > hi) {
        throw CorpusError(std::string("score out of range ") + std::to_string(lo) + "-" +
                              std::to_string(hi) + " for '" + field + "'",
                          line);
    }
    return v;
}

std::string require_string(const json& obj, const char* field, int line) {
    if (!obj.contains(field) || !obj[field].is_string()) {
        throw CorpusError(std::string("missing or non-string field '") + field + "'", line);
    }
    return obj[field].get<std::string>();
}

Participant parse_participant(const json& obj, int line) {
    Participant p;
    p.participant_id = require_string(obj, "participant_id", line);
    p.age = require_score(obj, "age", line, 1, 150);
    p.gender = require_string(obj, "gender", line);
    p.race_ethnicity = obj.value("race_ethnicity", std::string{});
    p.cancer_type = require_string(obj, "cancer_type", line);
    p.cancer_stage = require_score(obj, "cancer_stage", line, 0, 4);
    if (!obj.contains("on_treatment") || !obj["on_treatment"].is_boolean()) {
        throw CorpusError("missing or non-boolean field 'on_treatment'", line);
    }
    p.on_treatment = obj["on_treatment"].get<bool>();
    return p;
}

DiaryRecord parse_diary(const json& obj, int line) {
    DiaryRecord r;
    r.record_id = require_string(obj, "record_id", line);
    r.participant_id = require_string(obj, "participant_id", line);
    const auto ts = DateTime::parse(require_string(obj, "timestamp", line));
    if (!ts) throw CorpusError("unparseable timestamp", line);
    r.timestamp = *ts;
    const auto block = parse_time_block(require_string(obj, "time_block", line));
    if (!block) throw CorpusError("unknown time_block", line);
    r.time_block = *block;
    if (!obj.contains("text") || !obj["text"].is_string()) {
        throw CorpusError("missing or non-string field 'text'", line);
    }
    r.text = obj["text"].get<std::string>();
    r.happy = require_score(obj, "happy", line);
    r.cheerful = require_score(obj, "cheerful", line);
    r.pleased = require_score(obj, "pleased", line);
    r.sad = require_score(obj, "sad", line);
    r.afraid = require_score(obj, "afraid", line);
    r.miserable = require_score(obj, "miserable", line);
    r.regulation_desire = require_score(obj, "regulation_desire", line);
    if (obj.contains("social_quality") && !obj["social_quality"].is_null()) {
        r.social_quality = require_score(obj, "social_quality", line);
    }
    if (!obj.contains("availability") || !obj["availability"].is_boolean()) {
        throw CorpusError("missing or non-boolean field 'availability'", line);
    }
    r.availability = obj["availability"].get<bool>();
    if (obj.contains("extra_states")) {
        if (!obj["extra_states"].is_object()) {
            throw CorpusError("'extra_states' must be an object", line);
        }
        for (const auto& [name, value] : obj["extra_states"].items()) {
            if (!value.is_number_integer() || value.get<int>() < 0 || value.get<int>() > 10) {
                throw CorpusError("score out of range 0-10 for extra state '" + name + "'", line);
            }
            r.extra_states[name] = value.get<int>();
        }
    }
    return r;
}

}  // namespace

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open '" + path + "'");

    std::vector<Participant> participants;
    std::vector<DiaryRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            throw CorpusError("malformed JSON record", line_no);
        }
        const std::string kind = obj.value("kind", std::string{});
        if (kind == "participant") {
            participants.push_back(parse_participant(obj, line_no));
        } else if (kind == "diary") {
            records.push_back(parse_diary(obj, line_no));
        } else {
            throw CorpusError("unknown record kind '" + kind + "'", line_no);
        }
    }
    return Corpus(std::move(participants), std::move(records));
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CorpusError("cannot write '" + path + "'");
    for (const auto& p : corpus.participants()) {
        json obj{{"kind", "participant"},
                 {"participant_id", p.participant_id},
                 {"age", p.age},
                 {"gender", p.gender},
                 {"race_ethnicity", p.race_ethnicity},
                 {"cancer_type", p.cancer_type},
                 {"cancer_stage", p.cancer_stage},
                 {"on_treatment", p.on_treatment}};
        out << obj.dump() << '\n';
    }
    for (const auto& r : corpus.records()) {
        json obj{{"kind", "diary"},
                 {"record_id", r.record_id},
                 {"participant_id", r.participant_id},
                 {"timestamp", r.timestamp.to_string()},
                 {"time_block", std::string(time_block_name(r.time_block))},
                 {"text", r.text},
                 {"happy", r.happy},
                 {"cheerful", r.cheerful},
                 {"pleased", r.pleased},
                 {"sad", r.sad},
                 {"afraid", r.afraid},
                 {"miserable", r.miserable},
                 {"regulation_desire", r.regulation_desire},
                 {"availability", r.availability}};
        if (r.social_quality) obj["social_quality"] = *r.social_quality;
        if (!r.extra_states.empty()) obj["extra_states"] = r.extra_states;
        out << obj.dump() << '\n';
    }
}

namespace {

// Continuous score of one record for one construct; nullopt when missing.
std::optional<double> construct_score(const DiaryRecord& r, const ConstructId& c) {
    switch (c.kind()) {
        case ConstructId::Kind::PosAff: return composite_affect(r).first;
        case ConstructId::Kind::NegAff: return composite_affect(r).second;
        case ConstructId::Kind::RegDesire: return r.regulation_desire;
        case ConstructId::Kind::SocQuality:
            if (r.social_quality) return *r.social_quality;
            return std::nullopt;
        case ConstructId::Kind::IntAvail: return r.availability ? 1.0 : 0.0;
        case ConstructId::Kind::Extra: {
            auto it = r.extra_states.find(c.extra_name());
            if (it != r.extra_states.end()) return it->second;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

std::map<std::string, LabelSet> derive_binary_labels(const Corpus& corpus) {
    const auto constructs = corpus.constructs();
    std::map<std::string, LabelSet> out;
    for (const auto& r : corpus.records()) out[r.record_id].record_id = r.record_id;

    for (const auto& p : corpus.participants()) {
        const auto& recs = corpus.records_of(p.participant_id);
        for (const auto& c : constructs) {
            if (c.kind() == ConstructId::Kind::IntAvail) {
                for (const DiaryRecord* r : recs) {
                    auto& ls = out[r->record_id];
                    ls.labels[c] = r->availability;
                    ls.continuous[c] = r->availability ? 1.0 : 0.0;
                }
                continue;
            }
            // Individual mean over available records, then strict comparison.
            double sum = 0;
            int n = 0;
            for (const DiaryRecord* r : recs) {
                if (auto s = construct_score(*r, c)) {
                    sum += *s;
                    ++n;
                }
            }
            if (n == 0) continue;
            const double mean = sum / n;
            for (const DiaryRecord* r : recs) {
                if (auto s = construct_score(*r, c)) {
                    auto& ls = out[r->record_id];
                    ls.labels[c] = *s > mean;
                    ls.continuous[c] = *s;
                }
            }
        }
    }
    return out;
}

std::set<std::string> FoldAssignment::participants_in(int fold) const {
    std::set<std::string> out;
    for (const auto& [id, f] : fold_of) {
        if (f == fold) out.insert(id);
    }
    return out;
}

std::set<std::string> FoldAssignment::participants_not_in(int fold) const {
    std::set<std::string> out;
    for (const auto& [id, f] : fold_of) {
        if (f != fold) out.insert(id);
    }
    return out;
}

FoldAssignment split_grouped_folds(const Corpus& corpus, int n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw CorpusError("n_folds must be >= 2");
    if (static_cast<int>(corpus.participants().size()) < n_folds) {
        throw CorpusError("fewer participants (" + std::to_string(corpus.participants().size()) +
                          ") than folds (" + std::to_string(n_folds) + ")");
    }
    std::vector<std::string> ids;
    ids.reserve(corpus.participants().size());
    for (const auto& p : corpus.participants()) ids.push_back(p.participant_id);
    std::sort(ids.begin(), ids.end());

    // Fisher-Yates with pinned draws, then round-robin: sizes differ by <= 1.
    Rng rng(seed);
    for (std::size_t i = ids.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(ids[i - 1], ids[j]);
    }
    FoldAssignment assignment;
    assignment.n_folds = n_folds;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        assignment.fold_of[ids[i]] = static_cast<int>(i % n_folds);
    }
    return assignment;
}

std::string ValidationReport::to_text() const {
    std::ostringstream out;
    for (const auto& w : warnings) {
        out << "WARN " << w.code << ' ' << w.record_id << ' ' << w.message << '\n';
    }
    return out.str();
}

ValidationReport validate_corpus(const Corpus& corpus) {
    ValidationReport report;
    for (const auto& r : corpus.records()) {
        if (word_count(r.text) == 0) {
            report.warnings.push_back({"EMPTY_TEXT", r.record_id, "diary text has no words"});
        }
        if (!in_block_window(r.timestamp, r.time_block)) {
            report.warnings.push_back(
                {"OUT_OF_WINDOW", r.record_id,
                 "timestamp " + r.timestamp.to_string() + " outside " +
                     std::string(time_block_name(r.time_block)) + " window"});
        }
    }
    for (const auto& p : corpus.participants()) {
        const auto& recs = corpus.records_of(p.participant_id);
        if (recs.size() < 2) {
            report.warnings.push_back({"FEW_RECORDS", p.participant_id,
                                       "participant has " + std::to_string(recs.size()) +
                                           " record(s); mean-based labels are degenerate"});
        }
        for (std::size_t i = 1; i < recs.size(); ++i) {
            if (recs[i]->timestamp == recs[i - 1]->timestamp) {
                report.warnings.push_back({"DUP_TIMESTAMP", recs[i]->record_id,
                                           "same timestamp as " + recs[i - 1]->record_id});
            }
        }
    }
    return report;
}

}  // namespace diarylens
