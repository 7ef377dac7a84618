#include "helpers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "diarylens/util.hpp"

namespace diarylens::testing {

std::vector<SearchHit> naive_top_k(const std::vector<IndexedEntry>& entries,
                                   const Vector& query, int k,
                                   const RetrievalFilter& filter) {
    std::vector<SearchHit> hits;
    for (const IndexedEntry& entry : entries) {
        if (!filter.admits(entry)) continue;
        if (entry.vector.size() != query.size()) {
            throw std::invalid_argument("naive_top_k: dim mismatch");
        }
        double acc = 0;
        for (std::size_t i = 0; i < query.size(); ++i) {
            const double d = entry.vector[i] - query[i];
            acc += d * d;
        }
        hits.push_back(SearchHit{entry.entry_id, std::sqrt(acc), &entry});
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.entry_id < b.entry_id;
    });
    if (k >= 0 && hits.size() > static_cast<std::size_t>(k)) hits.resize(k);
    return hits;
}

double brute_balanced_accuracy(const std::vector<bool>& decisions,
                               const std::vector<bool>& labels) {
    int tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i]) {
            decisions[i] ? ++tp : ++fn;
        } else {
            decisions[i] ? ++fp : ++tn;
        }
    }
    if (tp + fn == 0 || tn + fp == 0) {
        throw std::invalid_argument("brute_balanced_accuracy: single-class labels");
    }
    const double sens = static_cast<double>(tp) / (tp + fn);
    const double spec = static_cast<double>(tn) / (tn + fp);
    return (sens + spec) / 2.0;
}

double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
    double wins = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    if (pairs == 0) throw std::invalid_argument("pairwise_auc: single-class labels");
    return wins / static_cast<double>(pairs);
}

namespace {

DiaryRecord make_record(std::string id, std::string pid, DateTime ts, TimeBlock block,
                        std::string text, int happy, int cheerful, int pleased, int sad,
                        int afraid, int miserable, int reg, std::optional<int> soc,
                        bool avail) {
    DiaryRecord r;
    r.record_id = std::move(id);
    r.participant_id = std::move(pid);
    r.timestamp = ts;
    r.time_block = block;
    r.text = std::move(text);
    r.happy = happy;
    r.cheerful = cheerful;
    r.pleased = pleased;
    r.sad = sad;
    r.afraid = afraid;
    r.miserable = miserable;
    r.regulation_desire = reg;
    r.social_quality = soc;
    r.availability = avail;
    return r;
}

}  // namespace

Corpus fixture_corpus() {
    std::vector<Participant> participants;
    participants.push_back({"p-alpha", 60, "male", "White", "Kidney", 2, false});
    participants.push_back({"p-beta", 45, "female", "Asian", "Breast", 1, true});

    std::vector<DiaryRecord> records;
    // p-alpha straddles the 2024-03-08 midnight boundary; pa-02 and pa-03
    // sit on either side of exactly 00:00:00.
    records.push_back(make_record("pa-01", "p-alpha", {2024, 3, 7, 9, 0, 0},
                                  TimeBlock::Morning, "an early scan then quiet reading",
                                  2, 2, 2, 5, 5, 5, 7, 3, false));
    records.push_back(make_record("pa-02", "p-alpha", {2024, 3, 7, 23, 59, 0},
                                  TimeBlock::Evening, "late thoughts before sleep",
                                  4, 4, 4, 2, 2, 2, 3, 6, true));
    records.push_back(make_record("pa-03", "p-alpha", {2024, 3, 8, 0, 0, 0},
                                  TimeBlock::Morning, "midnight note after a long day",
                                  6, 6, 6, 1, 1, 1, 2, 7, true));
    records.push_back(make_record("pa-04", "p-alpha", {2024, 3, 8, 9, 10, 0},
                                  TimeBlock::Morning, "coffee and a calm start",
                                  7, 6, 7, 0, 1, 0, 1, 8, true));
    records.push_back(make_record("pa-q", "p-alpha", {2024, 3, 8, 13, 10, 0},
                                  TimeBlock::Afternoon, "lunch outside felt pleasant",
                                  7, 7, 7, 0, 1, 0, 1, 8, true));

    records.push_back(make_record("pb-01", "p-beta", {2024, 3, 7, 8, 30, 0},
                                  TimeBlock::Morning, "hospital visit then a long nap",
                                  3, 3, 3, 6, 6, 6, 8, 2, false));
    records.push_back(make_record("pb-02", "p-beta", {2024, 3, 7, 13, 30, 0},
                                  TimeBlock::Afternoon, "lunch with friends in the sun",
                                  8, 8, 8, 1, 1, 1, 1, 9, true));
    records.push_back(make_record("pb-03", "p-beta", {2024, 3, 7, 19, 30, 0},
                                  TimeBlock::Evening, "quiet evening with a good book",
                                  6, 5, 6, 2, 2, 2, 3, std::nullopt, true));
    records.push_back(make_record("pb-04", "p-beta", {2024, 3, 8, 8, 45, 0},
                                  TimeBlock::Morning, "slow start and gray skies outside",
                                  4, 4, 4, 4, 4, 4, 5, 5, false));
    records.push_back(make_record("pb-05", "p-beta", {2024, 3, 8, 13, 20, 0},
                                  TimeBlock::Afternoon, "walked to the market for bread",
                                  7, 6, 7, 1, 2, 1, 2, 7, true));

    return Corpus(std::move(participants), std::move(records));
}

Corpus with_twin_participants(const Corpus& base) {
    std::vector<Participant> participants = base.participants();
    std::vector<DiaryRecord> records = base.records();
    for (const Participant& p : base.participants()) {
        Participant twin = p;
        twin.participant_id = "t" + p.participant_id;
        participants.push_back(twin);
        for (const DiaryRecord* r : base.records_of(p.participant_id)) {
            DiaryRecord copy = *r;
            copy.record_id = "t" + r->record_id;
            copy.participant_id = twin.participant_id;
            records.push_back(std::move(copy));
        }
    }
    return Corpus(std::move(participants), std::move(records));
}

Corpus with_duplicated_week(const Corpus& base) {
    std::vector<Participant> participants = base.participants();
    std::vector<DiaryRecord> records = base.records();
    for (const Participant& p : base.participants()) {
        const auto& recs = base.records_of(p.participant_id);
        if (recs.empty()) continue;
        const std::int64_t first_day = recs.front()->timestamp.day_number();
        for (const DiaryRecord* r : recs) {
            if (r->timestamp.day_number() >= first_day + 7) continue;
            DiaryRecord copy = *r;
            copy.record_id = r->record_id + "+w2";
            copy.timestamp = r->timestamp.plus_days(7);
            records.push_back(std::move(copy));
        }
    }
    return Corpus(std::move(participants), std::move(records));
}

namespace {

class MemorizingProbe final : public Predictor {
public:
    explicit MemorizingProbe(const TrainContext& ctx) {
        for (const auto& pid : ctx.train_participants) {
            for (const DiaryRecord* r : ctx.corpus.records_of(pid)) {
                const auto it = ctx.labels.find(r->record_id);
                if (it != ctx.labels.end()) memory_[r->record_id] = it->second.labels;
            }
        }
        constructs_ = ctx.corpus.constructs();
    }

    std::map<ConstructId, double> predict(const DiaryRecord& query) override {
        std::map<ConstructId, double> out;
        const auto known = memory_.find(query.record_id);
        for (const auto& c : constructs_) {
            if (known != memory_.end()) {
                const auto label = known->second.find(c);
                if (label != known->second.end()) {
                    out[c] = label->second ? 1.0 : 0.0;
                    continue;
                }
            }
            // deterministic pseudo-coin, independent of the ground truth
            out[c] = (fnv1a(query.record_id + "|" + c.key()) & 1) != 0 ? 0.75 : 0.25;
        }
        return out;
    }
    std::string name() const override { return "memorizing_probe"; }

private:
    std::map<std::string, std::map<ConstructId, bool>> memory_;
    std::vector<ConstructId> constructs_;
};

}  // namespace

PredictorFactory memorizing_probe_factory() {
    return [](const TrainContext& ctx) -> std::unique_ptr<Predictor> {
        return std::make_unique<MemorizingProbe>(ctx);
    };
}

std::string CountingTransport::send(const ChatRequest& request) {
    {
        std::lock_guard lock(mu_);
        last_ = request;
    }
    ++calls_;
    return reply_;
}

ChatRequest CountingTransport::last_request() const {
    std::lock_guard lock(mu_);
    return last_;
}

std::string FlakyTransport::send(const ChatRequest& request) {
    const int call = ++calls_;
    if (call <= fail_count_) {
        throw TransportError("synthetic transient failure", true, request.correlation_id);
    }
    return reply_;
}

std::string ConcurrencyProbeTransport::send(const ChatRequest&) {
    {
        std::lock_guard lock(mu_);
        ++current_;
        peak_ = std::max(peak_, current_);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    {
        std::lock_guard lock(mu_);
        --current_;
    }
    return reply_;
}

SourceReply RecordingSource::respond(const PromptContext& context) {
    {
        std::lock_guard lock(mu_);
        auto& ids = retrieved_[context.query.record_id];
        ids.clear();
        for (const SearchHit& hit : context.retrieved) ids.push_back(hit.entry_id);
    }
    return inner_->respond(context);
}

std::map<std::string, std::vector<std::string>> RecordingSource::retrieved_ids() const {
    std::lock_guard lock(mu_);
    return retrieved_;
}

std::filesystem::path unique_temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    const auto dir = std::filesystem::temp_directory_path() /
                     ("diarylens-" + tag + "-" + std::to_string(stamp) + "-" +
                      std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

}  // namespace diarylens::testing
