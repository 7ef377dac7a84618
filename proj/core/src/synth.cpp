#include "diarylens/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string_view>

#include "diarylens/util.hpp"

namespace diarylens {

namespace {

using Pool = std::vector<std::string_view>;

const Pool kPosHigh = {"sunshine", "picnic", "laughter", "hike", "garden"};
const Pool kPosLow = {"overcast", "tedious", "dull", "gray", "slog"};
const Pool kNegHigh = {"hospital", "scan", "chemo", "nausea", "biopsy"};
const Pool kNegLow = {"calm", "settled", "steady", "easy", "fine"};
const Pool kSocHigh = {"friends", "family", "party", "visit", "gathering"};
const Pool kSocLow = {"alone", "isolated", "solo", "apart", "distant"};
const Pool kAvailHigh = {"home", "resting", "couch", "relaxing", "reading"};
const Pool kAvailLow = {"driving", "meeting", "errands", "commuting", "appointments"};
const Pool kFiller = {"the",  "day",  "today",  "felt", "with", "about", "my",
                      "some", "was",  "just",   "things", "bit", "still", "around"};

const Pool kGenders = {"female", "male", "non-binary"};
const Pool kCancerTypes = {"Breast", "Prostate", "Colon",    "Kidney",
                           "Lung",   "Lymphoma", "Melanoma", "Ovarian"};
const Pool kEthnicities = {"White", "Black", "Asian", "Hispanic", "Multiracial"};

bool pool_contains(const Pool& pool, std::string_view token) {
    return std::find(pool.begin(), pool.end(), token) != pool.end();
}

std::string_view pick(const Pool& pool, Rng& rng) {
    return pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pool.size()) - 1))];
}

// One record's planted states before materialization.
struct EntryPlan {
    int day = 0;
    TimeBlock block = TimeBlock::Morning;
    bool pos = false;
    bool neg = false;
    bool soc = false;
    bool avail = false;
    bool social_missing = false;
    std::vector<bool> extras;
};

// Flip plans so both states occur at least once among the records selected
// by `relevant`; the mean threshold needs a mixture to be non-degenerate.
template <typename Get, typename Set, typename Relevant>
void ensure_both_states(std::vector<EntryPlan>& plans, Get get, Set set, Relevant relevant) {
    int hi = 0, lo = 0, n = 0;
    for (const auto& p : plans) {
        if (!relevant(p)) continue;
        ++n;
        (get(p) ? hi : lo)++;
    }
    if (n < 2) return;
    if (hi == 0 || lo == 0) {
        // second relevant entry gets the missing state
        int seen = 0;
        for (auto& p : plans) {
            if (!relevant(p)) continue;
            if (++seen == 2) {
                set(p, hi == 0);
                return;
            }
        }
    }
}

}  // namespace

Corpus generate_synthetic_corpus(const SynthConfig& cfg) {
    if (cfg.n_participants < 1) throw CorpusError("n_participants must be >= 1");
    if (cfg.days < 1) throw CorpusError("days must be >= 1");
    if (cfg.block_presence < 0 || cfg.block_presence > 1) {
        throw CorpusError("block_presence must be in [0,1]");
    }
    if (cfg.social_missing_rate < 0 || cfg.social_missing_rate > 1) {
        throw CorpusError("social_missing_rate must be in [0,1]");
    }
    const int marker_count = 4 + static_cast<int>(cfg.extra_states.size());
    if (cfg.mean_words < marker_count + 1) {
        throw CorpusError("mean_words too small: need at least " +
                          std::to_string(marker_count + 1) + " for the planted markers");
    }
    for (std::size_t i = 0; i < cfg.extra_states.size(); ++i) {
        const auto& name = cfg.extra_states[i];
        if (tokenize(name).size() != 1 || tokenize(name)[0] != name) {
            throw CorpusError("extra state name must be a single lowercase token: '" + name + "'");
        }
        for (const Pool* pool : {&kPosHigh, &kPosLow, &kNegHigh, &kNegLow, &kSocHigh, &kSocLow,
                                 &kAvailHigh, &kAvailLow, &kFiller}) {
            if (pool_contains(*pool, name)) {
                throw CorpusError("extra state name collides with a marker word: '" + name + "'");
            }
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (cfg.extra_states[j] == name) {
                throw CorpusError("duplicate extra state name: '" + name + "'");
            }
        }
    }

    const DateTime start{2024, 3, 4, 0, 0, 0};
    Rng root(cfg.seed);

    std::vector<Participant> participants;
    std::vector<DiaryRecord> records;

    for (int pi = 0; pi < cfg.n_participants; ++pi) {
        Rng rng = root.fork(static_cast<std::uint64_t>(pi) + 1);

        char pid_buf[16];
        std::snprintf(pid_buf, sizeof(pid_buf), "p%03d", pi);
        const std::string pid(pid_buf);

        Participant p;
        p.participant_id = pid;
        p.age = static_cast<int>(rng.uniform_int(28, 79));
        {
            const double g = rng.uniform();
            p.gender = std::string(g < 0.90 ? kGenders[0] : (g < 0.99 ? kGenders[1] : kGenders[2]));
        }
        p.race_ethnicity = std::string(pick(kEthnicities, rng));
        p.cancer_type =
            std::string(rng.uniform() < 0.57 ? kCancerTypes[0] : pick(kCancerTypes, rng));
        p.cancer_stage = static_cast<int>(rng.uniform_int(0, 4));
        p.on_treatment = rng.bernoulli(0.22);
        participants.push_back(p);

        // Per-participant score bands, constant across their entries. Highs
        // land in [8,10] per item, lows in [0,2], so composites split cleanly
        // around any mixture mean.
        auto band = [&rng]() { return std::pair<int, int>{static_cast<int>(rng.uniform_int(8, 10)),
                                                          static_cast<int>(rng.uniform_int(0, 2))}; };
        const auto happy_b = band(), cheerful_b = band(), pleased_b = band();
        const auto sad_b = band(), afraid_b = band(), miserable_b = band();
        const auto reg_b = band(), soc_b = band();
        std::vector<std::pair<int, int>> extra_b;
        for (std::size_t e = 0; e < cfg.extra_states.size(); ++e) extra_b.push_back(band());

        std::vector<EntryPlan> plans;
        for (int day = 0; day < cfg.days; ++day) {
            for (TimeBlock block :
                 {TimeBlock::Morning, TimeBlock::Afternoon, TimeBlock::Evening}) {
                if (!rng.bernoulli(cfg.block_presence)) continue;
                EntryPlan plan;
                plan.day = day;
                plan.block = block;
                plan.pos = rng.bernoulli(0.5);
                plan.neg = rng.bernoulli(0.5);
                plan.soc = rng.bernoulli(0.5);
                plan.avail = rng.bernoulli(0.5);
                plan.social_missing = rng.bernoulli(cfg.social_missing_rate);
                for (std::size_t e = 0; e < cfg.extra_states.size(); ++e) {
                    plan.extras.push_back(rng.bernoulli(0.5));
                }
                plans.push_back(plan);
            }
        }
        while (plans.size() < 2) {
            // first unoccupied (day, block) slot keeps record ids unique
            EntryPlan plan;
            [&] {
                for (int day = 0; day < cfg.days; ++day) {
                    for (TimeBlock block :
                         {TimeBlock::Morning, TimeBlock::Afternoon, TimeBlock::Evening}) {
                        const bool taken =
                            std::any_of(plans.begin(), plans.end(), [&](const EntryPlan& p) {
                                return p.day == day && p.block == block;
                            });
                        if (!taken) {
                            plan.day = day;
                            plan.block = block;
                            return;
                        }
                    }
                }
            }();
            plan.pos = plans.size() == 1;
            plan.neg = false;
            plan.soc = plans.size() == 1;
            plan.avail = false;
            for (std::size_t e = 0; e < cfg.extra_states.size(); ++e) {
                plan.extras.push_back(false);
            }
            plans.push_back(plan);
        }
        std::sort(plans.begin(), plans.end(), [](const EntryPlan& a, const EntryPlan& b) {
            if (a.day != b.day) return a.day < b.day;
            return static_cast<int>(a.block) < static_cast<int>(b.block);
        });

        const auto any = [](const EntryPlan&) { return true; };
        ensure_both_states(
            plans, [](const EntryPlan& e) { return e.pos; },
            [](EntryPlan& e, bool v) { e.pos = v; }, any);
        ensure_both_states(
            plans, [](const EntryPlan& e) { return e.neg; },
            [](EntryPlan& e, bool v) { e.neg = v; }, any);
        ensure_both_states(
            plans, [](const EntryPlan& e) { return e.avail; },
            [](EntryPlan& e, bool v) { e.avail = v; }, any);
        for (std::size_t e = 0; e < cfg.extra_states.size(); ++e) {
            ensure_both_states(
                plans, [e](const EntryPlan& pl) { return pl.extras[e]; },
                [e](EntryPlan& pl, bool v) { pl.extras[e] = v; }, any);
        }
        // Social quality only counts where the item was answered; make sure
        // at least two answered entries exist, with both states among them.
        {
            int scored = 0;
            for (auto& pl : plans) {
                if (!pl.social_missing) ++scored;
            }
            for (auto& pl : plans) {
                if (scored >= 2) break;
                if (pl.social_missing) {
                    pl.social_missing = false;
                    ++scored;
                }
            }
            ensure_both_states(
                plans, [](const EntryPlan& e) { return e.soc; },
                [](EntryPlan& e, bool v) { e.soc = v; },
                [](const EntryPlan& e) { return !e.social_missing; });
        }

        for (const auto& plan : plans) {
            DiaryRecord r;
            char rid_buf[32];
            const char block_code = plan.block == TimeBlock::Morning ? 'm'
                                    : plan.block == TimeBlock::Afternoon ? 'a'
                                                                         : 'e';
            std::snprintf(rid_buf, sizeof(rid_buf), "%s-d%02d-%c", pid.c_str(), plan.day,
                          block_code);
            r.record_id = rid_buf;
            r.participant_id = pid;
            r.time_block = plan.block;
            const int base_hour = plan.block == TimeBlock::Morning ? 8
                                  : plan.block == TimeBlock::Afternoon ? 13
                                                                       : 19;
            DateTime ts = start.plus_days(plan.day);
            ts.hour = base_hour + static_cast<int>(rng.uniform_int(0, 1));
            ts.minute = static_cast<int>(rng.uniform_int(0, 59));
            r.timestamp = ts;

            r.happy = plan.pos ? happy_b.first : happy_b.second;
            r.cheerful = plan.pos ? cheerful_b.first : cheerful_b.second;
            r.pleased = plan.pos ? pleased_b.first : pleased_b.second;
            r.sad = plan.neg ? sad_b.first : sad_b.second;
            r.afraid = plan.neg ? afraid_b.first : afraid_b.second;
            r.miserable = plan.neg ? miserable_b.first : miserable_b.second;
            r.regulation_desire = plan.neg ? reg_b.first : reg_b.second;
            if (!plan.social_missing) {
                r.social_quality = plan.soc ? soc_b.first : soc_b.second;
            }
            r.availability = plan.avail;
            for (std::size_t e = 0; e < cfg.extra_states.size(); ++e) {
                r.extra_states[cfg.extra_states[e]] =
                    plan.extras[e] ? extra_b[e].first : extra_b[e].second;
            }

            std::vector<std::string> tokens;
            tokens.emplace_back(pick(plan.pos ? kPosHigh : kPosLow, rng));
            tokens.emplace_back(pick(plan.neg ? kNegHigh : kNegLow, rng));
            tokens.emplace_back(pick(plan.soc ? kSocHigh : kSocLow, rng));
            tokens.emplace_back(pick(plan.avail ? kAvailHigh : kAvailLow, rng));
            for (std::size_t e = 0; e < cfg.extra_states.size(); ++e) {
                if (plan.extras[e]) tokens.push_back(cfg.extra_states[e]);
            }
            const int target = std::max<int>(
                static_cast<int>(tokens.size()),
                static_cast<int>(std::lround(cfg.mean_words + 1.5 * rng.normal())));
            while (static_cast<int>(tokens.size()) < target) {
                tokens.emplace_back(pick(kFiller, rng));
            }
            for (std::size_t i = tokens.size(); i > 1; --i) {
                const auto j = static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
                std::swap(tokens[i - 1], tokens[j]);
            }
            std::string text;
            for (std::size_t i = 0; i < tokens.size(); ++i) {
                if (i) text.push_back(' ');
                text += tokens[i];
            }
            r.text = text;
            records.push_back(std::move(r));
        }
    }

    return Corpus(std::move(participants), std::move(records));
}

std::optional<bool> planted_state(const ConstructId& construct, const std::string& text) {
    const auto tokens = tokenize(text);
    const auto match = [&tokens](const Pool& hi, const Pool& lo) -> std::optional<bool> {
        for (const auto& tok : tokens) {
            if (pool_contains(hi, tok)) return true;
            if (pool_contains(lo, tok)) return false;
        }
        return std::nullopt;
    };
    switch (construct.kind()) {
        case ConstructId::Kind::PosAff: return match(kPosHigh, kPosLow);
        case ConstructId::Kind::NegAff:
        case ConstructId::Kind::RegDesire: return match(kNegHigh, kNegLow);
        case ConstructId::Kind::SocQuality: return match(kSocHigh, kSocLow);
        case ConstructId::Kind::IntAvail: return match(kAvailHigh, kAvailLow);
        case ConstructId::Kind::Extra: {
            const std::string name = to_lower(construct.extra_name());
            for (const auto& tok : tokens) {
                if (tok == name) return true;
            }
            return false;
        }
    }
    return std::nullopt;
}

std::string planted_effects_description() {
    const auto join = [](const Pool& pool) {
        std::string out;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (i) out += ", ";
            out += pool[i];
        }
        return out;
    };
    std::ostringstream out;
    out << "Planted keyword effects (one marker per construct per entry):\n"
        << "  positive affect   high: " << join(kPosHigh) << "  (items 8-10, composite >= 24)\n"
        << "                    low:  " << join(kPosLow) << "  (items 0-2, composite <= 6)\n"
        << "  negative affect   high: " << join(kNegHigh) << "  (items 8-10, composite >= 24)\n"
        << "                    low:  " << join(kNegLow) << "  (items 0-2, composite <= 6)\n"
        << "  regulation desire follows the negative-affect marker (8-10 vs 0-2)\n"
        << "  social quality    high: " << join(kSocHigh) << "  (8-10)\n"
        << "                    low:  " << join(kSocLow) << "  (0-2)\n"
        << "  availability      yes:  " << join(kAvailHigh) << "\n"
        << "                    no:   " << join(kAvailLow) << "\n"
        << "  extra states: the state name itself appears in the text iff high (8-10 vs 0-2)\n"
        << "Score bands are constant per participant, so every binary label equals the\n"
        << "planted marker state exactly.\n";
    return out.str();
}

}  // namespace diarylens
