#pragma once
// Construct identifiers and the canonical key registry.
//
// Every predicted state has exactly one binary JSON key (what the model must
// emit between <PREDICTIONS> tags) and, where a continuous scale exists, one
// score key. Prompt builder, response parser, reports and the CLI all go
// through this registry so the names can never drift apart. The same mapping
// is serialized in docs/construct-keys.kv.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace diarylens {

class ConstructId {
public:
    enum class Kind : std::uint8_t { PosAff, NegAff, RegDesire, SocQuality, IntAvail, Extra };

    ConstructId() = default;

    static ConstructId pos_aff() { return ConstructId(Kind::PosAff); }
    static ConstructId neg_aff() { return ConstructId(Kind::NegAff); }
    static ConstructId reg_desire() { return ConstructId(Kind::RegDesire); }
    static ConstructId soc_quality() { return ConstructId(Kind::SocQuality); }
    static ConstructId int_avail() { return ConstructId(Kind::IntAvail); }
    static ConstructId extra(std::string state_name);

    Kind kind() const { return kind_; }
    bool is_extra() const { return kind_ == Kind::Extra; }
    const std::string& extra_name() const { return extra_name_; }

    // Binary prediction key, e.g. "positive_affect_high", "worried_high".
    std::string key() const;
    // Continuous score key, empty when the construct has no elicited scale
    // (intervention availability is a yes/no answer).
    std::string score_key() const;
    // Human-readable name used in prompts and reports, e.g. "positive affect".
    std::string display_name() const;
    // Inclusive continuous range: {0,30} for affect composites, {0,10} for
    // single items, {0,1} for availability.
    std::pair<int, int> scale() const;

    static std::optional<ConstructId> from_key(std::string_view key);
    static std::optional<ConstructId> from_score_key(std::string_view key);

    friend bool operator==(const ConstructId& a, const ConstructId& b) {
        return a.kind_ == b.kind_ && a.extra_name_ == b.extra_name_;
    }
    friend bool operator<(const ConstructId& a, const ConstructId& b) {
        if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
        return a.extra_name_ < b.extra_name_;
    }

private:
    explicit ConstructId(Kind kind, std::string extra = {})
        : kind_(kind), extra_name_(std::move(extra)) {}

    Kind kind_ = Kind::PosAff;
    std::string extra_name_;
};

// The five constructs every corpus carries.
std::vector<ConstructId> core_constructs();

struct ConstructIdHash {
    std::size_t operator()(const ConstructId& c) const {
        return std::hash<std::string>()(c.key());
    }
};

}  // namespace diarylens
