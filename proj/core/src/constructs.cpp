#include "diarylens/constructs.hpp"

#include <array>
#include <stdexcept>

namespace diarylens {

namespace {

struct CoreRow {
    ConstructId::Kind kind;
    std::string_view key;
    std::string_view score_key;
    std::string_view display;
    int scale_max;
};

constexpr std::array<CoreRow, 5> kCore = {{
    {ConstructId::Kind::PosAff, "positive_affect_high", "positive_affect_score",
     "positive affect", 30},
    {ConstructId::Kind::NegAff, "negative_affect_high", "negative_affect_score",
     "negative affect", 30},
    {ConstructId::Kind::RegDesire, "regulation_desire_high", "regulation_desire_score",
     "desire to regulate emotions", 10},
    {ConstructId::Kind::SocQuality, "social_quality_high", "social_quality_score",
     "social interaction quality", 10},
    {ConstructId::Kind::IntAvail, "intervention_available", "",
     "intervention availability", 1},
}};

const CoreRow& core_row(ConstructId::Kind kind) {
    for (const auto& row : kCore) {
        if (row.kind == kind) return row;
    }
    throw std::logic_error("not a core construct");
}

}  // namespace

ConstructId ConstructId::extra(std::string state_name) {
    if (state_name.empty()) throw std::invalid_argument("extra construct needs a name");
    return ConstructId(Kind::Extra, std::move(state_name));
}

std::string ConstructId::key() const {
    if (kind_ == Kind::Extra) return extra_name_ + "_high";
    return std::string(core_row(kind_).key);
}

std::string ConstructId::score_key() const {
    if (kind_ == Kind::Extra) return extra_name_ + "_score";
    return std::string(core_row(kind_).score_key);
}

std::string ConstructId::display_name() const {
    if (kind_ == Kind::Extra) return extra_name_;
    return std::string(core_row(kind_).display);
}

std::pair<int, int> ConstructId::scale() const {
    if (kind_ == Kind::Extra) return {0, 10};
    return {0, core_row(kind_).scale_max};
}

std::optional<ConstructId> ConstructId::from_key(std::string_view key) {
    for (const auto& row : kCore) {
        if (key == row.key) return ConstructId(row.kind);
    }
    constexpr std::string_view suffix = "_high";
    if (key.size() > suffix.size() && key.ends_with(suffix)) {
        return ConstructId::extra(std::string(key.substr(0, key.size() - suffix.size())));
    }
    return std::nullopt;
}

std::optional<ConstructId> ConstructId::from_score_key(std::string_view key) {
    for (const auto& row : kCore) {
        if (!row.score_key.empty() && key == row.score_key) return ConstructId(row.kind);
    }
    constexpr std::string_view suffix = "_score";
    if (key.size() > suffix.size() && key.ends_with(suffix)) {
        return ConstructId::extra(std::string(key.substr(0, key.size() - suffix.size())));
    }
    return std::nullopt;
}

std::vector<ConstructId> core_constructs() {
    return {ConstructId::pos_aff(), ConstructId::neg_aff(), ConstructId::reg_desire(),
            ConstructId::soc_quality(), ConstructId::int_avail()};
}

}  // namespace diarylens
