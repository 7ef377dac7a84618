#pragma once
// Small shared utilities: hashing, deterministic RNG draws, tokenization,
// fixed-format number printing.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace diarylens {

// FNV-1a, 64-bit. Used for text hashes, cache keys and file checksums.
inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

constexpr std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

constexpr std::uint64_t fnv1a_u64(std::uint64_t value, std::uint64_t h = kFnvOffset) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xffu;
        h *= kFnvPrime;
    }
    return h;
}

std::string hex64(std::uint64_t value);

// Deterministic draws on top of mt19937_64. std::uniform_int_distribution is
// implementation-defined, so results would differ across standard libraries;
// these helpers pin the mapping.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : base_seed_(seed), engine_(seed) {}

    // uniform integer in [lo, hi], inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

    // uniform real in [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // standard normal via Box-Muller (always consumes two draws)
    double normal();

    std::uint64_t next() { return engine_(); }

    // independent child stream, e.g. one per participant
    Rng fork(std::uint64_t salt) const {
        return Rng(fnv1a_u64(salt, fnv1a_u64(base_seed_)));
    }

private:
    std::uint64_t base_seed_;
    std::mt19937_64 engine_;
};

// "scheme://host[:port]/path" split into client origin and request path.
// Throws std::invalid_argument when the scheme is missing.
struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // "/..." (never empty)
};
SplitUrl split_url(const std::string& url);

// Lowercased alphanumeric tokens; everything else is a separator.
std::vector<std::string> tokenize(std::string_view text);

// Whitespace-delimited word count of the raw text.
int word_count(std::string_view text);

std::string to_lower(std::string_view s);

// Fixed decimal formatting ("%.4f" style) so reports are byte-stable.
std::string format_fixed(double value, int decimals);

}  // namespace diarylens
