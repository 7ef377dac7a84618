#pragma once
// Seeded synthetic corpora with planted keyword effects.
//
// The real study data is restricted, so tests and demos run on generated
// corpora instead. Every predicted construct is driven by a planted marker
// vocabulary: an entry's text carries a high- or low-state marker token, and
// its scores sit in a matching band. Band levels are constant within a
// participant, so the individual-mean thresholding recovers the planted state
// exactly; a keyword predictor that reads the markers is a perfect oracle for
// the binary labels.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diarylens/corpus.hpp"

namespace diarylens {

struct SynthConfig {
    int n_participants = 40;
    int days = 14;
    // Each of the three daily blocks is filled independently with this
    // probability (at least two records per participant are forced).
    double block_presence = 0.85;
    // Probability the social-quality item is skipped on a given entry.
    double social_missing_rate = 0.10;
    // Target mean whitespace word count of entry texts.
    double mean_words = 7.0;
    // Extra named states (e.g. "worried", "pain"); scored 0-10 on every
    // entry, planted via the state name itself appearing in the text.
    std::vector<std::string> extra_states;
    std::uint64_t seed = 1;
};

// Deterministic under config.seed: identical configs produce identical
// corpora. Throws CorpusError on invalid distribution parameters.
Corpus generate_synthetic_corpus(const SynthConfig& config);

// Planted ground truth readable from an entry's text: true/false for the
// high/low marker, nullopt when no marker is present (extras always resolve,
// absence of the state token means low). This is the contract the keyword
// oracle mock relies on.
std::optional<bool> planted_state(const ConstructId& construct, const std::string& text);

// Human-readable description of the marker vocabularies and score bands,
// written next to generated corpora.
std::string planted_effects_description();

}  // namespace diarylens
