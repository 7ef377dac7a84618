#pragma once
// Exact flat vector index over embedded diary entries.
//
// Retrieval is brute-force L2 over doubles: at the corpus scale this system
// targets (tens of thousands of entries) a scan is fast, and exactness makes
// results reproducible and testable against a naive oracle. Ties are broken
// by entry_id ascending, and the per-entry accumulation order is fixed, so
// the same index answers the same query identically on every platform.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "diarylens/constructs.hpp"
#include "diarylens/corpus.hpp"

namespace diarylens {

using Vector = std::vector<double>;

class IndexError : public std::runtime_error {
public:
    enum class Kind {
        DimMismatch,
        DuplicateId,
        InvalidValue,     // NaN/Inf in a vector
        Io,
        VersionMismatch,  // readable header, unsupported version
        Corruption,       // bad magic, truncation or checksum failure
    };

    IndexError(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// One retrievable entry: the vector plus everything a prompt needs to render
// the peer example (text, ground-truth outcomes, trait snapshot).
struct IndexedEntry {
    std::string entry_id;     // DiaryRecord.record_id
    Vector vector;
    std::string participant_id;
    std::map<ConstructId, bool> labels;
    std::map<ConstructId, double> continuous;
    Participant traits;
    std::string text;
};

// Pure predicate over entry metadata, applied before ranking. Never reorders
// surviving entries.
struct RetrievalFilter {
    std::set<std::string> excluded_participants;
    std::optional<std::set<std::string>> allowed_participants;
    std::optional<std::string> exclude_entry;

    bool admits(const IndexedEntry& entry) const {
        if (exclude_entry && entry.entry_id == *exclude_entry) return false;
        if (excluded_participants.count(entry.participant_id)) return false;
        if (allowed_participants && !allowed_participants->count(entry.participant_id)) {
            return false;
        }
        return true;
    }
};

struct SearchHit {
    std::string entry_id;
    double distance = 0;            // L2, not squared
    const IndexedEntry* entry = nullptr;  // borrowed from the index
};

// sqrt of the summed squared differences; throws IndexError on unequal dims.
double l2_distance(const Vector& a, const Vector& b);

class FlatIndex {
public:
    FlatIndex() = default;  // valid empty index

    // Validates finite values, uniform dim and unique ids, then stores
    // entries sorted by entry_id so query output is insertion-order free.
    static FlatIndex build(std::vector<IndexedEntry> entries);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    int dim() const { return dim_; }

    const std::vector<IndexedEntry>& entries() const { return entries_; }
    const IndexedEntry* find(const std::string& entry_id) const;

    // k smallest distances among entries admitted by the filter, ascending by
    // (distance, entry_id); fewer than k when the filtered pool is smaller.
    std::vector<SearchHit> top_k(const Vector& query, int k,
                                 const RetrievalFilter& filter = {}) const;

    // Binary format documented in docs/file-formats.md: fixed header with
    // magic/version/dim/count/checksum, raw little-endian vectors, then a
    // JSON metadata block. Load verifies the checksum before trusting
    // anything past the header.
    void save(const std::string& path) const;
    static FlatIndex load(const std::string& path);

    // Merge hit lists from disjoint indexes into a single top-k, same
    // ordering rule. Used when one query draws from several pools.
    static std::vector<SearchHit> merge_hits(const std::vector<std::vector<SearchHit>>& lists,
                                             int k);

private:
    std::vector<IndexedEntry> entries_;           // sorted by entry_id
    std::map<std::string, std::size_t> by_id_;
    int dim_ = 0;
};

}  // namespace diarylens
