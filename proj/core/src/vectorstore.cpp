#include "diarylens/vectorstore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <queue>

#include "json.hpp"

#include "diarylens/util.hpp"

// The on-disk format stores raw doubles; on a big-endian host the reader
// would need byte swaps that are not implemented.
static_assert(std::endian::native == std::endian::little,
              "index file i/o assumes a little-endian host");

namespace diarylens {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'D', 'L', 'E', 'N', 'S', 'I', 'D', 'X'};
constexpr std::uint32_t kVersion = 1;

// Fixed forward accumulation; both the index and any oracle scanning in the
// same order produce bit-identical distances.
double squared_l2(const Vector& a, const Vector& b) {
    double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

void append_bytes(std::string& out, const void* data, std::size_t n) {
    out.append(static_cast<const char*>(data), n);
}

template <typename T>
T read_scalar(const std::string& buf, std::size_t& pos) {
    if (pos + sizeof(T) > buf.size()) {
        throw IndexError(IndexError::Kind::Corruption, "index file truncated");
    }
    T value;
    std::memcpy(&value, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

json traits_to_json(const Participant& p) {
    return json{{"participant_id", p.participant_id},
                {"age", p.age},
                {"gender", p.gender},
                {"race_ethnicity", p.race_ethnicity},
                {"cancer_type", p.cancer_type},
                {"cancer_stage", p.cancer_stage},
                {"on_treatment", p.on_treatment}};
}

Participant traits_from_json(const json& j) {
    Participant p;
    p.participant_id = j.at("participant_id").get<std::string>();
    p.age = j.at("age").get<int>();
    p.gender = j.at("gender").get<std::string>();
    p.race_ethnicity = j.at("race_ethnicity").get<std::string>();
    p.cancer_type = j.at("cancer_type").get<std::string>();
    p.cancer_stage = j.at("cancer_stage").get<int>();
    p.on_treatment = j.at("on_treatment").get<bool>();
    return p;
}

}  // namespace

double l2_distance(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw IndexError(IndexError::Kind::DimMismatch,
                         "l2_distance: dims " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    }
    return std::sqrt(squared_l2(a, b));
}

FlatIndex FlatIndex::build(std::vector<IndexedEntry> entries) {
    FlatIndex index;
    if (entries.empty()) return index;

    const auto dim = entries.front().vector.size();
    if (dim == 0) {
        throw IndexError(IndexError::Kind::InvalidValue,
                         "entry '" + entries.front().entry_id + "': zero-length vector");
    }
    for (const auto& e : entries) {
        if (e.vector.size() != dim) {
            throw IndexError(IndexError::Kind::DimMismatch,
                             "entry '" + e.entry_id + "': dim " +
                                 std::to_string(e.vector.size()) + ", index dim " +
                                 std::to_string(dim));
        }
        for (double v : e.vector) {
            if (!std::isfinite(v)) {
                throw IndexError(IndexError::Kind::InvalidValue,
                                 "entry '" + e.entry_id + "': non-finite component");
            }
        }
    }
    std::sort(entries.begin(), entries.end(),
              [](const IndexedEntry& a, const IndexedEntry& b) { return a.entry_id < b.entry_id; });
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!index.by_id_.emplace(entries[i].entry_id, i).second) {
            throw IndexError(IndexError::Kind::DuplicateId,
                             "duplicate entry_id '" + entries[i].entry_id + "'");
        }
    }
    index.entries_ = std::move(entries);
    index.dim_ = static_cast<int>(dim);
    return index;
}

const IndexedEntry* FlatIndex::find(const std::string& entry_id) const {
    auto it = by_id_.find(entry_id);
    return it == by_id_.end() ? nullptr : &entries_[it->second];
}

std::vector<SearchHit> FlatIndex::top_k(const Vector& query, int k,
                                        const RetrievalFilter& filter) const {
    if (k < 0) throw std::invalid_argument("top_k: k must be >= 0");
    if (entries_.empty() || k == 0) return {};
    if (static_cast<int>(query.size()) != dim_) {
        throw IndexError(IndexError::Kind::DimMismatch,
                         "query dim " + std::to_string(query.size()) + ", index dim " +
                             std::to_string(dim_));
    }

    struct Candidate {
        double distance;
        const IndexedEntry* entry;
    };
    // max-heap on (distance, entry_id): top() is the worst kept candidate
    const auto worse = [](const Candidate& a, const Candidate& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.entry->entry_id < b.entry->entry_id;
    };
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> heap(worse);

    for (const auto& e : entries_) {
        if (!filter.admits(e)) continue;
        const double dist = std::sqrt(squared_l2(query, e.vector));
        if (static_cast<int>(heap.size()) < k) {
            heap.push({dist, &e});
        } else if (worse(Candidate{dist, &e}, heap.top())) {
            heap.pop();
            heap.push({dist, &e});
        }
    }

    std::vector<SearchHit> hits(heap.size());
    for (std::size_t i = heap.size(); i-- > 0;) {
        const auto& c = heap.top();
        hits[i] = SearchHit{c.entry->entry_id, c.distance, c.entry};
        heap.pop();
    }
    return hits;
}

std::vector<SearchHit> FlatIndex::merge_hits(const std::vector<std::vector<SearchHit>>& lists,
                                             int k) {
    if (k < 0) throw std::invalid_argument("merge_hits: k must be >= 0");
    std::vector<SearchHit> all;
    for (const auto& list : lists) all.insert(all.end(), list.begin(), list.end());
    std::sort(all.begin(), all.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.entry_id < b.entry_id;
    });
    if (static_cast<int>(all.size()) > k) all.resize(static_cast<std::size_t>(k));
    return all;
}

void FlatIndex::save(const std::string& path) const {
    std::string vectors;
    vectors.reserve(entries_.size() * static_cast<std::size_t>(dim_) * sizeof(double));
    for (const auto& e : entries_) {
        append_bytes(vectors, e.vector.data(), e.vector.size() * sizeof(double));
    }

    json meta = json::array();
    for (const auto& e : entries_) {
        json labels = json::object();
        for (const auto& [c, v] : e.labels) labels[c.key()] = v;
        json continuous = json::object();
        for (const auto& [c, v] : e.continuous) continuous[c.key()] = v;
        meta.push_back(json{{"entry_id", e.entry_id},
                            {"participant_id", e.participant_id},
                            {"labels", labels},
                            {"continuous", continuous},
                            {"traits", traits_to_json(e.traits)},
                            {"text", e.text}});
    }
    const std::string meta_bytes = meta.dump();

    const std::uint64_t checksum = fnv1a(meta_bytes, fnv1a(vectors));
    const auto dim = static_cast<std::uint32_t>(dim_);
    const auto count = static_cast<std::uint64_t>(entries_.size());
    const auto meta_len = static_cast<std::uint64_t>(meta_bytes.size());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IndexError(IndexError::Kind::Io, "cannot write '" + path + "'");
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
    out.write(vectors.data(), static_cast<std::streamsize>(vectors.size()));
    out.write(reinterpret_cast<const char*>(&meta_len), sizeof(meta_len));
    out.write(meta_bytes.data(), static_cast<std::streamsize>(meta_bytes.size()));
    if (!out) throw IndexError(IndexError::Kind::Io, "short write to '" + path + "'");
}

FlatIndex FlatIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IndexError(IndexError::Kind::Io, "cannot read '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    if (buf.size() < sizeof(kMagic) || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
        throw IndexError(IndexError::Kind::Corruption, "'" + path + "' is not an index file");
    }
    pos += sizeof(kMagic);
    const auto version = read_scalar<std::uint32_t>(buf, pos);
    if (version != kVersion) {
        throw IndexError(IndexError::Kind::VersionMismatch,
                         "index version " + std::to_string(version) + ", expected " +
                             std::to_string(kVersion));
    }
    const auto dim = read_scalar<std::uint32_t>(buf, pos);
    const auto count = read_scalar<std::uint64_t>(buf, pos);
    const auto checksum = read_scalar<std::uint64_t>(buf, pos);

    // guard the multiplication below against absurd header values
    if (dim > 0 && count > buf.size() / (static_cast<std::size_t>(dim) * sizeof(double))) {
        throw IndexError(IndexError::Kind::Corruption, "index file truncated");
    }
    const std::size_t vector_bytes = count * dim * sizeof(double);
    if (pos + vector_bytes > buf.size()) {
        throw IndexError(IndexError::Kind::Corruption, "index file truncated");
    }
    const std::size_t vectors_at = pos;
    pos += vector_bytes;
    const auto meta_len = read_scalar<std::uint64_t>(buf, pos);
    if (pos + meta_len > buf.size()) {
        throw IndexError(IndexError::Kind::Corruption, "index file truncated");
    }
    const std::string_view vectors(buf.data() + vectors_at, vector_bytes);
    const std::string_view meta_bytes(buf.data() + pos, meta_len);

    if (fnv1a(meta_bytes, fnv1a(vectors)) != checksum) {
        throw IndexError(IndexError::Kind::Corruption, "index checksum mismatch");
    }

    const json meta = json::parse(meta_bytes, nullptr, false);
    if (meta.is_discarded() || !meta.is_array() || meta.size() != count) {
        throw IndexError(IndexError::Kind::Corruption, "index metadata malformed");
    }

    std::vector<IndexedEntry> entries;
    entries.reserve(count);
    try {
        for (std::size_t i = 0; i < count; ++i) {
            IndexedEntry e;
            const json& m = meta[i];
            e.entry_id = m.at("entry_id").get<std::string>();
            e.participant_id = m.at("participant_id").get<std::string>();
            for (const auto& [key, value] : m.at("labels").items()) {
                if (auto c = ConstructId::from_key(key)) e.labels[*c] = value.get<bool>();
            }
            for (const auto& [key, value] : m.at("continuous").items()) {
                if (auto c = ConstructId::from_key(key)) e.continuous[*c] = value.get<double>();
            }
            e.traits = traits_from_json(m.at("traits"));
            e.text = m.at("text").get<std::string>();
            e.vector.resize(dim);
            std::memcpy(e.vector.data(), buf.data() + vectors_at + i * dim * sizeof(double),
                        dim * sizeof(double));
            entries.push_back(std::move(e));
        }
    } catch (const json::exception& ex) {
        throw IndexError(IndexError::Kind::Corruption,
                         std::string("index metadata malformed: ") + ex.what());
    }
    return build(std::move(entries));
}

}  // namespace diarylens
