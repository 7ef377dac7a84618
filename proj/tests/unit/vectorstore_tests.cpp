#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"

#include "diarylens/util.hpp"
#include "diarylens/vectorstore.hpp"
#include "helpers.hpp"

using namespace diarylens;
namespace dt = diarylens::testing;

namespace {

IndexedEntry entry(std::string id, Vector v, std::string pid = "p1") {
    IndexedEntry e;
    e.entry_id = std::move(id);
    e.vector = std::move(v);
    e.participant_id = std::move(pid);
    e.text = "text for " + e.entry_id;
    return e;
}

std::vector<IndexedEntry> random_entries(int n, int dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<IndexedEntry> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vector v(dim);
        for (auto& x : v) x = rng.normal();
        out.push_back(entry("e" + std::to_string(i), std::move(v),
                            "p" + std::to_string(i % 7)));
    }
    return out;
}

}  // namespace

TEST_SUITE("vectorstore") {

TEST_CASE("l2 distance is the euclidean norm of the difference") {
    CHECK(l2_distance({0, 0}, {3, 4}) == doctest::Approx(5.0));
    CHECK(l2_distance({1, 1, 1}, {1, 1, 1}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(l2_distance({1, 2}, {1, 2, 3}), IndexError);
}

TEST_CASE("top-k matches the naive oracle on random data") {
    const auto entries = random_entries(200, 16, 5);
    const auto index = FlatIndex::build(entries);
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        Vector q(16);
        for (auto& x : q) x = rng.normal();
        for (int k : {1, 5, 17, 200, 500}) {
            const auto got = index.top_k(q, k);
            const auto want = dt::naive_top_k(entries, q, k, {});
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].entry_id == want[i].entry_id);
                CHECK(got[i].distance == doctest::Approx(want[i].distance).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("exact ties break by entry id ascending") {
    const auto index = FlatIndex::build({
        entry("b", {1, 0}),
        entry("a", {0, 1}),
        entry("c", {-1, 0}),
    });
    const auto hits = index.top_k({0, 0}, 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].entry_id == "a");
    CHECK(hits[1].entry_id == "b");
    CHECK(hits[2].entry_id == "c");
}

TEST_CASE("results do not depend on insertion order") {
    auto entries = random_entries(50, 8, 2);
    const auto forward = FlatIndex::build(entries);
    std::reverse(entries.begin(), entries.end());
    const auto reversed = FlatIndex::build(entries);

    Vector q(8, 0.25);
    const auto a = forward.top_k(q, 10);
    const auto b = reversed.top_k(q, 10);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].entry_id == b[i].entry_id);
        CHECK(a[i].distance == b[i].distance);  // bitwise, same accumulation order
    }
}

TEST_CASE("k edge cases") {
    const auto index = FlatIndex::build(random_entries(5, 4, 3));
    CHECK(index.top_k(Vector(4, 0.0), 0).empty());
    CHECK(index.top_k(Vector(4, 0.0), 10).size() == 5);
    CHECK_THROWS_AS(index.top_k(Vector(4, 0.0), -1), std::invalid_argument);
    CHECK_THROWS_AS(index.top_k(Vector(3, 0.0), 1), IndexError);
}

TEST_CASE("empty index answers empty") {
    const FlatIndex index;
    CHECK(index.empty());
    CHECK(index.top_k({1.0, 2.0}, 5).empty());
}

TEST_CASE("build rejects malformed entry sets") {
    CHECK_THROWS_AS(FlatIndex::build({entry("a", {1, 2}), entry("a", {3, 4})}), IndexError);
    CHECK_THROWS_AS(FlatIndex::build({entry("a", {1, 2}), entry("b", {1, 2, 3})}), IndexError);
    CHECK_THROWS_AS(
        FlatIndex::build({entry("a", {1, std::numeric_limits<double>::quiet_NaN()})}),
        IndexError);
    CHECK_THROWS_AS(FlatIndex::build({entry("a", {})}), IndexError);
}

TEST_CASE("filters exclude without reordering survivors") {
    auto e1 = entry("e1", {0, 0}, "alice");
    auto e2 = entry("e2", {1, 0}, "bob");
    auto e3 = entry("e3", {2, 0}, "alice");
    auto e4 = entry("e4", {3, 0}, "carol");
    const auto index = FlatIndex::build({e1, e2, e3, e4});
    const Vector q{0, 0};

    SUBCASE("excluded participants") {
        RetrievalFilter f;
        f.excluded_participants = {"alice"};
        const auto hits = index.top_k(q, 10, f);
        REQUIRE(hits.size() == 2);
        CHECK(hits[0].entry_id == "e2");
        CHECK(hits[1].entry_id == "e4");
    }
    SUBCASE("allow-list") {
        RetrievalFilter f;
        f.allowed_participants = std::set<std::string>{"alice"};
        const auto hits = index.top_k(q, 10, f);
        REQUIRE(hits.size() == 2);
        CHECK(hits[0].entry_id == "e1");
        CHECK(hits[1].entry_id == "e3");
    }
    SUBCASE("single entry exclusion") {
        RetrievalFilter f;
        f.exclude_entry = "e1";
        const auto hits = index.top_k(q, 1, f);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].entry_id == "e2");
    }
    SUBCASE("filtered ranking equals oracle on the surviving subset") {
        RetrievalFilter f;
        f.excluded_participants = {"bob"};
        f.exclude_entry = "e3";
        const auto got = index.top_k(q, 10, f);
        const auto want = dt::naive_top_k({e1, e2, e3, e4}, q, 10, f);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].entry_id == want[i].entry_id);
    }
}

TEST_CASE("save and load round-trip every field") {
    auto entries = random_entries(30, 12, 9);
    entries[0].labels[ConstructId::pos_aff()] = true;
    entries[0].continuous[ConstructId::pos_aff()] = 17.0;
    entries[0].traits = {"p0", 61, "male", "Black", "Lung", 3, true};
    const auto index = FlatIndex::build(entries);

    const auto dir = dt::unique_temp_dir("index");
    const auto path = (dir / "idx.bin").string();
    index.save(path);
    const auto loaded = FlatIndex::load(path);

    REQUIRE(loaded.size() == index.size());
    CHECK(loaded.dim() == index.dim());
    for (const auto& e : index.entries()) {
        const auto* l = loaded.find(e.entry_id);
        REQUIRE(l != nullptr);
        CHECK(l->vector == e.vector);  // bit-exact doubles
        CHECK(l->participant_id == e.participant_id);
        CHECK(l->labels == e.labels);
        CHECK(l->continuous == e.continuous);
        CHECK(l->text == e.text);
        CHECK(l->traits.age == e.traits.age);
        CHECK(l->traits.cancer_type == e.traits.cancer_type);
    }

    // loaded index answers identically
    Vector q(12, 0.5);
    const auto a = index.top_k(q, 7);
    const auto b = loaded.top_k(q, 7);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].entry_id == b[i].entry_id);
        CHECK(a[i].distance == b[i].distance);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("load distinguishes corruption from version mismatch") {
    const auto index = FlatIndex::build(random_entries(10, 6, 4));
    const auto dir = dt::unique_temp_dir("index-bad");
    const auto good = (dir / "good.bin").string();
    index.save(good);
    auto bytes = dt::read_text_file(good);

    SUBCASE("bad magic") {
        auto broken = bytes;
        broken[0] = 'X';
        const auto path = (dir / "magic.bin").string();
        dt::write_text_file(path, broken);
        try {
            FlatIndex::load(path);
            FAIL("expected IndexError");
        } catch (const IndexError& e) {
            CHECK(e.kind() == IndexError::Kind::Corruption);
        }
    }
    SUBCASE("truncated file") {
        const auto path = (dir / "trunc.bin").string();
        dt::write_text_file(path, bytes.substr(0, bytes.size() / 2));
        try {
            FlatIndex::load(path);
            FAIL("expected IndexError");
        } catch (const IndexError& e) {
            CHECK(e.kind() == IndexError::Kind::Corruption);
        }
    }
    SUBCASE("flipped payload bit fails the checksum") {
        auto broken = bytes;
        broken[broken.size() / 2] = static_cast<char>(broken[broken.size() / 2] ^ 0x01);
        const auto path = (dir / "flip.bin").string();
        dt::write_text_file(path, broken);
        CHECK_THROWS_AS(FlatIndex::load(path), IndexError);
    }
    SUBCASE("future version is reported as such") {
        auto broken = bytes;
        // version lives right after the 8-byte magic as a little-endian u32
        broken[8] = 99;
        const auto path = (dir / "version.bin").string();
        dt::write_text_file(path, broken);
        try {
            FlatIndex::load(path);
            FAIL("expected IndexError");
        } catch (const IndexError& e) {
            CHECK(e.kind() == IndexError::Kind::VersionMismatch);
        }
    }
    SUBCASE("missing file is an io error") {
        try {
            FlatIndex::load((dir / "absent.bin").string());
            FAIL("expected IndexError");
        } catch (const IndexError& e) {
            CHECK(e.kind() == IndexError::Kind::Io);
        }
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("merge_hits interleaves pools under the global ordering") {
    auto a1 = entry("a1", {0.0});
    auto b1 = entry("b1", {0.0});
    auto a2 = entry("a2", {2.0});
    auto b2 = entry("b2", {1.0});
    const auto pool_a = FlatIndex::build({a1, a2});
    const auto pool_b = FlatIndex::build({b1, b2});
    const Vector q{0.0};

    const auto merged = FlatIndex::merge_hits({pool_a.top_k(q, 2), pool_b.top_k(q, 2)}, 3);
    REQUIRE(merged.size() == 3);
    CHECK(merged[0].entry_id == "a1");  // tie with b1 broken by id
    CHECK(merged[1].entry_id == "b1");
    CHECK(merged[2].entry_id == "b2");

    CHECK(FlatIndex::merge_hits({}, 5).empty());
    CHECK(FlatIndex::merge_hits({pool_a.top_k(q, 2)}, 0).empty());
}

}  // TEST_SUITE
