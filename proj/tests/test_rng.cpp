#include "fewshot/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

using namespace fewshot;

namespace {

// Material layout restated from the documented derivation, so the test does
// not reuse the library's own serializer.
std::string le64(std::uint64_t v) {
    std::string s(8, '\0');
    for (int i = 0; i < 8; ++i) s[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    return s;
}

std::uint64_t le64_load(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

double chi_square(const std::vector<std::size_t>& counts, double expected) {
    double x = 0;
    for (auto c : counts) x += (c - expected) * (c - expected) / expected;
    return x;
}

}  // namespace

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Random123 kat_vectors.
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("sha256 known answers") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("derive_stream matches the documented construction") {
    const std::string material = "derive" + le64(42) + le64(4) + "snli" + le64(7) + le64(3) + "way";
    const auto digest = sha256(material);
    const std::uint64_t key = le64_load(digest.data());
    const std::uint64_t lane = le64_load(digest.data() + 8);

    Stream s = derive_stream(42, "snli", 7, "way");
    CHECK(s.key() == key);
    CHECK(s.lane() == lane);

    const auto block0 = philox4x32_10({0, 0, static_cast<std::uint32_t>(lane), static_cast<std::uint32_t>(lane >> 32)},
                                      {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)});
    const auto block1 = philox4x32_10({1, 0, static_cast<std::uint32_t>(lane), static_cast<std::uint32_t>(lane >> 32)},
                                      {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)});
    for (auto w : block0) CHECK(s.next_u32() == w);
    for (auto w : block1) CHECK(s.next_u32() == w);
}

TEST_CASE("streams are pure functions of their inputs") {
    Stream a = derive_stream(1, "d", 0, "t");
    Stream b = derive_stream(1, "d", 0, "t");
    for (int i = 0; i < 100; ++i) CHECK(a() == b());

    std::set<std::pair<std::uint64_t, std::uint64_t>> ids;
    for (std::uint64_t seed : {0ULL, 1ULL}) {
        for (const char* ds : {"a", "b", "ab"}) {
            for (std::uint64_t idx : {0ULL, 1ULL}) {
                for (const char* tag : {"", "b", "x"}) {
                    const auto s = derive_stream(seed, ds, idx, tag);
                    ids.insert({s.key(), s.lane()});
                }
            }
        }
    }
    CHECK(ids.size() == 2 * 3 * 2 * 3);
    // Length prefixes keep ("a", "b...") apart from ("ab", "...").
    CHECK_FALSE(derive_stream(0, "a", 0, "b") == derive_stream(0, "ab", 0, ""));
}

TEST_CASE("fork ignores consumption, substreams differ") {
    Stream s = derive_stream(3, "x", 0, "y");
    const Stream f1 = s.fork("child");
    for (int i = 0; i < 17; ++i) s();
    CHECK(s.fork("child").key() == f1.key());
    CHECK(s.fork("child").lane() == f1.lane());
    CHECK(s.fork(1, 2, 3, 4).key() != s.fork(1, 2, 3, 5).key());
    CHECK(s.substream(0).lane() != s.substream(1).lane());
    CHECK(s.substream(0).key() == s.key());
}

TEST_CASE("uniform_index is in range and uniform") {
    Stream s = derive_stream(9, "uniform", 0, "");
    std::vector<std::size_t> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const auto v = s.uniform_index(7);
        REQUIRE(v < 7);
        ++counts[v];
    }
    // chi2 critical value, 6 dof, p = 0.001.
    CHECK(chi_square(counts, n / 7.0) < 22.46);
    CHECK(s.uniform_index(1) == 0);
}

TEST_CASE("uniform_int bounds") {
    Stream s = derive_stream(9, "int", 0, "");
    for (int i = 0; i < 1000; ++i) {
        const auto v = s.uniform_int(5, 10);
        CHECK(v >= 5);
        CHECK(v <= 10);
    }
    CHECK(s.uniform_int(3, 3) == 3);
    CHECK_THROWS(s.uniform_int(4, 3));
}

TEST_CASE("continuous draws have the right moments") {
    Stream s = derive_stream(11, "moments", 0, "");
    const int n = 200000;
    double sum = 0, sum_n = 0, sum_n2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        const double z = s.normal();
        sum_n += z;
        sum_n2 += z * z;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sum_n / n) < 0.01);
    CHECK(sum_n2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("binomial mean and edge cases") {
    Stream s = derive_stream(12, "binomial", 0, "");
    CHECK(s.binomial(10, 0.0) == 0);
    CHECK(s.binomial(10, 1.0) == 10);
    CHECK(s.binomial(0, 0.5) == 0);
    double sum = 0;
    for (int i = 0; i < 20000; ++i) sum += static_cast<double>(s.binomial(50, 0.3));
    CHECK(sum / 20000 == doctest::Approx(15.0).epsilon(0.01));
}

TEST_CASE("stream works as a standard URBG") {
    std::vector<int> v(20);
    std::iota(v.begin(), v.end(), 0);
    auto w = v;
    Stream a = derive_stream(5, "shuffle", 0, "");
    Stream b = derive_stream(5, "shuffle", 0, "");
    std::shuffle(v.begin(), v.end(), a);
    std::shuffle(w.begin(), w.end(), b);
    CHECK(v == w);
    CHECK(std::is_permutation(v.begin(), v.end(), w.begin()));
}
