#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>

namespace fewshot {

/// Identifier recorded in manifests for the stream derivation + generator
/// pair implemented here. Bump it if either changes.
inline constexpr std::string_view kRngAlgorithmId = "sha256-derive/philox4x32-10/v1";

/// Raw Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);
std::array<std::uint8_t, 32> sha256(std::string_view bytes);

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by a 64-bit key plus a 64-bit lane (upper half of
/// the 128-bit counter); the lower half counts blocks. Output at position p
/// depends only on (key, lane, p), so streams never share state.
/// Satisfies UniformRandomBitGenerator with 64-bit results.
class Stream {
public:
    using result_type = std::uint64_t;

    Stream() = default;
    Stream(std::uint64_t key, std::uint64_t lane) : key_(key), lane_(lane) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();
    std::uint32_t next_u32();

    /// Uniform integer on [lo, hi] inclusive, unbiased (Lemire rejection).
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);
    /// Uniform index on [0, n), n > 0.
    std::uint32_t uniform_index(std::uint32_t n);
    /// Uniform double on [0, 1) with 53 random bits.
    double uniform01();
    /// Standard normal via Box-Muller (both variates used).
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    /// Number of successes in `trials` Bernoulli(p) draws.
    std::int64_t binomial(std::int64_t trials, double p);

    /// Child stream that depends only on this stream's identity and `tag`,
    /// not on how much of this stream has been consumed.
    Stream fork(std::string_view tag) const;
    Stream fork(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                std::uint64_t d = 0) const;

    /// Cheap sibling stream: same key, lane offset by a multiple of the
    /// golden-ratio constant. Used for per-resample / per-run parallelism.
    Stream substream(std::uint64_t index) const {
        return Stream(key_, lane_ + (index + 1) * 0x9E3779B97F4A7C15ULL);
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t lane() const { return lane_; }

    friend bool operator==(const Stream& a, const Stream& b) {
        return a.key_ == b.key_ && a.lane_ == b.lane_ && a.block_ == b.block_ && a.used_ == b.used_;
    }

private:
    void refill();

    std::uint64_t key_ = 0;
    std::uint64_t lane_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int used_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

/// Stream for one (seed, dataset, episode, purpose) tuple. The four inputs
/// are length-prefixed and hashed with SHA-256; digest bytes 0..7 become the
/// key and 8..15 the lane.
Stream derive_stream(std::uint64_t global_seed, std::string_view dataset_id,
                     std::uint64_t episode_index, std::string_view purpose_tag);

}  // namespace fewshot
