#include "fewshot/rng.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fewshot {

std::array<std::uint8_t, 32> sha256(std::string_view bytes) {
    std::array<std::uint8_t, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    return out;
}

std::string sha256_hex(std::string_view bytes) {
    static constexpr char kHex[] = "0123456789abcdef";
    const auto digest = sha256(bytes);
    std::string hex;
    hex.reserve(64);
    for (auto b : digest) {
        hex.push_back(kHex[b >> 4]);
        hex.push_back(kHex[b & 0xF]);
    }
    return hex;
}

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

namespace {

std::uint64_t load_le64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_field(std::string& out, std::string_view s) {
    append_u64(out, s.size());
    out.append(s);
}

Stream stream_from_digest(const std::string& material) {
    const auto d = sha256(material);
    return Stream(load_le64(d.data()), load_le64(d.data() + 8));
}

}  // namespace

void Stream::refill() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(lane_), static_cast<std::uint32_t>(lane_ >> 32)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(key_),
                                              static_cast<std::uint32_t>(key_ >> 32)};
    buf_ = philox4x32_10(ctr, key);
    ++block_;
    used_ = 0;
}

std::uint32_t Stream::next_u32() {
    if (used_ >= 4) refill();
    return buf_[used_++];
}

Stream::result_type Stream::operator()() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

std::uint32_t Stream::uniform_index(std::uint32_t n) {
    // Lemire's nearly-divisionless method.
    std::uint64_t m = static_cast<std::uint64_t>(next_u32()) * n;
    auto low = static_cast<std::uint32_t>(m);
    if (low < n) {
        const std::uint32_t threshold = static_cast<std::uint32_t>(-n) % n;
        while (low < threshold) {
            m = static_cast<std::uint64_t>(next_u32()) * n;
            low = static_cast<std::uint32_t>(m);
        }
    }
    return static_cast<std::uint32_t>(m >> 32);
}

std::uint64_t Stream::uniform_int(std::uint64_t lo, std::uint64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = hi - lo;
    if (span == std::numeric_limits<std::uint64_t>::max()) return (*this)();
    if (span < std::numeric_limits<std::uint32_t>::max()) {
        return lo + uniform_index(static_cast<std::uint32_t>(span + 1));
    }
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
        x = (*this)();
    } while (x >= limit);
    return lo + x % range;
}

double Stream::uniform01() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Stream::normal() {
    if (has_spare_normal_) {
        has_spare_normal_ = false;
        return spare_normal_;
    }
    double u1;
    do {
        u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(theta);
    has_spare_normal_ = true;
    return r * std::cos(theta);
}

std::int64_t Stream::binomial(std::int64_t trials, double p) {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    std::binomial_distribution<std::int64_t> dist(trials, p);
    return dist(*this);
}

Stream Stream::fork(std::string_view tag) const {
    std::string material = "fork";
    append_u64(material, key_);
    append_u64(material, lane_);
    append_field(material, tag);
    return stream_from_digest(material);
}

Stream Stream::fork(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) const {
    std::string material = "forkn";
    append_u64(material, key_);
    append_u64(material, lane_);
    append_u64(material, a);
    append_u64(material, b);
    append_u64(material, c);
    append_u64(material, d);
    return stream_from_digest(material);
}

Stream derive_stream(std::uint64_t global_seed, std::string_view dataset_id,
                     std::uint64_t episode_index, std::string_view purpose_tag) {
    std::string material = "derive";
    append_u64(material, global_seed);
    append_field(material, dataset_id);
    append_u64(material, episode_index);
    append_field(material, purpose_tag);
    return stream_from_digest(material);
}

}  // namespace fewshot
