#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace raterboot {

// Identifies one reproducible random stream. Streams are keyed by the master
// seed plus a path of indices (e.g. [cell, hypothesis, replicate, role]), so
// any unit of work can be regenerated in isolation regardless of execution
// order or thread count. Role codes used by the simulator: G=0, A=1, B=2,
// null-mix=3.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> path;

    SeedSpec child(std::uint64_t index) const {
        SeedSpec s = *this;
        s.path.push_back(index);
        return s;
    }

    std::uint64_t stream_key() const;
};

namespace detail {

// splitmix64 finalizer
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

} // namespace detail

inline std::uint64_t SeedSpec::stream_key() const {
    std::uint64_t key = detail::mix64(master_seed + detail::kGolden);
    for (std::uint64_t p : path) {
        key = detail::mix64(key + detail::kGolden + detail::mix64(p + detail::kGolden));
    }
    return key;
}

// Counter-based generator over a keyed stream. Output i depends only on
// (key, i), never on shared state, which keeps every draw sequence exactly
// reproducible. Bounded draws use rejection sampling instead of
// std::uniform_int_distribution, whose output is implementation-defined.
class Stream {
public:
    explicit Stream(const SeedSpec& spec) : key_(spec.stream_key()) {}
    explicit Stream(std::uint64_t raw_key) : key_(raw_key) {}

    std::uint64_t next_u64() {
        return detail::mix64(key_ + (++counter_) * detail::kGolden);
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1]; safe as a log() argument
    double next_double_pos() { return 1.0 - next_double(); }

    // unbiased uniform in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    std::uint32_t index_below(std::size_t n) {
        return static_cast<std::uint32_t>(next_below(static_cast<std::uint64_t>(n)));
    }

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    template <typename It>
    void shuffle_range(It first, It last) {
        auto n = static_cast<std::size_t>(last - first);
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Stable 64-bit hash for deriving cell seeds and dataset fingerprints.
class Fnv64 {
public:
    void add_byte(unsigned char b) {
        hash_ ^= b;
        hash_ *= 0x100000001B3ull;
    }
    void add_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) add_byte(p[i]);
    }
    void add_u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) add_byte(static_cast<unsigned char>(v >> (8 * i)));
    }
    void add_i64(std::int64_t v) { add_u64(static_cast<std::uint64_t>(v)); }
    void add_string(const std::string& s) {
        add_u64(s.size());
        add_bytes(s.data(), s.size());
    }
    std::uint64_t value() const { return hash_; }

private:
    std::uint64_t hash_ = 0xCBF29CE484222325ull;
};

} // namespace raterboot
