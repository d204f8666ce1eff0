#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string_view>

namespace evograph {

/// splitmix64 finalizer; a good avalanche mix for seed derivation.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t seed, std::uint64_t value) noexcept {
    return mix64(seed ^ mix64(value));
}

template <typename... Ts>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Ts... parts) noexcept {
    ((seed = combine(seed, static_cast<std::uint64_t>(parts))), ...);
    return seed;
}

/// Incremental FNV-1a over bytes, used for content hashes.
class Fnv1a {
public:
    Fnv1a& bytes(const void* data, std::size_t n) noexcept {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    Fnv1a& str(std::string_view s) noexcept {
        u64(s.size());
        return bytes(s.data(), s.size());
    }
    Fnv1a& u64(std::uint64_t v) noexcept { return bytes(&v, sizeof v); }
    Fnv1a& f64(double v) noexcept {
        if (v == 0.0) v = 0.0;  // fold -0.0
        return u64(std::bit_cast<std::uint64_t>(v));
    }
    std::uint64_t value() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t hash_string(std::string_view s, std::uint64_t seed = 0) noexcept {
    return mix64(Fnv1a{}.u64(seed).str(s).value());
}

/// Maps a 64-bit hash to a double in [0, 1).
constexpr double unit_interval(std::uint64_t h) noexcept {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace evograph
