#pragma once

#include <cstdint>
#include <string_view>

namespace provpipe {

/// Seeded FNV-1a over the bytes, followed by a splitmix64 finalizer for
/// avalanche. Pure integer arithmetic: stable across platforms and runs,
/// which the deterministic-embedding contract depends on.
constexpr std::uint64_t hash64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

}  // namespace provpipe
