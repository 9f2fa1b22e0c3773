#pragma once

#include <cstdint>
#include <random>

namespace ietmfc {

/// Purpose tags keep the substreams of one agent apart.
enum class Stream : std::uint64_t { initial_state = 1, initial_error = 2, brownian = 3 };

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the (agent, purpose) substream; depends on nothing else, so the
/// draws of one agent never change with scheduling or with other agents.
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t agent,
                                       Stream purpose) {
  return splitmix64(splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(purpose))) +
                    agent);
}

inline std::mt19937_64 substream(std::uint64_t master, std::uint64_t agent,
                                 Stream purpose) {
  return std::mt19937_64(substream_seed(master, agent, purpose));
}

}  // namespace ietmfc
