#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace wsnloc {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A structure references something that does not exist (unknown node, missing
// edge weight, node not in the requested layer).
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Importance weights collapsed to zero: the fused messages do not overlap.
class DegenerateWeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidMeasurementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Node identifier. Agents occupy 1..N, anchors N+1..N+M.
struct NodeId {
  std::uint32_t value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

// ---------------------------------------------------------------------------
// Seeded random streams
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and any number of
// integer tags (node ids, iteration numbers, purpose constants).
inline constexpr std::uint64_t derive_seed(std::uint64_t base) { return splitmix64(base); }

template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, Tags... rest) {
  return derive_seed(splitmix64(base ^ splitmix64(tag + 0x632be59bd9b4e019ULL)), static_cast<std::uint64_t>(rest)...);
}

// Stream purposes used with derive_seed.
enum class Stream : std::uint64_t {
  placement = 1,
  measurement = 2,
  inference = 3,
  message = 4,
  fusion = 5,
  resample = 6,
  prior = 7,
};

inline constexpr std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

// 64-bit FNV-1a, used to fingerprint scenarios and results for replay checks.
class Fnv1a {
 public:
  void add_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void add(const T& v) {
    add_bytes(&v, sizeof(T));
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

namespace detail {

// exp(x) for x <= 0 with ~1e-14 relative error. Branch-free so that mixture
// evaluation loops vectorize. Arguments below -700 return exactly 0, which
// keeps subnormals (and their slow arithmetic) out of the accumulators.
inline double fast_exp(double in) {
  const double x = in < -700.0 ? -700.0 : in;
  constexpr double kLog2e = 1.4426950408889634;
  constexpr double kLn2Hi = 0.693147180369123816490;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  constexpr double kShifter = 6755399441055744.0;  // 1.5 * 2^52
  const double t = x * kLog2e + kShifter;
  const double n = t - kShifter;
  const double r = x - n * kLn2Hi - n * kLn2Lo;
  double p = 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const std::int64_t bits = (__builtin_bit_cast(std::int64_t, t) + 1023) << 52;
  const double value = p * __builtin_bit_cast(double, bits);
  return in < -700.0 ? 0.0 : value;
}

}  // namespace detail

}  // namespace wsnloc

template <>
struct std::hash<wsnloc::NodeId> {
  std::size_t operator()(wsnloc::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
