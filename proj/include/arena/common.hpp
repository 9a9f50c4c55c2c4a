#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace arena {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Base of every error the harness raises on purpose. Callers that want to
/// absorb harness failures (episode runner, bridge server) catch this type;
/// anything else escaping is a bug.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  /// Stable machine-readable name, e.g. "SchemaError".
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define ARENA_DEFINE_ERROR(Name)                                  \
  class Name : public ::arena::Error {                            \
   public:                                                        \
    explicit Name(const std::string& message)                     \
        : ::arena::Error(#Name, message) {}                       \
  }

/// Normalized axis-aligned rectangle. Screen space is the unit square with
/// (0,0) at the top-left corner.
struct Rect {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double cx() const { return (x1 + x2) / 2.0; }
  double cy() const { return (y1 + y2) / 2.0; }
  bool contains(double x, double y) const {
    return x >= x1 && x <= x2 && y >= y1 && y <= y2;
  }
  /// x1<x2, y1<y2 and every corner inside [0,1].
  bool is_normalized() const;

  bool operator==(const Rect&) const = default;
};

double iou(const Rect& a, const Rect& b);

void to_json(json& j, const Rect& r);
void from_json(const json& j, Rect& r);

/// Lowercase hex SHA-256 of arbitrary bytes.
std::string sha256_hex(std::string_view bytes);

/// Per-episode seed derived from a run seed and a task id. Depends only on
/// the inputs, never on scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

/// Mixes two 64-bit values (splitmix64 finalizer over their combination).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Portable random source. mt19937_64 output is fixed by the standard; the
/// conversions to real numbers are done here so draws are identical on every
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0,1).
  double uniform();
  /// Integer in [0,n). n must be positive.
  std::size_t below(std::size_t n);
  /// Standard normal via Box-Muller.
  double normal();
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Formats with at most `decimals` fractional digits, trailing zeros
/// stripped: 0.10 -> "0.1", 1.00 -> "1".
std::string format_trimmed(double value, int decimals);

/// Fixed decimals: format_fixed(74.5, 1) -> "74.5".
std::string format_fixed(double value, int decimals);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

}  // namespace arena
