#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace belllab {

/// Input or configuration that violates a documented contract.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal consistency check failed.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A detected click, or 0 for "no detection" in post-selection and raw paths.
enum class Outcome : std::int8_t { kMinus = -1, kNone = 0, kPlus = 1 };

constexpr int to_int(Outcome o) { return static_cast<int>(o); }

inline Outcome outcome_from_int(int v) {
  switch (v) {
    case -1: return Outcome::kMinus;
    case 0: return Outcome::kNone;
    case 1: return Outcome::kPlus;
    default: throw InputError("outcome must be one of -1, 0, +1; got " + std::to_string(v));
  }
}

constexpr Outcome flip(Outcome o) { return static_cast<Outcome>(-static_cast<std::int8_t>(o)); }

/// Setting labels: 0 is the unprimed setting, 1 the primed one.
struct SettingPair {
  std::uint8_t x = 0;
  std::uint8_t y = 0;

  constexpr std::size_t index() const { return 2u * x + y; }
  static constexpr SettingPair from_index(std::size_t i) {
    return {static_cast<std::uint8_t>(i / 2), static_cast<std::uint8_t>(i % 2)};
  }
  friend constexpr bool operator==(SettingPair, SettingPair) = default;
};

inline constexpr std::array<SettingPair, 4> kAllContexts{
    SettingPair{0, 0}, SettingPair{0, 1}, SettingPair{1, 0}, SettingPair{1, 1}};

/// Sign of a context in S = E00 + E01 + E10 - E11.
constexpr int chsh_sign(SettingPair s) { return (s.x == 1 && s.y == 1) ? -1 : 1; }

inline std::string context_label(SettingPair s) {
  return std::string{static_cast<char>('0' + s.x), static_cast<char>('0' + s.y)};
}

/// Planar measurement angles (radians) per setting label.
struct AngleAssignment {
  std::array<double, 2> alice{0.0, 0.0};
  std::array<double, 2> bob{0.0, 0.0};

  double theta(SettingPair s) const { return alice[s.x] - bob[s.y]; }

  /// Angles at which the singlet reaches |S| = 2*sqrt(2).
  static AngleAssignment canonical() {
    constexpr double pi = std::numbers::pi;
    return {{0.0, pi / 2}, {pi / 4, -pi / 4}};
  }

  void validate() const {
    for (double a : alice)
      if (!std::isfinite(a)) throw InputError("alice angle is not finite");
    for (double b : bob)
      if (!std::isfinite(b)) throw InputError("bob angle is not finite");
  }
};

struct TrialRecord {
  std::uint64_t trial_id = 0;
  SettingPair settings;
  Outcome a = Outcome::kNone;
  Outcome b = Outcome::kNone;
  bool ready = true;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

inline constexpr double kTsirelson = 2.0 * std::numbers::sqrt2;

}  // namespace belllab
