#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "belllab/types.hpp"

namespace belllab {

/// Outcome-pair counts n_xy(a, b) for a, b in {+1, -1, 0}, per context.
class ContextTable {
 public:
  static constexpr std::size_t cell(Outcome a, Outcome b) {
    return static_cast<std::size_t>(to_int(a) + 1) * 3 + static_cast<std::size_t>(to_int(b) + 1);
  }

  void add(SettingPair s, Outcome a, Outcome b, std::uint64_t n = 1) {
    counts_[s.index()][cell(a, b)] += n;
  }
  std::uint64_t count(SettingPair s, Outcome a, Outcome b) const {
    return counts_[s.index()][cell(a, b)];
  }
  std::uint64_t total(SettingPair s) const;
  std::uint64_t total() const;

  /// Count of entries in context s with a*b != 0.
  std::uint64_t nonzero_pairs(SettingPair s) const;

  ContextTable& operator+=(const ContextTable& other);
  friend bool operator==(const ContextTable&, const ContextTable&) = default;

 private:
  std::array<std::array<std::uint64_t, 9>, 4> counts_{};
};

ContextTable tally(std::span<const TrialRecord> records);

/// Estimates for one context.  Expectations are conditional on a*b != 0;
/// an empty denominator leaves the field disengaged.
struct ContextSummary {
  std::optional<double> e_ab;
  std::optional<double> e_a;
  std::optional<double> e_b;
  std::optional<double> coincidence;  // C_xy, undefined when N_xy = 0
  std::uint64_t n_total = 0;
  std::uint64_t n_pairs = 0;
};

struct CorrelationSummary {
  std::array<ContextSummary, 4> contexts;

  const ContextSummary& operator[](SettingPair s) const { return contexts[s.index()]; }
  ContextSummary& operator[](SettingPair s) { return contexts[s.index()]; }
};

CorrelationSummary estimate(const ContextTable& table);

/// S = E00 + E01 + E10 - E11.
double chsh(const std::array<double, 4>& e);

/// Disengaged if any context is starved.
std::optional<double> chsh(const CorrelationSummary& summary);

}  // namespace belllab
