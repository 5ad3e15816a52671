#include "belllab/statistics.hpp"

#include <numeric>

namespace belllab {

std::uint64_t ContextTable::total(SettingPair s) const {
  const auto& c = counts_[s.index()];
  return std::accumulate(c.begin(), c.end(), std::uint64_t{0});
}

std::uint64_t ContextTable::total() const {
  std::uint64_t n = 0;
  for (auto s : kAllContexts) n += total(s);
  return n;
}

std::uint64_t ContextTable::nonzero_pairs(SettingPair s) const {
  std::uint64_t n = 0;
  for (auto a : {Outcome::kPlus, Outcome::kMinus})
    for (auto b : {Outcome::kPlus, Outcome::kMinus}) n += count(s, a, b);
  return n;
}

ContextTable& ContextTable::operator+=(const ContextTable& other) {
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t c = 0; c < 9; ++c) counts_[k][c] += other.counts_[k][c];
  return *this;
}

ContextTable tally(std::span<const TrialRecord> records) {
  ContextTable table;
  for (const auto& r : records) {
    if (r.settings.x > 1 || r.settings.y > 1) throw InputError("setting label outside {0,1}");
    table.add(r.settings, r.a, r.b);
  }
  return table;
}

CorrelationSummary estimate(const ContextTable& table) {
  CorrelationSummary out;
  for (auto s : kAllContexts) {
    ContextSummary& cs = out[s];
    cs.n_total = table.total(s);
    cs.n_pairs = table.nonzero_pairs(s);
    if (cs.n_total > 0)
      cs.coincidence = static_cast<double>(cs.n_pairs) / static_cast<double>(cs.n_total);
    if (cs.n_pairs == 0) continue;

    std::int64_t sum_ab = 0, sum_a = 0, sum_b = 0;
    for (auto a : {Outcome::kPlus, Outcome::kMinus}) {
      for (auto b : {Outcome::kPlus, Outcome::kMinus}) {
        const auto n = static_cast<std::int64_t>(table.count(s, a, b));
        sum_ab += to_int(a) * to_int(b) * n;
        sum_a += to_int(a) * n;
        sum_b += to_int(b) * n;
      }
    }
    const double denom = static_cast<double>(cs.n_pairs);
    cs.e_ab = static_cast<double>(sum_ab) / denom;
    cs.e_a = static_cast<double>(sum_a) / denom;
    cs.e_b = static_cast<double>(sum_b) / denom;
  }
  return out;
}

double chsh(const std::array<double, 4>& e) {
  double s = 0.0;
  for (auto ctx : kAllContexts) s += chsh_sign(ctx) * e[ctx.index()];
  return s;
}

std::optional<double> chsh(const CorrelationSummary& summary) {
  std::array<double, 4> e{};
  for (auto ctx : kAllContexts) {
    const auto& v = summary[ctx].e_ab;
    if (!v) return std::nullopt;
    e[ctx.index()] = *v;
  }
  return chsh(e);
}

}  // namespace belllab
