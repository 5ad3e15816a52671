#include "belllab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "belllab/parallel.hpp"
#include "belllab/simplex.hpp"

namespace belllab {
namespace {

constexpr std::array<std::pair<int, int>, 4> kCells{{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

std::size_t cell_of(int a, int b) { return (a == 1 ? 0 : 2) + (b == 1 ? 0 : 1); }

// Survival function of chi-square with 3 degrees of freedom.
double chi2_sf_3(double x) {
  if (x <= 0.0) return 1.0;
  return std::erfc(std::sqrt(x / 2.0)) + std::sqrt(2.0 * x / std::numbers::pi) * std::exp(-x / 2.0);
}

constexpr double kUniformityRefusal = 1e-9;

}  // namespace

std::string ChshVariant::label() const {
  std::string out = sign > 0 ? "+" : "-";
  out += "(";
  for (auto s : kAllContexts) {
    if (s.index() != 0) out += s.index() == minus_context ? " - " : " + ";
    else if (s.index() == minus_context) out += "-";
    out += "E" + context_label(s);
  }
  return out + ")";
}

double hoeffding_pvalue(double s_hat, std::uint64_t n) {
  if (!(s_hat > 2.0)) return 1.0;
  const double t = s_hat - 2.0;
  return std::min(1.0, std::exp(-static_cast<double>(n) * t * t / 32.0));
}

HypothesisReport lhv_pvalue(const CorrelationSummary& summary, ChshVariant variant) {
  std::uint64_t n = 0;
  std::array<std::uint64_t, 4> counts{};
  double score = 0.0;
  for (auto s : kAllContexts) {
    const auto& cs = summary[s];
    if (cs.n_pairs == 0 || !cs.e_ab)
      throw InputError("lhv_pvalue: context " + context_label(s) + " has no valid trials");
    counts[s.index()] = cs.n_pairs;
    n += cs.n_pairs;
    // Sum of a*b over the context, recovered exactly from the mean.
    score += variant.coefficient(s) * std::round(*cs.e_ab * static_cast<double>(cs.n_pairs));
  }
  const double expected = static_cast<double>(n) / 4.0;
  double chi2 = 0.0;
  for (auto c : counts) chi2 += (c - expected) * (c - expected) / expected;
  if (chi2_sf_3(chi2) < kUniformityRefusal)
    throw InputError("lhv_pvalue: setting counts are incompatible with uniform 1/4 choice (chi2 = " +
                     std::to_string(chi2) + "); the Hoeffding bound does not apply");

  HypothesisReport r;
  r.variant = variant;
  r.n = n;
  r.s_hat = 4.0 * score / static_cast<double>(n);
  r.p_value = hoeffding_pvalue(r.s_hat, n);
  r.method = "hoeffding";
  return r;
}

HypothesisReport lhv_pvalue_best_variant(const CorrelationSummary& summary) {
  HypothesisReport best;
  bool first = true;
  for (std::uint8_t k = 0; k < 4; ++k) {
    for (int sign : {1, -1}) {
      auto r = lhv_pvalue(summary, {k, sign});
      if (first || r.s_hat > best.s_hat) best = r;
      first = false;
    }
  }
  best.p_value = std::min(1.0, 8.0 * best.p_value);
  best.method = "hoeffding-best-of-8";
  return best;
}

std::optional<TwoProportionTest> two_proportion_test(std::uint64_t k1, std::uint64_t n1,
                                                     std::uint64_t k2, std::uint64_t n2) {
  if (n1 == 0 || n2 == 0) return std::nullopt;
  TwoProportionTest t;
  const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2);
  t.p_first = static_cast<double>(k1) / dn1;
  t.p_second = static_cast<double>(k2) / dn2;
  t.delta = std::abs(t.p_first - t.p_second);
  const double pooled = static_cast<double>(k1 + k2) / (dn1 + dn2);
  t.std_error = std::sqrt(pooled * (1.0 - pooled) * (1.0 / dn1 + 1.0 / dn2));
  if (t.std_error > 0.0) {
    t.z = (t.p_first - t.p_second) / t.std_error;
    t.p_value = std::erfc(std::abs(t.z) / std::numbers::sqrt2);
  }
  return t;
}

NoSignallingBlock marginal_tests(const ContextTable& table) {
  NoSignallingBlock block;
  auto detections = [&](SettingPair s, bool alice, bool plus_only) {
    std::uint64_t k = 0;
    for (auto u : {Outcome::kPlus, Outcome::kMinus, Outcome::kNone}) {
      for (auto v : {Outcome::kPlus, Outcome::kMinus}) {
        if (plus_only && v != Outcome::kPlus) continue;
        k += alice ? table.count(s, v, u) : table.count(s, u, v);
      }
    }
    return k;
  };
  for (std::uint8_t local = 0; local < 2; ++local) {
    for (char party : {'A', 'B'}) {
      const bool alice = party == 'A';
      const SettingPair first = alice ? SettingPair{local, 0} : SettingPair{0, local};
      const SettingPair second = alice ? SettingPair{local, 1} : SettingPair{1, local};
      MarginalComparison c;
      c.party = party;
      c.local_setting = local;
      c.n_first = detections(first, alice, false);
      c.n_second = detections(second, alice, false);
      c.test = two_proportion_test(detections(first, alice, true), c.n_first,
                                   detections(second, alice, true), c.n_second);
      block.comparisons.push_back(c);
    }
  }
  std::size_t defined = 0;
  double min_p = 1.0;
  for (const auto& c : block.comparisons) {
    if (!c.test) continue;
    ++defined;
    min_p = std::min(min_p, c.test->p_value);
  }
  if (defined > 0) block.block_p = std::min(1.0, static_cast<double>(defined) * min_p);
  return block;
}

NoSignallingReport nosignalling_test(const ContextTable& raw, const ContextTable& final_data) {
  return {marginal_tests(raw), marginal_tests(final_data)};
}

double evaluate(const PairwiseTables& c, const PairwiseTables& p) {
  double v = 0.0;
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t j = 0; j < 4; ++j) v += c[k][j] * p[k][j];
  return v;
}

double vertex_bound(const PairwiseTables& c) {
  double best = -INFINITY;
  for (const auto& st : deterministic_strategies()) {
    double v = 0.0;
    for (auto s : kAllContexts) v += c[s.index()][cell_of(st.alice[s.x], st.bob[s.y])];
    best = std::max(best, v);
  }
  return best;
}

std::vector<SeparatingFunctional> chsh_type_functionals() {
  std::vector<SeparatingFunctional> out;
  for (std::uint8_t k = 0; k < 4; ++k) {
    for (int sign : {1, -1}) {
      const ChshVariant v{k, sign};
      SeparatingFunctional f;
      f.label = "chsh " + v.label();
      for (auto s : kAllContexts)
        for (std::size_t j = 0; j < 4; ++j)
          f.coefficients[s.index()][j] = v.coefficient(s) * kCells[j].first * kCells[j].second;
      f.bound = 2.0;
      out.push_back(f);
    }
  }
  for (std::uint8_t local = 0; local < 2; ++local) {
    for (char party : {'A', 'B'}) {
      for (int sign : {1, -1}) {
        const bool alice = party == 'A';
        const SettingPair first = alice ? SettingPair{local, 0} : SettingPair{0, local};
        const SettingPair second = alice ? SettingPair{local, 1} : SettingPair{1, local};
        SeparatingFunctional f;
        f.label = std::string("signalling ") + party + std::to_string(local) +
                  (sign > 0 ? " P(+|remote 0) - P(+|remote 1)" : " P(+|remote 1) - P(+|remote 0)");
        for (std::size_t j = 0; j < 4; ++j) {
          const bool plus = (alice ? kCells[j].first : kCells[j].second) == 1;
          if (!plus) continue;
          f.coefficients[first.index()][j] = sign;
          f.coefficients[second.index()][j] = -sign;
        }
        f.bound = 0.0;
        out.push_back(f);
      }
    }
  }
  return out;
}

void validate_tables(const PairwiseTables& p) {
  for (auto s : kAllContexts) {
    double mass = 0.0;
    for (double v : p[s.index()]) {
      if (!std::isfinite(v) || v < -kZeroWeight)
        throw InputError("context " + context_label(s) + ": probabilities must be finite and >= 0");
      mass += v;
    }
    if (std::abs(mass - 1.0) > kMassTolerance)
      throw InputError("context " + context_label(s) + ": probabilities sum to " +
                       std::to_string(mass) + ", expected 1");
  }
}

FeasibilityResult coupling_feasibility(const PairwiseTables& p) {
  validate_tables(p);
  const auto strategies = deterministic_strategies();
  // Row (context, cell), column = deterministic assignment.
  std::vector<double> a(16 * 16, 0.0), b(16, 0.0);
  for (auto s : kAllContexts) {
    for (std::size_t j = 0; j < 4; ++j) b[s.index() * 4 + j] = std::max(0.0, p[s.index()][j]);
    for (std::size_t v = 0; v < 16; ++v)
      a[(s.index() * 4 + cell_of(strategies[v].alice[s.x], strategies[v].bob[s.y])) * 16 + v] = 1.0;
  }
  const auto lp = solve_feasibility(a, 16, b);

  FeasibilityResult out;
  out.feasible = lp.feasible;
  if (lp.feasible) {
    std::array<double, 16> q{};
    double mass = 0.0;
    for (std::size_t v = 0; v < 16; ++v) mass += q[v] = lp.point[v];
    for (double& w : q) w /= mass;
    double err = 0.0;
    for (std::size_t r = 0; r < 16; ++r) {
      double m = 0.0;
      for (std::size_t v = 0; v < 16; ++v) m += a[r * 16 + v] * q[v];
      err = std::max(err, std::abs(m - b[r]));
    }
    out.joint = q;
    out.witness_error = err;
    return out;
  }

  for (auto f : chsh_type_functionals()) {
    f.value = evaluate(f.coefficients, p);
    if (!out.max_violation || f.slack() > out.max_violation->slack()) out.max_violation = f;
  }
  SeparatingFunctional farkas;
  farkas.label = "farkas";
  double scale = 0.0;
  for (double y : lp.farkas) scale = std::max(scale, std::abs(y));
  for (std::size_t r = 0; r < 16; ++r) farkas.coefficients[r / 4][r % 4] = lp.farkas[r] / scale;
  farkas.bound = vertex_bound(farkas.coefficients);
  farkas.value = evaluate(farkas.coefficients, p);
  out.farkas = farkas;
  if (out.max_violation->slack() <= 0.0) out.max_violation = farkas;
  return out;
}

PairwiseTables pairwise_tables(const CouplingModel& model) {
  PairwiseTables p{};
  for (auto s : kAllContexts) {
    const auto e = exact_expectation(model, s);
    if (!e.e_ab) throw InputError("pairwise_tables: context " + context_label(s) + " is starved");
    for (std::size_t j = 0; j < 4; ++j) {
      const auto [a, b] = kCells[j];
      p[s.index()][j] = 0.25 * (1.0 + a * *e.e_a + b * *e.e_b + a * b * *e.e_ab);
    }
  }
  return p;
}

PairwiseTables pairwise_tables(const ContextTable& table) {
  PairwiseTables p{};
  for (auto s : kAllContexts) {
    const auto n = table.nonzero_pairs(s);
    if (n == 0) throw InputError("pairwise_tables: context " + context_label(s) + " is starved");
    for (std::size_t j = 0; j < 4; ++j) {
      const auto [a, b] = kCells[j];
      p[s.index()][j] = static_cast<double>(table.count(s, outcome_from_int(a), outcome_from_int(b))) /
                        static_cast<double>(n);
    }
  }
  return p;
}

AngleFamily singlet_family(double visibility) {
  return [visibility](double theta) -> CouplingModel {
    return QuantumSingletModel({{theta, theta}, {0.0, 0.0}}, visibility);
  };
}

AngleFamily pearle_family(PearleOptions options) {
  return [options](double theta) -> CouplingModel {
    return make_pearle_like({{theta, theta}, {0.0, 0.0}}, options);
  };
}

std::vector<SweepPoint> theta_sweep(const AngleFamily& family, std::span<const double> grid,
                                    SweepMode mode, std::uint64_t n_per_point, std::uint64_t seed) {
  if (grid.empty()) throw InputError("theta sweep grid is empty");
  if (mode == SweepMode::kMonteCarlo && n_per_point == 0)
    throw InputError("theta sweep needs n_per_point >= 1");
  std::vector<SweepPoint> out(grid.size());
  const SettingPair ctx{0, 0};
  parallel_for(grid.size(), [&](std::size_t i) {
    const CouplingModel model = family(grid[i]);
    SweepPoint& pt = out[i];
    pt.theta = grid[i];
    if (mode == SweepMode::kExact) {
      pt.e = exact_expectation(model, ctx).e_ab;
      return;
    }
    RngStream rng(seed, stream_id(StreamKind::kSweep, i));
    ContextTable table;
    for (std::uint64_t k = 0; k < n_per_point; ++k) {
      const auto [a, b] = sample_trial(model, ctx, rng);
      table.add(ctx, a, b);
    }
    const auto summary = estimate(table);
    pt.e = summary[ctx].e_ab;
    pt.n = summary[ctx].n_pairs;
    if (pt.e) pt.std_error = std::sqrt(std::max(0.0, 1.0 - *pt.e * *pt.e) / static_cast<double>(pt.n));
  });
  return out;
}

double fit_cosine_amplitude(std::span<const SweepPoint> points) {
  double num = 0.0, den = 0.0;
  for (const auto& p : points) {
    if (!p.e) continue;
    const double c = std::cos(p.theta);
    num += -*p.e * c;
    den += c * c;
  }
  if (den <= 0.0) throw InputError("fit_cosine_amplitude: no usable points");
  return num / den;
}

}  // namespace belllab
