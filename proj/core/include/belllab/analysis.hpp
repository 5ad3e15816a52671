#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "belllab/couplings.hpp"
#include "belllab/statistics.hpp"

namespace belllab {

// ---------------------------------------------------------------------------
// CHSH significance

/// One of the 8 CHSH functionals: sign * (sum of E with a minus on one context).
struct ChshVariant {
  std::uint8_t minus_context = 3;  // SettingPair::index() of the negated context
  int sign = 1;

  double coefficient(SettingPair s) const {
    return sign * (s.index() == minus_context ? -1.0 : 1.0);
  }
  std::string label() const;
};

struct HypothesisReport {
  double s_hat = 0.0;
  std::uint64_t n = 0;
  double p_value = 1.0;
  std::string method;
  ChshVariant variant;
};

/// exp(-n (s_hat - 2)^2 / 32) for s_hat > 2, else 1.  Per-trial scores
/// 4 a b c(x, y) lie in [-4, 4] and have mean <= 2 under any local model
/// with uniform settings, so this is a one-sided Hoeffding tail bound.
double hoeffding_pvalue(double s_hat, std::uint64_t n);

/// Hoeffding p-value for a fixed CHSH functional (default: minus on (1,1)).
/// Refuses (InputError) when a context is empty or the setting counts are
/// incompatible with uniform 1/4 choice (chi-square p < 1e-9).
HypothesisReport lhv_pvalue(const CorrelationSummary& summary, ChshVariant variant = {});

/// The variant with the largest estimate, with a Bonferroni factor of 8 for
/// picking it after seeing the data.
HypothesisReport lhv_pvalue_best_variant(const CorrelationSummary& summary);

// ---------------------------------------------------------------------------
// No-signalling

struct TwoProportionTest {
  double p_first = 0.0;
  double p_second = 0.0;
  double delta = 0.0;  // |p_first - p_second|
  double std_error = 0.0;  // pooled
  double z = 0.0;
  double p_value = 1.0;
};

/// Pooled two-proportion z-test, two-sided.  Disengaged if either n is 0.
std::optional<TwoProportionTest> two_proportion_test(std::uint64_t k1, std::uint64_t n1,
                                                     std::uint64_t k2, std::uint64_t n2);

struct MarginalComparison {
  char party = 'A';            // 'A' compares across y, 'B' across x
  std::uint8_t local_setting = 0;
  std::uint64_t n_first = 0;   // detections with remote label 0
  std::uint64_t n_second = 0;  // detections with remote label 1
  std::optional<TwoProportionTest> test;
};

struct NoSignallingBlock {
  std::vector<MarginalComparison> comparisons;
  /// Bonferroni-combined p over the defined comparisons.
  std::optional<double> block_p;
};

struct NoSignallingReport {
  NoSignallingBlock raw;
  NoSignallingBlock final_data;
};

/// Marginal P(a = +1 | x, y) is estimated among detections at that station
/// (cells with a != 0), so tables with zeros and single-count tables work
/// alike.
NoSignallingBlock marginal_tests(const ContextTable& table);
NoSignallingReport nosignalling_test(const ContextTable& raw, const ContextTable& final_data);

// ---------------------------------------------------------------------------
// Coupling feasibility

/// [context][cell] with cells (+1,+1), (+1,-1), (-1,+1), (-1,-1).
using PairwiseTables = std::array<std::array<double, 4>, 4>;

/// A linear functional on the 16 cell probabilities with its maximum over
/// deterministic local assignments.
struct SeparatingFunctional {
  std::string label;
  PairwiseTables coefficients{};
  double bound = 0.0;
  double value = 0.0;
  double slack() const { return value - bound; }
};

struct FeasibilityResult {
  bool feasible = false;
  /// Weights over (A_0, A_1, B_0, B_1) indexed as in deterministic_strategies().
  std::optional<std::array<double, 16>> joint;
  /// Largest-violation member of the CHSH-type family when infeasible.
  std::optional<SeparatingFunctional> max_violation;
  /// Normalized Farkas functional from the LP when infeasible.
  std::optional<SeparatingFunctional> farkas;
  double witness_error = 0.0;
};

double evaluate(const PairwiseTables& coefficients, const PairwiseTables& p);
/// max over the 16 deterministic vertices.
double vertex_bound(const PairwiseTables& coefficients);

/// The 8 CHSH functionals (bound 2) and 8 marginal-consistency functionals
/// (bound 0) comparing one party's +1 marginal across the remote setting.
std::vector<SeparatingFunctional> chsh_type_functionals();

/// Throws InputError unless each context is a distribution within 1e-9.
void validate_tables(const PairwiseTables& p);

FeasibilityResult coupling_feasibility(const PairwiseTables& p);

PairwiseTables pairwise_tables(const CouplingModel& model);
/// Empirical tables over nonzero pairs; starved contexts throw.
PairwiseTables pairwise_tables(const ContextTable& table);

// ---------------------------------------------------------------------------
// Angle sweeps

enum class SweepMode { kExact, kMonteCarlo };

/// Model whose context (0,0) has angle difference theta.
using AngleFamily = std::function<CouplingModel(double theta)>;

AngleFamily singlet_family(double visibility);
AngleFamily pearle_family(PearleOptions options);

struct SweepPoint {
  double theta = 0.0;
  std::optional<double> e;
  double std_error = 0.0;
  std::uint64_t n = 0;
};

/// Monte-Carlo point i draws `n_per_point` trials of context (0,0) from
/// stream (kSweep, i).
std::vector<SweepPoint> theta_sweep(const AngleFamily& family, std::span<const double> grid,
                                    SweepMode mode, std::uint64_t n_per_point,
                                    std::uint64_t seed);

/// Least-squares amplitude A in E(theta) = -A cos(theta).
double fit_cosine_amplitude(std::span<const SweepPoint> points);

}  // namespace belllab
