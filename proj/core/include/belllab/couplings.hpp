#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "belllab/distribution.hpp"
#include "belllab/rng.hpp"
#include "belllab/types.hpp"

namespace belllab {

/// Local response values indexed by (setting label, hidden value, instrument value).
class ResponseTable {
 public:
  ResponseTable() = default;
  /// `values[label][hidden][instrument]`; zeros only when allow_zero.
  ResponseTable(const std::array<std::vector<std::vector<int>>, 2>& values, bool allow_zero,
                const std::string& what);

  std::size_t hidden_size() const { return hidden_; }
  std::size_t instrument_size() const { return instruments_; }
  Outcome operator()(std::uint8_t label, std::size_t hidden, std::size_t instrument) const {
    return static_cast<Outcome>(values_[(label * hidden_ + hidden) * instruments_ + instrument]);
  }
  bool has_zero() const;

 private:
  std::size_t hidden_ = 0;
  std::size_t instruments_ = 0;
  std::vector<std::int8_t> values_;
};

/// Singlet with Werner-style visibility: E_ab = -V cos(theta_x - theta_y).
struct QuantumSingletModel {
  AngleAssignment angles;
  double visibility = 1.0;

  QuantumSingletModel(AngleAssignment angles, double visibility);
};

/// Outcomes are fixed functions A_x(lambda), B_y(lambda) of a shared hidden value.
class DeterministicLhvModel {
 public:
  DeterministicLhvModel(std::vector<double> weights,
                        std::array<std::vector<int>, 2> alice,
                        std::array<std::vector<int>, 2> bob);

  const Distribution& weights() const { return weights_; }
  int alice(std::uint8_t x, std::size_t lambda) const { return alice_[x][lambda]; }
  int bob(std::uint8_t y, std::size_t lambda) const { return bob_[y][lambda]; }

 private:
  Distribution weights_;
  std::array<std::vector<int>, 2> alice_;
  std::array<std::vector<int>, 2> bob_;
};

/// Factorized conditional law P(a|x,lambda) P(b|y,lambda) P(lambda).
class StochasticLhvModel {
 public:
  /// alice_plus[x][lambda] = P(a = +1 | x, lambda), likewise for bob.
  StochasticLhvModel(std::vector<double> weights,
                     std::array<std::vector<double>, 2> alice_plus,
                     std::array<std::vector<double>, 2> bob_plus);

  const Distribution& weights() const { return weights_; }
  double alice_plus(std::uint8_t x, std::size_t lambda) const { return alice_[x][lambda]; }
  double bob_plus(std::uint8_t y, std::size_t lambda) const { return bob_[y][lambda]; }

 private:
  Distribution weights_;
  std::array<std::vector<double>, 2> alice_;
  std::array<std::vector<double>, 2> bob_;
};

/// Contextual model: system variables (l1, l2) with a setting-independent
/// joint law, and instrument variables (mu_a, mu_b) whose joint law
/// P_xy(mu_a, mu_b) may depend on the context.  Responses are local and
/// deterministic: a = A_x(l1, mu_a), b = B_y(l2, mu_b), both +-1.
class ContextualHvModel {
 public:
  ContextualHvModel(JointDistribution hidden, std::array<JointDistribution, 4> instruments,
                    ResponseTable alice, ResponseTable bob);

  /// Instrument law determined by the angle difference only:
  /// P_xy = law(theta_x - theta_y).  Contexts with equal angle differences
  /// share a table by construction.
  static ContextualHvModel rotation_invariant(
      JointDistribution hidden, ResponseTable alice, ResponseTable bob,
      const AngleAssignment& angles,
      const std::function<JointDistribution(double theta)>& law);

  const JointDistribution& hidden() const { return hidden_; }
  const JointDistribution& instruments(SettingPair s) const { return instruments_[s.index()]; }
  const ResponseTable& alice() const { return alice_; }
  const ResponseTable& bob() const { return bob_; }

 private:
  JointDistribution hidden_;
  std::array<JointDistribution, 4> instruments_;
  ResponseTable alice_;
  ResponseTable bob_;
};

/// Post-selection model: like the contextual model but responses may be 0
/// (no detection), and the instrument law factorizes per station,
/// P(lambda) = P_x(mu_a) P_y(mu_b) P(l1, l2).  Expectations are taken on the
/// subset where both outcomes are nonzero, normalized by C_xy.
class PostSelectionModel {
 public:
  PostSelectionModel(JointDistribution hidden, std::array<Distribution, 2> alice_instruments,
                     std::array<Distribution, 2> bob_instruments, ResponseTable alice,
                     ResponseTable bob);

  const JointDistribution& hidden() const { return hidden_; }
  const Distribution& alice_instruments(std::uint8_t x) const { return alice_instr_[x]; }
  const Distribution& bob_instruments(std::uint8_t y) const { return bob_instr_[y]; }
  const ResponseTable& alice() const { return alice_; }
  const ResponseTable& bob() const { return bob_; }

 private:
  JointDistribution hidden_;
  std::array<Distribution, 2> alice_instr_;
  std::array<Distribution, 2> bob_instr_;
  ResponseTable alice_;
  ResponseTable bob_;
};

using CouplingModel = std::variant<QuantumSingletModel, DeterministicLhvModel,
                                   StochasticLhvModel, ContextualHvModel, PostSelectionModel>;

std::string family_name(const CouplingModel& model);

/// True when no trial can produce a 0 outcome.
bool zero_free(const CouplingModel& model);

/// Exact moments for one context.  For post-selection models the moments are
/// conditional on a*b != 0 and disengaged when C_xy = 0.
struct ContextExpectation {
  std::optional<double> e_ab;
  std::optional<double> e_a;
  std::optional<double> e_b;
  double coincidence = 1.0;
};

ContextExpectation exact_expectation(const CouplingModel& model, SettingPair s);

/// Exact S over the four contexts; disengaged if any context is starved.
std::optional<double> exact_chsh(const CouplingModel& model);

std::pair<Outcome, Outcome> sample_trial(const CouplingModel& model, SettingPair s,
                                         RngStream& rng);

/// Single-station outcome probabilities without post-selection.
struct StationMarginals {
  double plus = 0.0;
  double minus = 0.0;
  double none = 0.0;
};
std::pair<StationMarginals, StationMarginals> raw_marginals(const PostSelectionModel& model,
                                                            SettingPair s);

struct DeterministicStrategy {
  std::array<int, 2> alice;
  std::array<int, 2> bob;
  double chsh;
};

/// All 16 assignments (A_0, A_1, B_0, B_1) in {+-1}^4 with their S values.
/// Index bit 3 is A_0, bit 2 A_1, bit 1 B_0, bit 0 B_1; a set bit means -1.
std::array<DeterministicStrategy, 16> deterministic_strategies();

/// max |S| over deterministic local strategies.
double max_deterministic_chsh();

/// Largest total-variation distance between the hidden-variable laws of two
/// contexts.  For the contextual model this is the distance between the
/// instrument tables P_xy; for the post-selection model it is taken between
/// the post-selected laws of (l1, l2, mu_a, mu_b), skipping starved contexts.
/// Zero means statistical independence holds.
double statistical_dependence(const ContextualHvModel& model);
double statistical_dependence(const PostSelectionModel& model);

/// Rejection probability as a function of |cos(lambda - theta)|.
using RejectionFunction = std::function<double(double)>;

/// r(c) = 1 - c^exponent.
RejectionFunction power_rejection(double exponent);

struct PearleOptions {
  std::size_t hidden_bins = 720;
  std::size_t instrument_bins = 200;
  RejectionFunction rejection = power_rejection(0.5);
};

/// Data-rejection model: a shared angle lambda uniform on a discretized
/// circle, A_x = sign cos(lambda - theta_x), B_y = -sign cos(lambda - theta_y),
/// each rejected (outcome 0) with probability r(|cos(lambda - theta)|) drawn
/// through a uniform per-station instrument variable.
PostSelectionModel make_pearle_like(const AngleAssignment& angles,
                                    const PearleOptions& options = {});

/// Post-selection model whose retained hidden supports are disjoint across
/// contexts.  The hidden value carries a guessed context (gx, gy) and a sign;
/// each station fires only when its setting matches the guess, so every
/// context retains exactly the pairs that realize its CHSH sign and S = 4.
PostSelectionModel make_larsson_gill();

}  // namespace belllab
