#include "belllab/couplings.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace belllab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_pm1(const std::array<std::vector<int>, 2>& table, std::size_t n,
               const std::string& what) {
  for (const auto& row : table) {
    if (row.size() != n) throw InputError(what + ": expected one response per hidden value");
    for (int v : row)
      if (v != 1 && v != -1) throw InputError(what + ": responses must be +1 or -1");
  }
}

void check_probabilities(const std::array<std::vector<double>, 2>& table, std::size_t n,
                         const std::string& what) {
  for (const auto& row : table) {
    if (row.size() != n) throw InputError(what + ": expected one entry per hidden value");
    for (double p : row)
      if (!(p >= 0.0 && p <= 1.0)) throw InputError(what + ": entries must lie in [0, 1]");
  }
}

Outcome pm(bool plus) { return plus ? Outcome::kPlus : Outcome::kMinus; }

ContextExpectation singlet_expectation(const QuantumSingletModel& m, SettingPair s) {
  return {-m.visibility * std::cos(m.angles.theta(s)), 0.0, 0.0, 1.0};
}

ContextExpectation deterministic_expectation(const DeterministicLhvModel& m, SettingPair s) {
  double ab = 0, a = 0, b = 0;
  for (std::size_t l = 0; l < m.weights().size(); ++l) {
    const double w = m.weights()[l];
    ab += w * m.alice(s.x, l) * m.bob(s.y, l);
    a += w * m.alice(s.x, l);
    b += w * m.bob(s.y, l);
  }
  return {ab, a, b, 1.0};
}

ContextExpectation stochastic_expectation(const StochasticLhvModel& m, SettingPair s) {
  double ab = 0, a = 0, b = 0;
  for (std::size_t l = 0; l < m.weights().size(); ++l) {
    const double w = m.weights()[l];
    const double ea = 2.0 * m.alice_plus(s.x, l) - 1.0;
    const double eb = 2.0 * m.bob_plus(s.y, l) - 1.0;
    ab += w * ea * eb;
    a += w * ea;
    b += w * eb;
  }
  return {ab, a, b, 1.0};
}

ContextExpectation contextual_expectation(const ContextualHvModel& m, SettingPair s) {
  double ab = 0, a = 0, b = 0;
  const auto& instr = m.instruments(s);
  for (const auto& h : m.hidden().support()) {
    for (const auto& mu : instr.support()) {
      const double w = h.weight * mu.weight;
      const int va = to_int(m.alice()(s.x, h.row, mu.row));
      const int vb = to_int(m.bob()(s.y, h.col, mu.col));
      ab += w * va * vb;
      a += w * va;
      b += w * vb;
    }
  }
  return {ab, a, b, 1.0};
}

// Per-station outcome law for fixed system value, averaged over the
// station's instrument distribution.
StationMarginals station_law(const ResponseTable& table, const Distribution& instr,
                             std::uint8_t label, std::size_t hidden) {
  StationMarginals m;
  for (std::size_t mu = 0; mu < instr.size(); ++mu) {
    const double w = instr[mu];
    if (w == 0.0) continue;
    switch (table(label, hidden, mu)) {
      case Outcome::kPlus: m.plus += w; break;
      case Outcome::kMinus: m.minus += w; break;
      case Outcome::kNone: m.none += w; break;
    }
  }
  return m;
}

ContextExpectation postselection_expectation(const PostSelectionModel& m, SettingPair s) {
  double kept = 0, ab = 0, a = 0, b = 0;
  for (const auto& h : m.hidden().support()) {
    const auto la = station_law(m.alice(), m.alice_instruments(s.x), s.x, h.row);
    const auto lb = station_law(m.bob(), m.bob_instruments(s.y), s.y, h.col);
    const double da = la.plus + la.minus, db = lb.plus + lb.minus;
    const double ea = la.plus - la.minus, eb = lb.plus - lb.minus;
    kept += h.weight * da * db;
    ab += h.weight * ea * eb;
    a += h.weight * ea * db;
    b += h.weight * da * eb;
  }
  ContextExpectation out;
  out.coincidence = kept;
  if (kept > 0.0) {
    out.e_ab = std::clamp(ab / kept, -1.0, 1.0);
    out.e_a = std::clamp(a / kept, -1.0, 1.0);
    out.e_b = std::clamp(b / kept, -1.0, 1.0);
  }
  return out;
}

}  // namespace

ResponseTable::ResponseTable(const std::array<std::vector<std::vector<int>>, 2>& values,
                             bool allow_zero, const std::string& what) {
  hidden_ = values[0].size();
  if (hidden_ == 0 || values[1].size() != hidden_)
    throw InputError(what + ": both settings need the same non-empty set of hidden values");
  instruments_ = values[0][0].size();
  if (instruments_ == 0) throw InputError(what + ": empty instrument set");
  values_.reserve(2 * hidden_ * instruments_);
  for (const auto& per_label : values) {
    for (const auto& row : per_label) {
      if (row.size() != instruments_)
        throw InputError(what + ": ragged response table");
      for (int v : row) {
        if (v != 1 && v != -1 && !(allow_zero && v == 0))
          throw InputError(what + (allow_zero ? ": responses must be -1, 0 or +1"
                                              : ": responses must be +1 or -1"));
        values_.push_back(static_cast<std::int8_t>(v));
      }
    }
  }
}

bool ResponseTable::has_zero() const {
  return std::find(values_.begin(), values_.end(), std::int8_t{0}) != values_.end();
}

QuantumSingletModel::QuantumSingletModel(AngleAssignment a, double v)
    : angles(a), visibility(v) {
  angles.validate();
  if (!(visibility >= 0.0 && visibility <= 1.0))
    throw InputError("visibility must lie in [0, 1]");
}

DeterministicLhvModel::DeterministicLhvModel(std::vector<double> weights,
                                             std::array<std::vector<int>, 2> alice,
                                             std::array<std::vector<int>, 2> bob)
    : weights_(std::move(weights), "hidden weights"),
      alice_(std::move(alice)),
      bob_(std::move(bob)) {
  check_pm1(alice_, weights_.size(), "alice responses");
  check_pm1(bob_, weights_.size(), "bob responses");
}

StochasticLhvModel::StochasticLhvModel(std::vector<double> weights,
                                       std::array<std::vector<double>, 2> alice_plus,
                                       std::array<std::vector<double>, 2> bob_plus)
    : weights_(std::move(weights), "hidden weights"),
      alice_(std::move(alice_plus)),
      bob_(std::move(bob_plus)) {
  check_probabilities(alice_, weights_.size(), "alice conditional table");
  check_probabilities(bob_, weights_.size(), "bob conditional table");
}

ContextualHvModel::ContextualHvModel(JointDistribution hidden,
                                     std::array<JointDistribution, 4> instruments,
                                     ResponseTable alice, ResponseTable bob)
    : hidden_(std::move(hidden)),
      instruments_(std::move(instruments)),
      alice_(std::move(alice)),
      bob_(std::move(bob)) {
  if (alice_.has_zero() || bob_.has_zero())
    throw InputError("contextual model responses must be +1 or -1");
  if (alice_.hidden_size() != hidden_.rows() || bob_.hidden_size() != hidden_.cols())
    throw InputError("contextual model: response tables do not match the hidden joint table");
  for (const auto& t : instruments_)
    if (t.rows() != alice_.instrument_size() || t.cols() != bob_.instrument_size())
      throw InputError("contextual model: instrument table shape does not match responses");
}

ContextualHvModel ContextualHvModel::rotation_invariant(
    JointDistribution hidden, ResponseTable alice, ResponseTable bob,
    const AngleAssignment& angles, const std::function<JointDistribution(double)>& law) {
  angles.validate();
  std::array<JointDistribution, 4> tables;
  for (auto s : kAllContexts) tables[s.index()] = law(angles.theta(s));
  return ContextualHvModel(std::move(hidden), std::move(tables), std::move(alice),
                           std::move(bob));
}

PostSelectionModel::PostSelectionModel(JointDistribution hidden,
                                       std::array<Distribution, 2> alice_instruments,
                                       std::array<Distribution, 2> bob_instruments,
                                       ResponseTable alice, ResponseTable bob)
    : hidden_(std::move(hidden)),
      alice_instr_(std::move(alice_instruments)),
      bob_instr_(std::move(bob_instruments)),
      alice_(std::move(alice)),
      bob_(std::move(bob)) {
  if (alice_.hidden_size() != hidden_.rows() || bob_.hidden_size() != hidden_.cols())
    throw InputError("post-selection model: response tables do not match the hidden joint table");
  for (const auto& d : alice_instr_)
    if (d.size() != alice_.instrument_size())
      throw InputError("post-selection model: alice instrument law has the wrong size");
  for (const auto& d : bob_instr_)
    if (d.size() != bob_.instrument_size())
      throw InputError("post-selection model: bob instrument law has the wrong size");
  bool any_kept = false;
  for (auto s : kAllContexts)
    any_kept = any_kept || postselection_expectation(*this, s).coincidence > 0.0;
  if (!any_kept) throw InputError("post-selection model rejects every pair in every context");
}

std::string family_name(const CouplingModel& model) {
  return std::visit(Overloaded{
                        [](const QuantumSingletModel&) { return std::string("singlet"); },
                        [](const DeterministicLhvModel&) { return std::string("deterministic"); },
                        [](const StochasticLhvModel&) { return std::string("stochastic"); },
                        [](const ContextualHvModel&) { return std::string("contextual"); },
                        [](const PostSelectionModel&) { return std::string("post_selection"); },
                    },
                    model);
}

bool zero_free(const CouplingModel& model) {
  if (const auto* ps = std::get_if<PostSelectionModel>(&model))
    return !ps->alice().has_zero() && !ps->bob().has_zero();
  return true;
}

ContextExpectation exact_expectation(const CouplingModel& model, SettingPair s) {
  return std::visit(Overloaded{
                        [s](const QuantumSingletModel& m) { return singlet_expectation(m, s); },
                        [s](const DeterministicLhvModel& m) { return deterministic_expectation(m, s); },
                        [s](const StochasticLhvModel& m) { return stochastic_expectation(m, s); },
                        [s](const ContextualHvModel& m) { return contextual_expectation(m, s); },
                        [s](const PostSelectionModel& m) { return postselection_expectation(m, s); },
                    },
                    model);
}

std::optional<double> exact_chsh(const CouplingModel& model) {
  double s = 0.0;
  for (auto ctx : kAllContexts) {
    const auto e = exact_expectation(model, ctx).e_ab;
    if (!e) return std::nullopt;
    s += chsh_sign(ctx) * *e;
  }
  return s;
}

std::pair<Outcome, Outcome> sample_trial(const CouplingModel& model, SettingPair s,
                                         RngStream& rng) {
  return std::visit(
      Overloaded{
          [&](const QuantumSingletModel& m) {
            // p(a, b) = (1 - V a b cos theta) / 4: a is uniform, and
            // b = -a with probability (1 + V cos theta) / 2.
            const Outcome a = pm(rng.uniform() < 0.5);
            const double anti = 0.5 * (1.0 + m.visibility * std::cos(m.angles.theta(s)));
            return std::pair{a, rng.uniform() < anti ? flip(a) : a};
          },
          [&](const DeterministicLhvModel& m) {
            const std::size_t l = m.weights().sample(rng);
            return std::pair{pm(m.alice(s.x, l) > 0), pm(m.bob(s.y, l) > 0)};
          },
          [&](const StochasticLhvModel& m) {
            const std::size_t l = m.weights().sample(rng);
            const Outcome a = pm(rng.uniform() < m.alice_plus(s.x, l));
            const Outcome b = pm(rng.uniform() < m.bob_plus(s.y, l));
            return std::pair{a, b};
          },
          [&](const ContextualHvModel& m) {
            const auto& h = m.hidden().sample(rng);
            const auto& mu = m.instruments(s).sample(rng);
            return std::pair{m.alice()(s.x, h.row, mu.row), m.bob()(s.y, h.col, mu.col)};
          },
          [&](const PostSelectionModel& m) {
            const auto& h = m.hidden().sample(rng);
            const std::size_t mu_a = m.alice_instruments(s.x).sample(rng);
            const std::size_t mu_b = m.bob_instruments(s.y).sample(rng);
            return std::pair{m.alice()(s.x, h.row, mu_a), m.bob()(s.y, h.col, mu_b)};
          },
      },
      model);
}

std::pair<StationMarginals, StationMarginals> raw_marginals(const PostSelectionModel& m,
                                                            SettingPair s) {
  StationMarginals a, b;
  for (const auto& h : m.hidden().support()) {
    const auto la = station_law(m.alice(), m.alice_instruments(s.x), s.x, h.row);
    const auto lb = station_law(m.bob(), m.bob_instruments(s.y), s.y, h.col);
    a.plus += h.weight * la.plus;
    a.minus += h.weight * la.minus;
    a.none += h.weight * la.none;
    b.plus += h.weight * lb.plus;
    b.minus += h.weight * lb.minus;
    b.none += h.weight * lb.none;
  }
  return {a, b};
}

std::array<DeterministicStrategy, 16> deterministic_strategies() {
  std::array<DeterministicStrategy, 16> out{};
  for (unsigned v = 0; v < 16; ++v) {
    auto bit = [v](unsigned k) { return ((v >> k) & 1u) ? -1 : 1; };
    DeterministicStrategy st{{bit(3), bit(2)}, {bit(1), bit(0)}, 0.0};
    std::array<double, 4> e{};
    for (auto s : kAllContexts) e[s.index()] = st.alice[s.x] * st.bob[s.y];
    st.chsh = e[0] + e[1] + e[2] - e[3];
    out[v] = st;
  }
  return out;
}

double max_deterministic_chsh() {
  double best = 0.0;
  for (const auto& st : deterministic_strategies()) best = std::max(best, std::abs(st.chsh));
  return best;
}

double statistical_dependence(const ContextualHvModel& model) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      worst = std::max(worst, total_variation(model.instruments(SettingPair::from_index(i)).dense(),
                                              model.instruments(SettingPair::from_index(j)).dense()));
  return worst;
}

double statistical_dependence(const PostSelectionModel& model) {
  const std::size_t na = model.alice().instrument_size();
  const std::size_t nb = model.bob().instrument_size();
  std::array<double, 4> kept{};
  for (auto s : kAllContexts) kept[s.index()] = postselection_expectation(model, s).coincidence;

  // Post-selected weight of (hidden cell, mu_a, mu_b) in context s.
  auto weight = [&](SettingPair s, const JointDistribution::Cell& h, std::size_t ma,
                    std::size_t mb) {
    if (model.alice()(s.x, h.row, ma) == Outcome::kNone ||
        model.bob()(s.y, h.col, mb) == Outcome::kNone)
      return 0.0;
    return h.weight * model.alice_instruments(s.x)[ma] * model.bob_instruments(s.y)[mb] /
           kept[s.index()];
  };

  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (kept[i] <= 0.0) continue;
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (kept[j] <= 0.0) continue;
      const auto si = SettingPair::from_index(i), sj = SettingPair::from_index(j);
      double d = 0.0;
      for (const auto& h : model.hidden().support())
        for (std::size_t ma = 0; ma < na; ++ma)
          for (std::size_t mb = 0; mb < nb; ++mb)
            d += std::abs(weight(si, h, ma, mb) - weight(sj, h, ma, mb));
      worst = std::max(worst, 0.5 * d);
    }
  }
  return std::min(worst, 1.0);
}

RejectionFunction power_rejection(double exponent) {
  if (!(exponent > 0.0) || !std::isfinite(exponent))
    throw InputError("rejection exponent must be positive");
  return [exponent](double c) { return 1.0 - std::pow(c, exponent); };
}

PostSelectionModel make_pearle_like(const AngleAssignment& angles, const PearleOptions& options) {
  angles.validate();
  const std::size_t nl = options.hidden_bins;
  const std::size_t nm = options.instrument_bins;
  if (nl == 0 || nm == 0) throw InputError("pearle-like model needs at least one bin");
  if (!options.rejection) throw InputError("pearle-like model needs a rejection function");

  constexpr std::size_t kProbe = 1000;
  double previous = 2.0;
  for (std::size_t i = 0; i <= kProbe; ++i) {
    const double r = options.rejection(static_cast<double>(i) / kProbe);
    if (!(r >= 0.0 && r <= 1.0)) throw InputError("rejection function must map into [0, 1]");
    if (r > previous + 1e-12) throw InputError("rejection function must be non-increasing");
    previous = r;
  }

  std::vector<double> diag(nl * nl, 0.0);
  for (std::size_t k = 0; k < nl; ++k) diag[k * nl + k] = 1.0 / static_cast<double>(nl);

  auto responses = [&](const std::array<double, 2>& theta, int sign) {
    std::array<std::vector<std::vector<int>>, 2> table;
    for (std::uint8_t label = 0; label < 2; ++label) {
      table[label].assign(nl, std::vector<int>(nm, 0));
      for (std::size_t k = 0; k < nl; ++k) {
        const double lambda = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) /
                              static_cast<double>(nl);
        const double c = std::cos(lambda - theta[label]);
        const double r = options.rejection(std::abs(c));
        const int value = sign * (c >= 0.0 ? 1 : -1);
        for (std::size_t j = 0; j < nm; ++j) {
          const double mu = (static_cast<double>(j) + 0.5) / static_cast<double>(nm);
          table[label][k][j] = mu < r ? 0 : value;
        }
      }
    }
    return table;
  };

  std::vector<double> uniform(nm, 1.0 / static_cast<double>(nm));
  Distribution instr(uniform, "pearle instrument law");
  return PostSelectionModel(JointDistribution(nl, nl, std::move(diag), "pearle hidden law"),
                            {instr, instr}, {instr, instr},
                            ResponseTable(responses(angles.alice, +1), true, "pearle alice"),
                            ResponseTable(responses(angles.bob, -1), true, "pearle bob"));
}

PostSelectionModel make_larsson_gill() {
  constexpr std::size_t n = 8;
  std::vector<double> diag(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) diag[k * n + k] = 1.0 / n;

  std::array<std::vector<std::vector<int>>, 2> alice, bob;
  for (std::uint8_t label = 0; label < 2; ++label) {
    alice[label].assign(n, std::vector<int>(1, 0));
    bob[label].assign(n, std::vector<int>(1, 0));
    for (std::size_t k = 0; k < n; ++k) {
      const auto gx = static_cast<std::uint8_t>(k >> 2);
      const auto gy = static_cast<std::uint8_t>((k >> 1) & 1u);
      const int sign = (k & 1u) ? -1 : 1;
      if (gx == label) alice[label][k][0] = sign;
      if (gy == label) bob[label][k][0] = sign * chsh_sign({gx, gy});
    }
  }
  Distribution trivial({1.0}, "trivial instrument law");
  return PostSelectionModel(JointDistribution(n, n, std::move(diag), "larsson-gill hidden law"),
                            {trivial, trivial}, {trivial, trivial},
                            ResponseTable(alice, true, "larsson-gill alice"),
                            ResponseTable(bob, true, "larsson-gill bob"));
}

}  // namespace belllab
