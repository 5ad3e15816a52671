#include "belllab/distribution.hpp"

#include <algorithm>
#include <cmath>

#include "belllab/types.hpp"

namespace belllab {

Distribution::Distribution(std::vector<double> weights, const std::string& what)
    : p_(std::move(weights)) {
  if (p_.empty()) throw InputError(what + ": empty probability table");
  double mass = 0.0;
  for (double& w : p_) {
    if (!std::isfinite(w) || w < -kZeroWeight)
      throw InputError(what + ": probabilities must be finite and non-negative");
    if (w < kZeroWeight) w = 0.0;
    mass += w;
  }
  if (std::abs(mass - 1.0) > kMassTolerance)
    throw InputError(what + ": probabilities sum to " + std::to_string(mass) + ", expected 1");
  cdf_.resize(p_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i) {
    acc += p_[i];
    cdf_[i] = acc;
    if (p_[i] > 0.0) last_nonzero_ = i;
  }
}

std::size_t Distribution::sample(RngStream& rng) const {
  const double u = rng.uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto i = static_cast<std::size_t>(it - cdf_.begin());
  return std::min(i, last_nonzero_);
}

JointDistribution::JointDistribution(std::size_t rows, std::size_t cols,
                                     std::vector<double> row_major, const std::string& what)
    : rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0 || row_major.size() != rows * cols)
    throw InputError(what + ": table must be " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  Distribution validated(std::move(row_major), what);
  dense_.assign(validated.weights().begin(), validated.weights().end());
  std::vector<double> support_weights;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double w = dense_[r * cols + c];
      if (w > 0.0) {
        support_.push_back({r, c, w});
        support_weights.push_back(w);
      }
    }
  }
  double mass = 0.0;
  for (double w : support_weights) mass += w;
  for (double& w : support_weights) w /= mass;
  sampler_ = Distribution(std::move(support_weights), what);
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InputError("total_variation: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return 0.5 * d;
}

}  // namespace belllab
