#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "belllab/rng.hpp"

namespace belllab {

/// Weights below this are treated as exactly zero.
inline constexpr double kZeroWeight = 1e-15;
/// Tolerance on the total mass of a probability table.
inline constexpr double kMassTolerance = 1e-9;

/// A validated finite probability distribution with an inverse-CDF sampler.
class Distribution {
 public:
  Distribution() = default;
  /// Throws InputError naming `what` if the weights are not a distribution.
  Distribution(std::vector<double> weights, const std::string& what);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> weights() const { return p_; }

  std::size_t sample(RngStream& rng) const;

 private:
  std::vector<double> p_;
  std::vector<double> cdf_;
  std::size_t last_nonzero_ = 0;
};

/// Distribution over a rows x cols grid, sampled through its nonzero cells.
class JointDistribution {
 public:
  struct Cell {
    std::size_t row;
    std::size_t col;
    double weight;
  };

  JointDistribution() = default;
  JointDistribution(std::size_t rows, std::size_t cols, std::vector<double> row_major,
                    const std::string& what);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return dense_[r * cols_ + c]; }
  std::span<const double> dense() const { return dense_; }
  std::span<const Cell> support() const { return support_; }

  const Cell& sample(RngStream& rng) const { return support_[sampler_.sample(rng)]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> dense_;
  std::vector<Cell> support_;
  Distribution sampler_;
};

/// Total-variation distance between equally sized weight vectors.
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace belllab
