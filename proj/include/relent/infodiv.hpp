#pragma once

#include <cstddef>
#include <initializer_list>

#include "relent/numcore.hpp"

namespace relent {

/// Probability distribution on a finite set. Weights are nonnegative and sum
/// to 1; construction accepts sums within 1e-9 of 1 and renormalizes.
class ProbDist {
 public:
  static constexpr double kSumTolerance = 1e-9;

  explicit ProbDist(Vector weights);
  ProbDist(std::initializer_list<double> weights);

  /// Scales an arbitrary nonnegative, nonzero vector onto the simplex.
  static ProbDist normalized(const Vector& weights);
  static ProbDist uniform(std::size_t n);
  static ProbDist vertex(std::size_t n, std::size_t i);

  const Vector& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  double operator[](std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }

  friend bool operator==(const ProbDist& a, const ProbDist& b) {
    return a.weights_.size() == b.weights_.size() && a.weights_ == b.weights_;
  }

 private:
  struct Trusted {};
  ProbDist(Vector weights, Trusted) : weights_(std::move(weights)) {}

  Vector weights_;
};

/// Nonnegative finite populations or concentrations (not normalized).
class Population {
 public:
  explicit Population(Vector counts);
  Population(std::initializer_list<double> counts);

  const Vector& counts() const noexcept { return counts_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(counts_.size()); }
  double operator[](std::size_t i) const { return counts_[static_cast<Eigen::Index>(i)]; }

 private:
  Vector counts_;
};

/// I(p, q) = sum_i p_i ln(p_i / q_i). +infinity when p_i > 0 = q_i.
double relative_information(const ProbDist& p, const ProbDist& q);

/// S(p) = -sum_i p_i ln p_i.
double shannon_entropy(const ProbDist& p);

/// sum_i [P_i ln(P_i / Q_i) - (P_i - Q_i)]; reduces to relative_information
/// on normalized inputs.
double population_relative_information(const Population& p, const Population& q);

// Unchecked kernels for monitors on integrated states, which sit on the
// simplex or orthant only up to integration error. Components <= 0 of the
// first argument contribute 0 (the 0 ln 0 convention).
namespace kernel {
double relative_information(const Vector& p, const Vector& q);
double shannon_entropy(const Vector& p);
double population_relative_information(const Vector& p, const Vector& q);
}  // namespace kernel

}  // namespace relent
