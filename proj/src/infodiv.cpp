#include "relent/infodiv.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace relent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_size(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
}

Vector to_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

ProbDist::ProbDist(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw ValidationError("ProbDist: empty weight vector");
  if (!weights_.allFinite()) throw ValidationError("ProbDist: non-finite weight");
  if (weights_.minCoeff() < 0.0) throw ValidationError("ProbDist: negative weight");
  const double total = weights_.sum();
  if (total == 0.0) throw ValidationError("ProbDist: all weights are zero");
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw ValidationError("ProbDist: weights sum to " + std::to_string(total) + ", not 1");
  }
  weights_ /= total;
}

ProbDist::ProbDist(std::initializer_list<double> weights) : ProbDist(to_vector(weights)) {}

ProbDist ProbDist::normalized(const Vector& weights) {
  if (weights.size() == 0) throw ValidationError("ProbDist: empty weight vector");
  if (!weights.allFinite()) throw ValidationError("ProbDist: non-finite weight");
  if (weights.minCoeff() < 0.0) throw ValidationError("ProbDist: negative weight");
  const double total = weights.sum();
  if (total <= 0.0) throw ValidationError("ProbDist: all weights are zero");
  return ProbDist(weights / total, Trusted{});
}

ProbDist ProbDist::uniform(std::size_t n) {
  if (n == 0) throw ValidationError("ProbDist: empty weight vector");
  return ProbDist(Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)),
                  Trusted{});
}

ProbDist ProbDist::vertex(std::size_t n, std::size_t i) {
  if (i >= n) throw ValidationError("ProbDist::vertex: index out of range");
  return ProbDist(unit_vector(n, i), Trusted{});
}

Population::Population(Vector counts) : counts_(std::move(counts)) {
  if (!counts_.allFinite()) throw ValidationError("Population: non-finite count");
  if (counts_.size() > 0 && counts_.minCoeff() < 0.0) {
    throw ValidationError("Population: negative count");
  }
}

Population::Population(std::initializer_list<double> counts) : Population(to_vector(counts)) {}

double relative_information(const ProbDist& p, const ProbDist& q) {
  require_same_size(p.weights(), q.weights(), "relative_information");
  return kernel::relative_information(p.weights(), q.weights());
}

double shannon_entropy(const ProbDist& p) { return kernel::shannon_entropy(p.weights()); }

double population_relative_information(const Population& p, const Population& q) {
  require_same_size(p.counts(), q.counts(), "population_relative_information");
  return kernel::population_relative_information(p.counts(), q.counts());
}

namespace kernel {

double relative_information(const Vector& p, const Vector& q) {
  require_same_size(p, q, "relative_information");
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInf;
    total += p[i] * std::log(p[i] / q[i]);
  }
  return total;
}

double shannon_entropy(const Vector& p) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) total -= p[i] * std::log(p[i]);
  }
  return total;
}

double population_relative_information(const Vector& p, const Vector& q) {
  require_same_size(p, q, "population_relative_information");
  // Log terms first, in the same order as relative_information, so the two
  // agree to the bit when both inputs are normalized.
  double log_terms = 0.0;
  double p_total = 0.0;
  double q_total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = std::max(p[i], 0.0);
    const double qi = std::max(q[i], 0.0);
    p_total += pi;
    q_total += qi;
    if (pi == 0.0) continue;
    if (qi == 0.0) return kInf;
    log_terms += pi * std::log(pi / qi);
  }
  return log_terms - (p_total - q_total);
}

}  // namespace kernel

}  // namespace relent
