#pragma once

// Shared generators and independent oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "relent/markov.hpp"
#include "relent/numcore.hpp"
#include "relent/reactnet.hpp"

namespace relent::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = uniform(rng, lo, hi);
  return m;
}

// Interior point of the simplex bounded away from the faces.
inline Vector random_interior(std::size_t n, std::mt19937_64& rng, double floor = 0.02) {
  Vector p = sample_simplex(n, rng);
  p = (p.array() + floor).matrix();
  return p / p.sum();
}

inline std::vector<std::string> state_names(std::size_t n, const char* prefix = "s") {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i + 1));
  return names;
}

// Random process with transitions on a random subset of ordered pairs;
// `strongly_connected` adds a Hamiltonian cycle.
inline MarkovProcess random_process(std::size_t n, std::mt19937_64& rng, double density,
                                    bool strongly_connected, double max_rate = 2.0) {
  std::vector<Transition> transitions;
  auto rate = [&] {
    double r = 0.0;
    while (r == 0.0) r = uniform(rng, 0.0, max_rate);
    return r;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && uniform(rng, 0.0, 1.0) < density) transitions.push_back({i, j, rate()});
  if (strongly_connected && n > 1)
    for (std::size_t i = 0; i < n; ++i) transitions.push_back({i, (i + 1) % n, rate()});
  return MarkovProcess(state_names(n), std::move(transitions));
}

// Largest increase between consecutive finite samples (0 for a
// nonincreasing series). A drop from +inf is not an increase.
inline double worst_increase(const std::vector<double>& values) {
  double worst = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!std::isfinite(values[i - 1])) continue;
    worst = std::max(worst, values[i] - values[i - 1]);
  }
  return worst;
}

inline double max_deviation(const std::vector<double>& values, double reference) {
  double worst = 0.0;
  for (double v : values) worst = std::max(worst, std::abs(v - reference));
  return worst;
}

// Oracle: direct sum for KL divergence with the 0 ln 0 convention.
inline double kl_oracle(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return HUGE_VAL;
    s += p[i] * std::log(p[i] / q[i]);
  }
  return s;
}

// Oracle: count terminal SCCs from the transitive closure (Floyd-Warshall),
// independent of the library's Tarjan implementation.
inline std::size_t terminal_scc_count_oracle(const MarkovProcess& process) {
  const std::size_t n = process.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;
  for (const auto& t : process.transitions()) reach[t.source][t.target] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = true;
  // i is in a terminal class iff everything it reaches reaches back.
  std::size_t count = 0;
  std::vector<bool> counted(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (counted[i]) continue;
    bool terminal = true;
    for (std::size_t j = 0; j < n; ++j)
      if (reach[i][j] && !reach[j][i]) terminal = false;
    if (!terminal) continue;
    ++count;
    for (std::size_t j = 0; j < n; ++j)
      if (reach[i][j]) counted[j] = true;
  }
  return count;
}

// Reaction network whose complexes are all single species: a relabelled
// Markov process.
// k >= 2.
inline ReactionNetwork random_unimolecular_network(std::size_t k, std::mt19937_64& rng, double density) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j && uniform(rng, 0.0, 1.0) < density) edges.emplace_back(i, j);
  if (edges.empty()) edges.emplace_back(0, 1);
  std::vector<Complex> complexes;
  std::vector<std::size_t> complex_of(k, SIZE_MAX);
  std::vector<Reaction> reactions;
  auto intern = [&](std::size_t species) {
    if (complex_of[species] == SIZE_MAX) {
      Complex c;
      c.coefficients.assign(k, 0);
      c.coefficients[species] = 1;
      complex_of[species] = complexes.size();
      complexes.push_back(c);
    }
    return complex_of[species];
  };
  for (auto [i, j] : edges) {
    const auto s = intern(i);
    const auto t = intern(j);
    reactions.push_back({s, t, uniform(rng, 0.05, 2.0)});
  }
  return ReactionNetwork(state_names(k, "X"), std::move(complexes), std::move(reactions));
}

// Game for which q is dominant by construction: the symmetric part is
// negative semidefinite and A q is constant, so q.Ap - p.Ap =
// -(p-q).A(p-q) >= 0.
inline Matrix stable_game(const Vector& q, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(q.size());
  const Matrix b = random_matrix(n, n, rng);
  const Matrix k = random_matrix(n, n, rng);
  Matrix a = -b * b.transpose() + (k - k.transpose());
  const Vector shift = Vector::Constant(q.size(), uniform(rng, -1.0, 1.0)) - a * q;
  a += shift * Vector::Ones(q.size()).transpose();
  return a;
}

}  // namespace relent::testing
