#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "relent/infodiv.hpp"
#include "relent/numcore.hpp"

namespace relent {

struct Transition {
  std::size_t source = 0;
  std::size_t target = 0;
  double rate = 0.0;  // 1/time, strictly positive

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Continuous-time Markov process on a finite set of named states.
class MarkovProcess {
 public:
  MarkovProcess(std::vector<std::string> states, std::vector<Transition> transitions);

  const std::vector<std::string>& states() const noexcept { return states_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  std::size_t size() const noexcept { return states_.size(); }

  /// Index of the named state; throws ValidationError when absent.
  std::size_t index_of(const std::string& name) const;

  friend bool operator==(const MarkovProcess&, const MarkovProcess&) = default;

 private:
  std::vector<std::string> states_;
  std::vector<Transition> transitions_;
};

/// Infinitesimal stochastic matrix: off-diagonal entries >= 0, columns sum
/// to zero. H(i, j) is the total rate of transitions j -> i.
class Hamiltonian {
 public:
  explicit Hamiltonian(Matrix matrix);

  const Matrix& matrix() const noexcept { return matrix_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

 private:
  Matrix matrix_;
};

/// Boltzmann parametrization of a strictly positive distribution.
struct EnergyModel {
  double beta = 1.0;
  Vector energies;
  double partition = 1.0;

  double temperature() const { return 1.0 / beta; }
};

class InfiniteEnergyError : public Error {
 public:
  InfiniteEnergyError(const std::string& what, std::size_t state) : Error(what), state_(state) {}
  std::size_t state() const noexcept { return state_; }

 private:
  std::size_t state_;
};

Hamiltonian hamiltonian(const MarkovProcess& process);

/// p -> Hp.
VectorField master_field(Hamiltonian h);

/// G(t, 0) = exp(tH). Entries are clamped to >= 0.
Matrix propagator(const Hamiltonian& h, double t);

/// One probability-normalized steady state per terminal strongly connected
/// component of the transition graph, ordered by the smallest state index in
/// the component.
std::vector<ProbDist> steady_states(const MarkovProcess& process, double tol = 1e-10);

/// Strongly connected components of the transition digraph, each sorted,
/// listed in order of their smallest member.
std::vector<std::vector<std::size_t>> strongly_connected_components(const MarkovProcess& process);

/// Components with no transition leaving them.
std::vector<std::vector<std::size_t>> terminal_components(const MarkovProcess& process);

/// E_i = -ln(q_i / q_ground) / beta, so E_ground = 0.
EnergyModel energies_from_steady_state(const ProbDist& q, double beta, std::size_t ground_state);
/// Ground state defaults to the most probable state (lowest index on ties).
EnergyModel energies_from_steady_state(const ProbDist& q, double beta);

/// Z(beta) = sum_i exp(-beta E_i).
double partition_function(const Vector& energies, double beta);

ProbDist boltzmann_distribution(const Vector& energies, double beta);

/// <E>_p - T S(p).
double free_energy(const ProbDist& p, const EnergyModel& model);

namespace kernel {
double free_energy(const Vector& p, const EnergyModel& model);
}  // namespace kernel

// Text format:
//   states: s1 s2 s3
//   s1 -> s2 : 0.5
MarkovProcess parse_markov(std::istream& in);
MarkovProcess parse_markov(const std::string& text);
std::string serialize_markov(const MarkovProcess& process);

/// [A-Za-z_][A-Za-z0-9_]*
bool is_identifier(std::string_view name);

}  // namespace relent
