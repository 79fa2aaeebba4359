#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "relent/infodiv.hpp"
#include "relent/markov.hpp"
#include "relent/numcore.hpp"

namespace relent {

/// Formal combination of species with natural-number coefficients; one
/// entry per species of the owning network.
struct Complex {
  std::vector<std::uint32_t> coefficients;

  bool empty() const;
  friend auto operator<=>(const Complex&, const Complex&) = default;
};

struct Reaction {
  std::size_t source = 0;  // complex index
  std::size_t target = 0;  // complex index
  double rate = 0.0;

  friend bool operator==(const Reaction&, const Reaction&) = default;
};

/// Species, complexes and rate-labelled reactions. Species order is the
/// coordinate order of every population vector.
class ReactionNetwork {
 public:
  ReactionNetwork(std::vector<std::string> species, std::vector<Complex> complexes,
                  std::vector<Reaction> reactions);

  const std::vector<std::string>& species() const noexcept { return species_; }
  const std::vector<Complex>& complexes() const noexcept { return complexes_; }
  const std::vector<Reaction>& reactions() const noexcept { return reactions_; }
  std::size_t species_count() const noexcept { return species_.size(); }

  std::size_t species_index(const std::string& name) const;

  /// "E + S", "2 W", "0".
  std::string format_complex(std::size_t complex_index) const;
  std::string format_complex(const Complex& complex) const;

  friend bool operator==(const ReactionNetwork&, const ReactionNetwork&) = default;

 private:
  std::vector<std::string> species_;
  std::vector<Complex> complexes_;
  std::vector<Reaction> reactions_;
};

/// Per-reaction stoichiometry; rows are reactions, columns species.
struct StoichiometricData {
  Eigen::MatrixXi source_matrix;
  Eigen::MatrixXi target_matrix;
  Eigen::MatrixXi net_matrix;
};

StoichiometricData stoichiometry(const ReactionNetwork& network);

/// Exponent vector over species.
using Monomial = std::vector<std::uint32_t>;
/// Sparse polynomial: monomial -> coefficient, zero coefficients omitted.
using Polynomial = std::map<Monomial, double>;

/// Right-hand side of the rate equation as one polynomial per species.
std::vector<Polynomial> rate_polynomials(const ReactionNetwork& network);

/// P -> sum_tau r(tau) (t(tau) - s(tau)) P^s(tau), with 0^0 = 1.
VectorField rate_field(const ReactionNetwork& network);

/// Jacobian of rate_field at P.
Matrix rate_jacobian(const ReactionNetwork& network, const Vector& p);

/// P^s = prod_i P_i^s_i with 0^0 = 1.
double monomial(const Vector& p, const std::vector<std::uint32_t>& exponents);

struct BalanceReport {
  bool balanced = false;
  // Production minus destruction rate of each complex at the tested point.
  Vector residuals;
  double tolerance = 0.0;
  // max(1, largest per-complex throughput); residuals are compared to
  // tolerance * scale.
  double scale = 1.0;
  // |rate_field(Q)|_inf.
  double field_residual = 0.0;
};

BalanceReport is_complex_balanced(const ReactionNetwork& network, const Population& q, double tol = 1e-9);

class NoEquilibriumError : public Error {
 public:
  NoEquilibriumError(const std::string& what, Vector last) : Error(what), last_(std::move(last)) {}
  const Vector& last_iterate() const noexcept { return last_; }

 private:
  Vector last_;
};

/// Integrates to `horizon`, then polishes with damped Newton iteration
/// constrained to the initial conservation class. The result is a steady
/// state, not necessarily complex balanced.
Population find_equilibrium(const ReactionNetwork& network, const Population& initial, double horizon,
                            const IntegratorConfig& config = {});

class NotMarkovNetworkError : public Error {
 public:
  using Error::Error;
};

/// Requires every complex to be a single species with coefficient 1.
MarkovProcess to_markov(const ReactionNetwork& network);

/// Basis c of {c : c . (t(tau) - s(tau)) = 0 for all tau}, in reduced row
/// echelon form (so Michaelis-Menten yields E + I and S + I + P).
std::vector<Vector> conservation_laws(const ReactionNetwork& network, double tol = 1e-10);

struct ParseWarning {
  std::size_t line = 0;
  std::string message;
};

// Text format, one reaction per line, '#' comments:
//   species: E S I P        (optional; fixes the species order)
//   E + S -> I : 0.5
//   0 -> H : 1.0
//   2 W -> W : 0.1
ReactionNetwork parse_network(std::istream& in, std::vector<ParseWarning>* warnings = nullptr);
ReactionNetwork parse_network(const std::string& text, std::vector<ParseWarning>* warnings = nullptr);
std::string serialize_network(const ReactionNetwork& network);

}  // namespace relent
