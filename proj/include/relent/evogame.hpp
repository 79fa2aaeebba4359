#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>

#include "relent/infodiv.hpp"
#include "relent/numcore.hpp"

namespace relent {

/// Square payoff (fitness) matrix with finite entries.
class GameMatrix {
 public:
  explicit GameMatrix(Matrix entries);

  const Matrix& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  friend bool operator==(const GameMatrix& a, const GameMatrix& b) {
    return a.entries_.rows() == b.entries_.rows() && a.entries_ == b.entries_;
  }

 private:
  Matrix entries_;
};

/// Text format: first line n, then n rows of n reals; '#' starts a comment.
GameMatrix parse_game_matrix(std::istream& in);
GameMatrix parse_game_matrix(const std::string& text);
std::string serialize_game_matrix(const GameMatrix& a);

/// Per-species fitness f(P). A linear model evaluates A p on the normalized
/// distribution p = P / sum(P); a general model sees raw populations.
class FitnessModel {
 public:
  using Function = std::function<Vector(const Vector&)>;

  static FitnessModel linear(GameMatrix a);
  static FitnessModel general(std::size_t dimension, Function f);

  std::size_t dimension() const noexcept { return dimension_; }
  bool is_linear() const noexcept { return std::holds_alternative<GameMatrix>(impl_); }
  /// Throws std::bad_variant_access for general models.
  const GameMatrix& matrix() const { return std::get<GameMatrix>(impl_); }

  Vector fitness(const Vector& population) const;

 private:
  FitnessModel(std::size_t dimension, std::variant<GameMatrix, Function> impl)
      : dimension_(dimension), impl_(std::move(impl)) {}

  std::size_t dimension_;
  std::variant<GameMatrix, Function> impl_;
};

/// P -> (f_i(P) P_i)_i.
VectorField lotka_volterra_field(FitnessModel model);

/// p -> ((f_i(p) - <f(p)>) p_i)_i.
VectorField replicator_field(FitnessModel model);

/// <f(P)> = sum_j f_j(P) p_j.
double mean_fitness(const FitnessModel& model, const ProbDist& p);

/// Throws DegeneratePopulationError when the total is zero.
ProbDist normalize(const Population& population);

class DegeneratePopulationError : public Error {
 public:
  using Error::Error;
};

/// d/dt I(q, p(t)) under the replicator equation: f(p) . (p - q).
double relative_info_rate(const ProbDist& q, const ProbDist& p, const FitnessModel& model);

enum class VerdictStatus { fails = 0, inconclusive = 1, holds = 2 };

std::string to_string(VerdictStatus status);

struct StrategyVerdict {
  VerdictStatus status = VerdictStatus::inconclusive;
  std::optional<ProbDist> witness;
  double margin = 0.0;
};

struct GameCheckOptions {
  double tol = 1e-9;
  std::size_t samples = 10'000;
  std::uint64_t seed = 0x5eed;
};

/// q.Aq >= p.Aq for all mixed p; exact (vertex check).
StrategyVerdict is_symmetric_nash(const ProbDist& q, const GameMatrix& a, double tol = 1e-9);

/// q.Ap >= p.Ap for all mixed p.
StrategyVerdict is_dominant(const ProbDist& q, const GameMatrix& a, const GameCheckOptions& options = {});

/// Maynard Smith's evolutionarily stable state.
StrategyVerdict is_ess(const ProbDist& q, const GameMatrix& a, const GameCheckOptions& options = {});

/// Thomas's evolutionarily stable strategy: Nash and dominant.
StrategyVerdict is_thomas_ess(const ProbDist& q, const GameMatrix& a,
                              const GameCheckOptions& options = {});

}  // namespace relent
