#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "relent/errors.hpp"

namespace relent {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Right-hand side of an autonomous or time-dependent ODE x' = f(t, x).
using VectorField = std::function<Vector(double, const Vector&)>;

/// Scalar function of the state sampled at every recorded grid point.
struct Monitor {
  std::string name;
  std::function<double(const Vector&)> fn;
};

enum class IntegrationMethod {
  rk4,   // classical fixed-step Runge-Kutta
  rk45,  // Dormand-Prince embedded 5(4) pair with error control
};

struct IntegratorConfig {
  IntegrationMethod method = IntegrationMethod::rk45;
  double step = 1e-2;  // fixed step for rk4, initial step for rk45
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  std::size_t max_steps = 10'000'000;
  // Nonzero enables nonnegativity clamping: components pushed below 0 by an
  // accepted step are reset to 0 and counted in IntegrationStats.
  double state_floor = 0.0;
  // Spacing of recorded grid points; 0 records every accepted step.
  double record_interval = 0.0;

  /// Throws ValidationError when any field is out of range.
  void validate() const;
};

struct IntegrationStats {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t clamp_events = 0;
};

/// Named sequence of monitor values, one per recorded time.
struct Channel {
  std::string name;
  std::vector<double> values;
};

class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<std::string> channel_names);

  /// Appends a grid point; `channel_values` follows the channel order.
  void append(double time, Vector state, std::span<const double> channel_values);

  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<Vector>& states() const noexcept { return states_; }
  const std::vector<Channel>& channels() const noexcept { return channels_; }

  /// Throws std::out_of_range for an unknown name.
  const std::vector<double>& channel(const std::string& name) const;
  bool has_channel(const std::string& name) const;

  const Vector& final_state() const { return states_.back(); }
  double final_time() const { return times_.back(); }

  IntegrationStats stats;

 private:
  std::vector<double> times_;
  std::vector<Vector> states_;
  std::vector<Channel> channels_;
};

/// The step budget ran out; the partial trajectory is preserved.
class IntegrationBudgetError : public Error {
 public:
  IntegrationBudgetError(const std::string& what, Trajectory partial)
      : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

/// The field produced a non-finite derivative (or the step size collapsed).
class NumericalBlowupError : public Error {
 public:
  NumericalBlowupError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Integrates `field` from t = 0 to `t_end`, recording the state and every
/// monitor at each grid point. The first point is exactly (0, x0) and the last
/// is exactly t_end.
Trajectory integrate(const VectorField& field, const Vector& x0, double t_end,
                     const IntegratorConfig& config, std::span<const Monitor> monitors = {});

/// exp(tH) by Pade(13) scaling and squaring. Exactly the identity at t = 0.
Matrix matrix_exp(const Matrix& h, double t);

/// Orthonormal basis of the right nullspace of `m`. Singular values below
/// tol * (largest singular value) count as zero.
std::vector<Vector> nullspace(const Matrix& m, double tol);

double max_norm(const Vector& v);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

// Simplex helpers.

/// True when x >= -tol componentwise and |sum(x) - 1| <= tol.
bool on_simplex(const Vector& x, double tol);

/// Uniform draw from the open (n-1)-simplex, i.e. Dirichlet(1, ..., 1).
Vector sample_simplex(std::size_t n, std::mt19937_64& rng);

/// Standard basis vector e_i of length n.
Vector unit_vector(std::size_t n, std::size_t i);

}  // namespace relent
