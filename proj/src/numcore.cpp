#include "relent/numcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace relent {

void IntegratorConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("integrator step must be > 0");
  if (!(rel_tol > 0.0)) throw ValidationError("rel_tol must be > 0");
  if (!(abs_tol > 0.0)) throw ValidationError("abs_tol must be > 0");
  if (max_steps < 1) throw ValidationError("max_steps must be >= 1");
  if (!(state_floor >= 0.0)) throw ValidationError("state_floor must be >= 0");
  if (!(record_interval >= 0.0)) throw ValidationError("record_interval must be >= 0");
}

Trajectory::Trajectory(std::vector<std::string> channel_names) {
  channels_.reserve(channel_names.size());
  for (auto& name : channel_names) channels_.push_back(Channel{std::move(name), {}});
}

void Trajectory::append(double time, Vector state, std::span<const double> channel_values) {
  if (channel_values.size() != channels_.size()) {
    throw ShapeError("Trajectory::append: expected " + std::to_string(channels_.size()) +
                     " channel values");
  }
  if (!times_.empty()) {
    if (!(time > times_.back())) throw ValidationError("Trajectory times must increase strictly");
    if (state.size() != states_.front().size()) throw ShapeError("Trajectory state dimension changed");
  }
  times_.push_back(time);
  states_.push_back(std::move(state));
  for (std::size_t c = 0; c < channels_.size(); ++c) channels_[c].values.push_back(channel_values[c]);
}

const std::vector<double>& Trajectory::channel(const std::string& name) const {
  for (const auto& c : channels_) {
    if (c.name == name) return c.values;
  }
  throw std::out_of_range("no channel named '" + name + "'");
}

bool Trajectory::has_channel(const std::string& name) const {
  return std::any_of(channels_.begin(), channels_.end(),
                     [&](const Channel& c) { return c.name == name; });
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

class Stepper {
 public:
  Stepper(const VectorField& field) : field_(field) {}

  Vector eval(double t, const Vector& x) const {
    Vector dx = field_(t, x);
    if (dx.size() != x.size()) throw ShapeError("vector field changed the state dimension");
    if (!all_finite(dx)) {
      throw NumericalBlowupError("non-finite derivative at t = " + std::to_string(t), t);
    }
    return dx;
  }

  Vector rk4(double t, const Vector& x, double h) const {
    const Vector k1 = eval(t, x);
    const Vector k2 = eval(t + h / 2, x + (h / 2) * k1);
    const Vector k3 = eval(t + h / 2, x + (h / 2) * k2);
    const Vector k4 = eval(t + h, x + h * k3);
    return x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  }

  // Returns the 5th-order solution and the embedded error estimate.
  std::pair<Vector, Vector> dopri(double t, const Vector& x, const Vector& k1, double h) const {
    const Vector k2 = eval(t + c2 * h, x + h * (a21 * k1));
    const Vector k3 = eval(t + c3 * h, x + h * (a31 * k1 + a32 * k2));
    const Vector k4 = eval(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = eval(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 =
        eval(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vector next = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector k7 = eval(t + h, next);
    Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    last_k7_ = k7;
    return {std::move(next), std::move(err)};
  }

  const Vector& last_k7() const { return last_k7_; }

 private:
  const VectorField& field_;
  mutable Vector last_k7_;
};

class Recorder {
 public:
  Recorder(std::span<const Monitor> monitors) : monitors_(monitors), values_(monitors.size()) {
    std::vector<std::string> names;
    for (const auto& m : monitors) names.push_back(m.name);
    trajectory_ = Trajectory(std::move(names));
  }

  void record(double t, const Vector& x) {
    for (std::size_t i = 0; i < monitors_.size(); ++i) values_[i] = monitors_[i].fn(x);
    trajectory_.append(t, x, values_);
  }

  double last_time() const { return trajectory_.empty() ? -1.0 : trajectory_.final_time(); }
  Trajectory& trajectory() { return trajectory_; }

 private:
  std::span<const Monitor> monitors_;
  std::vector<double> values_;
  Trajectory trajectory_;
};

}  // namespace

Trajectory integrate(const VectorField& field, const Vector& x0, double t_end,
                     const IntegratorConfig& config, std::span<const Monitor> monitors) {
  config.validate();
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be positive");
  if (!all_finite(x0)) throw ValidationError("initial state must be finite");

  Stepper stepper(field);
  Recorder recorder(monitors);
  IntegrationStats stats;

  double t = 0.0;
  Vector x = x0;
  recorder.record(t, x);

  // Next time that must be hit exactly.
  std::size_t record_index = 1;
  auto next_target = [&]() {
    if (config.record_interval <= 0.0) return t_end;
    return std::min(t_end, static_cast<double>(record_index) * config.record_interval);
  };

  auto clamp = [&](Vector& state) {
    if (config.state_floor <= 0.0) return;
    for (Eigen::Index i = 0; i < state.size(); ++i) {
      if (state[i] < 0.0) {
        state[i] = 0.0;
        ++stats.clamp_events;
      }
    }
  };

  auto budget_exceeded = [&]() {
    if (t > recorder.last_time()) recorder.record(t, x);
    recorder.trajectory().stats = stats;
    return IntegrationBudgetError("integration exceeded max_steps = " +
                                      std::to_string(config.max_steps) + " at t = " +
                                      std::to_string(t),
                                  std::move(recorder.trajectory()));
  };

  double h = std::min(config.step, t_end);
  Vector k1;
  if (config.method == IntegrationMethod::rk45) k1 = stepper.eval(t, x);

  while (t < t_end) {
    if (stats.accepted_steps + stats.rejected_steps >= config.max_steps) throw budget_exceeded();

    const double target = next_target();
    bool lands = false;
    double step = config.method == IntegrationMethod::rk4 ? config.step : h;
    if (t + step * (1.0 + 1e-10) >= target) {
      step = target - t;
      lands = true;
    }
    if (!lands && !(t + step > t)) {
      throw NumericalBlowupError("step size underflow at t = " + std::to_string(t), t);
    }

    if (config.method == IntegrationMethod::rk4) {
      Vector next = stepper.rk4(t, x, step);
      t = lands ? target : t + step;
      x = std::move(next);
      clamp(x);
      ++stats.accepted_steps;
    } else {
      auto [next, err] = stepper.dopri(t, x, k1, step);
      double err_norm = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double scale =
            config.abs_tol + config.rel_tol * std::max(std::abs(x[i]), std::abs(next[i]));
        err_norm = std::max(err_norm, std::abs(err[i]) / scale);
      }
      const double factor =
          err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
      if (err_norm > 1.0) {
        ++stats.rejected_steps;
        h = step * factor;
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
          throw NumericalBlowupError("step size underflow at t = " + std::to_string(t), t);
        }
        continue;
      }
      t = lands ? target : t + step;
      x = std::move(next);
      const std::size_t clamps_before = stats.clamp_events;
      clamp(x);
      // FSAL: the last stage is the next first stage unless clamping moved x.
      k1 = stats.clamp_events != clamps_before ? stepper.eval(t, x) : stepper.last_k7();
      ++stats.accepted_steps;
      // A landing step may have been shortened; don't let that shrink h.
      h = lands ? std::max(h, step * factor) : step * factor;
    }

    if (lands) {
      recorder.record(t, x);
      ++record_index;
    } else if (config.record_interval <= 0.0) {
      recorder.record(t, x);
    }
  }

  recorder.trajectory().stats = stats;
  return std::move(recorder.trajectory());
}

Matrix matrix_exp(const Matrix& h, double t) {
  if (h.rows() != h.cols()) throw ShapeError("matrix_exp: matrix must be square");
  if (!all_finite(h) || !std::isfinite(t)) throw InvalidMatrixError("matrix_exp: non-finite input");
  const auto n = h.rows();
  const Matrix identity = Matrix::Identity(n, n);
  if (t == 0.0 || n == 0) return identity;

  // Higham (2005) degree-13 coefficients and threshold.
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  Matrix a = t * h;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    a /= std::ldexp(1.0, squarings);
  }

  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix u_inner =
      a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * identity;
  const Matrix u = a * u_inner;
  const Matrix v =
      a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * identity;

  Matrix result = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

std::vector<Vector> nullspace(const Matrix& m, double tol) {
  if (!all_finite(m)) throw InvalidMatrixError("nullspace: non-finite input");
  const auto cols = m.cols();
  std::vector<Vector> basis;
  if (cols == 0) return basis;
  if (m.rows() == 0) {
    for (Eigen::Index i = 0; i < cols; ++i) basis.push_back(Vector::Unit(cols, i));
    return basis;
  }

  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Vector& sigma = svd.singularValues();
  const double largest = sigma.size() > 0 ? sigma[0] : 0.0;
  Eigen::Index rank = 0;
  if (largest > 0.0) {
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      if (sigma[i] > tol * largest) ++rank;
    }
  }
  const Matrix& v = svd.matrixV();
  for (Eigen::Index i = rank; i < cols; ++i) basis.push_back(v.col(i));
  return basis;
}

double max_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

bool on_simplex(const Vector& x, double tol) {
  if (x.size() == 0) return false;
  if (!x.allFinite()) return false;
  if (x.minCoeff() < -tol) return false;
  return std::abs(x.sum() - 1.0) <= tol;
}

Vector sample_simplex(std::size_t n, std::mt19937_64& rng) {
  std::exponential_distribution<double> exponential(1.0);
  Vector x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    do {
      x[i] = exponential(rng);
    } while (x[i] == 0.0);
  }
  return x / x.sum();
}

Vector unit_vector(std::size_t n, std::size_t i) {
  return Vector::Unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i));
}

}  // namespace relent
