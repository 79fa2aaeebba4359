#include "relent/evogame.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace relent {

GameMatrix::GameMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw ShapeError("GameMatrix: matrix must be square");
  if (entries_.rows() == 0) throw ValidationError("GameMatrix: empty matrix");
  if (!entries_.allFinite()) throw ValidationError("GameMatrix: non-finite entry");
}

FitnessModel FitnessModel::linear(GameMatrix a) {
  const auto n = a.size();
  return FitnessModel(n, std::move(a));
}

FitnessModel FitnessModel::general(std::size_t dimension, Function f) {
  if (dimension == 0) throw ValidationError("FitnessModel: dimension must be >= 1");
  if (!f) throw ValidationError("FitnessModel: empty fitness function");
  return FitnessModel(dimension, std::move(f));
}

Vector FitnessModel::fitness(const Vector& population) const {
  if (static_cast<std::size_t>(population.size()) != dimension_) {
    throw ShapeError("FitnessModel: expected dimension " + std::to_string(dimension_));
  }
  if (const auto* a = std::get_if<GameMatrix>(&impl_)) {
    const double total = population.sum();
    if (total == 0.0) return Vector::Zero(population.size());
    return a->entries() * (population / total);
  }
  Vector f = std::get<Function>(impl_)(population);
  if (f.size() != population.size()) throw ShapeError("FitnessModel: fitness has wrong dimension");
  return f;
}

VectorField lotka_volterra_field(FitnessModel model) {
  return [model = std::move(model)](double, const Vector& p) -> Vector {
    return model.fitness(p).cwiseProduct(p);
  };
}

VectorField replicator_field(FitnessModel model) {
  return [model = std::move(model)](double, const Vector& p) -> Vector {
    const Vector f = model.fitness(p);
    // Mean over the normalized state, so the field sums to zero even when
    // integration error has moved sum(p) slightly off 1.
    const double total = p.sum();
    const double mean = total == 0.0 ? 0.0 : f.dot(p) / total;
    return (f.array() - mean).matrix().cwiseProduct(p);
  };
}

double mean_fitness(const FitnessModel& model, const ProbDist& p) {
  return model.fitness(p.weights()).dot(p.weights());
}

ProbDist normalize(const Population& population) {
  if (population.size() == 0 || population.counts().sum() <= 0.0) {
    throw DegeneratePopulationError("normalize: total population is zero");
  }
  return ProbDist::normalized(population.counts());
}

double relative_info_rate(const ProbDist& q, const ProbDist& p, const FitnessModel& model) {
  if (q.size() != p.size() || p.size() != model.dimension()) {
    throw ShapeError("relative_info_rate: dimension mismatch");
  }
  return model.fitness(p.weights()).dot(p.weights() - q.weights());
}

std::string to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::holds:
      return "holds";
    case VerdictStatus::fails:
      return "fails";
    case VerdictStatus::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

namespace {

// Largest n for which every face of the simplex is enumerated when
// certifying dominance (2^n - 1 faces).
constexpr std::size_t kMaxEnumeratedDimension = 12;

void require_square_match(const ProbDist& q, const GameMatrix& a) {
  if (q.size() != a.size()) throw ShapeError("strategy and game matrix dimensions differ");
}

ProbDist as_witness(Vector p) {
  p = p.cwiseMax(0.0);
  return ProbDist::normalized(p);
}

// Orthonormal basis (columns) of {d : sum(d) = 0, d_i = 0 for i not in support}.
Matrix tangent_basis(std::size_t n, const std::vector<std::size_t>& support) {
  Matrix constraint = Matrix::Zero(1 + static_cast<Eigen::Index>(n - support.size()),
                                   static_cast<Eigen::Index>(n));
  constraint.row(0).setOnes();
  Eigen::Index row = 1;
  std::vector<bool> in_support(n, false);
  for (auto i : support) in_support[i] = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_support[i]) constraint(row++, static_cast<Eigen::Index>(i)) = 1.0;
  }
  const auto basis = nullspace(constraint, 1e-12);
  Matrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) z.col(static_cast<Eigen::Index>(k)) = basis[k];
  return z;
}

// Extreme eigenpair of the symmetric part of A restricted to a tangent space.
struct Curvature {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  Vector max_direction;  // unit vector in R^n
  Vector min_direction;
};

Curvature restricted_curvature(const Matrix& a, const Matrix& z) {
  Curvature c;
  if (z.cols() == 0) return c;
  const Matrix sym = 0.5 * (a + a.transpose());
  const Matrix restricted = z.transpose() * sym * z;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(restricted);
  const auto last = restricted.rows() - 1;
  c.min_eigenvalue = eig.eigenvalues()[0];
  c.max_eigenvalue = eig.eigenvalues()[last];
  c.min_direction = z * eig.eigenvectors().col(0);
  c.max_direction = z * eig.eigenvectors().col(last);
  return c;
}

// Largest alpha with p + alpha d >= 0.
double max_feasible_step(const Vector& p, const Vector& d) {
  double alpha = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (d[i] < 0.0) alpha = std::min(alpha, p[i] / -d[i]);
  }
  return alpha;
}

// Minimizer over s in [0, 1] of a quadratic known through its values at
// 0, 1/2, 1. Returns candidate parameters worth evaluating.
std::vector<double> quadratic_candidates(double at0, double at_half, double at1) {
  // h(s) = c0 + c1 s + c2 s^2
  const double c2 = 2.0 * (at0 - 2.0 * at_half + at1);
  const double c1 = at1 - at0 - c2;
  std::vector<double> out{0.0, 1.0};
  if (c2 > 0.0) {
    const double s = -c1 / (2.0 * c2);
    if (s > 0.0 && s < 1.0) out.push_back(s);
  }
  return out;
}

class WorstTracker {
 public:
  void offer(double value, const Vector& p) {
    if (value < worst_) {
      worst_ = value;
      witness_ = p;
    }
  }
  double worst() const { return worst_; }
  const Vector& witness() const { return witness_; }

 private:
  double worst_ = std::numeric_limits<double>::infinity();
  Vector witness_;
};

}  // namespace

StrategyVerdict is_symmetric_nash(const ProbDist& q, const GameMatrix& a, double tol) {
  require_square_match(q, a);
  const Vector aq = a.entries() * q.weights();
  const double payoff = q.weights().dot(aq);
  StrategyVerdict verdict;
  Eigen::Index worst = 0;
  verdict.margin = (payoff - aq.array()).minCoeff(&worst);
  if (verdict.margin >= -tol) {
    verdict.status = VerdictStatus::holds;
  } else {
    verdict.status = VerdictStatus::fails;
    verdict.witness = ProbDist::vertex(q.size(), static_cast<std::size_t>(worst));
  }
  return verdict;
}

StrategyVerdict is_dominant(const ProbDist& q, const GameMatrix& game, const GameCheckOptions& options) {
  require_square_match(q, game);
  const Matrix& a = game.entries();
  const std::size_t n = q.size();
  const Vector w = a.transpose() * q.weights();
  // q.Ap - p.Ap
  auto slack = [&](const Vector& p) { return w.dot(p) - p.dot(a * p); };

  WorstTracker tracker;
  tracker.offer(slack(q.weights()), q.weights());

  // Vertices.
  for (std::size_t i = 0; i < n; ++i) {
    const Vector e = unit_vector(n, i);
    tracker.offer(slack(e), e);
  }

  // Edges: the slack along e_i -> e_j is a quadratic in the edge parameter.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vector ei = unit_vector(n, i);
      const Vector ej = unit_vector(n, j);
      auto point = [&](double s) -> Vector { return (1.0 - s) * ei + s * ej; };
      for (double s : quadratic_candidates(slack(ei), slack(point(0.5)), slack(ej))) {
        const Vector p = point(s);
        tracker.offer(slack(p), p);
      }
    }
  }

  // Concave slack attains its minimum at a vertex.
  const Matrix full_tangent = tangent_basis(n, [&] {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }());
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const bool concave = restricted_curvature(a, full_tangent).min_eigenvalue >= -1e-12 * scale;

  // Faces of dimension >= 2: stationary point of the restricted quadratic.
  bool exact = concave || n <= 2;
  if (!concave && n >= 3 && n <= kMaxEnumeratedDimension) {
    const Matrix sym = 0.5 * (a + a.transpose());
    const std::uint32_t faces = (1u << n);
    for (std::uint32_t mask = 1; mask < faces; ++mask) {
      const int m = std::popcount(mask);
      if (m < 3) continue;
      std::vector<Eigen::Index> idx;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) idx.push_back(static_cast<Eigen::Index>(i));
      }
      // p = e_idx0 + Z y with Z columns e_idxk - e_idx0.
      Matrix z = Matrix::Zero(static_cast<Eigen::Index>(n), m - 1);
      for (int k = 1; k < m; ++k) {
        z(idx[0], k - 1) = -1.0;
        z(idx[static_cast<std::size_t>(k)], k - 1) = 1.0;
      }
      const Vector base = unit_vector(n, static_cast<std::size_t>(idx[0]));
      const Vector r = z.transpose() * (w - 2.0 * sym * base);
      const Matrix g = -(z.transpose() * sym * z);
      Eigen::LLT<Matrix> llt(g);
      if (llt.info() != Eigen::Success) continue;
      const Vector y = -0.5 * llt.solve(r);
      const Vector p = base + z * y;
      if (!p.allFinite() || p.minCoeff() < -1e-12) continue;
      const Vector clipped = p.cwiseMax(0.0) / p.cwiseMax(0.0).sum();
      tracker.offer(slack(clipped), clipped);
    }
    exact = true;
  }

  // Randomized interior falsification.
  std::mt19937_64 rng(options.seed);
  for (std::size_t k = 0; k < options.samples; ++k) {
    const Vector p = sample_simplex(n, rng);
    tracker.offer(slack(p), p);
  }

  StrategyVerdict verdict;
  verdict.margin = tracker.worst();
  if (tracker.worst() < -options.tol) {
    verdict.status = VerdictStatus::fails;
    verdict.witness = as_witness(tracker.witness());
  } else {
    verdict.status = exact ? VerdictStatus::holds : VerdictStatus::inconclusive;
  }
  return verdict;
}

StrategyVerdict is_ess(const ProbDist& q, const GameMatrix& game, const GameCheckOptions& options) {
  const StrategyVerdict nash = is_symmetric_nash(q, game, options.tol);
  if (nash.status == VerdictStatus::fails) return nash;

  const Matrix& a = game.entries();
  const std::size_t n = q.size();
  const Vector aq = a * q.weights();
  const double payoff = q.weights().dot(aq);

  std::vector<std::size_t> equal;
  double strict_margin = std::numeric_limits<double>::infinity();
  bool support_is_equality_set = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double gap = payoff - aq[static_cast<Eigen::Index>(i)];
    if (std::abs(gap) <= options.tol) {
      equal.push_back(i);
      if (q[i] == 0.0) support_is_equality_set = false;
    } else {
      strict_margin = std::min(strict_margin, gap);
    }
  }

  StrategyVerdict verdict;
  // Strict Nash at a vertex: the equality face is {q} and the second
  // condition is vacuous.
  if (equal.size() <= 1) {
    verdict.status = VerdictStatus::holds;
    verdict.margin = std::isfinite(strict_margin) ? strict_margin : 0.0;
    return verdict;
  }

  // On the equality face, q.Ap - p.Ap = -(p-q).A(p-q) up to the Nash
  // tolerance, so the second condition is negative curvature along p - q.
  const Matrix z = tangent_basis(n, equal);
  const Curvature curvature = restricted_curvature(a, z);
  const double curvature_margin = -curvature.max_eigenvalue;

  auto violates = [&](const Vector& p, double* normalized) {
    const double dist2 = (p - q.weights()).squaredNorm();
    const double s = q.weights().dot(a * p) - p.dot(a * p);
    *normalized = s / dist2;
    return s <= options.tol * dist2;
  };

  if (curvature_margin > options.tol) {
    verdict.status = VerdictStatus::holds;
    verdict.margin = std::min(strict_margin, curvature_margin);
    return verdict;
  }

  if (support_is_equality_set) {
    // q is interior to the equality face, so every tangent direction is
    // reachable: the flattest direction is a witness.
    const Vector& d = curvature.max_direction;
    const double step = 0.5 * max_feasible_step(q.weights(), d);
    verdict.status = VerdictStatus::fails;
    verdict.witness = as_witness(q.weights() + step * d);
    verdict.margin = std::min(strict_margin, curvature_margin);
    return verdict;
  }

  // q on the boundary of the equality face: check vertices and edges of the
  // face exactly, sample its interior.
  WorstTracker tracker;
  bool found = false;
  auto offer = [&](const Vector& p) {
    if ((p - q.weights()).norm() < 1e-12) return;
    double normalized = 0.0;
    if (violates(p, &normalized)) found = true;
    tracker.offer(normalized, p);
  };
  for (auto i : equal) offer(unit_vector(n, i));
  for (std::size_t x = 0; x < equal.size(); ++x) {
    for (std::size_t y = x + 1; y < equal.size(); ++y) {
      const Vector ei = unit_vector(n, equal[x]);
      const Vector ej = unit_vector(n, equal[y]);
      auto point = [&](double s) -> Vector { return (1.0 - s) * ei + s * ej; };
      // slack - tol |p - q|^2 is quadratic along the edge.
      auto h = [&](double s) {
        const Vector p = point(s);
        return q.weights().dot(a * p) - p.dot(a * p) - options.tol * (p - q.weights()).squaredNorm();
      };
      for (double s : quadratic_candidates(h(0.0), h(0.5), h(1.0))) offer(point(s));
    }
  }
  bool exact = equal.size() == 2;
  if (equal.size() >= 3) {
    std::mt19937_64 rng(options.seed);
    for (std::size_t k = 0; k < options.samples; ++k) {
      const Vector local = sample_simplex(equal.size(), rng);
      Vector p = Vector::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < equal.size(); ++i) {
        p[static_cast<Eigen::Index>(equal[i])] = local[static_cast<Eigen::Index>(i)];
      }
      offer(p);
    }
  }

  verdict.margin = std::min(strict_margin, tracker.worst());
  if (found) {
    verdict.status = VerdictStatus::fails;
    verdict.witness = as_witness(tracker.witness());
  } else {
    verdict.status = exact ? VerdictStatus::holds : VerdictStatus::inconclusive;
  }
  return verdict;
}

StrategyVerdict is_thomas_ess(const ProbDist& q, const GameMatrix& a, const GameCheckOptions& options) {
  const StrategyVerdict nash = is_symmetric_nash(q, a, options.tol);
  const StrategyVerdict dominant = is_dominant(q, a, options);
  StrategyVerdict verdict;
  verdict.status = std::min(nash.status, dominant.status);
  verdict.margin = std::min(nash.margin, dominant.margin);
  if (nash.status == VerdictStatus::fails) {
    verdict.witness = nash.witness;
  } else if (dominant.status == VerdictStatus::fails) {
    verdict.witness = dominant.witness;
  }
  return verdict;
}

}  // namespace relent
