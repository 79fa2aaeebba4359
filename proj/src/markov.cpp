#include "relent/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace relent {

bool is_identifier(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  if (!alpha(name.front())) return false;
  return std::all_of(name.begin() + 1, name.end(),
                     [&](char c) { return alpha(c) || (c >= '0' && c <= '9'); });
}

MarkovProcess::MarkovProcess(std::vector<std::string> states, std::vector<Transition> transitions)
    : states_(std::move(states)), transitions_(std::move(transitions)) {
  if (states_.empty()) throw ValidationError("MarkovProcess: no states");
  std::unordered_set<std::string> seen;
  for (const auto& s : states_) {
    if (!is_identifier(s)) throw ValidationError("MarkovProcess: invalid state name '" + s + "'");
    if (!seen.insert(s).second) throw ValidationError("MarkovProcess: duplicate state '" + s + "'");
  }
  for (const auto& t : transitions_) {
    if (t.source >= states_.size() || t.target >= states_.size()) {
      throw ValidationError("MarkovProcess: transition references an unknown state");
    }
    if (t.source == t.target) {
      throw ValidationError("MarkovProcess: self-loop at state '" + states_[t.source] + "'");
    }
    if (!(t.rate > 0.0) || !std::isfinite(t.rate)) {
      throw ValidationError("MarkovProcess: rate constants must be positive and finite");
    }
  }
}

std::size_t MarkovProcess::index_of(const std::string& name) const {
  const auto it = std::find(states_.begin(), states_.end(), name);
  if (it == states_.end()) throw ValidationError("unknown state '" + name + "'");
  return static_cast<std::size_t>(it - states_.begin());
}

Hamiltonian::Hamiltonian(Matrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw ShapeError("Hamiltonian: matrix must be square");
  if (!matrix_.allFinite()) throw InvalidMatrixError("Hamiltonian: non-finite entry");
  for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
      if (i != j && matrix_(i, j) < 0.0) {
        throw ValidationError("Hamiltonian: negative off-diagonal entry");
      }
      sum += matrix_(i, j);
    }
    if (std::abs(sum) > 1e-12 * std::max(1.0, std::abs(matrix_(j, j)))) {
      throw ValidationError("Hamiltonian: column " + std::to_string(j) + " does not sum to zero");
    }
  }
}

Hamiltonian hamiltonian(const MarkovProcess& process) {
  const auto n = static_cast<Eigen::Index>(process.size());
  Matrix h = Matrix::Zero(n, n);
  for (const auto& t : process.transitions()) {
    h(static_cast<Eigen::Index>(t.target), static_cast<Eigen::Index>(t.source)) += t.rate;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    double out = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j) out += h(i, j);
    }
    h(j, j) = -out;
  }
  return Hamiltonian(std::move(h));
}

VectorField master_field(Hamiltonian h) {
  return [m = h.matrix()](double, const Vector& p) -> Vector { return m * p; };
}

Matrix propagator(const Hamiltonian& h, double t) {
  if (!(t >= 0.0)) throw ValidationError("propagator: t must be >= 0");
  return matrix_exp(h.matrix(), t).cwiseMax(0.0);
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const MarkovProcess& process) {
  const std::size_t n = process.size();
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (const auto& t : process.transitions()) adjacency[t.source].push_back(t.target);

  // Iterative Tarjan.
  constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, unvisited), lowlink(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  std::size_t counter = 0;

  struct Frame {
    std::size_t node;
    std::size_t next_edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = lowlink[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& frame = call.back();
      const std::size_t v = frame.node;
      if (frame.next_edge < adjacency[v].size()) {
        const std::size_t w = adjacency[v][frame.next_edge++];
        if (index[w] == unvisited) {
          index[w] = lowlink[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[v] = std::min(lowlink[v], index[w]);
        }
        continue;
      }
      if (lowlink[v] == index[v]) {
        std::vector<std::size_t> component;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component.push_back(w);
        } while (w != v);
        std::sort(component.begin(), component.end());
        components.push_back(std::move(component));
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().node;
        lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
      }
    }
  }
  std::sort(components.begin(), components.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return components;
}

std::vector<std::vector<std::size_t>> terminal_components(const MarkovProcess& process) {
  const auto components = strongly_connected_components(process);
  std::vector<std::size_t> owner(process.size());
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (auto v : components[c]) owner[v] = c;
  }
  std::vector<bool> terminal(components.size(), true);
  for (const auto& t : process.transitions()) {
    if (owner[t.source] != owner[t.target]) terminal[owner[t.source]] = false;
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t c = 0; c < components.size(); ++c) {
    if (terminal[c]) out.push_back(components[c]);
  }
  return out;
}

std::vector<ProbDist> steady_states(const MarkovProcess& process, double tol) {
  const Matrix h = hamiltonian(process).matrix();
  const auto n = h.rows();
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  std::vector<ProbDist> out;
  for (const auto& component : terminal_components(process)) {
    const auto m = static_cast<Eigen::Index>(component.size());
    Matrix restricted(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        restricted(i, j) = h(static_cast<Eigen::Index>(component[static_cast<std::size_t>(i)]),
                             static_cast<Eigen::Index>(component[static_cast<std::size_t>(j)]));
      }
    }
    // An irreducible generator has a one-dimensional kernel; fall back to the
    // smallest singular vector if rounding blurs the rank.
    auto basis = nullspace(restricted, 1e-10);
    Vector local;
    if (basis.size() == 1) {
      local = basis.front();
    } else {
      Eigen::JacobiSVD<Matrix> svd(restricted, Eigen::ComputeFullV);
      local = svd.matrixV().col(m - 1);
    }
    if (local.sum() < 0.0) local = -local;
    local = local.cwiseMax(0.0);
    local /= local.sum();

    Vector q = Vector::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i) {
      q[static_cast<Eigen::Index>(component[static_cast<std::size_t>(i)])] = local[i];
    }
    const double residual = max_norm(h * q);
    if (!(residual < tol * scale)) {
      throw Error("steady_states: residual " + std::to_string(residual) + " exceeds tolerance");
    }
    out.push_back(ProbDist::normalized(q));
  }
  return out;
}

double partition_function(const Vector& energies, double beta) {
  if (energies.size() == 0) throw ValidationError("partition_function: no energies");
  const double lowest = energies.minCoeff();
  return std::exp(-beta * lowest) * (-beta * (energies.array() - lowest)).exp().sum();
}

EnergyModel energies_from_steady_state(const ProbDist& q, double beta, std::size_t ground_state) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
  if (ground_state >= q.size()) throw ValidationError("ground state index out of range");
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) {
      throw InfiniteEnergyError("state " + std::to_string(i) + " has zero probability (infinite energy)", i);
    }
  }
  EnergyModel model;
  model.beta = beta;
  model.energies.resize(static_cast<Eigen::Index>(q.size()));
  const double ground = q[ground_state];
  for (std::size_t i = 0; i < q.size(); ++i) {
    model.energies[static_cast<Eigen::Index>(i)] = i == ground_state ? 0.0 : -std::log(q[i] / ground) / beta;
  }
  model.partition = partition_function(model.energies, beta);
  return model;
}

EnergyModel energies_from_steady_state(const ProbDist& q, double beta) {
  Eigen::Index ground = 0;
  q.weights().maxCoeff(&ground);
  return energies_from_steady_state(q, beta, static_cast<std::size_t>(ground));
}

ProbDist boltzmann_distribution(const Vector& energies, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
  if (energies.size() == 0 || !energies.allFinite()) {
    throw ValidationError("boltzmann_distribution: energies must be finite");
  }
  const double lowest = energies.minCoeff();
  const Vector weights = (-beta * (energies.array() - lowest)).exp().matrix();
  return ProbDist::normalized(weights);
}

double free_energy(const ProbDist& p, const EnergyModel& model) {
  if (static_cast<Eigen::Index>(p.size()) != model.energies.size()) {
    throw ShapeError("free_energy: dimension mismatch");
  }
  return kernel::free_energy(p.weights(), model);
}

namespace kernel {
double free_energy(const Vector& p, const EnergyModel& model) {
  return p.dot(model.energies) - model.temperature() * shannon_entropy(p);
}
}  // namespace kernel

}  // namespace relent
