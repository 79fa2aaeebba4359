#include "relent/reactnet.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace relent {

bool Complex::empty() const {
  return std::all_of(coefficients.begin(), coefficients.end(), [](auto c) { return c == 0; });
}

ReactionNetwork::ReactionNetwork(std::vector<std::string> species, std::vector<Complex> complexes,
                                 std::vector<Reaction> reactions)
    : species_(std::move(species)), complexes_(std::move(complexes)), reactions_(std::move(reactions)) {
  std::set<std::string> names;
  for (const auto& s : species_) {
    if (!is_identifier(s)) throw ValidationError("ReactionNetwork: invalid species name '" + s + "'");
    if (!names.insert(s).second) throw ValidationError("ReactionNetwork: duplicate species '" + s + "'");
  }
  std::set<Complex> distinct;
  for (const auto& c : complexes_) {
    if (c.coefficients.size() != species_.size()) {
      throw ShapeError("ReactionNetwork: complex length differs from species count");
    }
    if (!distinct.insert(c).second) throw ValidationError("ReactionNetwork: duplicate complex");
  }
  std::vector<bool> used(complexes_.size(), false);
  for (const auto& r : reactions_) {
    if (r.source >= complexes_.size() || r.target >= complexes_.size()) {
      throw ValidationError("ReactionNetwork: reaction references an unknown complex");
    }
    if (r.source == r.target) throw ValidationError("ReactionNetwork: reaction source equals target");
    if (!(r.rate > 0.0) || !std::isfinite(r.rate)) {
      throw ValidationError("ReactionNetwork: rate constants must be positive and finite");
    }
    used[r.source] = used[r.target] = true;
  }
  for (std::size_t c = 0; c < used.size(); ++c) {
    if (!used[c]) throw ValidationError("ReactionNetwork: complex " + format_complex(c) + " is in no reaction");
  }
}

std::size_t ReactionNetwork::species_index(const std::string& name) const {
  const auto it = std::find(species_.begin(), species_.end(), name);
  if (it == species_.end()) throw ValidationError("unknown species '" + name + "'");
  return static_cast<std::size_t>(it - species_.begin());
}

std::string ReactionNetwork::format_complex(std::size_t complex_index) const {
  return format_complex(complexes_.at(complex_index));
}

std::string ReactionNetwork::format_complex(const Complex& complex) const {
  std::string out;
  for (std::size_t i = 0; i < complex.coefficients.size(); ++i) {
    const auto c = complex.coefficients[i];
    if (c == 0) continue;
    if (!out.empty()) out += " + ";
    if (c != 1) out += std::to_string(c) + " ";
    out += species_[i];
  }
  return out.empty() ? "0" : out;
}

StoichiometricData stoichiometry(const ReactionNetwork& network) {
  const auto rows = static_cast<Eigen::Index>(network.reactions().size());
  const auto cols = static_cast<Eigen::Index>(network.species_count());
  StoichiometricData data;
  data.source_matrix = Eigen::MatrixXi::Zero(rows, cols);
  data.target_matrix = Eigen::MatrixXi::Zero(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& reaction = network.reactions()[static_cast<std::size_t>(r)];
    const auto& s = network.complexes()[reaction.source].coefficients;
    const auto& t = network.complexes()[reaction.target].coefficients;
    for (Eigen::Index i = 0; i < cols; ++i) {
      data.source_matrix(r, i) = static_cast<int>(s[static_cast<std::size_t>(i)]);
      data.target_matrix(r, i) = static_cast<int>(t[static_cast<std::size_t>(i)]);
    }
  }
  data.net_matrix = data.target_matrix - data.source_matrix;
  return data;
}

std::vector<Polynomial> rate_polynomials(const ReactionNetwork& network) {
  std::vector<Polynomial> out(network.species_count());
  for (const auto& r : network.reactions()) {
    const auto& s = network.complexes()[r.source].coefficients;
    const auto& t = network.complexes()[r.target].coefficients;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const long net = static_cast<long>(t[i]) - static_cast<long>(s[i]);
      if (net != 0) out[i][s] += r.rate * static_cast<double>(net);
    }
  }
  for (auto& poly : out) std::erase_if(poly, [](const auto& term) { return term.second == 0.0; });
  return out;
}

double monomial(const Vector& p, const std::vector<std::uint32_t>& exponents) {
  double value = 1.0;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    for (std::uint32_t e = 0; e < exponents[i]; ++e) value *= p[static_cast<Eigen::Index>(i)];
  }
  return value;
}

namespace {

struct CompiledReaction {
  std::vector<std::uint32_t> source;
  Vector net;
  double rate;
};

std::vector<CompiledReaction> compile(const ReactionNetwork& network) {
  std::vector<CompiledReaction> out;
  const auto k = static_cast<Eigen::Index>(network.species_count());
  for (const auto& r : network.reactions()) {
    CompiledReaction c;
    c.source = network.complexes()[r.source].coefficients;
    const auto& t = network.complexes()[r.target].coefficients;
    c.net.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      c.net[i] = static_cast<double>(t[static_cast<std::size_t>(i)]) -
                 static_cast<double>(c.source[static_cast<std::size_t>(i)]);
    }
    c.rate = r.rate;
    out.push_back(std::move(c));
  }
  return out;
}

void require_species_dimension(const ReactionNetwork& network, const Vector& p) {
  if (static_cast<std::size_t>(p.size()) != network.species_count()) {
    throw ShapeError("population has " + std::to_string(p.size()) + " entries, network has " +
                     std::to_string(network.species_count()) + " species");
  }
}

}  // namespace

VectorField rate_field(const ReactionNetwork& network) {
  const auto k = static_cast<Eigen::Index>(network.species_count());
  return [reactions = compile(network), k](double, const Vector& p) -> Vector {
    if (p.size() != k) throw ShapeError("rate_field: wrong population dimension");
    Vector dp = Vector::Zero(k);
    for (const auto& r : reactions) dp += (r.rate * monomial(p, r.source)) * r.net;
    return dp;
  };
}

Matrix rate_jacobian(const ReactionNetwork& network, const Vector& p) {
  require_species_dimension(network, p);
  const auto k = p.size();
  Matrix jac = Matrix::Zero(k, k);
  for (const auto& r : compile(network)) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto power = r.source[static_cast<std::size_t>(j)];
      if (power == 0) continue;
      auto reduced = r.source;
      --reduced[static_cast<std::size_t>(j)];
      const double partial = r.rate * static_cast<double>(power) * monomial(p, reduced);
      jac.col(j) += partial * r.net;
    }
  }
  return jac;
}

BalanceReport is_complex_balanced(const ReactionNetwork& network, const Population& q, double tol) {
  require_species_dimension(network, q.counts());
  const auto complexes = static_cast<Eigen::Index>(network.complexes().size());
  Vector inflow = Vector::Zero(complexes);
  Vector outflow = Vector::Zero(complexes);
  for (const auto& r : network.reactions()) {
    const double flux = r.rate * monomial(q.counts(), network.complexes()[r.source].coefficients);
    outflow[static_cast<Eigen::Index>(r.source)] += flux;
    inflow[static_cast<Eigen::Index>(r.target)] += flux;
  }

  BalanceReport report;
  report.tolerance = tol;
  report.residuals = inflow - outflow;
  report.scale = std::max(1.0, complexes == 0 ? 0.0 : inflow.cwiseMax(outflow).maxCoeff());
  report.balanced = max_norm(report.residuals) <= tol * report.scale;
  report.field_residual = max_norm(rate_field(network)(0.0, q.counts()));

  if (report.balanced) {
    // rate_field(Q) = sum over complexes of residual * complex vector.
    double bound = 0.0;
    for (Eigen::Index c = 0; c < complexes; ++c) {
      const auto& coeffs = network.complexes()[static_cast<std::size_t>(c)].coefficients;
      const auto largest = coeffs.empty() ? 0u : *std::max_element(coeffs.begin(), coeffs.end());
      bound += static_cast<double>(largest) * std::abs(report.residuals[c]);
    }
    if (report.field_residual > bound * (1.0 + 1e-9) + 1e-300) {
      throw std::logic_error("complex balanced point is not a steady state");
    }
  }
  return report;
}

std::vector<Vector> conservation_laws(const ReactionNetwork& network, double tol) {
  const Matrix net = stoichiometry(network).net_matrix.cast<double>();
  const auto basis = nullspace(net, tol);
  const auto k = static_cast<Eigen::Index>(network.species_count());
  const auto m = static_cast<Eigen::Index>(basis.size());
  if (m == 0) return {};

  // Reduced row echelon form of the basis rows.
  Matrix rows(m, k);
  for (Eigen::Index i = 0; i < m; ++i) rows.row(i) = basis[static_cast<std::size_t>(i)].transpose();
  Eigen::Index pivot_row = 0;
  for (Eigen::Index col = 0; col < k && pivot_row < m; ++col) {
    Eigen::Index best = pivot_row;
    for (Eigen::Index r = pivot_row + 1; r < m; ++r) {
      if (std::abs(rows(r, col)) > std::abs(rows(best, col))) best = r;
    }
    if (std::abs(rows(best, col)) < 1e-9) continue;
    rows.row(pivot_row).swap(rows.row(best));
    rows.row(pivot_row) /= rows(pivot_row, col);
    for (Eigen::Index r = 0; r < m; ++r) {
      if (r != pivot_row) rows.row(r) -= rows(r, col) * rows.row(pivot_row);
    }
    ++pivot_row;
  }

  std::vector<Vector> out;
  for (Eigen::Index i = 0; i < m; ++i) {
    Vector c = rows.row(i).transpose();
    for (Eigen::Index j = 0; j < k; ++j) {
      // Integer stoichiometry gives rational laws; snap rounding noise.
      const double nearest = std::round(c[j]);
      if (std::abs(c[j] - nearest) < 1e-10) c[j] = nearest;
    }
    out.push_back(std::move(c));
  }
  return out;
}

Population find_equilibrium(const ReactionNetwork& network, const Population& initial, double horizon,
                            const IntegratorConfig& config) {
  require_species_dimension(network, initial.counts());
  const VectorField field = rate_field(network);
  auto converged = [](const Vector& p, const Vector& f) {
    return max_norm(f) < 1e-10 * (1.0 + max_norm(p));
  };

  Vector p = initial.counts();
  Vector f = field(0.0, p);
  if (converged(p, f)) return initial;

  p = integrate(field, p, horizon, config).final_state().cwiseMax(0.0);
  f = field(0.0, p);

  const auto laws = conservation_laws(network);
  const auto k = p.size();
  const auto m = static_cast<Eigen::Index>(laws.size());
  for (int iteration = 0; iteration < 100; ++iteration) {
    if (converged(p, f)) return Population(p);
    // Newton step within the conservation class: J d = -f, C d = 0.
    Matrix system(k + m, k);
    system.topRows(k) = rate_jacobian(network, p);
    for (Eigen::Index i = 0; i < m; ++i) system.row(k + i) = laws[static_cast<std::size_t>(i)].transpose();
    Vector rhs = Vector::Zero(k + m);
    rhs.head(k) = -f;
    const Vector step = system.completeOrthogonalDecomposition().solve(rhs);

    const double current = max_norm(f);
    double damping = 1.0;
    Vector candidate = p;
    Vector candidate_f = f;
    while (damping > 1e-10) {
      candidate = (p + damping * step).cwiseMax(0.0);
      candidate_f = field(0.0, candidate);
      if (max_norm(candidate_f) < current * (1.0 - 1e-4 * damping)) break;
      damping /= 2.0;
    }
    if (damping <= 1e-10) break;
    p = std::move(candidate);
    f = std::move(candidate_f);
  }
  if (converged(p, f)) return Population(p);
  throw NoEquilibriumError("find_equilibrium: Newton iteration did not converge (|field| = " +
                               std::to_string(max_norm(f)) + ")",
                           p);
}

MarkovProcess to_markov(const ReactionNetwork& network) {
  std::vector<std::size_t> state_of(network.complexes().size());
  for (std::size_t c = 0; c < network.complexes().size(); ++c) {
    const auto& coeffs = network.complexes()[c].coefficients;
    std::size_t ones = 0;
    std::size_t where = 0;
    bool unit = true;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      if (coeffs[i] == 1) {
        ++ones;
        where = i;
      } else if (coeffs[i] != 0) {
        unit = false;
      }
    }
    if (!unit || ones != 1) {
      throw NotMarkovNetworkError("complex '" + network.format_complex(c) + "' is not a single species");
    }
    state_of[c] = where;
  }
  std::vector<Transition> transitions;
  for (const auto& r : network.reactions()) {
    transitions.push_back({state_of[r.source], state_of[r.target], r.rate});
  }
  return MarkovProcess(network.species(), std::move(transitions));
}

}  // namespace relent
