#include "relent/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "relent/evogame.hpp"
#include "relent/infodiv.hpp"
#include "relent/markov.hpp"
#include "relent/numcore.hpp"
#include "relent/reactnet.hpp"
#include "relent/textio.hpp"

namespace relent::cli {

namespace {

using nlohmann::json;

class UsageError : public Error {
 public:
  using Error::Error;
};

enum class ModelKind { game, markov, network };

const char* kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::game: return "game";
    case ModelKind::markov: return "markov";
    case ModelKind::network: return "network";
  }
  return "?";
}

struct ModelFile {
  std::string path;
  std::string text;
  ModelKind kind = ModelKind::game;
  std::string hash;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ModelKind infer_kind(const std::string& path, const std::string& override_kind) {
  if (!override_kind.empty()) {
    if (override_kind == "game") return ModelKind::game;
    if (override_kind == "markov") return ModelKind::markov;
    if (override_kind == "network") return ModelKind::network;
    throw UsageError("unknown model kind '" + override_kind + "'");
  }
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".mat")) return ModelKind::game;
  if (ends_with(".mk")) return ModelKind::markov;
  if (ends_with(".rn")) return ModelKind::network;
  throw UsageError("cannot infer the model kind of '" + path + "'; use --kind game|markov|network");
}

ModelFile load_model(const std::string& path, const std::string& override_kind) {
  ModelFile file;
  file.path = path;
  file.kind = infer_kind(path, override_kind);
  file.text = read_file(path);
  file.hash = content_hash(file.text);
  return file;
}

// Parse failures are reported with the file name prepended.
template <class F>
auto parse_model(const ModelFile& file, F&& parse) {
  try {
    return parse(file.text);
  } catch (const ParseError& e) {
    throw UsageError(file.path + ":" + e.what());
  } catch (const ValidationError& e) {
    throw UsageError(file.path + ": " + e.what());
  }
}

MarkovProcess load_markov(const ModelFile& file) {
  if (file.kind == ModelKind::markov) {
    return parse_model(file, [](const std::string& t) { return parse_markov(t); });
  }
  if (file.kind == ModelKind::network) {
    const auto network = parse_model(file, [](const std::string& t) { return parse_network(t); });
    try {
      return to_markov(network);
    } catch (const NotMarkovNetworkError& e) {
      throw UsageError(file.path + ": " + e.what());
    }
  }
  throw UsageError("'" + file.path + "' is a game matrix, not a Markov process");
}

Vector parse_vector(const std::string& text, const std::string& flag) {
  try {
    const auto values = textio::parse_csv_doubles(text);
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  } catch (const ValidationError& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

void require_size(const Vector& v, std::size_t n, const std::string& flag) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw UsageError(flag + " has " + std::to_string(v.size()) + " entries; the model has " + std::to_string(n));
  }
}

ProbDist as_distribution(const Vector& v, const std::string& flag) {
  try {
    return ProbDist(v);
  } catch (const ValidationError& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

Population as_population(const Vector& v, const std::string& flag) {
  try {
    return Population(v);
  } catch (const ValidationError& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string format_vector(const Vector& v) {
  std::vector<std::string> parts;
  for (Eigen::Index i = 0; i < v.size(); ++i) parts.push_back(textio::format_double(v[i]));
  return join(parts, ",");
}

// JSON has no infinities; they are written as strings, like the CSV.
json number(double x) {
  if (std::isfinite(x)) return x;
  return textio::format_double(x);
}

json numbers(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

std::vector<std::string> numbered_names(const std::string& prefix, std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= n; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

// "E+I", "2*A-B".
std::string conserved_name(const Vector& c, const std::vector<std::string>& species) {
  std::string out;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double coeff = c[i];
    if (coeff == 0.0) continue;
    if (coeff < 0.0) {
      out += '-';
    } else if (!out.empty()) {
      out += '+';
    }
    if (std::abs(coeff) != 1.0) out += textio::format_double(std::abs(coeff)) + "*";
    out += species[static_cast<std::size_t>(i)];
  }
  return out;
}

struct ChannelSummary {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double final = 0.0;
  double worst_increase = 0.0;
  double worst_decrease = 0.0;
  std::string verdict;
  bool expected_monotone = false;
  bool violated = false;
};

ChannelSummary summarize(const Channel& channel, double slack, bool expected) {
  ChannelSummary s;
  s.name = channel.name;
  s.expected_monotone = expected;
  const auto& v = channel.values;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  for (double x : v) {
    if (std::isnan(x)) continue;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.final = v.empty() ? std::nan("") : v.back();
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double a = v[i - 1], b = v[i];
    if (std::isnan(a) || std::isnan(b)) {
      s.worst_increase = s.worst_decrease = inf;
    } else if (std::isfinite(a) && std::isfinite(b)) {
      s.worst_increase = std::max(s.worst_increase, b - a);
      s.worst_decrease = std::max(s.worst_decrease, a - b);
    } else if (b > a) {
      s.worst_increase = inf;
    } else if (b < a) {
      s.worst_decrease = inf;
    }
  }
  const bool up = s.worst_increase > slack;
  const bool down = s.worst_decrease > slack;
  if (std::isfinite(s.max - s.min) && s.max - s.min <= slack) {
    s.verdict = "constant";
  } else if (!up) {
    s.verdict = "nonincreasing";
  } else if (!down) {
    s.verdict = "nondecreasing";
  } else {
    s.verdict = "not monotone";
  }
  s.violated = expected && up;
  return s;
}

struct Simulation {
  std::vector<std::string> state_names;
  VectorField field;
  Vector initial;
  std::vector<Monitor> monitors;
};

struct SimulateFlags {
  std::string model;
  std::string kind;
  std::string dynamics;
  std::string initial;
  double t_end = 0.0;
  std::string method = "rk45";
  std::optional<double> step;
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
  double interval = 0.0;
  std::optional<std::string> ref;
  std::optional<double> beta;
  std::string out;
  std::string format = "csv";
  std::string report;
  std::uint64_t seed = 0;
  double slack = 1e-6;
  std::vector<std::string> monotone;
};

Vector initial_state(const SimulateFlags& f, std::size_t n, bool simplex) {
  if (f.initial == "random") {
    std::mt19937_64 rng(f.seed);
    const Vector p = sample_simplex(n, rng);
    return simplex ? p : Vector(p * static_cast<double>(n));
  }
  Vector v = parse_vector(f.initial, "--initial");
  require_size(v, n, "--initial");
  if (simplex) return as_distribution(v, "--initial").weights();
  return as_population(v, "--initial").counts();
}

void add_divergence_monitors(Simulation& sim, const Vector& ref, bool population) {
  if (population) {
    sim.monitors.push_back({"I(ref,state)", [ref](const Vector& x) {
                              return kernel::population_relative_information(ref, x);
                            }});
    sim.monitors.push_back({"I(state,ref)", [ref](const Vector& x) {
                              return kernel::population_relative_information(x, ref);
                            }});
  } else {
    sim.monitors.push_back({"I(ref,state)", [ref](const Vector& x) { return kernel::relative_information(ref, x); }});
    sim.monitors.push_back({"I(state,ref)", [ref](const Vector& x) { return kernel::relative_information(x, ref); }});
  }
}

Simulation build_simulation(const ModelFile& file, const SimulateFlags& f) {
  Simulation sim;
  std::string dynamics = f.dynamics;
  if (dynamics.empty()) {
    dynamics = file.kind == ModelKind::game ? "replicator" : file.kind == ModelKind::markov ? "master" : "rate";
  }
  if (f.beta && dynamics != "master") throw UsageError("--beta applies only to master dynamics");

  if (dynamics == "replicator" || dynamics == "lotka-volterra") {
    if (file.kind != ModelKind::game) {
      throw UsageError(dynamics + " dynamics need a game matrix; '" + file.path + "' is a " + kind_name(file.kind) +
                       " model");
    }
    const auto game = parse_model(file, [](const std::string& t) { return parse_game_matrix(t); });
    const bool simplex = dynamics == "replicator";
    const auto model = FitnessModel::linear(game);
    sim.field = simplex ? replicator_field(model) : lotka_volterra_field(model);
    sim.state_names = numbered_names("x", game.size());
    sim.initial = initial_state(f, game.size(), simplex);
    if (f.ref) {
      Vector ref = parse_vector(*f.ref, "--ref");
      require_size(ref, game.size(), "--ref");
      ref = simplex ? as_distribution(ref, "--ref").weights() : as_population(ref, "--ref").counts();
      add_divergence_monitors(sim, ref, !simplex);
    }
    return sim;
  }

  if (dynamics == "master") {
    if (file.kind != ModelKind::markov) {
      throw UsageError("master dynamics need a Markov model; '" + file.path + "' is a " + kind_name(file.kind) +
                       " model");
    }
    const auto process = load_markov(file);
    const auto h = hamiltonian(process);
    sim.field = master_field(h);
    sim.state_names = process.states();
    sim.initial = initial_state(f, process.size(), true);
    if (f.ref) {
      Vector ref = parse_vector(*f.ref, "--ref");
      require_size(ref, process.size(), "--ref");
      add_divergence_monitors(sim, as_distribution(ref, "--ref").weights(), false);
    }
    if (f.beta) {
      if (!(*f.beta > 0.0) || !std::isfinite(*f.beta)) throw UsageError("--beta must be positive");
      const auto states = steady_states(process);
      if (states.size() != 1) {
        throw Error("free energy needs a unique steady state; the process has " + std::to_string(states.size()));
      }
      auto model = std::make_shared<const EnergyModel>(energies_from_steady_state(states.front(), *f.beta));
      sim.monitors.push_back({"F(state)", [model](const Vector& x) { return kernel::free_energy(x, *model); }});
    }
    return sim;
  }

  if (dynamics == "rate") {
    if (file.kind != ModelKind::network) {
      throw UsageError("rate dynamics need a reaction network; '" + file.path + "' is a " + kind_name(file.kind) +
                       " model");
    }
    const auto network = parse_model(file, [](const std::string& t) { return parse_network(t); });
    sim.field = rate_field(network);
    sim.state_names = network.species();
    sim.initial = initial_state(f, network.species_count(), false);
    if (f.ref) {
      Vector ref = parse_vector(*f.ref, "--ref");
      require_size(ref, network.species_count(), "--ref");
      add_divergence_monitors(sim, as_population(ref, "--ref").counts(), true);
    }
    for (const auto& c : conservation_laws(network)) {
      sim.monitors.push_back({conserved_name(c, network.species()), [c](const Vector& x) { return c.dot(x); }});
    }
    return sim;
  }

  throw UsageError("unknown dynamics '" + dynamics + "'");
}

void write_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& names) {
  std::vector<std::string> header{"t"};
  header.insert(header.end(), names.begin(), names.end());
  for (const auto& ch : traj.channels()) header.push_back(ch.name);
  os << join(header, ",") << '\n';
  for (std::size_t row = 0; row < traj.size(); ++row) {
    os << textio::format_double(traj.times()[row]);
    const Vector& x = traj.states()[row];
    for (Eigen::Index i = 0; i < x.size(); ++i) os << ',' << textio::format_double(x[i]);
    for (const auto& ch : traj.channels()) os << ',' << textio::format_double(ch.values[row]);
    os << '\n';
  }
}

json trajectory_json(const Trajectory& traj, const std::vector<std::string>& names) {
  json doc;
  json columns = json::array({"t"});
  for (const auto& n : names) columns.push_back(n);
  for (const auto& ch : traj.channels()) columns.push_back(ch.name);
  doc["columns"] = columns;
  json times = json::array();
  for (double t : traj.times()) times.push_back(number(t));
  doc["t"] = times;
  json states = json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    json values = json::array();
    for (const auto& x : traj.states()) values.push_back(number(x[static_cast<Eigen::Index>(i)]));
    states.push_back({{"name", names[i]}, {"values", values}});
  }
  doc["states"] = states;
  json channels = json::array();
  for (const auto& ch : traj.channels()) {
    json values = json::array();
    for (double v : ch.values) values.push_back(number(v));
    channels.push_back({{"name", ch.name}, {"values", values}});
  }
  doc["channels"] = channels;
  return doc;
}

std::string command_echo(const std::vector<std::string>& args) {
  std::vector<std::string> parts{"relent"};
  for (const auto& a : args) {
    const bool plain = !a.empty() && a.find_first_of(" \t\"'\\") == std::string::npos;
    parts.push_back(plain ? a : json(a).dump());
  }
  return join(parts, " ");
}

// Writes to `path`, or to `fallback` when the path is empty or "-".
template <class F>
void emit(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot write '" + path + "'");
  write(file);
  if (!file) throw UsageError("failed writing '" + path + "'");
}

int simulate(const SimulateFlags& f, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto file = load_model(f.model, f.kind);
  const auto sim = build_simulation(file, f);

  IntegratorConfig config;
  config.method = f.method == "rk4" ? IntegrationMethod::rk4 : IntegrationMethod::rk45;
  if (f.step) config.step = *f.step;
  if (f.rel_tol) config.rel_tol = *f.rel_tol;
  if (f.abs_tol) config.abs_tol = *f.abs_tol;
  config.record_interval = f.interval;
  try {
    config.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }

  for (const auto& name : f.monotone) {
    const bool known = std::any_of(sim.monitors.begin(), sim.monitors.end(),
                                   [&](const Monitor& m) { return m.name == name; });
    if (!known) throw UsageError("--monotone: no channel named '" + name + "'");
  }

  const auto traj = integrate(sim.field, sim.initial, f.t_end, config, sim.monitors);

  std::vector<ChannelSummary> summaries;
  bool violated = false;
  for (const auto& ch : traj.channels()) {
    const bool expected = std::find(f.monotone.begin(), f.monotone.end(), ch.name) != f.monotone.end();
    summaries.push_back(summarize(ch, f.slack, expected));
    violated = violated || summaries.back().violated;
  }
  const int status = violated ? exit_not_monotone : exit_ok;

  json report;
  report["command"] = command_echo(args);
  report["model"] = {{"path", file.path}, {"kind", kind_name(file.kind)}, {"fnv1a64", file.hash}};
  report["integrator"] = {{"method", f.method},
                          {"step", config.step},
                          {"rel_tol", config.rel_tol},
                          {"abs_tol", config.abs_tol},
                          {"t_end", f.t_end},
                          {"record_interval", config.record_interval},
                          {"accepted_steps", traj.stats.accepted_steps},
                          {"rejected_steps", traj.stats.rejected_steps}};
  report["slack"] = f.slack;
  json channels = json::array();
  for (const auto& s : summaries) {
    channels.push_back({{"name", s.name},
                        {"min", number(s.min)},
                        {"max", number(s.max)},
                        {"final", number(s.final)},
                        {"worst_increase", number(s.worst_increase)},
                        {"worst_decrease", number(s.worst_decrease)},
                        {"verdict", s.verdict},
                        {"expected_monotone", s.expected_monotone}});
  }
  report["channels"] = channels;
  report["exit_status"] = status;

  emit(f.out, out, [&](std::ostream& os) {
    if (f.format == "json") {
      json doc = trajectory_json(traj, sim.state_names);
      doc["report"] = report;
      os << doc.dump(1) << '\n';
    } else {
      write_csv(os, traj, sim.state_names);
    }
  });
  if (!f.report.empty()) {
    emit(f.report, out, [&](std::ostream& os) { os << report.dump(1) << '\n'; });
  }

  for (const auto& s : summaries) {
    err << s.name << ": min " << textio::format_double(s.min) << ", max " << textio::format_double(s.max)
        << ", final " << textio::format_double(s.final) << ", " << s.verdict;
    if (s.violated) err << " (expected nonincreasing; increased by " << textio::format_double(s.worst_increase) << ")";
    err << '\n';
  }
  return status;
}

struct AnalyzeFlags {
  std::string format = "text";
  std::optional<double> tol;
  std::size_t samples = GameCheckOptions{}.samples;
  std::uint64_t seed = GameCheckOptions{}.seed;
  std::string kind;
  std::string model;
  std::string matrix;
  std::string strategy;
  std::string check;
  std::string point;
  std::optional<double> beta;
  std::string ground;
};

void print_json(std::ostream& out, const json& doc) { out << doc.dump(1) << '\n'; }

int analyze_game(const AnalyzeFlags& f, std::ostream& out) {
  const auto file = load_model(f.matrix, f.kind.empty() ? "game" : f.kind);
  if (file.kind != ModelKind::game) throw UsageError("--matrix must be a game matrix");
  const auto game = parse_model(file, [](const std::string& t) { return parse_game_matrix(t); });
  Vector s = parse_vector(f.strategy, "--strategy");
  require_size(s, game.size(), "--strategy");
  const ProbDist q = as_distribution(s, "--strategy");

  GameCheckOptions options;
  if (f.tol) options.tol = *f.tol;
  options.samples = f.samples;
  options.seed = f.seed;
  if (!(options.tol >= 0.0)) throw UsageError("--tol must be nonnegative");

  StrategyVerdict verdict;
  if (f.check == "nash") {
    verdict = is_symmetric_nash(q, game, options.tol);
  } else if (f.check == "ess") {
    verdict = is_ess(q, game, options);
  } else if (f.check == "dominant") {
    verdict = is_dominant(q, game, options);
  } else {
    verdict = is_thomas_ess(q, game, options);
  }

  if (f.format == "json") {
    json doc;
    doc["matrix"] = {{"path", file.path}, {"fnv1a64", file.hash}};
    doc["check"] = f.check;
    doc["strategy"] = numbers(q.weights());
    doc["verdict"] = to_string(verdict.status);
    doc["margin"] = number(verdict.margin + 0.0);
    doc["witness"] = verdict.witness ? numbers(verdict.witness->weights()) : json(nullptr);
    doc["tol"] = options.tol;
    doc["samples"] = options.samples;
    doc["seed"] = options.seed;
    print_json(out, doc);
  } else {
    out << "check: " << f.check << '\n';
    out << "strategy: " << format_vector(q.weights()) << '\n';
    out << "verdict: " << to_string(verdict.status) << '\n';
    out << "margin: " << textio::format_double(verdict.margin + 0.0) << '\n';
    out << "witness: " << (verdict.witness ? format_vector(verdict.witness->weights()) : "none") << '\n';
  }
  switch (verdict.status) {
    case VerdictStatus::holds: return exit_ok;
    case VerdictStatus::fails: return exit_fails;
    case VerdictStatus::inconclusive: return exit_inconclusive;
  }
  return exit_inconclusive;
}

int analyze_steady_states(const AnalyzeFlags& f, std::ostream& out) {
  const auto file = load_model(f.model, f.kind);
  const auto process = load_markov(file);
  const double tol = f.tol.value_or(1e-10);
  const auto states = steady_states(process, tol);
  const Matrix h = hamiltonian(process).matrix();

  json list = json::array();
  std::ostringstream text;
  text << "steady states: " << states.size() << '\n';
  text << "states: " << join(process.states(), " ") << '\n';
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double residual = max_norm(h * states[k].weights());
    std::vector<std::string> support;
    for (std::size_t i = 0; i < process.size(); ++i) {
      if (states[k][i] > 0.0) support.push_back(process.states()[i]);
    }
    text << "q" << k + 1 << ": " << format_vector(states[k].weights()) << "  support " << join(support, " ")
         << "  residual " << textio::format_double(residual) << '\n';
    list.push_back({{"q", numbers(states[k].weights())}, {"support", support}, {"residual", number(residual)}});
  }
  if (f.format == "json") {
    print_json(out, {{"model", {{"path", file.path}, {"fnv1a64", file.hash}}},
                     {"states", process.states()},
                     {"steady_states", list}});
  } else {
    out << text.str();
  }
  return exit_ok;
}

int analyze_complex_balance(const AnalyzeFlags& f, std::ostream& out) {
  const auto file = load_model(f.model, f.kind);
  if (file.kind != ModelKind::network) throw UsageError("complex-balance needs a reaction network");
  const auto network = parse_model(file, [](const std::string& t) { return parse_network(t); });
  Vector point = parse_vector(f.point, "--point");
  require_size(point, network.species_count(), "--point");
  const double tol = f.tol.value_or(1e-9);
  if (!(tol > 0.0)) throw UsageError("--tol must be positive");
  const auto report = is_complex_balanced(network, as_population(point, "--point"), tol);

  if (f.format == "json") {
    json residuals = json::array();
    for (std::size_t c = 0; c < network.complexes().size(); ++c) {
      residuals.push_back({{"complex", network.format_complex(c)},
                           {"residual", number(report.residuals[static_cast<Eigen::Index>(c)])}});
    }
    print_json(out, {{"model", {{"path", file.path}, {"fnv1a64", file.hash}}},
                     {"point", numbers(point)},
                     {"balanced", report.balanced},
                     {"tolerance", report.tolerance},
                     {"scale", report.scale},
                     {"field_residual", number(report.field_residual)},
                     {"residuals", residuals}});
  } else {
    out << "balanced: " << (report.balanced ? "yes" : "no") << '\n';
    out << "point: " << format_vector(point) << '\n';
    out << "tolerance: " << textio::format_double(report.tolerance) << " x scale "
        << textio::format_double(report.scale) << '\n';
    out << "field residual: " << textio::format_double(report.field_residual) << '\n';
    out << "residuals (inflow - outflow):\n";
    for (std::size_t c = 0; c < network.complexes().size(); ++c) {
      out << "  " << network.format_complex(c) << ": "
          << textio::format_double(report.residuals[static_cast<Eigen::Index>(c)]) << '\n';
    }
  }
  return report.balanced ? exit_ok : exit_fails;
}

int analyze_energies(const AnalyzeFlags& f, std::ostream& out) {
  const auto file = load_model(f.model, f.kind);
  const auto process = load_markov(file);
  if (!f.beta || !(*f.beta > 0.0) || !std::isfinite(*f.beta)) throw UsageError("--beta must be positive");
  const auto states = steady_states(process, f.tol.value_or(1e-10));
  if (states.size() != 1) {
    throw Error("energies need a unique steady state; the process has " + std::to_string(states.size()));
  }
  const auto& q = states.front();
  EnergyModel model;
  if (f.ground.empty()) {
    model = energies_from_steady_state(q, *f.beta);
  } else {
    std::size_t ground = 0;
    try {
      ground = process.index_of(f.ground);
    } catch (const std::exception&) {
      throw UsageError("--ground: no state named '" + f.ground + "'");
    }
    model = energies_from_steady_state(q, *f.beta, ground);
  }
  const double f_q = free_energy(q, model);

  if (f.format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < process.size(); ++i) {
      rows.push_back({{"state", process.states()[i]},
                      {"probability", q[i]},
                      {"energy", number(model.energies[static_cast<Eigen::Index>(i)])}});
    }
    print_json(out, {{"model", {{"path", file.path}, {"fnv1a64", file.hash}}},
                     {"beta", model.beta},
                     {"temperature", model.temperature()},
                     {"partition", number(model.partition)},
                     {"free_energy", number(f_q)},
                     {"energies", rows}});
  } else {
    out << "beta: " << textio::format_double(model.beta) << '\n';
    out << "temperature: " << textio::format_double(model.temperature()) << '\n';
    out << "partition function: " << textio::format_double(model.partition) << '\n';
    out << "free energy: " << textio::format_double(f_q) << '\n';
    out << "state probability energy\n";
    for (std::size_t i = 0; i < process.size(); ++i) {
      out << process.states()[i] << ' ' << textio::format_double(q[i]) << ' '
          << textio::format_double(model.energies[static_cast<Eigen::Index>(i)]) << '\n';
    }
  }
  return exit_ok;
}

void add_analyze_common(CLI::App* sub, AnalyzeFlags& f) {
  sub->add_option("--tol", f.tol, "Numerical tolerance");
  sub->add_option("--samples", f.samples, "Random samples for game checks");
  sub->add_option("--seed", f.seed, "Seed for sampling");
  sub->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"text", "json"}));
}

}  // namespace

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relative-information monitors for replicator, master and rate equations", "relent"};
  app.require_subcommand(1);

  SimulateFlags sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Integrate dynamics and record monitor channels");
  simulate_cmd->add_option("--model", sim.model, "Model file (.mat, .mk, .rn)")->required();
  simulate_cmd->add_option("--kind", sim.kind, "Override the model kind")
      ->check(CLI::IsMember({"game", "markov", "network"}));
  simulate_cmd->add_option("--dynamics", sim.dynamics, "Dynamics")
      ->check(CLI::IsMember({"replicator", "lotka-volterra", "master", "rate"}));
  simulate_cmd->add_option("--initial", sim.initial, "Initial state as a comma list, or 'random'")->required();
  simulate_cmd->add_option("--t-end", sim.t_end, "Final time")->required()->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--method", sim.method, "Integrator")->check(CLI::IsMember({"rk4", "rk45"}));
  simulate_cmd->add_option("--step", sim.step, "Fixed step (rk4) or initial step (rk45)");
  simulate_cmd->add_option("--rel-tol", sim.rel_tol, "Relative tolerance (rk45)");
  simulate_cmd->add_option("--abs-tol", sim.abs_tol, "Absolute tolerance (rk45)");
  simulate_cmd->add_option("--interval", sim.interval, "Output grid spacing; 0 records every step")
      ->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--ref", sim.ref, "Reference state for relative-information channels");
  simulate_cmd->add_option("--beta", sim.beta, "Inverse temperature for the free-energy channel");
  simulate_cmd->add_option("--out", sim.out, "Trajectory file (default: standard output)");
  simulate_cmd->add_option("--format", sim.format, "Trajectory format")->check(CLI::IsMember({"csv", "json"}));
  simulate_cmd->add_option("--report", sim.report, "Write the JSON run report here");
  simulate_cmd->add_option("--seed", sim.seed, "Seed for --initial random");
  simulate_cmd->add_option("--slack", sim.slack, "Allowed increase between grid points")
      ->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--monotone", sim.monotone, "Channel expected to be nonincreasing (repeatable)");

  AnalyzeFlags an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Static analyses of models");
  analyze_cmd->require_subcommand(1);
  auto* game_cmd = analyze_cmd->add_subcommand("game", "Check a mixed strategy of a matrix game");
  game_cmd->add_option("--matrix", an.matrix, "Game matrix file")->required();
  game_cmd->add_option("--strategy", an.strategy, "Mixed strategy as a comma list")->required();
  game_cmd->add_option("--check", an.check, "Property to check")
      ->required()
      ->check(CLI::IsMember({"nash", "ess", "dominant", "thomas"}));
  add_analyze_common(game_cmd, an);

  auto* steady_cmd = analyze_cmd->add_subcommand("steady-states", "Steady states of a Markov process");
  steady_cmd->add_option("--model", an.model, "Markov model (.mk) or single-species network (.rn)")->required();
  steady_cmd->add_option("--kind", an.kind, "Override the model kind");
  add_analyze_common(steady_cmd, an);

  auto* balance_cmd = analyze_cmd->add_subcommand("complex-balance", "Test a point for complex balance");
  balance_cmd->add_option("--model", an.model, "Reaction network (.rn)")->required();
  balance_cmd->add_option("--point", an.point, "Population as a comma list")->required();
  balance_cmd->add_option("--kind", an.kind, "Override the model kind");
  add_analyze_common(balance_cmd, an);

  auto* energy_cmd = analyze_cmd->add_subcommand("energies", "Boltzmann energies of the steady state");
  energy_cmd->add_option("--model", an.model, "Markov model (.mk)")->required();
  energy_cmd->add_option("--beta", an.beta, "Inverse temperature")->required();
  energy_cmd->add_option("--ground", an.ground, "State assigned energy zero (default: most probable)");
  energy_cmd->add_option("--kind", an.kind, "Override the model kind");
  add_analyze_common(energy_cmd, an);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (simulate_cmd->parsed()) return simulate(sim, args, out, err);
    if (game_cmd->parsed()) return analyze_game(an, out);
    if (steady_cmd->parsed()) return analyze_steady_states(an, out);
    if (balance_cmd->parsed()) return analyze_complex_balance(an, out);
    if (energy_cmd->parsed()) return analyze_energies(an, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_fails;
  }
  return exit_usage;
}

}  // namespace relent::cli
