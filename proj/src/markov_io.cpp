#include <cmath>
#include <istream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "relent/markov.hpp"
#include "relent/textio.hpp"

namespace relent {

namespace {

// Column (1-based) of `part` inside `line`; both views must alias the same buffer.
std::size_t column_of(std::string_view line, std::string_view part) {
  return static_cast<std::size_t>(part.data() - line.data()) + 1;
}

}  // namespace

MarkovProcess parse_markov(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  bool have_states = false;
  std::vector<std::string> states;
  std::unordered_map<std::string, std::size_t> lookup;
  std::vector<Transition> transitions;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line(raw);
    const std::string_view body = textio::trim(textio::strip_comment(line));
    if (body.empty()) continue;

    if (!have_states) {
      constexpr std::string_view prefix = "states:";
      if (body.substr(0, prefix.size()) != prefix) {
        throw ParseError(line_no, column_of(line, body), "expected 'states:' header");
      }
      std::string_view rest = body.substr(prefix.size());
      std::size_t i = 0;
      while (i < rest.size()) {
        while (i < rest.size() && (rest[i] == ' ' || rest[i] == '\t')) ++i;
        if (i >= rest.size()) break;
        const std::size_t start = i;
        while (i < rest.size() && rest[i] != ' ' && rest[i] != '\t') ++i;
        const std::string_view name = rest.substr(start, i - start);
        if (!is_identifier(name)) {
          throw ParseError(line_no, column_of(line, name), "invalid state name '" + std::string(name) + "'");
        }
        if (!lookup.emplace(std::string(name), states.size()).second) {
          throw ParseError(line_no, column_of(line, name), "duplicate state '" + std::string(name) + "'");
        }
        states.emplace_back(name);
      }
      if (states.empty()) throw ParseError(line_no, column_of(line, body), "no states declared");
      have_states = true;
      continue;
    }

    const auto arrow = body.find("->");
    if (arrow == std::string_view::npos) {
      throw ParseError(line_no, column_of(line, body), "expected 'source -> target : rate'");
    }
    const auto colon = body.find(':', arrow + 2);
    if (colon == std::string_view::npos) {
      throw ParseError(line_no, column_of(line, body) + arrow + 2, "expected ':' before the rate");
    }
    const std::string_view source = textio::trim(body.substr(0, arrow));
    const std::string_view target = textio::trim(body.substr(arrow + 2, colon - arrow - 2));
    const std::string_view rate_text = textio::trim(body.substr(colon + 1));

    auto resolve = [&](std::string_view name, std::size_t fallback_column) {
      const auto it = lookup.find(std::string(name));
      if (it == lookup.end()) {
        const std::size_t column = name.empty() ? fallback_column : column_of(line, name);
        throw ParseError(line_no, column, "unknown state '" + std::string(name) + "'");
      }
      return it->second;
    };
    const std::size_t s = resolve(source, column_of(line, body));
    const std::size_t t = resolve(target, column_of(line, body) + arrow + 2);
    const auto rate = textio::parse_double(rate_text);
    const std::size_t rate_column = rate_text.empty() ? column_of(line, body) + colon + 1
                                                      : column_of(line, rate_text);
    if (!rate) throw ParseError(line_no, rate_column, "invalid rate '" + std::string(rate_text) + "'");
    if (!(*rate > 0.0) || !std::isfinite(*rate)) {
      throw ValidationError("line " + std::to_string(line_no) + ": rate must be positive and finite");
    }
    if (s == t) throw ValidationError("line " + std::to_string(line_no) + ": self-loop transition");
    transitions.push_back({s, t, *rate});
  }
  if (!have_states) throw ParseError(line_no + 1, 1, "missing 'states:' header");
  return MarkovProcess(std::move(states), std::move(transitions));
}

MarkovProcess parse_markov(const std::string& text) {
  std::istringstream in(text);
  return parse_markov(in);
}

std::string serialize_markov(const MarkovProcess& process) {
  std::string out = "states:";
  for (const auto& s : process.states()) out += " " + s;
  out += '\n';
  for (const auto& t : process.transitions()) {
    out += process.states()[t.source] + " -> " + process.states()[t.target] + " : " +
           textio::format_double(t.rate) + '\n';
  }
  return out;
}

}  // namespace relent
