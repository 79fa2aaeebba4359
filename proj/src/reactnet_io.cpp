#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>

#include "relent/reactnet.hpp"
#include "relent/textio.hpp"

namespace relent {

namespace {

std::size_t column_of(std::string_view line, std::string_view part) {
  return static_cast<std::size_t>(part.data() - line.data()) + 1;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Sparse complex: species index -> coefficient.
using SparseComplex = std::map<std::size_t, std::uint32_t>;

class NetworkBuilder {
 public:
  NetworkBuilder(std::vector<ParseWarning>* warnings) : warnings_(warnings) {}

  void declare_species(std::string_view line, std::string_view body, std::size_t line_no) {
    std::size_t i = 0;
    while (i < body.size()) {
      while (i < body.size() && is_space(body[i])) ++i;
      if (i >= body.size()) break;
      const std::size_t start = i;
      while (i < body.size() && !is_space(body[i])) ++i;
      const auto name = body.substr(start, i - start);
      if (!is_identifier(name)) {
        throw ParseError(line_no, column_of(line, name), "invalid species name '" + std::string(name) + "'");
      }
      if (lookup_.count(std::string(name))) {
        throw ParseError(line_no, column_of(line, name), "duplicate species '" + std::string(name) + "'");
      }
      lookup_.emplace(std::string(name), species_.size());
      species_.emplace_back(name);
    }
    declared_ = true;
  }

  void add_reaction(std::string_view line, std::string_view body, std::size_t line_no) {
    const auto arrow = body.find("->");
    if (arrow == std::string_view::npos) {
      throw ParseError(line_no, column_of(line, body), "expected 'complex -> complex : rate'");
    }
    const auto colon = body.find(':', arrow + 2);
    if (colon == std::string_view::npos) {
      throw ParseError(line_no, column_of(line, body) + arrow + 2, "expected ':' before the rate");
    }
    const SparseComplex source = parse_complex(line, body.substr(0, arrow), line_no);
    const SparseComplex target = parse_complex(line, body.substr(arrow + 2, colon - arrow - 2), line_no);

    const auto rate_text = textio::trim(body.substr(colon + 1));
    const std::size_t rate_column =
        rate_text.empty() ? column_of(line, body) + colon + 1 : column_of(line, rate_text);
    const auto rate = textio::parse_double(rate_text);
    if (!rate) throw ParseError(line_no, rate_column, "invalid rate '" + std::string(rate_text) + "'");
    if (!(*rate > 0.0) || !std::isfinite(*rate)) {
      throw ValidationError("line " + std::to_string(line_no) + ": rate must be positive and finite");
    }
    if (source == target) {
      throw ValidationError("line " + std::to_string(line_no) + ": reaction source equals target");
    }

    const std::size_t s = intern(source);
    const std::size_t t = intern(target);
    for (const auto& r : reactions_) {
      if (r.source == s && r.target == t && r.rate == *rate) {
        if (warnings_) {
          warnings_->push_back({line_no, "duplicate reaction; kept as an independent parallel reaction"});
        }
        break;
      }
    }
    reactions_.push_back({s, t, *rate});
  }

  ReactionNetwork finish() && {
    std::vector<Complex> complexes;
    for (const auto& sparse : complexes_) {
      Complex c;
      c.coefficients.assign(species_.size(), 0);
      for (const auto& [i, coeff] : sparse) c.coefficients[i] = coeff;
      complexes.push_back(std::move(c));
    }
    return ReactionNetwork(std::move(species_), std::move(complexes), std::move(reactions_));
  }

  bool has_reactions() const { return !reactions_.empty(); }

 private:
  SparseComplex parse_complex(std::string_view line, std::string_view text, std::size_t line_no) {
    const auto trimmed = textio::trim(text);
    if (trimmed.empty()) {
      throw ParseError(line_no, column_of(line, text), "empty complex (write 0 for nothing)");
    }
    if (trimmed == "0") return {};

    SparseComplex out;
    std::size_t start = 0;
    while (true) {
      const auto plus = trimmed.find('+', start);
      const auto raw_term =
          trimmed.substr(start, plus == std::string_view::npos ? std::string_view::npos : plus - start);
      const auto term = textio::trim(raw_term);
      if (term.empty()) {
        const std::size_t column = column_of(line, raw_term.empty() ? trimmed.substr(start) : raw_term);
        throw ParseError(line_no, column, "missing term");
      }
      std::size_t i = 0;
      std::uint32_t coeff = 1;
      if (is_digit(term[0])) {
        std::uint64_t value = 0;
        while (i < term.size() && is_digit(term[i])) {
          value = value * 10 + static_cast<std::uint64_t>(term[i] - '0');
          if (value > 1'000'000) throw ParseError(line_no, column_of(line, term), "coefficient too large");
          ++i;
        }
        if (value == 0) throw ParseError(line_no, column_of(line, term), "coefficient must be >= 1");
        coeff = static_cast<std::uint32_t>(value);
        while (i < term.size() && is_space(term[i])) ++i;
      }
      const auto name = term.substr(i);
      if (!is_identifier(name)) {
        const std::size_t column = name.empty() ? column_of(line, term) + term.size() : column_of(line, name);
        throw ParseError(line_no, column, "invalid species name '" + std::string(name) + "'");
      }
      out[species_for(name, line, line_no)] += coeff;
      if (plus == std::string_view::npos) break;
      start = plus + 1;
    }
    return out;
  }

  std::size_t species_for(std::string_view name, std::string_view line, std::size_t line_no) {
    const auto it = lookup_.find(std::string(name));
    if (it != lookup_.end()) return it->second;
    if (declared_) {
      throw ParseError(line_no, column_of(line, name), "species '" + std::string(name) + "' not declared");
    }
    lookup_.emplace(std::string(name), species_.size());
    species_.emplace_back(name);
    return species_.size() - 1;
  }

  std::size_t intern(const SparseComplex& c) {
    for (std::size_t i = 0; i < complexes_.size(); ++i) {
      if (complexes_[i] == c) return i;
    }
    complexes_.push_back(c);
    return complexes_.size() - 1;
  }

  std::vector<ParseWarning>* warnings_;
  bool declared_ = false;
  std::vector<std::string> species_;
  std::unordered_map<std::string, std::size_t> lookup_;
  std::vector<SparseComplex> complexes_;
  std::vector<Reaction> reactions_;
};

}  // namespace

ReactionNetwork parse_network(std::istream& in, std::vector<ParseWarning>* warnings) {
  NetworkBuilder builder(warnings);
  std::string raw;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line(raw);
    const auto body = textio::trim(textio::strip_comment(line));
    if (body.empty()) continue;
    constexpr std::string_view header = "species:";
    if (body.substr(0, header.size()) == header) {
      if (!first) throw ParseError(line_no, column_of(line, body), "'species:' must precede all reactions");
      builder.declare_species(line, body.substr(header.size()), line_no);
    } else {
      builder.add_reaction(line, body, line_no);
    }
    first = false;
  }
  return std::move(builder).finish();
}

ReactionNetwork parse_network(const std::string& text, std::vector<ParseWarning>* warnings) {
  std::istringstream in(text);
  return parse_network(in, warnings);
}

std::string serialize_network(const ReactionNetwork& network) {
  std::string out = "species:";
  for (const auto& s : network.species()) out += " " + s;
  out += '\n';
  for (const auto& r : network.reactions()) {
    out += network.format_complex(r.source) + " -> " + network.format_complex(r.target) + " : " +
           textio::format_double(r.rate) + '\n';
  }
  return out;
}

}  // namespace relent
