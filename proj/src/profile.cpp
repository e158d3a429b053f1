#include "geneprofile/profile.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "geneprofile/error.hpp"

namespace geneprofile {

namespace {

const std::regex& decimal_pattern() {
  static const std::regex re(R"([+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?)");
  return re;
}

const std::regex& label_pattern() {
  static const std::regex re(R"([A-Za-z0-9_.-]+)");
  return re;
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty() || !std::regex_match(s.begin(), s.end(), decimal_pattern())) return false;
  // from_chars rejects a leading '+'
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, std::size_t column,
                          const std::string& message) {
  throw ValidationError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                        ": " + message);
}

CoefficientConstraint parse_constraint(std::string_view text, bool& ok) {
  ok = true;
  if (text == "free") return CoefficientConstraint::free();
  if (text == "pos") return CoefficientConstraint::positive_above(0.0);
  double v = 0.0;
  if (text.rfind("pos:", 0) == 0 && parse_double(text.substr(4), v)) {
    return CoefficientConstraint::positive_above(v);
  }
  if (text.rfind("equiv:", 0) == 0 && parse_double(text.substr(6), v)) {
    return CoefficientConstraint::equivalent_zero(v);
  }
  ok = false;
  return {};
}

}  // namespace

Decimal Decimal::parse(std::string_view text) {
  Decimal d;
  if (!parse_double(text, d.value)) {
    throw ValidationError("not a decimal number: '" + std::string(text) + "'");
  }
  d.text = std::string(text);
  return d;
}

Decimal Decimal::from_double(double value) { return {shortest(value), value}; }

MatrixXd ProfileSpec::basis_matrix() const {
  const auto rows = static_cast<Index>(conditions.size());
  MatrixXd b(rows, static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (static_cast<Index>(columns[j].size()) != rows) {
      throw ValidationError("profile '" + name + "': coefficient " + std::to_string(j) + " has " +
                            std::to_string(columns[j].size()) + " entries for " +
                            std::to_string(rows) + " conditions");
    }
    for (std::size_t i = 0; i < columns[j].size(); ++i) {
      b(static_cast<Index>(i), static_cast<Index>(j)) = columns[j][i].value;
    }
  }
  return b;
}

Index ProfileSpec::coefficient_index(std::string_view coef) const {
  const auto it = std::find(coefficient_names.begin(), coefficient_names.end(), coef);
  return it == coefficient_names.end() ? -1 : static_cast<Index>(it - coefficient_names.begin());
}

ValidatedProfile ValidatedProfile::with_equivalence_margin(double epsilon) const {
  return validate_profile(with_epsilon(spec_, epsilon));
}

ValidatedProfile validate_profile(ProfileSpec spec) {
  const std::string who = "profile '" + spec.name + "'";
  if (spec.conditions.empty()) throw ValidationError(who + " has no conditions");
  std::set<std::string> seen;
  for (const auto& c : spec.conditions) {
    if (!std::regex_match(c, label_pattern())) {
      throw ValidationError(who + ": invalid condition label '" + c + "'");
    }
    if (!seen.insert(c).second) throw ValidationError(who + ": duplicate condition '" + c + "'");
  }
  if (spec.columns.empty()) throw ValidationError(who + " has no coefficients");
  if (spec.constraints.size() != spec.columns.size()) {
    throw ValidationError(who + ": " + std::to_string(spec.constraints.size()) +
                          " constraints for " + std::to_string(spec.columns.size()) +
                          " coefficients");
  }
  if (spec.coefficient_names.size() != spec.columns.size()) {
    throw ValidationError(who + ": " + std::to_string(spec.coefficient_names.size()) +
                          " coefficient names for " + std::to_string(spec.columns.size()) +
                          " coefficients");
  }
  seen.clear();
  for (const auto& n : spec.coefficient_names) {
    if (!std::regex_match(n, label_pattern())) {
      throw ValidationError(who + ": invalid coefficient name '" + n + "'");
    }
    if (!seen.insert(n).second) throw ValidationError(who + ": duplicate coefficient '" + n + "'");
  }

  ValidatedProfile out;
  out.basis_ = spec.basis_matrix();
  for (std::size_t j = 0; j < spec.constraints.size(); ++j) {
    const auto& c = spec.constraints[j];
    if (c.kind == ConstraintKind::EquivalentZero && !(c.margin > 0.0)) {
      throw ValidationError(who + ": equivalence margin for '" + spec.coefficient_names[j] +
                            "' must be > 0");
    }
    if (c.kind == ConstraintKind::PositiveAbove && !(c.margin >= 0.0)) {
      throw ValidationError(who + ": positivity threshold for '" + spec.coefficient_names[j] +
                            "' must be >= 0");
    }
    if (c.test_bearing()) out.test_bearing_.push_back(static_cast<Index>(j));
  }
  if (out.test_bearing_.empty()) {
    throw ValidationError(who + ": every coefficient is unconstrained, nothing to rank on");
  }

  const Eigen::JacobiSVD<MatrixXd> svd(out.basis_);
  out.singular_values_ = svd.singularValues();
  if (out.basis_.cols() > out.basis_.rows() || numerical_rank(out.basis_) < out.basis_.cols()) {
    throw ValidationError(who + ": basis columns are linearly dependent");
  }
  out.spec_ = std::move(spec);
  return out;
}

ProfileSpec with_epsilon(ProfileSpec spec, double epsilon) {
  for (auto& c : spec.constraints) {
    if (c.kind == ConstraintKind::EquivalentZero) c.margin = epsilon;
  }
  return spec;
}

ProfileSpec with_delta(ProfileSpec spec, std::string_view coefficient, double delta) {
  Index j = spec.coefficient_index(coefficient);
  if (j < 0) {
    int idx = -1;
    const auto res = std::from_chars(coefficient.data(), coefficient.data() + coefficient.size(), idx);
    if (res.ec == std::errc() && res.ptr == coefficient.data() + coefficient.size()) j = idx;
  }
  if (j < 0 || j >= static_cast<Index>(spec.constraints.size())) {
    throw ValidationError("profile '" + spec.name + "' has no coefficient '" +
                          std::string(coefficient) + "'");
  }
  auto& c = spec.constraints[static_cast<std::size_t>(j)];
  if (c.kind != ConstraintKind::PositiveAbove) {
    throw ValidationError("coefficient '" + std::string(coefficient) +
                          "' is not a positivity constraint; cannot set a threshold");
  }
  c.margin = delta;
  return spec;
}

std::string format_constraint(const CoefficientConstraint& c) {
  switch (c.kind) {
    case ConstraintKind::Unconstrained:
      return "free";
    case ConstraintKind::PositiveAbove:
      return c.margin == 0.0 ? "pos" : "pos:" + shortest(c.margin);
    case ConstraintKind::EquivalentZero:
      return "equiv:" + shortest(c.margin);
  }
  return "free";
}

ProfileSpec parse_profile(std::string_view text, const std::string& source) {
  ProfileSpec spec;
  bool have_name = false, have_conditions = false;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != line.npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    const auto& key = tokens[0];

    if (key.text == "name") {
      if (have_name) fail_at(source, line_no, key.column, "duplicate 'name' line");
      if (tokens.size() < 2) fail_at(source, line_no, key.column, "missing profile name");
      const auto first = tokens[1].column - 1;
      const auto& last = tokens.back();
      spec.name = std::string(line.substr(first, last.column - 1 + last.text.size() - first));
      have_name = true;
    } else if (key.text == "conditions") {
      if (!have_name) fail_at(source, line_no, key.column, "expected 'name' line first");
      if (have_conditions) fail_at(source, line_no, key.column, "duplicate 'conditions' line");
      if (tokens.size() != 2) {
        fail_at(source, line_no, key.column, "expected 'conditions <comma-separated labels>'");
      }
      spec.conditions = split(tokens[1].text, ',');
      for (const auto& c : spec.conditions) {
        if (!std::regex_match(c, label_pattern())) {
          fail_at(source, line_no, tokens[1].column, "invalid condition label '" + c + "'");
        }
      }
      have_conditions = true;
    } else if (key.text == "coef") {
      if (!have_conditions) fail_at(source, line_no, key.column, "expected 'conditions' line first");
      if (tokens.size() != 4) {
        fail_at(source, line_no, key.column,
                "expected 'coef <name> <comma-separated decimals> <constraint>'");
      }
      std::vector<Decimal> column;
      std::size_t offset = 0;
      for (const auto& field : split(tokens[2].text, ',')) {
        try {
          column.push_back(Decimal::parse(field));
        } catch (const ValidationError& e) {
          fail_at(source, line_no, tokens[2].column + offset, e.what());
        }
        offset += field.size() + 1;
      }
      if (column.size() != spec.conditions.size()) {
        fail_at(source, line_no, tokens[2].column,
                "basis column has " + std::to_string(column.size()) + " entries, expected " +
                    std::to_string(spec.conditions.size()));
      }
      bool ok = false;
      const auto constraint = parse_constraint(tokens[3].text, ok);
      if (!ok) {
        fail_at(source, line_no, tokens[3].column,
                "bad constraint '" + std::string(tokens[3].text) +
                    "' (expected free, pos, pos:<delta> or equiv:<epsilon>)");
      }
      spec.coefficient_names.emplace_back(tokens[1].text);
      spec.columns.push_back(std::move(column));
      spec.constraints.push_back(constraint);
    } else {
      fail_at(source, line_no, key.column, "unknown directive '" + std::string(key.text) + "'");
    }
  }
  if (!have_name) fail_at(source, line_no + 1, 1, "missing 'name' line");
  if (!have_conditions) fail_at(source, line_no + 1, 1, "missing 'conditions' line");
  if (spec.columns.empty()) fail_at(source, line_no + 1, 1, "no 'coef' lines");
  return spec;
}

std::string format_profile(const ProfileSpec& spec) {
  std::ostringstream out;
  out << "name " << spec.name << '\n';
  out << "conditions ";
  for (std::size_t i = 0; i < spec.conditions.size(); ++i) {
    out << (i ? "," : "") << spec.conditions[i];
  }
  out << '\n';
  for (std::size_t j = 0; j < spec.columns.size(); ++j) {
    out << "coef " << spec.coefficient_names[j] << ' ';
    for (std::size_t i = 0; i < spec.columns[j].size(); ++i) {
      out << (i ? "," : "") << spec.columns[j][i].text;
    }
    out << ' ' << format_constraint(spec.constraints[j]) << '\n';
  }
  return out.str();
}

ProfileSpec profile_from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open profile file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_profile(buf.str(), path.string());
}

void profile_to_file(const ProfileSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write profile file '" + path.string() + "'");
  out << format_profile(spec);
}

}  // namespace geneprofile
