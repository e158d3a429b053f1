#include "geneprofile/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "geneprofile/error.hpp"

namespace geneprofile {

namespace {

const std::regex& label_pattern() {
  static const std::regex re(R"([A-Za-z0-9_.-]+)");
  return re;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    std::string field = line.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    const auto first = field.find_first_not_of(" \t");
    const auto last = field.find_last_not_of(" \t");
    out.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

std::ifstream open_input(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(std::string("cannot open ") + what + " '" + path.string() + "'");
  return in;
}

void check_label(const std::string& label, const std::string& source, std::size_t line) {
  if (!std::regex_match(label, label_pattern())) {
    throw ValidationError(where(source, line) + "invalid label '" + label +
                          "' (allowed: letters, digits, '_', '.', '-')");
  }
}

}  // namespace

std::vector<std::string> read_conditions(const std::filesystem::path& path) {
  auto in = open_input(path, "conditions file");
  const auto source = path.string();
  std::vector<std::string> out;
  std::string line;
  std::size_t n = 0;
  while (next_line(in, line)) {
    ++n;
    const auto fields = split_csv(line);
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != 1) throw ValidationError(where(source, n) + "expected a single column");
    if (n == 1 && fields[0] == "condition") continue;
    check_label(fields[0], source, n);
    out.push_back(fields[0]);
  }
  if (out.empty()) throw ValidationError(source + ": no conditions listed");
  return out;
}

std::vector<ArrayRecord> read_arrays(const std::filesystem::path& path) {
  auto in = open_input(path, "design file");
  const auto source = path.string();
  std::string line;
  if (!next_line(in, line) || line != "array_id,cy3,cy5,replicate_group") {
    throw ValidationError(where(source, 1) + "expected header 'array_id,cy3,cy5,replicate_group'");
  }
  std::vector<ArrayRecord> out;
  std::size_t n = 1;
  while (next_line(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 4) {
      throw ValidationError(where(source, n) + "expected 4 fields, found " + std::to_string(f.size()));
    }
    for (std::size_t i = 0; i < 3; ++i) check_label(f[i], source, n);
    if (!f[3].empty()) check_label(f[3], source, n);
    out.push_back({f[0], f[1], f[2], f[3]});
  }
  return out;
}

ComparisonDesign read_design(const std::filesystem::path& design_csv,
                             const std::filesystem::path& conditions_csv) {
  ComparisonDesign d{read_conditions(conditions_csv), read_arrays(design_csv)};
  try {
    validate_design(d);
  } catch (const ValidationError& e) {
    throw ValidationError(design_csv.string() + ": " + e.what());
  }
  return d;
}

ExpressionMatrix parse_expression(std::istream& in, const std::string& source) {
  std::string line;
  if (!next_line(in, line)) throw DataError(source + ": empty expression file");
  auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "gene_id") {
    throw DataError(where(source, 1) + "expected header 'gene_id,<array ids...>'");
  }
  ExpressionMatrix expr;
  expr.array_ids.assign(header.begin() + 1, header.end());
  const auto n_arrays = expr.array_ids.size();

  std::vector<double> values;
  std::size_t n = 1;
  while (next_line(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != n_arrays + 1) {
      throw DataError(where(source, n) + "expected " + std::to_string(n_arrays + 1) +
                      " fields, found " + std::to_string(f.size()));
    }
    if (f[0].empty()) throw DataError(where(source, n) + "empty gene id");
    expr.gene_ids.push_back(f[0]);
    for (std::size_t c = 1; c < f.size(); ++c) {
      const auto& s = f[c];
      if (s.empty() || s == "NA") {
        values.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0.0;
      const char* begin = s.data() + (s.front() == '+' ? 1 : 0);
      const auto res = std::from_chars(begin, s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw DataError(where(source, n) + "column " + std::to_string(c + 1) + ": bad value '" + s + "'");
      }
      values.push_back(v);
    }
  }
  expr.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Index>(expr.gene_ids.size()), static_cast<Index>(n_arrays));
  return expr;
}

ExpressionMatrix read_expression(const std::filesystem::path& path) {
  auto in = open_input(path, "expression file");
  return parse_expression(in, path.string());
}

void write_conditions(const ComparisonDesign& design, std::ostream& out) {
  out << "condition\n";
  for (const auto& c : design.conditions) out << c << '\n';
}

void write_arrays(const ComparisonDesign& design, std::ostream& out) {
  out << "array_id,cy3,cy5,replicate_group\n";
  for (const auto& a : design.arrays) {
    out << a.array_id << ',' << a.cy3 << ',' << a.cy5 << ',' << a.replicate_group << '\n';
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_expression(const ExpressionMatrix& expr, std::ostream& out) {
  out << "gene_id";
  for (const auto& a : expr.array_ids) out << ',' << a;
  out << '\n';
  for (Index g = 0; g < expr.values.rows(); ++g) {
    out << expr.gene_ids[static_cast<std::size_t>(g)];
    for (Index c = 0; c < expr.values.cols(); ++c) out << ',' << format_number(expr.values(g, c));
    out << '\n';
  }
}

void write_ranked_csv(const RankedTable& table, std::ostream& out) {
  const auto& m = table.metadata;
  out << "rank,gene_id,U";
  for (std::size_t j = 0; j < m.constraints.size(); ++j) {
    if (m.constraints[j].test_bearing()) out << ",U_" << j;
  }
  for (const auto j : m.retained) out << ",gamma_" << j;
  for (const auto j : m.retained) out << ",se_" << j;
  out << ",s2,posterior_s2\n";
  for (const auto& r : table.ranked) {
    const auto& s = r.stats;
    out << r.rank << ',' << s.gene_id << ',' << format_number(s.u_min);
    for (Index i = 0; i < s.u.size(); ++i) out << ',' << format_number(s.u(i));
    for (Index i = 0; i < s.gamma_hat.size(); ++i) out << ',' << format_number(s.gamma_hat(i));
    for (Index i = 0; i < s.se_all.size(); ++i) out << ',' << format_number(s.se_all(i));
    out << ',' << format_number(s.s2) << ',' << format_number(s.posterior_s2) << '\n';
  }
}

void write_excluded_csv(const RankedTable& table, std::ostream& out) {
  const auto& m = table.metadata;
  out << "gene_id,reason";
  for (std::size_t j = 0; j < m.constraints.size(); ++j) {
    if (m.constraints[j].test_bearing()) out << ",U_" << j;
  }
  out << '\n';
  for (const auto& s : table.excluded) {
    out << s.gene_id << ',' << s.exclusion_reason;
    for (Index i = 0; i < s.u.size(); ++i) out << ',' << format_number(s.u(i));
    out << '\n';
  }
}

void write_sensitivity_csv(const SensitivityResult& result, std::ostream& out) {
  out << "gene_id";
  for (const double e : result.epsilons) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", e);
    out << ",rank_eps_" << buf;
  }
  out << '\n';
  for (const auto& row : result.stability) {
    out << row.gene_id;
    for (const auto& r : row.ranks) {
      out << ',';
      if (r) {
        out << *r;
      } else {
        out << "NA";
      }
    }
    out << '\n';
  }
}

std::string moderation_json(const ModerationResult& moderation, const RankMetadata& metadata,
                            const RunSummary& summary) {
  nlohmann::ordered_json j;
  j["profile"] = metadata.profile_name;
  if (moderation.d0_infinite()) {
    j["d0"] = nullptr;
  } else {
    j["d0"] = moderation.d0;
  }
  j["d0_infinite"] = moderation.d0_infinite();
  j["s0_2"] = moderation.s0_2;
  j["n_prior_genes"] = moderation.n_prior_genes;
  j["n_genes"] = summary.n_genes;
  j["n_zero_variance"] = summary.n_zero_variance;
  j["n_included"] = summary.n_included;
  j["alpha"] = summary.alpha;
  j["n_iut_significant"] = summary.n_iut_significant;
  auto& constraints = j["constraints"];
  constraints = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < metadata.constraints.size(); ++c) {
    constraints.push_back({{"coefficient", metadata.coefficient_names[c]},
                           {"constraint", format_constraint(metadata.constraints[c])}});
  }
  return j.dump(2) + "\n";
}

}  // namespace geneprofile
