#pragma once

#include <Eigen/Dense>

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "ksd/errors.hpp"
#include "ksd/finite_domain.hpp"
#include "ksd/minimax.hpp"

namespace ksd {

// Fixed-width round-trip formatting; keeps output files byte-identical
// across runs with the same inputs.
[[nodiscard]] inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_double_token(const std::string& token, const std::string& where) {
  const std::string t = trim(token);
  if (t.empty()) throw input_error(where + ": empty numeric field");
  const char* begin = t.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end != begin + t.size())
    throw input_error(where + ": not a decimal literal: '" + t + "'");
  if (!std::isfinite(value)) throw input_error(where + ": value must be finite: '" + t + "'");
  return value;
}

inline long long parse_int_token(const std::string& token, const std::string& where) {
  const std::string t = trim(token);
  if (t.empty()) throw input_error(where + ": empty integer field");
  const char* begin = t.c_str();
  char* end = nullptr;
  const long long value = std::strtoll(begin, &end, 10);
  if (end != begin + t.size()) throw input_error(where + ": not an integer: '" + t + "'");
  return value;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace detail

// Comma-separated samples, one observation per row, d columns. A single
// optional header row `x1,...,xd` fixes d; otherwise the first data row
// does. Blank lines are skipped. Returns an n x d matrix, n >= 1.
[[nodiscard]] inline Eigen::MatrixXd read_samples_csv(std::istream& in,
                                                      const std::string& name = "samples") {
  std::vector<std::vector<double>> rows;
  Eigen::Index dim = 0;
  std::string line;
  long line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    const std::string where = name + " line " + std::to_string(line_no);
    if (rows.empty() && !saw_header) {
      // header detection: first field of the first nonblank line is not numeric
      const std::string first = detail::trim(fields[0]);
      char* end = nullptr;
      std::strtod(first.c_str(), &end);
      if (end != first.c_str() + first.size()) {
        for (std::size_t j = 0; j < fields.size(); ++j) {
          if (detail::trim(fields[j]) != "x" + std::to_string(j + 1))
            throw input_error(where + ": header must be x1,...,xd");
        }
        dim = static_cast<Eigen::Index>(fields.size());
        saw_header = true;
        continue;
      }
    }
    if (dim == 0) dim = static_cast<Eigen::Index>(fields.size());
    if (static_cast<Eigen::Index>(fields.size()) != dim)
      throw input_error(where + ": expected " + std::to_string(dim) + " columns, got " +
                        std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j)
      row[j] = detail::parse_double_token(fields[j], where);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw input_error(name + ": no data rows");
  Eigen::MatrixXd data(static_cast<Eigen::Index>(rows.size()), dim);
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    for (Eigen::Index j = 0; j < dim; ++j) data(i, j) = rows[static_cast<std::size_t>(i)][j];
  return data;
}

[[nodiscard]] inline Eigen::MatrixXd read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open samples file: " + path);
  return read_samples_csv(in, path);
}

// Finite model plus raw perturbation direction, as read from a model file.
struct FiniteModelFile {
  FiniteDomainModel model;
  Eigen::VectorXd phi;  // raw direction, centered downstream
};

// Key-value model document. Keys: K, D (first), then p0 (K reals), phi
// (K reals), psi (K*D reals, row-major), labels (K tokens, optional).
// `#` starts a comment. Unknown and duplicate keys are rejected; model
// invariants are checked after assembly.
[[nodiscard]] inline FiniteModelFile read_finite_model(std::istream& in,
                                                       const std::string& name = "model") {
  struct Token {
    std::string text;
    long line;
  };
  std::vector<Token> tokens;
  {
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::size_t pos = 0;
      while (pos < line.size()) {
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
        std::size_t end = pos;
        while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
        if (end > pos) tokens.push_back(Token{line.substr(pos, end - pos), line_no});
        pos = end;
      }
    }
  }

  std::size_t cursor = 0;
  auto next = [&](const std::string& expect) -> Token {
    if (cursor >= tokens.size())
      throw input_error(name + ": unexpected end of file, expected " + expect);
    return tokens[cursor++];
  };

  long long k = -1;
  long long d = -1;
  bool have_p0 = false;
  bool have_phi = false;
  bool have_psi = false;
  bool have_labels = false;
  FiniteModelFile file;

  auto require_sizes = [&](const Token& key) {
    if (k < 0 || d < 0)
      throw input_error(name + " line " + std::to_string(key.line) + ": K and D must come before '" +
                        key.text + "'");
  };

  while (cursor < tokens.size()) {
    const Token key = tokens[cursor++];
    const std::string where = name + " line " + std::to_string(key.line);
    if (key.text == "K") {
      if (k >= 0) throw input_error(where + ": duplicate key K");
      k = detail::parse_int_token(next("a value for K").text, where);
      if (k < 1) throw input_error(where + ": K must be >= 1");
    } else if (key.text == "D") {
      if (d >= 0) throw input_error(where + ": duplicate key D");
      d = detail::parse_int_token(next("a value for D").text, where);
      if (d < 1) throw input_error(where + ": D must be >= 1");
    } else if (key.text == "p0" || key.text == "phi") {
      require_sizes(key);
      const bool is_p0 = key.text == "p0";
      bool& have = is_p0 ? have_p0 : have_phi;
      if (have) throw input_error(where + ": duplicate key " + key.text);
      have = true;
      Eigen::VectorXd v(k);
      for (long long i = 0; i < k; ++i) {
        const Token t = next(std::to_string(k) + " values for " + key.text);
        v[i] = detail::parse_double_token(t.text, name + " line " + std::to_string(t.line));
      }
      (is_p0 ? file.model.p0 : file.phi) = v;
    } else if (key.text == "psi") {
      require_sizes(key);
      if (have_psi) throw input_error(where + ": duplicate key psi");
      have_psi = true;
      file.model.psi.resize(k, d);
      for (long long i = 0; i < k; ++i) {
        for (long long j = 0; j < d; ++j) {
          const Token t = next(std::to_string(k * d) + " values for psi");
          file.model.psi(i, j) =
              detail::parse_double_token(t.text, name + " line " + std::to_string(t.line));
        }
      }
    } else if (key.text == "labels") {
      require_sizes(key);
      if (have_labels) throw input_error(where + ": duplicate key labels");
      have_labels = true;
      for (long long i = 0; i < k; ++i)
        file.model.labels.push_back(next(std::to_string(k) + " labels").text);
    } else {
      throw input_error(where + ": unknown key '" + key.text + "'");
    }
  }

  if (k < 0) throw input_error(name + ": missing key K");
  if (d < 0) throw input_error(name + ": missing key D");
  if (!have_p0) throw input_error(name + ": missing key p0");
  if (!have_phi) throw input_error(name + ": missing key phi");
  if (!have_psi) throw input_error(name + ": missing key psi");
  validate(file.model);
  return file;
}

[[nodiscard]] inline FiniteModelFile read_finite_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open model file: " + path);
  return read_finite_model(in, path);
}

inline void write_risk_curve_csv(std::ostream& out, const RiskCurve& curve) {
  validate(curve);
  out << "n,mean_abs_error,std_error,reps,method\n";
  for (const RiskPoint& row : curve.rows) {
    out << row.n << ',' << format_double(row.mean_abs_error) << ',' << format_double(row.std_error)
        << ',' << row.reps << ',' << method_name(row.method) << '\n';
  }
  if (!out) throw io_error("failed writing risk curve");
}

inline void write_risk_curve_csv(const std::string& path, const RiskCurve& curve) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open output file: " + path);
  write_risk_curve_csv(out, curve);
}

inline void write_lower_bound_csv(std::ostream& out, const LowerBoundTable& table) {
  out << "n,feasible,epsilon,ksd,n_kl,le_cam\n";
  for (const LowerBoundRow& row : table.rows) {
    out << row.n << ',' << (row.feasible ? 1 : 0) << ',' << format_double(row.epsilon) << ','
        << format_double(row.ksd) << ',' << format_double(row.n_kl) << ','
        << format_double(row.le_cam) << '\n';
  }
  if (!out) throw io_error("failed writing lower bound table");
}

inline void write_lower_bound_csv(const std::string& path, const LowerBoundTable& table) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open output file: " + path);
  write_lower_bound_csv(out, table);
}

}  // namespace ksd
