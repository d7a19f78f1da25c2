#include "alphascreen/csv_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace alphascreen {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::vector<std::string>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) throw ParseError(path + " is empty", 0, 0);
  return rows;
}

double parse_cell(const std::string& raw, std::size_t row, std::size_t col,
                  const std::string& path) {
  const std::string cell = trim(raw);
  if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") {
    std::ostringstream msg;
    msg << path << ": missing value at row " << row << ", column " << col;
    throw ParseError(msg.str(), static_cast<std::size_t>(row), static_cast<std::size_t>(col));
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != cell.size() || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << path << ": cannot parse '" << cell << "' at row " << row
        << ", column " << col;
    throw ParseError(msg.str(), static_cast<std::size_t>(row), static_cast<std::size_t>(col));
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::int64_t parse_period(const std::string& raw) {
  const std::string label = trim(raw);
  std::string digits;
  std::size_t i = 0;
  while (i < label.size() && std::isalpha(static_cast<unsigned char>(label[i]))) ++i;
  bool ok = i < label.size();
  for (; i < label.size(); ++i) {
    const char c = label[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits += c;
    } else if (!(c == '-' || c == '/') || digits.empty()) {
      ok = false;
    }
  }
  if (!ok || digits.empty() || digits.size() > 18) {
    throw ParseError("unrecognized period label '" + label + "'", 0, 0);
  }
  return std::stoll(digits);
}

ReturnPanel read_returns_csv(const std::string& path) {
  const auto rows = read_rows(path);
  const auto& header = rows.front();
  if (header.size() < 2) throw ParseError(path + ": header has no periods", 1, 0);
  std::vector<std::int64_t> periods;
  for (std::size_t j = 1; j < header.size(); ++j) {
    try {
      periods.push_back(parse_period(header[j]));
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), 1, static_cast<std::size_t>(j + 1));
    }
  }
  const auto p = static_cast<Eigen::Index>(rows.size() - 1);
  const auto n = static_cast<Eigen::Index>(periods.size());
  Matrix values(p, n);
  std::vector<std::string> ids;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != header.size()) {
      std::ostringstream msg;
      msg << path << ": row " << i + 1 << " has " << row.size()
          << " cells, expected " << header.size();
      throw ParseError(msg.str(), static_cast<std::size_t>(i + 1),
                       static_cast<std::size_t>(std::min(row.size(), header.size()) + 1));
    }
    ids.push_back(trim(row[0]));
    for (std::size_t j = 1; j < row.size(); ++j) {
      values(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) =
          parse_cell(row[j], i + 1, j + 1, path);
    }
  }
  return ReturnPanel(std::move(values), std::move(ids), std::move(periods));
}

FactorPanel read_factors_csv(const std::string& path) {
  const auto rows = read_rows(path);
  const auto& header = rows.front();
  std::vector<std::string> names;
  for (std::size_t j = 1; j < header.size(); ++j) names.push_back(trim(header[j]));
  const auto n = static_cast<Eigen::Index>(rows.size() - 1);
  const auto r = static_cast<Eigen::Index>(names.size());
  Matrix values(n, r);
  std::vector<std::int64_t> periods;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != header.size()) {
      std::ostringstream msg;
      msg << path << ": row " << i + 1 << " has " << row.size()
          << " cells, expected " << header.size();
      throw ParseError(msg.str(), static_cast<std::size_t>(i + 1),
                       static_cast<std::size_t>(std::min(row.size(), header.size()) + 1));
    }
    try {
      periods.push_back(parse_period(row[0]));
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), static_cast<std::size_t>(i + 1), 1);
    }
    for (std::size_t j = 1; j < row.size(); ++j) {
      values(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) =
          parse_cell(row[j], i + 1, j + 1, path);
    }
  }
  return FactorPanel(std::move(values), std::move(names), std::move(periods));
}

void write_returns_csv(const std::string& path, const ReturnPanel& returns) {
  std::string out = "entity_id";
  for (const auto t : returns.time_index()) out += ",t" + std::to_string(t);
  out += "\n";
  const Matrix& x = returns.values();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out += returns.entity_ids()[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < x.cols(); ++t) out += "," + format_double(x(i, t));
    out += "\n";
  }
  write_text_file(path, out);
}

void write_factors_csv(const std::string& path, const FactorPanel& factors) {
  std::string out = "period";
  for (const auto& name : factors.names()) out += "," + name;
  out += "\n";
  const Matrix& f = factors.values();
  for (Eigen::Index t = 0; t < f.rows(); ++t) {
    out += "t" + std::to_string(factors.time_index()[static_cast<std::size_t>(t)]);
    for (Eigen::Index k = 0; k < f.cols(); ++k) out += "," + format_double(f(t, k));
    out += "\n";
  }
  write_text_file(path, out);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("failed writing " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace alphascreen
