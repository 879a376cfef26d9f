#include "acfb/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace acfb {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void save_csv(const CsvTable& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].find_first_of(",\"\n") != std::string::npos)
        throw std::runtime_error("csv cell needs quoting, refusing: " + row[i]);
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  };
  write_row(t.header);
  for (const auto& row : t.rows) write_row(row);
}

CsvTable load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.eof()) break;
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.push_back("");
    if (first) {
      t.header = row;
      first = false;
    } else {
      t.rows.push_back(row);
    }
  }
  return t;
}

static const std::vector<std::string> kReportHeader = {
    "name", "family", "h", "lambda", "key", "r", "lhs", "rhs", "ratio", "pass", "note"};

CsvTable report_to_csv(const EstimateReport& rep) {
  CsvTable t;
  t.header = kReportHeader;
  for (const EstimateRow& row : rep.rows) {
    t.rows.push_back({rep.name, rep.family, format_double(rep.h), format_double(rep.lambda),
                      row.key, format_double(row.r), format_double(row.lhs),
                      format_double(row.rhs), format_double(row.ratio),
                      row.pass ? "1" : "0", row.note});
  }
  if (rep.has_fit) {
    t.rows.push_back({rep.name, rep.family, format_double(rep.h), format_double(rep.lambda),
                      "fit", format_double(0.0), format_double(rep.fitted_exponent),
                      format_double(rep.fit_residual), format_double(0.0),
                      rep.pass ? "1" : "0", ""});
  }
  return t;
}

CsvTable merge_tables(const std::vector<CsvTable>& tables) {
  CsvTable out;
  out.header = kReportHeader;
  for (const CsvTable& t : tables) {
    if (!t.header.empty() && t.header != out.header)
      throw std::runtime_error("merge_tables: header mismatch");
    for (const auto& row : t.rows) out.rows.push_back(row);
  }
  auto sort_key = [](const std::vector<std::string>& row) {
    // name, family, h, key, r; "fit" rows sink below measurements
    return std::make_tuple(row[0], row[1], row[2], row[4] == "fit" ? 1 : 0, row[4], row[5]);
  };
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [&](const auto& a, const auto& b) { return sort_key(a) < sort_key(b); });
  // flag duplicates of the same measurement slot that disagree
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    auto& a = out.rows[i - 1];
    auto& b = out.rows[i];
    if (a[0] == b[0] && a[1] == b[1] && a[2] == b[2] && a[4] == b[4] && a[5] == b[5] &&
        (a[6] != b[6] || a[7] != b[7])) {
      if (b[10].find("conflict") == std::string::npos)
        b[10] = b[10].empty() ? "conflict" : b[10] + ";conflict";
    }
  }
  return out;
}

std::string render_text_table(const CsvTable& t) {
  std::vector<std::size_t> width(t.header.size(), 0);
  auto widen = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i)
      width[i] = std::max(width[i], row[i].size());
  };
  widen(t.header);
  for (const auto& row : t.rows) widen(row);
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < width.size(); ++i) {
      std::string cell = i < row.size() ? row[i] : "";
      os << cell << std::string(width[i] - cell.size() + 2, ' ');
    }
    os << '\n';
  };
  emit(t.header);
  for (const auto& row : t.rows) emit(row);
  return os.str();
}

}  // namespace acfb
