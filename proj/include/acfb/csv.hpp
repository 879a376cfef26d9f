#pragma once

#include <string>
#include <vector>

#include "acfb/estimates.hpp"

namespace acfb {

// Byte-deterministic CSV: fixed column order, %.17g numbers, '\n' endings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string format_double(double v);  // %.17g

void save_csv(const CsvTable& t, const std::string& path);
CsvTable load_csv(const std::string& path);

// Column contract (docs/formats.md): name,family,h,lambda,key,r,lhs,rhs,
// ratio,pass,note. A fitted exponent adds one row with key "fit" carrying
// slope in lhs and residual in rhs.
CsvTable report_to_csv(const EstimateReport& rep);

// Concatenates tables with a shared header and sorts rows by
// (name, family, h, key, r); duplicate keys with diverging values get a
// "conflict" note instead of being merged.
CsvTable merge_tables(const std::vector<CsvTable>& tables);

std::string render_text_table(const CsvTable& t);

}  // namespace acfb
