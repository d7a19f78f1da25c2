#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alphascreen/panel.hpp"

namespace alphascreen {

// Period labels: plain integers, a letter prefix followed by digits (t12),
// or dates whose digits are kept in order (2019-12-31 -> 20191231).
std::int64_t parse_period(const std::string& label);

// Wide returns file: header `entity_id,<period>,...`, one row per entity.
ReturnPanel read_returns_csv(const std::string& path);
// Long factor file: header `period,<name>,...`, one row per period.
FactorPanel read_factors_csv(const std::string& path);

void write_returns_csv(const std::string& path, const ReturnPanel& returns);
void write_factors_csv(const std::string& path, const FactorPanel& factors);

// Splits one CSV line; double quotes protect commas.
std::vector<std::string> split_csv_line(const std::string& line);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace alphascreen
