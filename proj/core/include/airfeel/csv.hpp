// Minimal CSV table with fixed-precision number formatting.
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace airfeel {

/// 12 significant digits; non-finite values print as inf, -inf or nan.
std::string format_number(double v);
std::string format_number(std::int64_t v);
inline std::string format_number(int v) { return format_number(static_cast<std::int64_t>(v)); }

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Appends a row; throws std::invalid_argument on a column count mismatch.
  void add_row(std::vector<std::string> row);

  /// Index of a header column; throws std::out_of_range when absent.
  std::size_t column(const std::string& name) const;
  double value(std::size_t row, const std::string& name) const;

  void write(std::ostream& out) const;
  std::string str() const;
};

}  // namespace airfeel
