#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace harness {

/// %.17g: enough digits to round-trip any double.
std::string format_number(double v);

/// Empty cells are written as nothing between the separators.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

std::string to_string(const Cell& c);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  /// Throws std::out_of_range for unknown names.
  std::size_t column(const std::string& name) const;
  void write(std::ostream& out) const;
};

/// Accessors used by tests and the acceptance runner.
std::optional<double> as_number(const Cell& c);
std::string as_text(const Cell& c);

}  // namespace harness
