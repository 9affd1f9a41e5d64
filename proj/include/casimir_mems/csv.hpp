#pragma once

// Fixed-schema CSV: one header line, then rows. Floating-point cells are
// written as %.17e so a re-read reproduces the double exactly.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "casimir_mems/calibration.hpp"

namespace casimir_mems {

std::string format_double(double v);

class CsvWriter {
public:
  CsvWriter(std::ostream& out, std::vector<std::string> columns);

  template <class... Cells>
  void row(const Cells&... cells) {
    static_assert(sizeof...(Cells) > 0);
    check_width(sizeof...(Cells));
    bool first = true;
    ((put(cells, first)), ...);
    out_ << '\n';
    ++rows_;
  }

  std::size_t rows() const noexcept { return rows_; }
  const std::vector<std::string>& columns() const noexcept { return columns_; }

private:
  template <class T>
  void put(const T& cell, bool& first) {
    if (!first) out_ << ',';
    first = false;
    if constexpr (std::is_same_v<T, bool>)
      out_ << (cell ? '1' : '0');
    else if constexpr (std::is_floating_point_v<T>)
      out_ << format_double(static_cast<double>(cell));
    else if constexpr (std::is_integral_v<T>)
      out_ << cell;
    else
      out_ << std::string_view(cell);
  }
  void check_width(std::size_t n) const;

  std::ostream& out_;
  std::vector<std::string> columns_;
  std::size_t rows_ = 0;
};

/// Numeric CSV table addressed by column name.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Column index, or -1 when absent.
  int index(std::string_view name) const noexcept;
  std::vector<double> column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Columns delta_z_m, freq_shift_Hz and, for electrostatic data, applied_V.
ShiftDataset shift_dataset_from_csv(const CsvTable& table, ShiftKind kind);
void write_shift_dataset(std::ostream& out, const ShiftDataset& dataset);

/// Columns voltage_V, freq_Hz.
std::vector<VoltagePoint> voltage_points_from_csv(const CsvTable& table);

}  // namespace casimir_mems
