#include "casimir_mems/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "casimir_mems/error.hpp"

namespace casimir_mems {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> columns)
    : out_(out), columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
  out_ << '\n';
}

void CsvWriter::check_width(std::size_t n) const {
  if (n != columns_.size())
    throw std::logic_error("csv row has " + std::to_string(n) + " cells, schema has " +
                           std::to_string(columns_.size()));
}

int CsvTable::index(std::string_view name) const noexcept {
  const auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

std::vector<double> CsvTable::column(std::string_view name) const {
  const int i = index(name);
  if (i < 0) throw DomainError("csv", "missing column '" + std::string(name) + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(i)]);
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    auto cell = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
      cell.remove_suffix(1);
    cells.push_back(cell);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return cells;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line);
    if (table.columns.empty()) {
      for (auto c : cells) table.columns.emplace_back(c);
      continue;
    }
    if (cells.size() != table.columns.size())
      throw DomainError("csv", "line " + std::to_string(line_no) + ": expected " +
                                   std::to_string(table.columns.size()) + " cells");
    std::vector<double> row;
    for (auto c : cells) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size())
        throw DomainError("csv", "line " + std::to_string(line_no) + ": not a number '" + std::string(c) + "'");
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw InsufficientDataError("csv input has no header");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("fit_input_csv", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

ShiftDataset shift_dataset_from_csv(const CsvTable& table, ShiftKind kind) {
  ShiftDataset ds;
  ds.kind = kind;
  const auto dz = table.column("delta_z_m");
  const auto df = table.column("freq_shift_Hz");
  for (std::size_t i = 0; i < dz.size(); ++i) ds.points.push_back({dz[i], df[i]});
  std::sort(ds.points.begin(), ds.points.end(),
            [](const ShiftPoint& a, const ShiftPoint& b) { return a.delta_z < b.delta_z; });
  if (table.index("applied_V") >= 0 && !table.rows.empty()) {
    const auto v = table.column("applied_V");
    if (std::any_of(v.begin(), v.end(), [&](double x) { return x != v.front(); }))
      throw DomainError("applied_V", "dataset mixes several applied voltages");
    ds.applied_V = v.front();
  }
  return ds;
}

void write_shift_dataset(std::ostream& out, const ShiftDataset& dataset) {
  if (dataset.applied_V) {
    CsvWriter w(out, {"delta_z_m", "freq_shift_Hz", "applied_V"});
    for (const auto& p : dataset.points) w.row(p.delta_z, p.freq_shift, *dataset.applied_V);
  } else {
    CsvWriter w(out, {"delta_z_m", "freq_shift_Hz"});
    for (const auto& p : dataset.points) w.row(p.delta_z, p.freq_shift);
  }
}

std::vector<VoltagePoint> voltage_points_from_csv(const CsvTable& table) {
  const auto v = table.column("voltage_V");
  const auto f = table.column("freq_Hz");
  std::vector<VoltagePoint> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back({v[i], f[i]});
  return out;
}

}  // namespace casimir_mems
