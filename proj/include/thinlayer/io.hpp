#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "thinlayer/gamma.hpp"
#include "thinlayer/geometry.hpp"

namespace thinlayer {

/// RFC 4180 table: CRLF records, quoted fields where needed, reals at 17 significant digits.
/// Every record ends with the config hash column.
class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  CsvTable(std::vector<std::string> columns, std::string config_hash);

  void add_row(std::vector<Cell> cells);
  void write(std::ostream& os) const;
  [[nodiscard]] std::string str() const;

  [[nodiscard]] std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::string hash_;
  std::vector<std::vector<Cell>> rows_;
};

std::string csv_escape(std::string_view field);
std::string format_real(double v);

CsvTable sweep_table(const SweepReport& rep, const std::string& hash);
CsvTable sweep_rates_table(const SweepReport& rep, const std::string& hash);
CsvTable recovery_table(const RecoveryReport& rep, const std::string& hash);

/// Mesh dump with one value per node.
void write_field_file(const std::string& path, const Mesh& mesh, const Eigen::VectorXd& values);

/// Log-log polylines of the gap, L2 error and strip columns against delta.
void write_sweep_svg(std::ostream& os, const SweepReport& rep);

/// Per-triangle heat map of the mean nodal value.
void write_field_svg(std::ostream& os, const Mesh& mesh, const Eigen::VectorXd& values);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace thinlayer
