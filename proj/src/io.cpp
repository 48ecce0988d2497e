#include "thinlayer/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "thinlayer/errors.hpp"

namespace thinlayer {

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

CsvTable::CsvTable(std::vector<std::string> columns, std::string config_hash)
    : columns_(std::move(columns)), hash_(std::move(config_hash)) {}

void CsvTable::add_row(std::vector<Cell> cells) {
  if (cells.size() != columns_.size()) {
    throw std::invalid_argument(fmt::format("csv row has {} cells, header has {}", cells.size(), columns_.size()));
  }
  rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& os) const {
  for (const auto& c : columns_) os << csv_escape(c) << ',';
  os << "config_hash\r\n";
  for (const auto& row : rows_) {
    for (const Cell& cell : row) {
      if (const auto* d = std::get_if<double>(&cell)) {
        os << format_real(*d);
      } else if (const auto* i = std::get_if<long long>(&cell)) {
        os << *i;
      } else {
        os << csv_escape(std::get<std::string>(cell));
      }
      os << ',';
    }
    os << csv_escape(hash_) << "\r\n";
  }
}

std::string CsvTable::str() const {
  std::ostringstream ss;
  write(ss);
  return ss.str();
}

namespace {

const char* solver_name(SolverKind k) { return k == SolverKind::Dense ? "dense" : "cg"; }

}  // namespace

CsvTable sweep_table(const SweepReport& rep, const std::string& hash) {
  CsvTable t({"delta", "layers", "G_delta", "G", "energy_gap", "l2_error", "strip_norm", "liminf_gap",
              "estimate_margin", "solver", "iterations", "residual", "unknowns"},
             hash);
  for (const SweepRow& r : rep.rows) {
    t.add_row({r.delta, static_cast<long long>(r.nl), r.energy_delta, r.energy_limit, r.gap, r.l2_error,
               r.strip, r.liminf_gap, r.estimate_margin, std::string(solver_name(r.stats.kind)),
               static_cast<long long>(r.stats.iterations), r.stats.residual,
               static_cast<long long>(r.stats.unknowns)});
  }
  return t;
}

CsvTable sweep_rates_table(const SweepReport& rep, const std::string& hash) {
  CsvTable t({"column", "slope", "intercept", "points"}, hash);
  auto add = [&](const char* name, const std::optional<LogLogFit>& f) {
    if (f) {
      t.add_row({std::string(name), f->slope, f->intercept, static_cast<long long>(f->points)});
    } else {
      t.add_row({std::string(name), std::string("none"), std::string("none"), 0LL});
    }
  };
  add("energy_gap", rep.gap_rate);
  add("l2_error", rep.l2_rate);
  add("strip_norm", rep.strip_rate);
  return t;
}

CsvTable recovery_table(const RecoveryReport& rep, const std::string& hash) {
  CsvTable t({"delta", "layers", "G_delta_recovery", "G_theta", "gap", "relative_gap", "boundary_max",
              "G_delta_minimizer"},
             hash);
  for (const RecoveryRow& r : rep.rows) {
    const double rel = r.energy_theta != 0.0 ? r.gap / std::abs(r.energy_theta) : r.gap;
    t.add_row({r.delta, static_cast<long long>(r.nl), r.energy_recovery, r.energy_theta, r.gap, rel,
               r.boundary_max, r.energy_minimizer});
  }
  return t;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path));
  out << content;
  if (!out) throw Error(fmt::format("write to '{}' failed", path));
}

void write_field_file(const std::string& path, const Mesh& mesh, const Eigen::VectorXd& values) {
  std::ostringstream ss;
  write_mesh(ss, mesh, &values);
  write_text_file(path, ss.str());
}

namespace {

struct Box {
  double left = 70, right = 590, top = 20, bottom = 380;
};

// Five-stop blue-to-yellow ramp.
std::string ramp(double t) {
  static const std::array<std::array<double, 3>, 5> stops{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140},
                                                            {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int k = std::min(3, static_cast<int>(t));
  const double f = t - k;
  std::array<int, 3> c{};
  for (int i = 0; i < 3; ++i) c[i] = static_cast<int>(std::lround((1 - f) * stops[k][i] + f * stops[k + 1][i]));
  return fmt::format("#{:02x}{:02x}{:02x}", c[0], c[1], c[2]);
}

}  // namespace

void write_sweep_svg(std::ostream& os, const SweepReport& rep) {
  const Box box;
  struct Series {
    const char* name;
    const char* color;
    std::vector<double> y;
  };
  std::vector<Series> series{{"energy gap", "#1f77b4", {}}, {"L2 error", "#d62728", {}}, {"strip norm", "#2ca02c", {}}};
  std::vector<double> xs;
  for (const SweepRow& r : rep.rows) {
    xs.push_back(r.delta);
    series[0].y.push_back(r.gap);
    series[1].y.push_back(r.l2_error);
    series[2].y.push_back(r.strip);
  }
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (double x : xs) {
    xlo = std::min(xlo, std::log10(x));
    xhi = std::max(xhi, std::log10(x));
  }
  for (const auto& s : series) {
    for (double y : s.y) {
      if (y > 0.0) {
        ylo = std::min(ylo, std::log10(y));
        yhi = std::max(yhi, std::log10(y));
      }
    }
  }
  if (!std::isfinite(xlo)) xlo = -1, xhi = 0;
  if (!std::isfinite(ylo)) ylo = -1, yhi = 0;
  xlo = std::floor(xlo), xhi = std::max(std::ceil(xhi), xlo + 1);
  ylo = std::floor(ylo), yhi = std::max(std::ceil(yhi), ylo + 1);
  auto px = [&](double lx) { return box.left + (lx - xlo) / (xhi - xlo) * (box.right - box.left); };
  auto py = [&](double ly) { return box.bottom - (ly - ylo) / (yhi - ylo) * (box.bottom - box.top); };

  fmt::print(os, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"420\" font-family=\"sans-serif\" font-size=\"12\">\n");
  fmt::print(os, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", box.left,
             box.top, box.right - box.left, box.bottom - box.top);
  for (double d = xlo; d <= xhi + 1e-9; d += 1.0) {
    fmt::print(os, "<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">1e{}</text>\n", px(d), box.bottom + 16, d);
  }
  for (double d = ylo; d <= yhi + 1e-9; d += 1.0) {
    fmt::print(os, "<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">1e{}</text>\n", box.left - 6, py(d) + 4, d);
  }
  fmt::print(os, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">delta</text>\n", (box.left + box.right) / 2,
             box.bottom + 34);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (s.y[i] > 0.0) pts += fmt::format("{:.2f},{:.2f} ", px(std::log10(xs[i])), py(std::log10(s.y[i])));
    }
    if (!pts.empty()) {
      fmt::print(os, "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", s.color, pts);
    }
    fmt::print(os, "<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", box.right + 10, box.top + 16 * (k + 1), s.color,
               s.name);
  }
  os << "</svg>\n";
}

void write_field_svg(std::ostream& os, const Mesh& mesh, const Eigen::VectorXd& values) {
  const double W = 640, Hpx = 400, pad = 10;
  const double x0 = mesh.domain.a, x1 = mesh.domain.b;
  const double z0 = mesh.nodes.row(1).minCoeff(), z1 = mesh.nodes.row(1).maxCoeff();
  const double sx = (W - 2 * pad) / (x1 - x0);
  const double sz = (Hpx - 2 * pad) / std::max(z1 - z0, 1e-300);
  const double vlo = values.minCoeff(), vhi = values.maxCoeff();
  const double span = vhi > vlo ? vhi - vlo : 1.0;
  fmt::print(os, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n", W, Hpx);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double mean = (values[tri[0]] + values[tri[1]] + values[tri[2]]) / 3.0;
    std::string pts;
    for (Index n : tri) {
      pts += fmt::format("{:.2f},{:.2f} ", pad + (mesh.nodes(0, n) - x0) * sx, Hpx - pad - (mesh.nodes(1, n) - z0) * sz);
    }
    const std::string c = ramp((mean - vlo) / span);
    fmt::print(os, "<polygon points=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"0.2\"/>\n", pts, c, c);
  }
  os << "</svg>\n";
}

}  // namespace thinlayer
