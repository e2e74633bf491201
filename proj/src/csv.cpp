#include "rsmfg/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rsmfg::csv {

std::string format_number(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

void write(std::ostream& os, const Table& t) {
  for (std::size_t c = 0; c < t.header.size(); ++c) os << (c ? "," : "") << t.header[c];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_number(row[c]);
    os << '\n';
  }
}

std::string to_string(const Table& t) {
  std::ostringstream os;
  write(os, t);
  return os.str();
}

void write_file(const std::filesystem::path& path, const Table& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(os, t);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    if (cell == "nan" || cell == "-nan") return std::numeric_limits<double>::quiet_NaN();
    if (cell == "inf") return std::numeric_limits<double>::infinity();
    if (cell == "-inf") return -std::numeric_limits<double>::infinity();
    throw std::runtime_error("csv line " + std::to_string(line_no) + ": cannot parse '" + cell + "'");
  }
  return v;
}

}  // namespace

Table read(std::istream& is) {
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("csv: missing header");
  t.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                               std::to_string(t.header.size()) + " cells");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_cell(c, line_no));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read(is);
}

std::string round_trip(const std::string& text) {
  std::istringstream is(text);
  return to_string(read(is));
}

Table riccati_table(const RiccatiSolution& sol) {
  Table t{{"t", "z", "k"}, {}};
  for (std::size_t s = 0; s < sol.z.size(); ++s) {
    t.rows.push_back({sol.times.t(s), sol.z[s], s < sol.k.size() ? sol.k[s] : 0.0});
  }
  return t;
}

Table riccati_z_table(const RiccatiSolution& sol) {
  Table t{{"t", "z"}, {}};
  for (std::size_t s = 0; s < sol.z.size(); ++s) t.rows.push_back({sol.times.t(s), sol.z[s]});
  return t;
}

Table value_table(const ValueTrajectory& v) {
  Table t{{"t", "x", "v", "u"}, {}};
  for (std::size_t s = 0; s < v.times().size(); ++s) {
    for (std::size_t i = 0; i < v.grid().size(); ++i) {
      t.rows.push_back({v.times().t(s), v.grid().x(i), v.values.at(s, i), v.control.at(s, i)});
    }
  }
  return t;
}

Table density_table(const DensityTrajectory& m) {
  Table t{{"t", "x", "m"}, {}};
  for (std::size_t s = 0; s < m.times().size(); ++s) {
    for (std::size_t i = 0; i < m.grid().size(); ++i) t.rows.push_back({m.times().t(s), m.grid().x(i), m.values.at(s, i)});
  }
  return t;
}

Table moments_table(const DensityTrajectory& m) {
  Table t{{"t", "mean", "variance"}, {}};
  for (std::size_t s = 0; s < m.times().size(); ++s) {
    const Moments mo = density_moments(m, s);
    t.rows.push_back({m.times().t(s), mo.mean, mo.variance});
  }
  return t;
}

Table history_table(const FixedPointReport& r) {
  Table t{{"iter", "residual"}, {}};
  for (std::size_t i = 0; i < r.residual_history.size(); ++i) {
    t.rows.push_back({static_cast<double>(i + 1), r.residual_history[i]});
  }
  return t;
}

Table snapshot_table(const std::vector<ParticleEnsemble>& snaps) {
  Table t{{"t", "j", "x"}, {}};
  for (const auto& e : snaps) {
    for (std::size_t k = 0; k < e.size(); ++k) t.rows.push_back({e.time, static_cast<double>(e.ids[k]), e.states[k]});
  }
  return t;
}

Table convergence_table(const ConvergenceReport& r) {
  Table t{{"n", "w1", "stderr"}, {}};
  for (std::size_t a = 0; a < r.n_values.size(); ++a) {
    t.rows.push_back({static_cast<double>(r.n_values[a]), r.w1_errors[a], r.w1_stderr[a]});
  }
  return t;
}

Table cost_table(const std::vector<std::pair<double, CostEstimate>>& rows) {
  Table t{{"x0", "estimate", "stderr", "paths"}, {}};
  for (const auto& [x0, est] : rows) {
    t.rows.push_back({x0, est.estimate, est.standard_error, static_cast<double>(est.paths)});
  }
  return t;
}

Table uniqueness_table(const MonotonicityReport& r) {
  Table t{{"x", "p", "z", "a11", "a12", "a22", "det", "pass"}, {}};
  for (const auto& v : r.points) {
    t.rows.push_back({v.point.x, v.point.p, v.point.z, v.a11, v.a12, v.a22, v.det, v.pass ? 1.0 : 0.0});
  }
  return t;
}

void write_manifest(const std::filesystem::path& path, const std::map<std::string, std::string>& entries) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& [k, v] : entries) os << k << '=' << v << '\n';
}

}  // namespace rsmfg::csv
