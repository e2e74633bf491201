#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rsmfg/analysis.hpp"
#include "rsmfg/mfg.hpp"
#include "rsmfg/particles.hpp"
#include "rsmfg/riccati.hpp"

namespace rsmfg::csv {

/// Numeric table with a header row; every cell is printed with %.17g.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  bool operator==(const Table&) const = default;
};

std::string format_number(double v);

void write(std::ostream& os, const Table& t);
std::string to_string(const Table& t);
void write_file(const std::filesystem::path& path, const Table& t);

/// Throws std::runtime_error on ragged rows or unparsable cells.
Table read(std::istream& is);
Table read_file(const std::filesystem::path& path);

/// Parses and re-emits; identical to the input for any file this module wrote.
std::string round_trip(const std::string& text);

Table riccati_table(const RiccatiSolution& sol);                 // t,z,k
Table riccati_z_table(const RiccatiSolution& sol);               // t,z
Table value_table(const ValueTrajectory& v);                     // t,x,v,u
Table density_table(const DensityTrajectory& m);                 // t,x,m
Table moments_table(const DensityTrajectory& m);                 // t,mean,variance
Table history_table(const FixedPointReport& r);                  // iter,residual
Table snapshot_table(const std::vector<ParticleEnsemble>& snaps);  // t,j,x
Table convergence_table(const ConvergenceReport& r);             // n,w1,stderr
Table cost_table(const std::vector<std::pair<double, CostEstimate>>& rows);  // x0,estimate,stderr,paths
Table uniqueness_table(const MonotonicityReport& r);             // x,p,z,a11,a12,a22,det,pass

/// key=value lines in key order.
void write_manifest(const std::filesystem::path& path, const std::map<std::string, std::string>& entries);

}  // namespace rsmfg::csv
