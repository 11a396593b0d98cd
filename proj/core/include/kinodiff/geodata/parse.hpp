#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "kinodiff/geodata/trajectory.hpp"

namespace kinodiff::geodata {

enum class Format { ais_csv, geolife_plt, canonical };

/// "ais-csv", "geolife-plt" or "canonical"; throws InputError otherwise.
Format parse_format(std::string_view name);
std::string format_name(Format format);

struct ParseStats {
  std::size_t rows = 0;                // data rows read
  std::size_t dropped_invalid = 0;     // unparseable rows or coordinates out of range
  std::size_t dropped_duplicate = 0;   // repeated timestamps within a trajectory
  std::size_t dropped_short = 0;       // trajectories left with fewer than 2 points
};

struct ParseResult {
  std::vector<Trajectory> trajectories;
  ParseStats stats;
};

/// Parses a whole file held in memory. AIS rows are grouped by MMSI; a PLT
/// file is a single trajectory named `source_id`. Points come back sorted by
/// time with SOG converted to m/s. Throws InputError when no valid row remains.
ParseResult parse(Format format, std::string_view bytes, const std::string& source_id = "plt");

/// Canonical trajectory CSV: id,seq,t,lat,lon,v with an empty v when absent.
/// Numbers use the shortest exact decimal form, so write-then-parse is lossless.
void write_canonical(std::ostream& out, const std::vector<Trajectory>& trajectories);
std::string to_canonical_csv(const std::vector<Trajectory>& trajectories);

inline constexpr double kKnotsToMps = 1852.0 / 3600.0;

}  // namespace kinodiff::geodata
