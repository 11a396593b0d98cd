#include "kinodiff/geodata/parse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "kinodiff/common/csv.hpp"
#include "kinodiff/common/error.hpp"
#include "kinodiff/common/format.hpp"
#include "kinodiff/common/time.hpp"

namespace kinodiff::geodata {

Format parse_format(std::string_view name) {
  if (name == "ais-csv") return Format::ais_csv;
  if (name == "geolife-plt") return Format::geolife_plt;
  if (name == "canonical") return Format::canonical;
  throw InputError("unknown format '" + std::string(name) + "' (expected ais-csv, geolife-plt or canonical)");
}

std::string format_name(Format format) {
  switch (format) {
    case Format::ais_csv: return "ais-csv";
    case Format::geolife_plt: return "geolife-plt";
    case Format::canonical: return "canonical";
  }
  return "unknown";
}

namespace {

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (upper(csv::trim(header[i])) == upper(name)) return i;
  }
  throw InputError("missing column '" + name + "' in header");
}

/// Sorts by time, drops repeated timestamps and too-short trajectories.
void finalize(std::vector<Trajectory>& trajectories, ParseStats& stats) {
  std::vector<Trajectory> kept;
  for (Trajectory& traj : trajectories) {
    std::stable_sort(traj.points.begin(), traj.points.end(),
                     [](const TrajPoint& a, const TrajPoint& b) { return a.t < b.t; });
    std::vector<TrajPoint> unique;
    unique.reserve(traj.points.size());
    for (const TrajPoint& p : traj.points) {
      if (!unique.empty() && p.t == unique.back().t) {
        ++stats.dropped_duplicate;
        continue;
      }
      unique.push_back(p);
    }
    traj.points = std::move(unique);
    if (traj.points.size() < 2) {
      ++stats.dropped_short;
      continue;
    }
    kept.push_back(std::move(traj));
  }
  trajectories = std::move(kept);
}

std::optional<double> optional_number(const std::string& field) {
  const std::string s = csv::trim(field);
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

ParseResult parse_ais(std::string_view bytes) {
  std::istringstream in{std::string(bytes)};
  std::string line;
  if (!csv::read_line(in, line)) throw InputError("ais-csv: empty input");
  const auto header = csv::split_line(line);
  const std::size_t c_mmsi = column(header, "MMSI");
  const std::size_t c_time = column(header, "BaseDateTime");
  const std::size_t c_lat = column(header, "LAT");
  const std::size_t c_lon = column(header, "LON");
  const std::size_t c_sog = column(header, "SOG");
  const std::size_t c_cog = column(header, "COG");
  const std::size_t needed = std::max({c_mmsi, c_time, c_lat, c_lon, c_sog, c_cog}) + 1;

  ParseResult result;
  std::map<std::string, Trajectory> by_vessel;
  std::vector<std::string> order;
  while (csv::read_line(in, line)) {
    if (csv::trim(line).empty()) continue;
    ++result.stats.rows;
    const auto f = csv::split_line(line);
    try {
      if (f.size() < needed) throw InputError("short row");
      TrajPoint p;
      p.lat = parse_double(f[c_lat]);
      p.lon = parse_double(f[c_lon]);
      p.t = parse_iso8601(csv::trim(f[c_time]));
      if (!valid_coordinate(p.lat, p.lon)) throw InputError("coordinate out of range");
      // SOG values outside the AIS range (e.g. 102.3 = not available) leave v unset.
      if (auto sog = optional_number(f[c_sog]); sog && *sog >= 0.0 && *sog < 102.25) p.v = *sog * kKnotsToMps;
      const std::string id = csv::trim(f[c_mmsi]);
      if (id.empty()) throw InputError("empty MMSI");
      auto [it, inserted] = by_vessel.try_emplace(id);
      if (inserted) {
        it->second.id = id;
        order.push_back(id);
      }
      it->second.points.push_back(p);
    } catch (const InputError&) {
      ++result.stats.dropped_invalid;
    }
  }
  for (const std::string& id : order) result.trajectories.push_back(std::move(by_vessel[id]));
  return result;
}

ParseResult parse_plt(std::string_view bytes, const std::string& source_id) {
  std::istringstream in{std::string(bytes)};
  std::string line;
  for (int i = 0; i < 6; ++i) {
    if (!csv::read_line(in, line)) throw InputError("geolife-plt: header shorter than 6 lines");
  }
  ParseResult result;
  Trajectory traj;
  traj.id = source_id;
  while (csv::read_line(in, line)) {
    if (csv::trim(line).empty()) continue;
    ++result.stats.rows;
    const auto f = csv::split_line(line);
    try {
      if (f.size() < 7) throw InputError("short row");
      TrajPoint p;
      p.lat = parse_double(f[0]);
      p.lon = parse_double(f[1]);
      p.t = parse_date_time(csv::trim(f[5]), csv::trim(f[6]));
      if (!valid_coordinate(p.lat, p.lon)) throw InputError("coordinate out of range");
      traj.points.push_back(p);
    } catch (const InputError&) {
      ++result.stats.dropped_invalid;
    }
  }
  if (!traj.points.empty()) result.trajectories.push_back(std::move(traj));
  return result;
}

ParseResult parse_canonical(std::string_view bytes) {
  std::istringstream in{std::string(bytes)};
  std::string line;
  if (!csv::read_line(in, line)) throw InputError("canonical: empty input");
  const auto header = csv::split_line(line);
  const std::size_t c_id = column(header, "id");
  const std::size_t c_seq = column(header, "seq");
  const std::size_t c_t = column(header, "t");
  const std::size_t c_lat = column(header, "lat");
  const std::size_t c_lon = column(header, "lon");
  const std::size_t c_v = column(header, "v");
  const std::size_t needed = std::max({c_id, c_seq, c_t, c_lat, c_lon, c_v}) + 1;

  ParseResult result;
  std::map<std::string, std::vector<std::pair<double, TrajPoint>>> rows;
  std::vector<std::string> order;
  while (csv::read_line(in, line)) {
    if (line.empty()) continue;
    ++result.stats.rows;
    const auto f = csv::split_line(line);
    try {
      if (f.size() < needed) throw InputError("short row");
      TrajPoint p;
      const double seq = parse_double(f[c_seq]);
      p.t = parse_double(f[c_t]);
      p.lat = parse_double(f[c_lat]);
      p.lon = parse_double(f[c_lon]);
      p.v = optional_number(f[c_v]);
      if (!valid_coordinate(p.lat, p.lon)) throw InputError("coordinate out of range");
      auto [it, inserted] = rows.try_emplace(f[c_id]);
      if (inserted) order.push_back(f[c_id]);
      it->second.emplace_back(seq, p);
    } catch (const InputError&) {
      ++result.stats.dropped_invalid;
    }
  }
  for (const std::string& id : order) {
    auto& list = rows[id];
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Trajectory traj;
    traj.id = id;
    for (auto& [seq, p] : list) traj.points.push_back(p);
    result.trajectories.push_back(std::move(traj));
  }
  return result;
}

}  // namespace

ParseResult parse(Format format, std::string_view bytes, const std::string& source_id) {
  ParseResult result;
  switch (format) {
    case Format::ais_csv: result = parse_ais(bytes); break;
    case Format::geolife_plt: result = parse_plt(bytes, source_id); break;
    case Format::canonical: result = parse_canonical(bytes); break;
  }
  finalize(result.trajectories, result.stats);
  if (result.trajectories.empty()) {
    throw InputError(format_name(format) + ": no valid trajectories (" + std::to_string(result.stats.rows) +
                     " rows read, " + std::to_string(result.stats.dropped_invalid) + " invalid)");
  }
  return result;
}

void write_canonical(std::ostream& out, const std::vector<Trajectory>& trajectories) {
  out << "id,seq,t,lat,lon,v\n";
  for (const Trajectory& traj : trajectories) {
    const std::string id = csv::escape(traj.id);
    for (std::size_t i = 0; i < traj.points.size(); ++i) {
      const TrajPoint& p = traj.points[i];
      out << id << ',' << i << ',' << format_double(p.t) << ',' << format_double(p.lat) << ','
          << format_double(p.lon) << ',';
      if (p.v) out << format_double(*p.v);
      out << '\n';
    }
  }
}

std::string to_canonical_csv(const std::vector<Trajectory>& trajectories) {
  std::ostringstream out;
  write_canonical(out, trajectories);
  return out.str();
}

}  // namespace kinodiff::geodata
