#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kinodiff/geodata/trajectory.hpp"
#include "kinodiff/scoring/metrics.hpp"

namespace kinodiff::scoring {

struct ReportRow {
  std::string id;
  double e_delta = 0.0;
  bool flag = false;
  std::optional<bool> label;  // true = anomalous, when known
  std::string kind;           // anomaly kind when known, else empty

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Columns id,E_delta,flag,label,kind with flag and label as 0/1 (label
/// empty when unknown).
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_csv(std::istream& in);

/// Ordered "[section]" blocks of key=value lines.
struct Section {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }
  void add(const std::string& key, double value);
  void add(const std::string& key, std::size_t value);
};

void write_sections(std::ostream& out, const std::vector<Section>& sections);

Section confusion_section(const Confusion& c);
Section regression_section(const std::string& name, const RegressionErrors& e);

/// Absolute wrapped change between consecutive segment bearings, degrees.
std::vector<double> bearing_changes(const geodata::Trajectory& traj);

/// Two-column CSV: bin centre, count.
void write_histogram(std::ostream& out, const std::string& value_name, const std::vector<double>& values, double lo,
                     double hi, std::size_t bins);

}  // namespace kinodiff::scoring
