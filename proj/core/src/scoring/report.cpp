#include "kinodiff/scoring/report.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "kinodiff/common/angles.hpp"
#include "kinodiff/common/csv.hpp"
#include "kinodiff/common/error.hpp"
#include "kinodiff/common/format.hpp"
#include "kinodiff/geodata/kinematics.hpp"

namespace kinodiff::scoring {

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "id,E_delta,flag,label,kind\n";
  for (const ReportRow& r : rows) {
    out << csv::escape(r.id) << ',' << format_double(r.e_delta) << ',' << (r.flag ? 1 : 0) << ',';
    if (r.label) out << (*r.label ? 1 : 0);
    out << ',' << csv::escape(r.kind) << '\n';
  }
}

std::vector<ReportRow> read_report_csv(std::istream& in) {
  std::string line;
  if (!csv::read_line(in, line)) throw InputError("report file is empty");
  if (csv::split_line(line) != std::vector<std::string>{"id", "E_delta", "flag", "label", "kind"}) {
    throw InputError("report file has an unexpected header");
  }
  std::vector<ReportRow> rows;
  std::size_t row = 1;
  while (csv::read_line(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split_line(line);
    if (f.size() != 5) throw InputError("report row " + std::to_string(row) + ": wrong field count");
    ReportRow r;
    r.id = f[0];
    r.e_delta = parse_double(f[1]);
    if (f[2] != "0" && f[2] != "1") throw InputError("report row " + std::to_string(row) + ": flag must be 0 or 1");
    r.flag = f[2] == "1";
    if (!f[3].empty()) {
      if (f[3] != "0" && f[3] != "1") throw InputError("report row " + std::to_string(row) + ": label must be 0 or 1");
      r.label = f[3] == "1";
    }
    r.kind = f[4];
    rows.push_back(std::move(r));
  }
  return rows;
}

void Section::add(const std::string& key, double value) { add(key, format_double(value)); }
void Section::add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }

void write_sections(std::ostream& out, const std::vector<Section>& sections) {
  bool first = true;
  for (const Section& s : sections) {
    if (!first) out << '\n';
    first = false;
    out << '[' << s.name << "]\n";
    for (const auto& [k, v] : s.entries) out << k << '=' << v << '\n';
  }
}

Section confusion_section(const Confusion& c) {
  Section s{"classification", {}};
  s.add("tp", c.tp);
  s.add("fp", c.fp);
  s.add("fn", c.fn);
  s.add("tn", c.tn);
  s.add("accuracy", c.accuracy);
  s.add("precision", c.precision);
  s.add("recall", c.recall);
  s.add("f1", c.f1);
  std::string undefined;
  for (const auto& [name, flag] : {std::pair{"accuracy", c.accuracy_undefined}, std::pair{"precision", c.precision_undefined},
                                   std::pair{"recall", c.recall_undefined}, std::pair{"f1", c.f1_undefined}}) {
    if (!flag) continue;
    if (!undefined.empty()) undefined += ' ';
    undefined += name;
  }
  s.add("undefined", undefined);
  return s;
}

Section regression_section(const std::string& name, const RegressionErrors& e) {
  Section s{name, {}};
  s.add("mse", e.mse);
  s.add("rmse", e.rmse);
  s.add("mae", e.mae);
  s.add("mape_percent", e.mape);
  s.add("mape_excluded", e.mape_excluded);
  return s;
}

std::vector<double> bearing_changes(const geodata::Trajectory& traj) {
  if (traj.points.size() < 3) return {};
  const geodata::Trajectory k = geodata::derive_kinematics(traj, {geodata::Differencing::forward, false});
  std::vector<double> out;
  for (std::size_t i = 0; i + 2 < traj.points.size(); ++i) {
    out.push_back(std::abs(rad_to_deg(wrap_to_pi(k.derived.bearing[i + 1] - k.derived.bearing[i]))));
  }
  return out;
}

void write_histogram(std::ostream& out, const std::string& value_name, const std::vector<double>& values, double lo,
                     double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw InputError("histogram: need bins > 0 and hi > lo");
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    const double f = (std::clamp(v, lo, hi) - lo) / width;
    ++counts[std::min(bins - 1, static_cast<std::size_t>(f))];
  }
  out << value_name << ",count\n";
  for (std::size_t b = 0; b < bins; ++b) {
    out << format_double(lo + (static_cast<double>(b) + 0.5) * width) << ',' << counts[b] << '\n';
  }
}

}  // namespace kinodiff::scoring
