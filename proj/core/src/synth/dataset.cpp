#include "kinodiff/synth/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "kinodiff/common/csv.hpp"
#include "kinodiff/common/error.hpp"
#include "kinodiff/common/format.hpp"

namespace kinodiff::synth {

std::size_t LabeledDataset::anomalous_count() const {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](const Label& l) { return l.anomalous; }));
}

std::size_t anomalous_target(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n) - 1e-9));
}

void DatasetOptions::validate() const {
  if (!(rate > 0.0 && rate < 1.0)) throw InputError("anomaly rate must be in (0, 1), got " + format_double(rate));
  double mix_total = 0.0;
  for (const auto& [kind, w] : kind_mix) {
    if (!(w >= 0.0)) throw InputError("kind mix weights must be >= 0");
    mix_total += w;
  }
  if (std::abs(mix_total - 1.0) > 1e-9) throw InputError("kind mix must sum to 1");
  if (window_min < kMinWindow || window_max < window_min) throw InputError("invalid anomaly window bounds");
}

LabeledDataset build_dataset(const std::vector<geodata::Trajectory>& normals, const DatasetOptions& options,
                             numerics::Rng& rng) {
  options.validate();
  const std::size_t n = normals.size();
  const std::size_t target = anomalous_target(options.rate, n);
  if (n < 2 || target == 0 || target > n) throw InputError("not enough normal trajectories for the requested rate");
  for (const auto& t : normals) {
    if (t.points.size() < options.window_max + 2) {
      throw InputError("trajectory '" + t.id + "' is too short for the anomaly window");
    }
  }

  // Partial Fisher-Yates for the anomalous subset, then sorted for a stable order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < target; ++i) std::swap(order[i], order[i + rng.index(n - i)]);
  std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(target));
  std::sort(chosen.begin(), chosen.end());

  LabeledDataset ds;
  ds.anomaly_rate = options.rate;
  ds.trajectories = normals;
  ds.labels.reserve(n);
  for (const auto& t : normals) ds.labels.push_back({t.id, false, std::nullopt});

  for (std::size_t idx : chosen) {
    // Kind by inverse CDF over the mix (map order is the enum order).
    const double u = rng.uniform();
    AnomalyKind kind = options.kind_mix.rbegin()->first;
    double acc = 0.0;
    for (const auto& [k, w] : options.kind_mix) {
      acc += w;
      if (w > 0.0 && u < acc) {
        kind = k;
        break;
      }
    }
    const std::uint64_t seed = rng.next_u64();
    numerics::Rng local(seed);
    const geodata::Trajectory& source = normals[idx];
    const std::size_t len = options.window_min + local.index(options.window_max - options.window_min + 1);
    const std::size_t start = 1 + local.index(source.points.size() - len - 1);
    AnomalySpec spec{kind, sample_severity(kind, options.ranges, local), start, start + len, seed};
    const geodata::Trajectory* donor = nullptr;
    if (kind == AnomalyKind::replay) {
      const std::size_t d = (idx + 1 + local.index(n - 1)) % n;
      donor = &normals[d];
    }
    Injected inj = inject(source, spec, options.ranges, donor);
    ds.trajectories[idx] = std::move(inj.traj);
    ds.labels[idx] = {source.id, true, inj.spec};
  }
  return ds;
}

void write_labels(std::ostream& out, const std::vector<Label>& labels) {
  out << "id,label,kind,severity,window_start,window_end,seed\n";
  for (const Label& l : labels) {
    out << csv::escape(l.id) << ',' << (l.anomalous ? "anomalous" : "normal") << ',';
    if (l.spec) {
      out << kind_name(l.spec->kind) << ',' << format_double(l.spec->severity) << ',' << l.spec->window_start << ','
          << l.spec->window_end << ',' << l.spec->seed;
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
}

std::vector<Label> read_labels(std::istream& in) {
  std::string line;
  if (!csv::read_line(in, line)) throw InputError("labels file is empty");
  const auto header = csv::split_line(line);
  const std::vector<std::string> expected{"id", "label", "kind", "severity", "window_start", "window_end", "seed"};
  if (header != expected) throw InputError("labels file has an unexpected header");
  std::vector<Label> labels;
  std::size_t row = 1;
  while (csv::read_line(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split_line(line);
    if (f.size() != expected.size()) throw InputError("labels row " + std::to_string(row) + ": wrong field count");
    Label l;
    l.id = f[0];
    if (f[1] == "anomalous") {
      l.anomalous = true;
    } else if (f[1] != "normal") {
      throw InputError("labels row " + std::to_string(row) + ": label must be normal or anomalous");
    }
    if (!f[2].empty()) {
      AnomalySpec s;
      s.kind = parse_kind(f[2]);
      s.severity = parse_double(f[3]);
      try {
        s.window_start = std::stoull(f[4]);
        s.window_end = std::stoull(f[5]);
        s.seed = std::stoull(f[6]);
      } catch (const std::exception&) {
        throw InputError("labels row " + std::to_string(row) + ": bad integer field");
      }
      l.spec = s;
    }
    labels.push_back(std::move(l));
  }
  return labels;
}

}  // namespace kinodiff::synth
