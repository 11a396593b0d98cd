#include "kinodiff/cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "kinodiff/common/csv.hpp"
#include "kinodiff/common/error.hpp"
#include "kinodiff/common/format.hpp"
#include "kinodiff/config/run_config.hpp"
#include "kinodiff/geodata/parse.hpp"
#include "kinodiff/pipeline/pipeline.hpp"
#include "kinodiff/scoring/geo_errors.hpp"
#include "kinodiff/scoring/report.hpp"

namespace kinodiff::cli {
namespace {

namespace fs = std::filesystem;
using geodata::Trajectory;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> lambda;
  std::optional<double> lambda_percentile;
  std::optional<std::size_t> t_star;
  std::optional<double> eta;
  std::optional<std::size_t> stride;
  std::optional<std::size_t> steps;
  bool no_kbm = false;
  bool no_context = false;
  std::string init_from;

  std::string format = "ais-csv";
  std::vector<std::string> inputs;
  std::string data;
  std::string labels;
  std::string checkpoint;
  std::string report;
  std::string real;
  std::string generated;
  std::string run_dir;
};

/// Files written by one command. Each file is written to a temporary name
/// and renamed into place; unless commit() is called, everything written
/// (except kept paths) is removed again, along with a directory this
/// command created.
class Outputs {
 public:
  ~Outputs() {
    if (committed_) return;
    std::error_code ec;
    for (const fs::path& p : written_)
      if (!keep_.count(p)) fs::remove(p, ec);
    if (created_dir_ && fs::is_empty(*created_dir_, ec)) fs::remove(*created_dir_, ec);
  }

  void make_dir(const fs::path& dir) {
    if (fs::exists(dir)) {
      if (!fs::is_directory(dir)) throw InputError("output path '" + dir.string() + "' is not a directory");
      return;
    }
    fs::create_directories(dir);
    created_dir_ = dir;
  }

  void write(const fs::path& path, const std::string& bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw InputError("cannot write '" + path.string() + "'");
      f << bytes;
      if (!f.flush()) throw InputError("cannot write '" + path.string() + "'");
    }
    fs::rename(tmp, path);
    if (std::find(written_.begin(), written_.end(), path) == written_.end()) written_.push_back(path);
  }

  void keep(const fs::path& path) { keep_.insert(path); }
  void commit() { committed_ = true; }

 private:
  std::vector<fs::path> written_;
  std::set<fs::path> keep_;
  std::optional<fs::path> created_dir_;
  bool committed_ = false;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw InputError("missing required option " + flag);
}

std::vector<Trajectory> load_trajectories(const std::string& path) {
  return geodata::parse(geodata::Format::canonical, read_file(path)).trajectories;
}

std::vector<synth::Label> load_labels(const std::string& path) {
  std::istringstream in(read_file(path));
  return synth::read_labels(in);
}

std::map<std::string, synth::Label> labels_by_id(const std::vector<synth::Label>& labels) {
  std::map<std::string, synth::Label> out;
  for (const synth::Label& l : labels) out.emplace(l.id, l);
  return out;
}

std::string sections_text(const std::vector<scoring::Section>& sections) {
  std::ostringstream ss;
  scoring::write_sections(ss, sections);
  return ss.str();
}

/// Base configuration: --config, else the text stored alongside a model,
/// else the built-in defaults; command-line flags are applied on top.
config::RunConfig resolve_config(const Options& o, const std::string& stored = {}) {
  config::RunConfig c;
  if (!o.config_path.empty()) {
    c = config::load_config(o.config_path);
  } else if (!stored.empty()) {
    c = config::parse_config(stored);
  }
  if (o.seed) c.seed = *o.seed;
  if (o.lambda) c.detect.lambda = *o.lambda;
  if (o.lambda_percentile) {
    c.detect.lambda_percentile = *o.lambda_percentile;
    if (!o.lambda) c.detect.lambda.reset();
  }
  if (o.t_star) c.sampler.t_star = *o.t_star;
  if (o.eta) c.sampler.eta = *o.eta;
  if (o.stride) c.sampler.stride = *o.stride;
  if (o.steps) c.train.steps = *o.steps;
  if (o.no_kbm) c.loss.gamma3 = 0.0;
  if (o.no_context) c.model.max_context = 0;
  c.validate();
  return c;
}

std::string quantiles(std::vector<double> values) {
  if (values.empty()) return "";
  return format_double(scoring::percentile(values, 0.0)) + " " + format_double(scoring::percentile(values, 50.0)) +
         " " + format_double(scoring::percentile(values, 100.0));
}

int cmd_ingest(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  if (o.inputs.empty()) throw InputError("missing required option --in");
  const geodata::Format format = geodata::parse_format(o.format);
  std::vector<Trajectory> all;
  geodata::ParseStats total;
  for (const std::string& path : o.inputs) {
    const geodata::ParseResult r = geodata::parse(format, read_file(path), fs::path(path).stem().string());
    total.rows += r.stats.rows;
    total.dropped_invalid += r.stats.dropped_invalid;
    total.dropped_duplicate += r.stats.dropped_duplicate;
    total.dropped_short += r.stats.dropped_short;
    all.insert(all.end(), r.trajectories.begin(), r.trajectories.end());
  }
  std::vector<double> durations, lengths;
  for (const Trajectory& t : all) {
    durations.push_back(t.duration());
    lengths.push_back(static_cast<double>(t.points.size()));
  }
  scoring::Section s{"ingest", {}};
  s.add("format", geodata::format_name(format));
  s.add("files", o.inputs.size());
  s.add("trajectories", all.size());
  s.add("rows", total.rows);
  s.add("dropped_invalid", total.dropped_invalid);
  s.add("dropped_duplicate", total.dropped_duplicate);
  s.add("dropped_short", total.dropped_short);
  s.add("duration_s_min_median_max", quantiles(durations));
  s.add("points_min_median_max", quantiles(lengths));

  Outputs outputs;
  const fs::path target(o.out);
  if (target.has_parent_path()) outputs.make_dir(target.parent_path());
  outputs.write(target, geodata::to_canonical_csv(all));
  outputs.commit();
  scoring::write_sections(out, {s});
  return kOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  const config::RunConfig cfg = resolve_config(o);
  const synth::LabeledDataset ds = pipeline::synthesize(cfg.synth, cfg.seed);

  Outputs outputs;
  const fs::path dir(o.out);
  outputs.make_dir(dir);
  outputs.write(dir / "trajectories.csv", geodata::to_canonical_csv(ds.trajectories));
  std::ostringstream labels;
  synth::write_labels(labels, ds.labels);
  outputs.write(dir / "labels.csv", labels.str());
  outputs.write(dir / "manifest.ini", config::serialize_config(cfg));
  outputs.commit();

  scoring::Section s{"synth", {}};
  s.add("seed", std::to_string(cfg.seed));
  s.add("trajectories", ds.trajectories.size());
  s.add("anomalous", ds.anomalous_count());
  s.add("rate", cfg.synth.dataset.rate);
  scoring::write_sections(out, {s});
  return kOk;
}

std::string trace_csv(const std::vector<diffusion::TraceRow>& trace) {
  std::ostringstream ss;
  ss << "step,total,vlb,rec,phy\n";
  for (const auto& r : trace) {
    ss << r.step << ',' << format_double(r.total) << ',' << format_double(r.vlb) << ',' << format_double(r.rec) << ','
       << format_double(r.phy) << '\n';
  }
  return ss.str();
}

int cmd_train(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  require(o.data, "--data");
  std::optional<denoiser::Checkpoint> init;
  if (!o.init_from.empty()) init = denoiser::load_checkpoint(o.init_from);
  const config::RunConfig cfg = resolve_config(o, init ? init->run_config : std::string());

  std::vector<Trajectory> data = load_trajectories(o.data);
  if (!o.labels.empty()) {
    // Labelled anomalies are left out of training.
    const auto labels = labels_by_id(load_labels(o.labels));
    std::erase_if(data, [&](const Trajectory& t) {
      const auto it = labels.find(pipeline::base_id(t.id));
      return it != labels.end() && it->second.anomalous;
    });
  }

  Outputs outputs;
  const fs::path dir(o.out);
  outputs.make_dir(dir);
  const fs::path model_path = dir / "model.ckpt";
  outputs.write(dir / "config.ini", config::serialize_config(cfg));
  auto save = [&](const pipeline::Model& model, const diffusion::TrainState& st) {
    outputs.write(model_path, denoiser::serialize_checkpoint(pipeline::make_checkpoint(model, st, cfg)));
  };
  pipeline::TrainOutcome result;
  try {
    result = pipeline::train_model(data, cfg, init, save);
  } catch (const NumericError&) {
    outputs.keep(dir / "config.ini");
    outputs.keep(model_path);
    throw;
  }
  save(result.model, result.result.state);
  outputs.write(dir / "loss_trace.csv", trace_csv(result.result.trace));
  outputs.commit();

  scoring::Section s{"train", {}};
  s.add("trajectories", data.size());
  s.add("steps", result.result.trace.size());
  s.add("final_step", std::to_string(result.result.state.step));
  if (!result.result.trace.empty()) s.add("final_total", result.result.trace.back().total);
  s.add("checkpoint", model_path.string());
  scoring::write_sections(out, {s});
  return kOk;
}

int cmd_detect(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  require(o.data, "--data");
  require(o.checkpoint, "--checkpoint");
  const denoiser::Checkpoint ck = denoiser::load_checkpoint(o.checkpoint);
  const config::RunConfig cfg = resolve_config(o, ck.run_config);
  const pipeline::Model model = pipeline::model_from_checkpoint(ck, cfg);
  const std::vector<Trajectory> data = load_trajectories(o.data);
  std::map<std::string, synth::Label> labels;
  if (!o.labels.empty()) labels = labels_by_id(load_labels(o.labels));

  std::vector<geodata::CanonicalTraj> recon;
  const std::vector<pipeline::Scored> scores = pipeline::score(model, data, cfg, cfg.seed, &recon);
  std::vector<double> values;
  for (const auto& s : scores) values.push_back(s.e_delta);
  const double lambda = pipeline::choose_lambda(values, cfg.detect);

  std::vector<scoring::ReportRow> rows;
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scoring::ReportRow row{scores[i].id, scores[i].e_delta, scoring::classify({scores[i].e_delta}, lambda)[0], {}, {}};
    const auto it = labels.find(pipeline::base_id(row.id));
    if (it != labels.end()) {
      row.label = it->second.anomalous;
      if (it->second.spec) row.kind = synth::kind_name(it->second.spec->kind);
    }
    flagged += row.flag ? 1 : 0;
    rows.push_back(std::move(row));
  }

  const geodata::CanonicalDataset inputs = geodata::build_canonical(data, cfg.data.canonical, model.normalizer);
  std::vector<Trajectory> input_trajs, recon_trajs;
  for (const auto& c : inputs.items) input_trajs.push_back(geodata::denormalize(c));
  for (const auto& c : recon) recon_trajs.push_back(geodata::denormalize(c));

  scoring::Section s{"detect", {}};
  s.add("trajectories", rows.size());
  s.add("flagged", flagged);
  s.add("lambda", lambda);
  s.add("lambda_source", cfg.detect.lambda ? std::string("explicit")
                                           : "percentile " + format_double(cfg.detect.lambda_percentile));
  s.add("seed", std::to_string(cfg.seed));
  s.add("t_star", diffusion::resolved_t_star(cfg.sampler, model.schedule.steps()));
  s.add("eta", cfg.sampler.eta);
  s.add("stride", cfg.sampler.stride);
  s.add("data", fs::absolute(o.data).string());
  s.add("labels", o.labels.empty() ? std::string() : fs::absolute(o.labels).string());
  s.add("checkpoint", fs::absolute(o.checkpoint).string());

  Outputs outputs;
  const fs::path dir(o.out);
  outputs.make_dir(dir);
  std::ostringstream report;
  scoring::write_report_csv(report, rows);
  outputs.write(dir / "report.csv", report.str());
  outputs.write(dir / "inputs.csv", geodata::to_canonical_csv(input_trajs));
  outputs.write(dir / "reconstructions.csv", geodata::to_canonical_csv(recon_trajs));
  outputs.write(dir / "detect.ini", sections_text({s}));
  outputs.commit();
  scoring::write_sections(out, {s});
  return kOk;
}

std::vector<scoring::ReportRow> load_report(const std::string& path) {
  std::istringstream in(read_file(path));
  return scoring::read_report_csv(in);
}

/// Fills label and kind of every report row from `labels`; the id sets must
/// agree (segments count under their base id).
void attach_labels(std::vector<scoring::ReportRow>& rows, const std::vector<synth::Label>& labels) {
  const auto by_id = labels_by_id(labels);
  std::set<std::string> seen;
  for (auto& row : rows) {
    const std::string id = pipeline::base_id(row.id);
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw InputError("id mismatch: report id '" + row.id + "' has no label");
    row.label = it->second.anomalous;
    row.kind = it->second.spec ? synth::kind_name(it->second.spec->kind) : std::string();
    seen.insert(id);
  }
  for (const auto& l : labels)
    if (!seen.count(l.id)) throw InputError("id mismatch: label id '" + l.id + "' is not in the report");
}

/// Pairs trajectories by id; positions in metres about the real data's
/// first point, flattened as x then y per point.
scoring::RegressionErrors position_errors(const std::vector<Trajectory>& real, const std::vector<Trajectory>& gen) {
  if (real.empty()) throw InputError("eval: no real trajectories");
  std::map<std::string, const Trajectory*> by_id;
  for (const auto& t : gen) by_id.emplace(t.id, &t);
  const geodata::TrajPoint& o = real.front().points.front();
  const geodata::LocalProjection proj(o.lat, o.lon);
  std::vector<double> y, y_hat;
  for (const auto& t : real) {
    const auto it = by_id.find(t.id);
    if (it == by_id.end()) throw InputError("id mismatch: '" + t.id + "' has no generated counterpart");
    if (it->second->points.size() != t.points.size()) throw InputError("eval: length mismatch for '" + t.id + "'");
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const auto a = proj.forward(t.points[i].lat, t.points[i].lon);
      const auto b = proj.forward(it->second->points[i].lat, it->second->points[i].lon);
      y.insert(y.end(), {a.x, a.y});
      y_hat.insert(y_hat.end(), {b.x, b.y});
    }
  }
  if (by_id.size() != real.size()) throw InputError("id mismatch: generated set has extra trajectories");
  return scoring::regression_errors(y, y_hat);
}

int cmd_eval(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  require(o.report, "--report");
  std::vector<scoring::ReportRow> rows = load_report(o.report);
  if (!o.labels.empty()) attach_labels(rows, load_labels(o.labels));
  std::vector<bool> flags, truth;
  std::vector<double> scores;
  for (const auto& r : rows) {
    if (!r.label) throw InputError("eval: report row '" + r.id + "' has no label; pass --labels");
    flags.push_back(r.flag);
    truth.push_back(*r.label);
    scores.push_back(r.e_delta);
  }
  std::vector<scoring::Section> sections;
  scoring::Section cls = scoring::confusion_section(scoring::confusion_metrics(flags, truth));
  cls.add("auc", scoring::roc_auc(scores, truth));
  sections.push_back(std::move(cls));

  std::map<std::string, std::pair<std::size_t, std::size_t>> per_kind;  // flagged, total
  for (const auto& r : rows) {
    if (r.kind.empty()) continue;
    auto& [hit, n] = per_kind[r.kind];
    hit += r.flag ? 1 : 0;
    ++n;
  }
  if (!per_kind.empty()) {
    scoring::Section k{"recall_by_kind", {}};
    for (const auto& [kind, c] : per_kind) k.add(kind, static_cast<double>(c.first) / static_cast<double>(c.second));
    sections.push_back(std::move(k));
  }
  if (!o.real.empty() || !o.generated.empty()) {
    require(o.real, "--real");
    require(o.generated, "--generated");
    const auto real = load_trajectories(o.real);
    const auto gen = load_trajectories(o.generated);
    sections.push_back(scoring::regression_section("position_error_m", position_errors(real, gen)));
    const scoring::GeoErrors g = scoring::geo_distribution_errors(real, gen);
    scoring::Section geo{"geo", {}};
    geo.add("density_error", g.density);
    geo.add("trip_error", g.trip);
    geo.add("length_error", g.length);
    geo.add("clamped_points", g.clamped);
    sections.push_back(std::move(geo));
  }

  Outputs outputs;
  const fs::path dir(o.out);
  outputs.make_dir(dir);
  outputs.write(dir / "metrics.ini", sections_text(sections));
  outputs.commit();
  scoring::write_sections(out, sections);
  return kOk;
}

/// key = value pairs of an INI-like file, section names dropped.
std::map<std::string, std::string> read_keys(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.starts_with('[')) continue;
    kv[csv::trim(line.substr(0, eq))] = csv::trim(line.substr(eq + 1));
  }
  return kv;
}

int cmd_report(const Options& o, std::ostream& out) {
  require(o.run_dir, "--run");
  const fs::path run(o.run_dir);
  const auto keys = read_keys(read_file((run / "detect.ini").string()));
  std::vector<scoring::ReportRow> rows = load_report((run / "report.csv").string());
  const std::string labels_path = o.labels.empty() && keys.count("labels") ? keys.at("labels") : o.labels;
  if (!labels_path.empty()) attach_labels(rows, load_labels(labels_path));
  const std::string data_path = !o.data.empty() ? o.data : keys.count("data") ? keys.at("data") : std::string();
  require(data_path, "--data");
  const auto data = load_trajectories(data_path);

  std::map<std::string, const scoring::ReportRow*> row_of;
  for (const auto& r : rows) row_of.emplace(pipeline::base_id(r.id), &r);
  // class name -> (bearing changes, E_delta values)
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> classes;
  for (const Trajectory& t : data) {
    const auto it = row_of.find(t.id);
    if (it == row_of.end()) throw InputError("id mismatch: trajectory '" + t.id + "' is not in the report");
    const scoring::ReportRow& r = *it->second;
    std::vector<std::string> names{r.label ? (*r.label ? "anomalous" : "normal") : "unlabelled"};
    if (!r.kind.empty()) names.push_back(r.kind);
    const std::vector<double> changes = scoring::bearing_changes(t);
    for (const auto& name : names) {
      auto& c = classes[name];
      c.first.insert(c.first.end(), changes.begin(), changes.end());
      c.second.push_back(r.e_delta);
    }
  }

  Outputs outputs;
  const fs::path dir = o.out.empty() ? run : fs::path(o.out);
  outputs.make_dir(dir);
  std::vector<scoring::Section> sections;
  for (const auto& [name, c] : classes) {
    std::ostringstream hist;
    scoring::write_histogram(hist, "bearing_change_deg", c.first, 0.0, 180.0, 18);
    outputs.write(dir / ("bearing_" + name + ".csv"), hist.str());
    const double tail = c.first.empty() ? 0.0
                                        : static_cast<double>(std::count_if(c.first.begin(), c.first.end(),
                                                                            [](double d) { return d > 90.0; })) /
                                              static_cast<double>(c.first.size());
    scoring::Section s{name, {}};
    s.add("trajectories", c.second.size());
    s.add("bearing_changes", c.first.size());
    s.add("fraction_over_90deg", tail);
    s.add("e_delta_median", scoring::median(c.second));
    sections.push_back(std::move(s));
  }
  std::vector<double> all_scores;
  for (const auto& r : rows) all_scores.push_back(r.e_delta);
  const double hi = all_scores.empty() ? 1.0 : std::max(1e-12, *std::max_element(all_scores.begin(), all_scores.end()));
  std::ostringstream ehist;
  scoring::write_histogram(ehist, "e_delta", all_scores, 0.0, hi, 20);
  outputs.write(dir / "e_delta_hist.csv", ehist.str());
  outputs.write(dir / "summary.ini", sections_text(sections));
  outputs.commit();
  scoring::write_sections(out, sections);
  return kOk;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "run configuration (INI)");
  cmd->add_option("--seed", o.seed, "global seed");
  cmd->add_option("--out", o.out, "output path");
}

void add_model_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--t-star", o.t_star, "reconstruction depth (0 = T/4)");
  cmd->add_option("--eta", o.eta, "sampler stochasticity");
  cmd->add_option("--stride", o.stride, "reverse step stride");
  cmd->add_flag("--no-context", o.no_context, "ignore neighbour context");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Physics-informed diffusion trajectory anomaly detection", "kinodiff"};
  app.require_subcommand(1, 1);

  auto* ingest = app.add_subcommand("ingest", "parse raw tracks into canonical CSV");
  add_common(ingest, o);
  ingest->add_option("--format", o.format, "ais-csv | geolife-plt | canonical");
  ingest->add_option("--in", o.inputs, "input files")->expected(1, -1);

  auto* synth_cmd = app.add_subcommand("synth", "generate KBM normals with injected anomalies");
  add_common(synth_cmd, o);

  auto* train = app.add_subcommand("train", "train the denoiser");
  add_common(train, o);
  add_model_flags(train, o);
  train->add_option("--data", o.data, "canonical trajectory CSV");
  train->add_option("--labels", o.labels, "labels CSV; anomalous ids are skipped");
  train->add_option("--steps", o.steps, "training steps");
  train->add_flag("--no-kbm", o.no_kbm, "drop the physics loss");
  train->add_option("--init-from", o.init_from, "continue from a checkpoint");

  auto* detect = app.add_subcommand("detect", "score trajectories and flag anomalies");
  add_common(detect, o);
  add_model_flags(detect, o);
  detect->add_option("--checkpoint", o.checkpoint, "trained model");
  detect->add_option("--data", o.data, "canonical trajectory CSV");
  detect->add_option("--labels", o.labels, "labels CSV (optional)");
  detect->add_option("--lambda", o.lambda, "explicit threshold");
  detect->add_option("--lambda-percentile", o.lambda_percentile, "threshold percentile of the scored set");

  auto* eval = app.add_subcommand("eval", "classification, regression and geo metrics");
  add_common(eval, o);
  eval->add_option("--report", o.report, "detection report CSV");
  eval->add_option("--labels", o.labels, "labels CSV");
  eval->add_option("--real", o.real, "reference trajectories");
  eval->add_option("--generated", o.generated, "generated or reconstructed trajectories");

  auto* report = app.add_subcommand("report", "histograms and tables for a detection run");
  add_common(report, o);
  report->add_option("--run", o.run_dir, "detect output directory");
  report->add_option("--data", o.data, "trajectories (default: from detect.ini)");
  report->add_option("--labels", o.labels, "labels (default: from detect.ini)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*ingest) return cmd_ingest(o, out);
    if (*synth_cmd) return cmd_synth(o, out);
    if (*train) return cmd_train(o, out);
    if (*detect) return cmd_detect(o, out);
    if (*eval) return cmd_eval(o, out);
    if (*report) return cmd_report(o, out);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const ShapeError& e) {
    err << "shape error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace kinodiff::cli
