#include "kinodiff/config/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "kinodiff/common/csv.hpp"
#include "kinodiff/common/error.hpp"
#include "kinodiff/common/format.hpp"

namespace kinodiff::config {

namespace pt = boost::property_tree;

namespace {

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt_bool(bool v) { return v ? "true" : "false"; }

std::size_t to_size(const std::string& key, const std::string& s) {
  const std::string t = csv::trim(s);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    throw InputError("config: '" + key + "' must be a non-negative integer, got '" + s + "'");
  }
  try {
    return static_cast<std::size_t>(std::stoull(t));
  } catch (const std::exception&) {
    throw InputError("config: '" + key + "' is out of range");
  }
}

double to_double(const std::string& key, const std::string& s) {
  try {
    return parse_double(s);
  } catch (const InputError&) {
    throw InputError("config: '" + key + "' must be a number, got '" + s + "'");
  }
}

bool to_bool(const std::string& key, const std::string& s) {
  const std::string t = csv::trim(s);
  if (t == "true") return true;
  if (t == "false") return false;
  throw InputError("config: '" + key + "' must be true or false, got '" + s + "'");
}

std::string kind_mix_text(const std::map<synth::AnomalyKind, double>& mix) {
  std::string out;
  for (const auto& [k, w] : mix) {
    if (!out.empty()) out += ' ';
    out += synth::kind_name(k) + ':' + fmt(w);
  }
  return out;
}

std::map<synth::AnomalyKind, double> parse_kind_mix(const std::string& s) {
  std::map<synth::AnomalyKind, double> mix;
  std::istringstream in(s);
  std::string item;
  while (in >> item) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw InputError("config: kind_mix entries look like kind:weight");
    mix[synth::parse_kind(item.substr(0, colon))] = to_double("kind_mix", item.substr(colon + 1));
  }
  if (mix.empty()) throw InputError("config: kind_mix is empty");
  return mix;
}

/// A key with a getter (serialization) and a setter (parsing).
struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

struct SectionSpec {
  std::string name;
  std::vector<Field> fields;
};

#define KD_SIZE(key, expr)                                                                   \
  Field {                                                                                    \
    key, [](const RunConfig& c) { return fmt(static_cast<std::size_t>(c.expr)); },           \
        [](RunConfig& c, const std::string& v) { c.expr = to_size(key, v); }                 \
  }
#define KD_DOUBLE(key, expr)                                                                 \
  Field {                                                                                    \
    key, [](const RunConfig& c) { return fmt(static_cast<double>(c.expr)); },                \
        [](RunConfig& c, const std::string& v) { c.expr = to_double(key, v); }               \
  }
#define KD_BOOL(key, expr)                                                                   \
  Field {                                                                                    \
    key, [](const RunConfig& c) { return fmt_bool(c.expr); },                                \
        [](RunConfig& c, const std::string& v) { c.expr = to_bool(key, v); }                 \
  }

const std::vector<SectionSpec>& layout() {
  static const std::vector<SectionSpec> sections = {
      {"run",
       {Field{"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
              [](RunConfig& c, const std::string& v) { c.seed = to_size("seed", v); }}}},
      {"schedule",
       {KD_SIZE("T", schedule.steps), KD_DOUBLE("beta1", schedule.beta_start), KD_DOUBLE("betaT", schedule.beta_end)}},
      {"sampler",
       {Field{"mode", [](const RunConfig& c) { return diffusion::sampler_mode_name(c.sampler.mode); },
              [](RunConfig& c, const std::string& v) { c.sampler.mode = diffusion::parse_sampler_mode(csv::trim(v)); }},
        KD_DOUBLE("eta", sampler.eta), KD_SIZE("stride", sampler.stride), KD_SIZE("t_star", sampler.t_star),
        KD_SIZE("repeats", sampler.repeats)}},
      {"loss",
       {KD_DOUBLE("gamma1", loss.gamma1), KD_DOUBLE("gamma2", loss.gamma2), KD_DOUBLE("gamma3", loss.gamma3),
        KD_DOUBLE("w1", loss.w.w1), KD_DOUBLE("w2", loss.w.w2), KD_DOUBLE("w3", loss.w.w3), KD_DOUBLE("w4", loss.w.w4),
        KD_BOOL("snr_weighting", train.snr_weighting)}},
      {"model",
       {KD_SIZE("width", model.width), KD_SIZE("heads", model.heads), KD_SIZE("sampling_blocks", model.sampling_blocks),
        KD_SIZE("resnet_blocks", model.resnet_blocks), KD_SIZE("kernel", model.kernel),
        KD_SIZE("max_context", model.max_context), KD_DOUBLE("kappa_max", model.kappa_max),
        KD_DOUBLE("a_max", model.a_max), KD_DOUBLE("guidance", model.guidance),
        Field{"kinematic_source",
              [](const RunConfig& c) { return denoiser::kinematic_source_name(c.model.kinematic_source); },
              [](RunConfig& c, const std::string& v) {
                c.model.kinematic_source = denoiser::parse_kinematic_source(csv::trim(v));
              }}}},
      {"data",
       {KD_SIZE("length", data.canonical.length),
        Field{"normalization", [](const RunConfig& c) { return geodata::norm_mode_name(c.data.canonical.mode); },
              [](RunConfig& c, const std::string& v) { c.data.canonical.mode = geodata::parse_norm_mode(csv::trim(v)); }},
        KD_DOUBLE("gap_factor", data.canonical.gap_factor), KD_BOOL("recorded_speed", data.canonical.use_recorded_speed),
        KD_DOUBLE("context_radius", data.context_radius)}},
      {"train",
       {KD_SIZE("steps", train.steps), KD_SIZE("batch_size", train.batch_size),
        KD_DOUBLE("learning_rate", train.adam.learning_rate), KD_DOUBLE("adam_beta1", train.adam.beta1),
        KD_DOUBLE("adam_beta2", train.adam.beta2), KD_DOUBLE("adam_epsilon", train.adam.epsilon),
        KD_SIZE("checkpoint_every", train.checkpoint_every)}},
      {"synth",
       {KD_SIZE("count", synth.count), KD_SIZE("points", synth.generate.n), KD_DOUBLE("dt", synth.generate.dt),
        KD_DOUBLE("smoothness", synth.generate.control_smoothness), KD_DOUBLE("origin_lat", synth.generate.origin_lat),
        KD_DOUBLE("origin_lon", synth.generate.origin_lon), KD_DOUBLE("spread", synth.generate.spread),
        KD_DOUBLE("t0", synth.generate.t0), KD_DOUBLE("v_min", synth.generate.v_min),
        KD_DOUBLE("v_max", synth.generate.v_max), KD_DOUBLE("kappa_init", synth.generate.kappa_init),
        KD_DOUBLE("kappa_rate", synth.generate.kappa_rate),
        KD_DOUBLE("kappa_reversion", synth.generate.kappa_reversion), KD_DOUBLE("a_rate", synth.generate.a_rate),
        KD_DOUBLE("a_reversion", synth.generate.a_reversion), KD_DOUBLE("speed_pull", synth.generate.speed_pull),
        KD_DOUBLE("kappa_max", synth.generate.params.kappa_max), KD_DOUBLE("a_max", synth.generate.params.a_max),
        KD_DOUBLE("wheelbase", synth.generate.params.wheelbase), KD_DOUBLE("rate", synth.dataset.rate),
        Field{"kind_mix", [](const RunConfig& c) { return kind_mix_text(c.synth.dataset.kind_mix); },
              [](RunConfig& c, const std::string& v) { c.synth.dataset.kind_mix = parse_kind_mix(v); }},
        KD_SIZE("window_min", synth.dataset.window_min), KD_SIZE("window_max", synth.dataset.window_max),
        KD_DOUBLE("speed_min", synth.dataset.ranges.speed.lo), KD_DOUBLE("speed_max", synth.dataset.ranges.speed.hi),
        KD_DOUBLE("speed_exclusion", synth.dataset.ranges.speed_exclusion),
        KD_DOUBLE("bearing_min_deg", synth.dataset.ranges.bearing.lo),
        KD_DOUBLE("bearing_max_deg", synth.dataset.ranges.bearing.hi),
        KD_DOUBLE("drift_min", synth.dataset.ranges.drift.lo), KD_DOUBLE("drift_max", synth.dataset.ranges.drift.hi)}},
      {"detect",
       {Field{"lambda", [](const RunConfig& c) { return c.detect.lambda ? fmt(*c.detect.lambda) : std::string(); },
              [](RunConfig& c, const std::string& v) {
                if (csv::trim(v).empty()) {
                  c.detect.lambda.reset();
                } else {
                  c.detect.lambda = to_double("lambda", v);
                }
              }},
        KD_DOUBLE("lambda_percentile", detect.lambda_percentile),
        Field{"score_channels",
              [](const RunConfig& c) {
                return std::string(c.detect.channels == scoring::ScoreChannels::all ? "all" : "position");
              },
              [](RunConfig& c, const std::string& v) {
                const std::string t = csv::trim(v);
                if (t == "all") {
                  c.detect.channels = scoring::ScoreChannels::all;
                } else if (t == "position") {
                  c.detect.channels = scoring::ScoreChannels::position;
                } else {
                  throw InputError("config: score_channels must be all or position");
                }
              }}}},
  };
  return sections;
}

#undef KD_SIZE
#undef KD_DOUBLE
#undef KD_BOOL

}  // namespace

void RunConfig::validate() const {
  schedule.build();
  sampler.validate(schedule.steps);
  loss.validate();
  model.validate();
  train.validate();
  if (model.features != geodata::kFeatureCount) throw InputError("config: the model must use " + std::to_string(geodata::kFeatureCount) + " features");
  if (data.canonical.length < 3) throw InputError("config: data length must be >= 3");
  if (model.kernel > data.canonical.length) throw InputError("config: kernel exceeds the data length");
  if (!(data.context_radius > 0.0)) throw InputError("config: context_radius must be > 0");
  if (!(data.canonical.gap_factor > 1.0)) throw InputError("config: gap_factor must be > 1");
  try {
    synth.dataset.validate();
  } catch (const InputError& e) {
    throw InputError(std::string("config: synth ") + e.what());
  }
  if (synth.generate.n < 2 || !(synth.generate.dt > 0.0)) throw InputError("config: synth needs points >= 2 and dt > 0");
  if (detect.lambda && !(*detect.lambda >= 0.0)) throw InputError("config: lambda must be >= 0");
  if (!(detect.lambda_percentile >= 0.0 && detect.lambda_percentile <= 100.0)) {
    throw InputError("config: lambda_percentile must be in [0, 100]");
  }
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    const auto spec = std::find_if(layout().begin(), layout().end(),
                                   [&](const SectionSpec& s) { return s.name == section; });
    if (spec == layout().end()) throw InputError("config: unknown section [" + section + "]");
    if (!body.data().empty()) throw InputError("config: '" + section + "' must be a section");
    for (const auto& [key, value] : body) {
      const auto field = std::find_if(spec->fields.begin(), spec->fields.end(),
                                      [&](const Field& f) { return f.key == key; });
      if (field == spec->fields.end()) throw InputError("config: unknown key '" + key + "' in [" + section + "]");
      field->set(c, value.data());
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& config) {
  std::ostringstream out;
  bool first = true;
  for (const SectionSpec& s : layout()) {
    if (!first) out << '\n';
    first = false;
    out << '[' << s.name << "]\n";
    for (const Field& f : s.fields) out << f.key << '=' << f.get(config) << '\n';
  }
  return out.str();
}

std::string config_digest(const RunConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig desk_config() {
  RunConfig c;
  c.schedule = {50, diffusion::kDefaultBetaStart * 20.0, diffusion::kDefaultBetaEnd * 20.0};
  c.sampler.stride = 1;
  c.sampler.t_star = 4;
  c.loss.gamma2 = 0.01;
  c.loss.gamma3 = 0.001;
  c.loss.w.w1 = 0.01;
  c.loss.w.w2 = 0.01;
  c.model.width = 32;
  c.model.heads = 2;
  c.model.sampling_blocks = 2;
  c.model.resnet_blocks = 2;
  c.model.kernel = 5;
  c.model.max_context = 3;
  c.data.canonical.length = 64;
  c.train.steps = 2000;
  c.train.batch_size = 8;
  c.train.adam.learning_rate = 2e-3;
  c.synth.count = 200;
  c.synth.generate.n = 64;
  return c;
}

}  // namespace kinodiff::config
