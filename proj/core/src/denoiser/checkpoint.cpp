#include "kinodiff/denoiser/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "kinodiff/common/error.hpp"

namespace kinodiff::denoiser {

using nlohmann::json;
using numerics::Tensor;

namespace {

constexpr char kMagic[8] = {'K', 'D', 'I', 'F', 'F', 'C', 'K', 'P'};

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(reinterpret_cast<const char*>(buf), sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
  }

  std::string take(std::size_t len) {
    need(len);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t len) const {
    if (bytes_.size() - pos_ < len) throw InputError("checkpoint is truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

json config_to_json(const DenoiserConfig& c) {
  return {{"features", c.features},       {"width", c.width},
          {"heads", c.heads},             {"sampling_blocks", c.sampling_blocks},
          {"resnet_blocks", c.resnet_blocks}, {"kernel", c.kernel},
          {"max_context", c.max_context}, {"kappa_max", c.kappa_max},
          {"a_max", c.a_max},             {"guidance", c.guidance},
          {"kinematic_source", kinematic_source_name(c.kinematic_source)}};
}

DenoiserConfig config_from_json(const json& j) {
  DenoiserConfig c;
  c.features = j.at("features").get<std::size_t>();
  c.width = j.at("width").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.sampling_blocks = j.at("sampling_blocks").get<std::size_t>();
  c.resnet_blocks = j.at("resnet_blocks").get<std::size_t>();
  c.kernel = j.at("kernel").get<std::size_t>();
  c.max_context = j.at("max_context").get<std::size_t>();
  c.kappa_max = j.at("kappa_max").get<double>();
  c.a_max = j.at("a_max").get<double>();
  c.guidance = j.at("guidance").get<double>();
  c.kinematic_source = parse_kinematic_source(j.at("kinematic_source").get<std::string>());
  return c;
}

json normalizer_to_json(const geodata::Normalizer& n) {
  return {{"mode", geodata::norm_mode_name(n.mode())},
          {"lat0", n.projection().lat0()},
          {"lon0", n.projection().lon0()},
          {"center", n.centers()},
          {"half_range", n.half_ranges()}};
}

geodata::Normalizer normalizer_from_json(const json& j) {
  return geodata::Normalizer(geodata::parse_norm_mode(j.at("mode").get<std::string>()),
                             geodata::LocalProjection(j.at("lat0").get<double>(), j.at("lon0").get<double>()),
                             j.at("center").get<std::array<double, geodata::kFeatureCount>>(),
                             j.at("half_range").get<std::array<double, geodata::kFeatureCount>>());
}

void put_blob(std::string& out, const std::string& name, const Tensor& t) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) put<std::uint64_t>(out, d);
  for (double v : t.data()) put<double>(out, v);
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  json header;
  header["model"] = config_to_json(ck.params.config);
  header["normalizer"] = ck.normalizer ? normalizer_to_json(*ck.normalizer) : json(nullptr);
  header["schedule"] = {{"steps", ck.schedule.steps},
                        {"beta_start", ck.schedule.beta_start},
                        {"beta_end", ck.schedule.beta_end},
                        {"digest", ck.schedule.digest}};
  header["step"] = ck.step;
  header["run_config"] = ck.run_config;
  if (ck.optimizer) {
    const auto& c = ck.optimizer->config;
    header["optimizer"] = {{"learning_rate", c.learning_rate}, {"beta1", c.beta1}, {"beta2", c.beta2},
                           {"epsilon", c.epsilon},             {"step", ck.optimizer->step}};
  } else {
    header["optimizer"] = nullptr;
  }
  const std::string text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  std::uint32_t count = static_cast<std::uint32_t>(ck.params.tensors.size());
  if (ck.optimizer) count += static_cast<std::uint32_t>(ck.optimizer->first_moment.size() + ck.optimizer->second_moment.size());
  put<std::uint32_t>(out, count);
  for (const auto& [name, t] : ck.params.tensors) put_blob(out, name, t);
  if (ck.optimizer) {
    for (const auto& [name, t] : ck.optimizer->first_moment) put_blob(out, "adam.m/" + name, t);
    for (const auto& [name, t] : ck.optimizer->second_moment) put_blob(out, "adam.v/" + name, t);
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (in.take(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) throw InputError("not a checkpoint file");
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw InputError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = in.get<std::uint64_t>();
  Checkpoint ck;
  json header;
  try {
    header = json::parse(in.take(header_len));
    ck.params.config = config_from_json(header.at("model"));
    if (!header.at("normalizer").is_null()) {
      ck.normalizer = std::make_shared<const geodata::Normalizer>(normalizer_from_json(header.at("normalizer")));
    }
    const json& s = header.at("schedule");
    ck.schedule = {s.at("steps").get<std::size_t>(), s.at("beta_start").get<double>(), s.at("beta_end").get<double>(),
                   s.at("digest").get<std::string>()};
    ck.step = header.at("step").get<std::uint64_t>();
    ck.run_config = header.at("run_config").get<std::string>();
    if (!header.at("optimizer").is_null()) {
      const json& o = header.at("optimizer");
      numerics::OptimState st;
      st.config = {o.at("learning_rate").get<double>(), o.at("beta1").get<double>(), o.at("beta2").get<double>(),
                   o.at("epsilon").get<double>()};
      st.step = o.at("step").get<std::uint64_t>();
      ck.optimizer = std::move(st);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("checkpoint header is malformed: ") + e.what());
  }

  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t b = 0; b < count; ++b) {
    const std::string name = in.take(in.get<std::uint32_t>());
    const auto rank = in.get<std::uint32_t>();
    if (rank > 8) throw InputError("checkpoint blob '" + name + "' has an implausible rank");
    numerics::Shape shape(rank);
    for (auto& d : shape) d = in.get<std::uint64_t>();
    const std::size_t size = numerics::shape_size(shape);
    if (size > bytes.size() / sizeof(double)) throw InputError("checkpoint blob '" + name + "' is truncated");
    std::vector<double> data(size);
    for (double& v : data) v = in.get<double>();
    Tensor t(shape, std::move(data));
    if (name.starts_with("adam.m/") || name.starts_with("adam.v/")) {
      if (!ck.optimizer) throw InputError("checkpoint has optimizer moments but no optimizer header");
      auto& dst = name[5] == 'm' ? ck.optimizer->first_moment : ck.optimizer->second_moment;
      dst.emplace(name.substr(7), std::move(t));
    } else {
      ck.params.tensors.emplace(name, std::move(t));
    }
  }
  if (!in.done()) throw InputError("checkpoint has trailing bytes");
  check_params(ck.params);
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write checkpoint '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("failed writing checkpoint '" + path + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw InputError("cannot move checkpoint into '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace kinodiff::denoiser
