#include <fstream>
#include <sstream>

#include "doctest.h"
#include "kinodiff/common/error.hpp"
#include "kinodiff/config/run_config.hpp"

using namespace kinodiff;
using namespace kinodiff::config;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("serialization round-trips") {
  for (const RunConfig& c : {RunConfig{}, desk_config()}) {
    const std::string text = serialize_config(c);
    CHECK(serialize_config(parse_config(text)) == text);
    CHECK(config_digest(parse_config(text)) == config_digest(c));
  }
  RunConfig c = desk_config();
  c.seed = 123456789012345ULL;
  c.detect.lambda = 0.0125;
  c.sampler.mode = diffusion::SamplerMode::ancestral;
  c.data.canonical.mode = geodata::NormMode::z_score;
  c.model.kinematic_source = denoiser::KinematicSource::finite_difference;
  c.synth.dataset.kind_mix = {{synth::AnomalyKind::bearing, 0.75}, {synth::AnomalyKind::drift, 0.25}};
  c.loss.gamma3 = 1.0 / 3.0;
  const RunConfig back = parse_config(serialize_config(c));
  CHECK(serialize_config(back) == serialize_config(c));
  CHECK(back.seed == c.seed);
  CHECK(back.detect.lambda == c.detect.lambda);
  CHECK(back.loss.gamma3 == c.loss.gamma3);
  CHECK(back.sampler == c.sampler);
  CHECK(back.model == c.model);
  CHECK(back.synth.dataset.kind_mix == c.synth.dataset.kind_mix);
}

TEST_CASE("shipped desk configuration matches the built-in one") {
  CHECK(read_text(std::string(KINODIFF_SOURCE_DIR) + "/configs/desk.ini") == serialize_config(desk_config()));
  const RunConfig d = desk_config();
  CHECK(d.schedule.steps == 50);
  CHECK(d.model.sampling_blocks == 2);
  CHECK_NOTHROW(d.validate());
}

TEST_CASE("partial files fall back to defaults") {
  const RunConfig c = parse_config("[run]\nseed=9\n\n[train]\nsteps=7\n");
  CHECK(c.seed == 9);
  CHECK(c.train.steps == 7);
  CHECK(c.schedule.steps == RunConfig{}.schedule.steps);
  CHECK(parse_config("").seed == 0);
}

TEST_CASE("strict parsing") {
  CHECK_THROWS_AS(parse_config("[run]\nseed=1\nunknown=2\n"), InputError);
  CHECK_THROWS_AS(parse_config("[nowhere]\nx=1\n"), InputError);
  CHECK_THROWS_AS(parse_config("[train]\nsteps=abc\n"), InputError);
  CHECK_THROWS_AS(parse_config("[train]\nsteps=-3\n"), InputError);
  CHECK_THROWS_AS(parse_config("[loss]\nsnr_weighting=maybe\n"), InputError);
  CHECK_THROWS_AS(parse_config("[loss]\ngamma1=nan\n"), InputError);
  CHECK_THROWS_AS(parse_config("[run]\nseed=1\nseed=2\n"), InputError);
  CHECK_THROWS_AS(parse_config("seed=1\n"), InputError);
  CHECK_THROWS_AS(parse_config("[run\nseed=1\n"), InputError);
  CHECK_THROWS_AS(load_config("/nonexistent/kinodiff.ini"), InputError);
}

TEST_CASE("validation rejects inconsistent values") {
  CHECK_THROWS_AS(parse_config("[synth]\nrate=1.5\n"), InputError);
  CHECK_THROWS_AS(parse_config("[sampler]\nstride=0\n"), InputError);
  CHECK_THROWS_AS(parse_config("[schedule]\nT=50\n\n[sampler]\nt_star=51\n"), InputError);
  CHECK_THROWS_AS(parse_config("[schedule]\nbeta1=0.5\nbetaT=0.1\n"), InputError);
  CHECK_THROWS_AS(parse_config("[model]\nwidth=30\nheads=4\n"), InputError);
  CHECK_THROWS_AS(parse_config("[loss]\ngamma2=-1\n"), InputError);
  CHECK_THROWS_AS(parse_config("[synth]\nkind_mix=speed:0.5\n"), InputError);
  CHECK_THROWS_AS(parse_config("[detect]\nlambda=-1\n"), InputError);
}

TEST_CASE("digest tracks every value") {
  const RunConfig a = desk_config();
  RunConfig b = a;
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a).size() == 16);
  b.train.adam.learning_rate *= 1.0000001;
  CHECK(config_digest(a) != config_digest(b));
}

}  // TEST_SUITE
