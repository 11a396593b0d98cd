#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "kbm_support.hpp"
#include "kinodiff/common/angles.hpp"
#include "kinodiff/common/error.hpp"
#include "kinodiff/geodata/geo.hpp"
#include "kinodiff/geodata/kinematics.hpp"
#include "kinodiff/kbm/kbm.hpp"
#include "kinodiff/synth/dataset.hpp"
#include "kinodiff/synth/inject.hpp"

using namespace kinodiff;
using namespace kinodiff::synth;
using geodata::Trajectory;

namespace {

Trajectory constant_speed_line(std::size_t n, double v) {
  const geodata::LocalProjection proj(10.0, 20.0);
  Trajectory t;
  t.id = "line";
  for (std::size_t i = 0; i < n; ++i) {
    const geodata::GeoPoint g = proj.inverse(v * static_cast<double>(i), 0.0);
    t.points.push_back({g.lat, g.lon, static_cast<double>(i), v});
  }
  return t;
}

std::vector<Trajectory> normals(std::size_t count, std::uint64_t seed, std::size_t n = 64) {
  numerics::Rng rng(seed);
  kbm::GenerateOptions gen;
  gen.n = n;
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < count; ++i) {
    Trajectory t = kbm::generate_normal(rng, gen);
    t.id = "n" + std::to_string(i);
    out.push_back(std::move(t));
  }
  return out;
}

double max_point_deviation(const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max({worst, std::abs(a.points[i].lat - b.points[i].lat), std::abs(a.points[i].lon - b.points[i].lon),
                      std::abs(a.points[i].t - b.points[i].t)});
  }
  return worst;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("speed injection scales derived speed by 1/u") {
  const Trajectory t = constant_speed_line(60, 10.0);
  const Injected inj = inject(t, {AnomalyKind::speed, 0.5, 10, 30, 1});
  geodata::KinematicsOptions opt;
  opt.use_recorded_speed = false;
  const Trajectory k = geodata::derive_kinematics(inj.traj, opt);
  for (std::size_t i = 10; i + 1 < 30; ++i) CHECK(k.derived.speed[i] == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(k.derived.speed[5] == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(k.derived.speed[40] == doctest::Approx(10.0).epsilon(1e-6));
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(inj.traj.points[i].lat == t.points[i].lat);
    CHECK(inj.traj.points[i].lon == t.points[i].lon);
    if (i > 0) CHECK(inj.traj.points[i].t > inj.traj.points[i - 1].t);
  }
}

TEST_CASE("bearing injection inserts a turn of more than 90 degrees") {
  const Trajectory t = constant_speed_line(60, 10.0);
  const Injected inj = inject(t, {AnomalyKind::bearing, 120.0, 20, 30, 1});
  CHECK(inj.spec.window_end == 60);
  const Trajectory k = geodata::derive_kinematics(inj.traj);
  double worst = 0.0;
  for (std::size_t i = 1; i < k.size(); ++i) {
    worst = std::max(worst, std::abs(wrap_to_pi(k.derived.bearing[i] - k.derived.bearing[i - 1])));
  }
  CHECK(rad_to_deg(worst) >= 90.0);
  CHECK(rad_to_deg(worst) == doctest::Approx(120.0).epsilon(1e-3));
  // The rotated suffix keeps its own shape, up to the local projection's
  // distortion of order (distance / earth radius) * tan(lat).
  const double before = geodata::haversine_distance(t.points[40].lat, t.points[40].lon, t.points[50].lat,
                                                    t.points[50].lon);
  const double after = geodata::haversine_distance(inj.traj.points[40].lat, inj.traj.points[40].lon,
                                                   inj.traj.points[50].lat, inj.traj.points[50].lon);
  CHECK(after == doctest::Approx(before).epsilon(1e-4));
}

TEST_CASE("drift injection accumulates linearly") {
  const Trajectory t = constant_speed_line(60, 10.0);
  const Injected inj = inject(t, {AnomalyKind::drift, 1.0, 10, 30, 1});
  for (std::size_t i = 10; i < 30; ++i) {
    const double d =
        geodata::haversine_distance(t.points[i].lat, t.points[i].lon, inj.traj.points[i].lat, inj.traj.points[i].lon);
    CHECK(d == doctest::Approx(static_cast<double>(i - 9)).epsilon(1e-6));
  }
  CHECK(inj.traj.points[30] == t.points[30]);
}

TEST_CASE("replay injection copies a donor segment") {
  const auto pool = normals(2, 3);
  const Injected inj = inject(pool[0], {AnomalyKind::replay, 0.5, 10, 30, 1}, {}, &pool[1]);
  CHECK(max_point_deviation(inj.traj, pool[0]) > 0.0);
  CHECK(inj.traj.points[10].t == pool[0].points[10].t);
  CHECK(inj.traj.points[29].t == pool[0].points[29].t);
  CHECK_THROWS_AS(inject(pool[0], {AnomalyKind::replay, 0.5, 10, 30, 1}), InputError);
}

TEST_CASE("injection errors") {
  const Trajectory t = constant_speed_line(60, 10.0);
  CHECK_THROWS_AS(inject(t, {AnomalyKind::drift, 1.0, 10, 14, 1}), InputError);
  CHECK_THROWS_AS(inject(t, {AnomalyKind::drift, 1.0, 50, 61, 1}), InputError);
  CHECK_THROWS_AS(inject(t, {AnomalyKind::drift, 5.0, 10, 30, 1}), InputError);
  CHECK_THROWS_AS(inject(t, {AnomalyKind::speed, 1.05, 10, 30, 1}), InputError);
  CHECK_THROWS_AS(inject(t, {AnomalyKind::bearing, 45.0, 10, 30, 1}), InputError);
  CHECK_THROWS_AS(parse_kind("teleport"), InputError);
}

TEST_CASE("sampled severities stay in range") {
  numerics::Rng rng(4);
  const SeverityRanges r;
  for (AnomalyKind k : {AnomalyKind::speed, AnomalyKind::bearing, AnomalyKind::drift, AnomalyKind::replay}) {
    for (int i = 0; i < 500; ++i) CHECK_NOTHROW(check_severity(k, sample_severity(k, r, rng)));
    CHECK_NOTHROW(check_severity(k, default_severity(k)));
  }
}

TEST_CASE("kinematic injections raise residuals at least tenfold") {
  numerics::Rng rng(21);
  kbm::GenerateOptions gen;
  gen.n = 64;
  for (int trial = 0; trial < 10; ++trial) {
    const kbm::GeneratedTrack src = kbm::generate_track(rng, gen);
    const kbm::GeneratedTrack donor = kbm::generate_track(rng, gen);
    const double base = kbm::kbm_residuals(testing::series_against_source(src.traj, src, gen)).max_abs();
    for (AnomalyKind k : {AnomalyKind::bearing, AnomalyKind::drift, AnomalyKind::replay}) {
      CAPTURE(kind_name(k));
      const Injected inj = inject(src.traj, {k, default_severity(k), 20, 40, 1}, {}, &donor.traj);
      const double hit = kbm::kbm_residuals(testing::series_against_source(inj.traj, src, gen)).max_abs();
      CHECK(hit >= 10.0 * base);
    }
  }
}

TEST_CASE("build_dataset counts and kinds") {
  const auto pool = normals(200, 1);
  for (double rate : {0.05, 0.10, 0.20}) {
    numerics::Rng rng(9);
    DatasetOptions opt;
    opt.rate = rate;
    const LabeledDataset ds = build_dataset(pool, opt, rng);
    REQUIRE(ds.labels.size() == 200);
    REQUIRE(ds.trajectories.size() == 200);
    CHECK(ds.anomalous_count() == anomalous_target(rate, 200));
    CHECK(std::abs(static_cast<double>(ds.anomalous_count()) / 200.0 - rate) <= 0.005);
  }
  CHECK(anomalous_target(0.05, 200) == 10);
  CHECK(anomalous_target(0.05, 201) == 11);

  numerics::Rng rng(9);
  DatasetOptions bearing_only;
  bearing_only.kind_mix = {{AnomalyKind::bearing, 1.0}};
  const LabeledDataset ds = build_dataset(pool, bearing_only, rng);
  for (const Label& l : ds.labels) {
    if (l.anomalous) CHECK(l.spec->kind == AnomalyKind::bearing);
  }

  DatasetOptions bad;
  bad.rate = 1.0;
  CHECK_THROWS_AS(build_dataset(pool, bad, rng), InputError);
  bad.rate = 0.0;
  CHECK_THROWS_AS(build_dataset(pool, bad, rng), InputError);
  bad.rate = 0.1;
  bad.kind_mix = {{AnomalyKind::speed, 0.5}};
  CHECK_THROWS_AS(build_dataset(pool, bad, rng), InputError);
}

TEST_CASE("injected trajectories differ and the rest are untouched") {
  const auto pool = normals(60, 2);
  numerics::Rng rng(3);
  DatasetOptions opt;
  opt.rate = 0.2;
  const LabeledDataset ds = build_dataset(pool, opt, rng);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    CHECK(ds.labels[i].id == pool[i].id);
    CHECK(ds.trajectories[i].id == pool[i].id);
    if (ds.labels[i].anomalous) {
      CHECK(max_point_deviation(ds.trajectories[i], pool[i]) > 0.0);
      if (ds.labels[i].spec->kind == AnomalyKind::speed) {
        for (std::size_t j = 0; j < pool[i].size(); ++j) {
          CHECK(ds.trajectories[i].points[j].lat == pool[i].points[j].lat);
          CHECK(ds.trajectories[i].points[j].lon == pool[i].points[j].lon);
        }
      }
    } else {
      CHECK(ds.trajectories[i] == pool[i]);
      CHECK_FALSE(ds.labels[i].spec.has_value());
    }
  }
}

TEST_CASE("dataset determinism and seed sensitivity") {
  const auto pool = normals(200, 1);
  auto subset = [&](std::uint64_t seed) {
    numerics::Rng rng(seed);
    const LabeledDataset ds = build_dataset(pool, {}, rng);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
      if (ds.labels[i].anomalous) idx.push_back(i);
    }
    return std::make_pair(idx, ds.labels);
  };
  std::set<std::vector<std::size_t>> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto a = subset(seed);
    CHECK(a.second == subset(seed).second);
    seen.insert(a.first);
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("labels csv round-trip") {
  const auto pool = normals(40, 6);
  numerics::Rng rng(1);
  DatasetOptions opt;
  opt.rate = 0.2;
  const LabeledDataset ds = build_dataset(pool, opt, rng);
  std::stringstream ss;
  write_labels(ss, ds.labels);
  CHECK(ss.str().rfind("id,label,kind,severity,window_start,window_end,seed", 0) == 0);
  CHECK(read_labels(ss) == ds.labels);
}

}  // TEST_SUITE
