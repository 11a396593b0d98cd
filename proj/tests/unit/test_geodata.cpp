#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "kinodiff/common/angles.hpp"
#include "kinodiff/common/error.hpp"
#include "kinodiff/geodata/canonical.hpp"
#include "kinodiff/geodata/geo.hpp"
#include "kinodiff/geodata/kinematics.hpp"
#include "kinodiff/geodata/neighbors.hpp"
#include "kinodiff/geodata/parse.hpp"
#include "kinodiff/kbm/kbm.hpp"
#include "kinodiff/numerics/rng.hpp"

using namespace kinodiff;
using namespace kinodiff::geodata;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(KINODIFF_TEST_DATA) + "/" + name, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Straight track heading east along a parallel, one fix per second.
Trajectory east_track(const std::string& id, double lat, std::size_t n, double speed, double t0 = 0.0) {
  const LocalProjection proj(lat, 0.0);
  Trajectory t;
  t.id = id;
  for (std::size_t i = 0; i < n; ++i) {
    const GeoPoint g = proj.inverse(speed * static_cast<double>(i), 0.0);
    t.points.push_back({g.lat, g.lon, t0 + static_cast<double>(i), speed});
  }
  return t;
}

Trajectory random_walk(numerics::Rng& rng, const std::string& id, std::size_t n) {
  const LocalProjection proj(45.0, 7.0);
  Trajectory t;
  t.id = id;
  double x = rng.uniform(-500, 500), y = rng.uniform(-500, 500), h = rng.uniform(-3, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = rng.uniform(3.0, 9.0);
    h += rng.normal() * 0.1;
    x += v * std::cos(h);
    y += v * std::sin(h);
    const GeoPoint g = proj.inverse(x, y);
    t.points.push_back({g.lat, g.lon, 100.0 + static_cast<double>(i), std::nullopt});
  }
  return t;
}

}  // namespace

TEST_SUITE("geodata") {

TEST_CASE("haversine and bearing oracles") {
  const double d = haversine_distance(0.0, 0.0, 1.0, 0.0);
  CHECK(d == doctest::Approx(kEarthRadius * std::numbers::pi / 180.0).epsilon(1e-12));
  CHECK(initial_bearing(0.0, 0.0, 1.0, 0.0) == doctest::Approx(0.0));
  CHECK(initial_bearing(0.0, 0.0, 0.0, 1.0) == doctest::Approx(std::numbers::pi / 2));
  CHECK(initial_bearing(0.0, 0.0, -1.0, 0.0) == doctest::Approx(std::numbers::pi));
  CHECK(bearing_to_heading(0.0) == doctest::Approx(std::numbers::pi / 2));
  CHECK(heading_to_bearing(bearing_to_heading(0.7)) == doctest::Approx(0.7));
}

TEST_CASE("equirectangular projection scales longitude by cos(lat0)") {
  const double x_eq = LocalProjection(0.0, 0.0).forward(0.0, 1.0).x;
  const double x_60 = LocalProjection(60.0, 0.0).forward(60.0, 1.0).x;
  CHECK(x_60 / x_eq == doctest::Approx(0.5).epsilon(1e-12));
  const LocalProjection p(37.0, -122.0);
  const PlanarPoint q = p.forward(37.01, -121.98);
  const GeoPoint back = p.inverse(q.x, q.y);
  CHECK(back.lat == doctest::Approx(37.01).epsilon(1e-14));
  CHECK(back.lon == doctest::Approx(-121.98).epsilon(1e-14));
}

TEST_CASE("ais parse drops invalid rows and converts knots") {
  const std::string csv =
      "MMSI,BaseDateTime,LAT,LON,SOG,COG\n"
      "1,2020-01-01T00:00:10,10.0,20.0,10,90\n"
      "1,2020-01-01T00:00:00,999,20.0,10,90\n"
      "1,2020-01-01T00:00:00,10.0,20.001,2,90\n";
  const ParseResult r = parse(Format::ais_csv, csv);
  REQUIRE(r.trajectories.size() == 1);
  const Trajectory& t = r.trajectories[0];
  CHECK(t.size() == 2);
  CHECK(r.stats.dropped_invalid == 1);
  CHECK(t.points[0].t < t.points[1].t);
  CHECK(*t.points[0].v == doctest::Approx(2.0 * 1852.0 / 3600.0));
}

TEST_CASE("ais duplicate timestamps are dropped and counted") {
  const std::string csv =
      "MMSI,BaseDateTime,LAT,LON,SOG,COG\n"
      "1,2020-01-01T00:00:00,10.0,20.0,10,90\n"
      "1,2020-01-01T00:00:00,10.0,20.1,10,90\n"
      "1,2020-01-01T00:00:05,10.0,20.2,10,90\n";
  const ParseResult r = parse(Format::ais_csv, csv);
  CHECK(r.trajectories.at(0).size() == 2);
  CHECK(r.stats.dropped_duplicate == 1);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_format("gpx"), InputError);
  CHECK_THROWS_AS(parse(Format::ais_csv, "MMSI,BaseDateTime,LAT,LON,SOG,COG\n1,x,999,0,0,0\n"), InputError);
  CHECK_THROWS_AS(parse(Format::ais_csv, "MMSI,LAT,LON\n1,0,0\n"), InputError);
}

TEST_CASE("ais fixture of three vessels gives three canonical trajectories") {
  const ParseResult r = parse(Format::ais_csv, read_fixture("ais_three_vessels.csv"));
  REQUIRE(r.trajectories.size() == 3);
  for (const Trajectory& t : r.trajectories) CHECK(t.size() == 5);
  CanonicalOptions opt;
  opt.length = 16;
  const CanonicalDataset ds = build_canonical(r.trajectories, opt);
  REQUIRE(ds.items.size() == 3);
  for (const CanonicalTraj& c : ds.items) {
    CHECK(c.length() == 16);
    CHECK(c.features.cols() == kFeatureCount);
    CHECK(c.features.all_finite());
  }
}

TEST_CASE("geolife plt fixture") {
  const ParseResult r = parse(Format::geolife_plt, read_fixture("geolife_five_fixes.plt"), "walk");
  REQUIRE(r.trajectories.size() == 1);
  const Trajectory& t = r.trajectories[0];
  CHECK(t.id == "walk");
  REQUIRE(t.size() == 5);
  for (std::size_t i = 1; i < 5; ++i) CHECK(t.points[i].t - t.points[i - 1].t == doctest::Approx(1.0));
  CHECK(t.points[0].lat == doctest::Approx(39.984702));
  CHECK_FALSE(t.points[0].v.has_value());
}

TEST_CASE("canonical csv round-trip is lossless") {
  numerics::Rng rng(5);
  std::vector<Trajectory> trajs{random_walk(rng, "a", 20), random_walk(rng, "b,quoted", 7)};
  trajs[0].points[3].v = 1.0 / 3.0;
  const ParseResult r = parse(Format::canonical, to_canonical_csv(trajs));
  REQUIRE(r.trajectories.size() == 2);
  CHECK(r.trajectories[0] == trajs[0]);
  CHECK(r.trajectories[1] == trajs[1]);
}

TEST_CASE("derive_kinematics examples") {
  Trajectory north{"n", {{0.0, 0.0, 0.0, {}}, {1.0, 0.0, 1000.0, {}}}, {}};
  const Trajectory kn = derive_kinematics(north);
  CHECK(kn.derived.speed[0] == doctest::Approx(111.32).epsilon(1e-4));
  CHECK(kn.derived.bearing[0] == doctest::Approx(0.0));
  CHECK(kn.derived.accel.empty());

  Trajectory east{"e", {{0.0, 0.0, 0.0, {}}, {0.0, 0.01, 10.0, {}}}, {}};
  CHECK(derive_kinematics(east).derived.bearing[0] == doctest::Approx(std::numbers::pi / 2));

  KinematicsOptions no_recorded;
  no_recorded.use_recorded_speed = false;
  Trajectory line = east_track("line", 0.0, 8, 5.0);
  const Trajectory kl = derive_kinematics(line, no_recorded);
  REQUIRE(kl.derived.jerk.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(kl.derived.speed[i] == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(std::abs(kl.derived.accel[i]) < 1e-9);
    CHECK(std::abs(kl.derived.jerk[i]) < 1e-9);
    CHECK(std::abs(kl.derived.curvature[i]) < 1e-9);
  }

  Trajectory repeated = line;
  repeated.points[2].t = repeated.points[1].t;
  CHECK_THROWS_AS(derive_kinematics(repeated), InputError);

  Trajectory parked{"p", {{1.0, 1.0, 0.0, {}}, {1.0, 1.0, 1.0, {}}, {1.0, 1.0, 2.0, {}}}, {}};
  const Trajectory kp = derive_kinematics(parked);
  for (double c : kp.derived.curvature) CHECK(c == 0.0);
}

TEST_CASE("derive_kinematics recovers integrator speed and heading") {
  numerics::Rng rng(11);
  kbm::GenerateOptions gen;
  gen.n = 120;
  gen.dt = 1.0;
  KinematicsOptions opt;
  opt.differencing = Differencing::central;
  opt.use_recorded_speed = false;
  for (int k = 0; k < 10; ++k) {
    const kbm::GeneratedTrack track = kbm::generate_track(rng, gen);
    const Trajectory t = derive_kinematics(track.traj, opt);
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
      const kbm::KbmState& s = track.states[i];
      CHECK(std::abs(t.derived.speed[i] - s.v) <= 0.01 * s.v);
      CHECK(std::abs(wrap_to_pi(bearing_to_heading(t.derived.bearing[i]) - s.psi)) <= 0.01);
    }
  }
}

TEST_CASE("split_gaps") {
  Trajectory t = east_track("v", 10.0, 8, 3.0);
  for (std::size_t i = 4; i < 8; ++i) t.points[i].t += 500.0;
  const auto parts = split_gaps(t, 10.0);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].id == "v#0");
  CHECK(parts[1].id == "v#1");
  CHECK(parts[0].size() == 4);
  CHECK(split_gaps(east_track("w", 10.0, 8, 3.0)).at(0).id == "w");
}

TEST_CASE("resample") {
  numerics::Rng rng(2);
  const Trajectory t = random_walk(rng, "r", 30);
  const Trajectory same = resample(t, 30);
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(std::abs(same.points[i].lat - t.points[i].lat) < 1e-12);
    CHECK(std::abs(same.points[i].lon - t.points[i].lon) < 1e-12);
    CHECK(std::abs(same.points[i].t - t.points[i].t) < 1e-12);
  }

  Trajectory seg{"s", {{0.0, 0.0, 0.0, 4.0}, {1.0, 2.0, 8.0, 8.0}}, {}};
  const Trajectory five = resample(seg, 5);
  REQUIRE(five.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    const double f = 0.25 * static_cast<double>(i);
    CHECK(five.points[i].lat == doctest::Approx(f));
    CHECK(five.points[i].lon == doctest::Approx(2.0 * f));
    CHECK(five.points[i].t == doctest::Approx(8.0 * f));
    CHECK(*five.points[i].v == doctest::Approx(4.0 + 4.0 * f));
  }
  CHECK(five.points.back() == seg.points.back());
  CHECK_THROWS_AS(resample(seg, 1), InputError);

  // Dense sine path: the resampled points lie on the piecewise-linear path
  // through the dense knots, whose distance from the analytic curve is at
  // most A w^2 h^2 / 8 for knot spacing h.
  const double amp = 1e-3, period = 500.0, h = 0.5;
  const double w = 2.0 * std::numbers::pi / period;
  Trajectory sine;
  sine.id = "sine";
  for (std::size_t i = 0; i <= 2000; ++i) {
    const double tt = h * static_cast<double>(i);
    sine.points.push_back({amp * std::sin(w * tt), 1e-5 * tt, tt, std::nullopt});
  }
  const Trajectory r = resample(sine, 180);
  const double bound = amp * w * w * h * h / 8.0 + 1e-15;
  double worst = 0.0;
  for (const TrajPoint& p : r.points) {
    worst = std::max(worst, std::abs(p.lat - amp * std::sin(w * p.t)));
    CHECK(p.lon == doctest::Approx(1e-5 * p.t).epsilon(1e-12));
  }
  CHECK(worst <= bound);
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r.points[i].t > r.points[i - 1].t);
}

TEST_CASE("min-max normalizer midpoint and constant-feature warning") {
  Trajectory t = east_track("m", 0.0, 11, 1.0);
  for (std::size_t i = 0; i < 11; ++i) t.points[i].v = static_cast<double>(i);
  const Normalizer n = fit_normalizer({t}, NormMode::min_max, true);
  CHECK(n.normalize(kSpeed, 5.0) == doctest::Approx(0.0));
  CHECK(n.normalize(kSpeed, 10.0) == doctest::Approx(1.0));
  CHECK(n.normalize(kSpeed, 0.0) == doctest::Approx(-1.0));

  const Trajectory c = east_track("c", 0.0, 11, 2.0);
  const Normalizer nc = fit_normalizer({c}, NormMode::min_max, true);
  const bool speed_flagged = std::any_of(nc.warnings().begin(), nc.warnings().end(),
                                         [](const std::string& w) { return w.find("speed") != std::string::npos; });
  CHECK(speed_flagged);
  CHECK(nc.normalize(kSpeed, 2.0) == 0.0);
  CHECK(nc.normalize(kSpeed, 7.0) == 0.0);
}

TEST_CASE("normalize and denormalize are inverse") {
  numerics::Rng rng(17);
  for (NormMode mode : {NormMode::min_max, NormMode::z_score}) {
    std::vector<Trajectory> trajs;
    for (int i = 0; i < 4; ++i) trajs.push_back(resample(random_walk(rng, "t" + std::to_string(i), 40), 32));
    auto norm = std::make_shared<const Normalizer>(fit_normalizer(trajs, mode));
    for (const Trajectory& t : trajs) {
      const CanonicalTraj c = normalize(t, norm);
      const Trajectory back = denormalize(c);
      REQUIRE(back.size() == t.size());
      for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(std::abs(back.points[i].lat - t.points[i].lat) < 1e-9);
        CHECK(std::abs(back.points[i].lon - t.points[i].lon) < 1e-9);
        CHECK(std::abs(back.points[i].t - t.points[i].t) < 1e-9);
      }
      const CanonicalTraj again = normalize(back, norm);
      CHECK(numerics::max_abs_diff(again.features, c.features) < 1e-9);
    }
  }
}

TEST_CASE("rate columns are time derivatives of speed and heading") {
  numerics::Rng rng(23);
  const Trajectory t = resample(random_walk(rng, "d", 50), 50);
  const LocalProjection proj(45.0, 7.0);
  const numerics::Tensor f = physical_features(t, proj);
  const double dt = t.points[1].t - t.points[0].t;
  for (std::size_t i = 1; i + 1 < f.rows(); ++i) {
    CHECK(f.at(i, kAccel) == doctest::Approx((f.at(i + 1, kSpeed) - f.at(i - 1, kSpeed)) / (2 * dt)));
    CHECK(f.at(i, kYawRate) == doctest::Approx((f.at(i + 1, kHeading) - f.at(i - 1, kHeading)) / (2 * dt)));
  }
}

TEST_CASE("neighbor queries") {
  const LocalProjection proj(0.0, 0.0);
  auto make = [&](const std::string& id, double north_m, double t0 = 0.0) {
    Trajectory t = east_track(id, 0.0, 20, 4.0, t0);
    for (TrajPoint& p : t.points) p.lat += north_m / kEarthRadius * 180.0 / std::numbers::pi;
    return t;
  };
  CanonicalOptions opt;
  opt.length = 20;

  SUBCASE("target alone") {
    const CanonicalDataset ds = build_canonical({make("solo", 0.0)}, opt);
    NeighborIndex idx(ds.items);
    CHECK(idx.query(ds.items[0], 3, 100.0).empty());
  }
  SUBCASE("parallel tracks") {
    const CanonicalDataset ds = build_canonical({make("a", 0.0), make("b", 10.0)}, opt);
    NeighborIndex idx(ds.items);
    const NeighborContext ctx = idx.query(ds.items[0], 1, 100.0);
    REQUIRE(ctx.size() == 1);
    CHECK(ctx.neighbors[0].id == "b");
    CHECK(ctx.neighbors[0].distance == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(idx.query(ds.items[0], 1, 5.0).empty());
    CHECK_THROWS_AS(idx.query(ds.items[0], 1, 0.0), InputError);
  }
  SUBCASE("order matches a brute-force sort") {
    std::vector<Trajectory> trajs{make("t", 0.0), make("e", 30.0), make("c", -12.0), make("d", 13.0),
                                  make("a", 50.0), make("b", -7.0)};
    const CanonicalDataset ds = build_canonical(trajs, opt);
    NeighborIndex idx(ds.items);
    const NeighborContext ctx = idx.query(ds.items[0], 5, 1000.0);
    REQUIRE(ctx.size() == 5);
    std::vector<std::pair<double, std::string>> oracle;
    for (std::size_t j = 1; j < trajs.size(); ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < 20; ++i) {
        sum += haversine_distance(trajs[0].points[i].lat, trajs[0].points[i].lon, trajs[j].points[i].lat,
                                  trajs[j].points[i].lon);
      }
      oracle.emplace_back(sum / 20.0, trajs[j].id);
    }
    std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
      if (std::abs(a.first - b.first) > 1e-6) return a.first < b.first;
      return a.second < b.second;
    });
    for (std::size_t k = 0; k < 5; ++k) {
      CHECK(ctx.neighbors[k].id == oracle[k].second);
      CHECK(ctx.neighbors[k].distance == doctest::Approx(oracle[k].first).epsilon(1e-6));
    }
  }
  SUBCASE("partial overlap is masked") {
    const CanonicalDataset ds = build_canonical({make("a", 0.0), make("late", 5.0, 10.0)}, opt);
    NeighborIndex idx(ds.items);
    const NeighborContext ctx = idx.query(ds.items[0], 1, 100.0);
    REQUIRE(ctx.size() == 1);
    const Neighbor& nb = ctx.neighbors[0];
    for (std::size_t i = 0; i < 20; ++i) {
      const bool covered = ds.items[0].time_at(i) >= 10.0;
      CHECK(nb.mask[i] == (covered ? 1.0 : 0.0));
      if (!covered) CHECK(nb.features.at(i, kX) == 0.0);
    }
  }
}

}  // TEST_SUITE
