#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "inductherm/config.hpp"
#include "inductherm/io.hpp"

using namespace inductherm;
namespace fs = std::filesystem;

namespace {

bool mentions(const ConfigError& e, const std::string& needle) {
  for (const auto& v : e.violations())
    if (v.find(needle) != std::string::npos) return true;
  return false;
}

std::string scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("inductherm_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

}  // namespace

TEST_CASE("config: minimal document gets defaults") {
  const RunConfig cfg = config_from_json(nlohmann::json::object());
  CHECK(cfg.grid.nx == 64);
  CHECK(cfg.stepper.steps() == 200);
  CHECK(cfg.hash.size() == 64);
  CHECK(cfg.normalized["stepper"]["dt"].get<double>() == doctest::Approx(2e-3));
  // Same content, same hash.
  CHECK(config_from_json(cfg.normalized).hash == cfg.hash);
}

TEST_CASE("config: unit strings are converted") {
  nlohmann::json doc = {{"stepper", {{"dt", "0.004 s"}, {"t_final", "0.4 s"}}}};
  const RunConfig cfg = config_from_json(doc);
  CHECK(cfg.stepper.dt == doctest::Approx(4e-3).epsilon(1e-14));
}

TEST_CASE("config: violations") {
  nlohmann::json bad_dt = {{"stepper", {{"dt", 0.0}}}};
  try {
    config_from_json(bad_dt);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "stepper.dt"));
    CHECK(mentions(e, "range error"));
  }

  nlohmann::json outside = {{"grid", {{"workpiece", {0.5, 1.5, 0.25, 0.75}}}}};
  try {
    config_from_json(outside);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "consistency error"));
  }

  nlohmann::json unknown = {{"stepper", {{"dtt", 1.0}}}};
  CHECK_THROWS_AS(config_from_json(unknown, true), ConfigError);
  const RunConfig lenient = config_from_json(unknown, false);
  REQUIRE(lenient.warnings.size() == 1);
  CHECK(lenient.warnings[0].find("stepper.dtt") != std::string::npos);
}

TEST_CASE("config: overrides") {
  nlohmann::json doc = default_config();
  apply_overrides(doc, {"grid.nx=32", "source.kind=ramped_sinusoid", "heat.theta0=\"350 K\""});
  CHECK(doc["grid"]["nx"] == 32);
  CHECK(doc["source"]["kind"] == "ramped_sinusoid");
  CHECK(config_from_json(doc).theta0 == doctest::Approx(350.0));
  CHECK_THROWS(apply_overrides(doc, {"no_equals_sign"}));
}

TEST_CASE("io: field and table roundtrip") {
  const std::string dir = scratch("io");
  const RegionGrid g = RegionGrid::from_rects(2.0, 1.0, 8, 4, Rect{0.5, 1.5, 0.3, 0.7}, {});
  ScalarField f(static_cast<std::size_t>(g.size()));
  for (int c = 0; c < g.size(); ++c) f[static_cast<std::size_t>(c)] = 1.0 / (c + 3.0) + 1e-17 * c;
  write_field(dir + "/f.field", "abc", g, f, "theta", 0.125);
  const FieldFile r = read_field(dir + "/f.field");
  CHECK(r.hash == "abc");
  CHECK(r.nx == 8);
  CHECK(r.ny == 4);
  CHECK(r.name == "theta");
  CHECK(r.t == 0.125);
  CHECK(r.values == f);

  {
    CsvWriter w(dir + "/t.csv", "abc", {"a", "b"});
    w.row({0.1, 1.0 / 3.0});
    w.row({-2.5, 1e-300});
  }
  const CsvTable t = read_csv(dir + "/t.csv");
  CHECK(t.hash == "abc");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][t.column("b")] == 1.0 / 3.0);
  CHECK(t.rows[1][t.column("b")] == 1e-300);
  CHECK_THROWS_AS(t.column("c"), IoError);

  write_kv(dir + "/r.kv", "abc", {{"x", "1"}, {"y", "two"}});
  const auto kv = read_kv(dir + "/r.kv");
  CHECK(kv.at("config_hash") == "abc");
  CHECK(kv.at("y") == "two");
}
