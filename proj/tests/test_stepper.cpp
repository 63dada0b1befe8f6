#include <cmath>
#include <filesystem>
#include <random>

#include <doctest.h>

#include "inductherm/config.hpp"
#include "inductherm/io.hpp"
#include "inductherm/stepper.hpp"

using namespace inductherm;
namespace fs = std::filesystem;

namespace {

RunConfig small(const std::vector<std::string>& extra = {}) {
  nlohmann::json doc = default_config();
  apply_overrides(doc, {"grid.nx=16", "grid.ny=16", "stepper.dt=0.004", "stepper.t_final=0.02"});
  apply_overrides(doc, extra);
  return config_from_json(doc);
}

std::string scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("inductherm_unit_" + name);
  fs::remove_all(p);
  return p.string();
}

}  // namespace

TEST_CASE("stepper: zero final time echoes the initial state") {
  const RunConfig cfg = small({"stepper.t_final=0"});
  Simulation sim(cfg);
  CHECK(sim.done());
  const SimState s0 = initial_state(sim.grid(), cfg);
  CHECK(sim.state().theta == s0.theta);
  CHECK(sim.state().z == s0.z);
  const RunSummary sum = run(cfg, "");
  CHECK(sum.steps == 0);
  CHECK(sum.t == 0.0);
}

TEST_CASE("stepper: unforced equilibrium state is a fixed point") {
  const RunConfig cfg = small({"source.amplitude=0", "heat.eps_pos=0"});
  Simulation sim(cfg);
  const SimState s0 = sim.state();
  while (!sim.done()) sim.advance();
  for (std::size_t k = 0; k < s0.theta.size(); ++k) {
    CHECK(sim.state().theta[k] == doctest::Approx(s0.theta[k]).epsilon(1e-12));
    CHECK(sim.state().a[k] == 0.0);
  }
}

TEST_CASE("stepper: zero-source conservation with nonuniform temperature") {
  const RunConfig cfg = small({"source.amplitude=0", "heat.eps_pos=0"});
  Simulation sim(cfg);
  SimState s = sim.state();
  for (int c : sim.grid().workpiece_cells()) {
    const auto k = static_cast<std::size_t>(c);
    s.theta[k] = 400.0 + 300.0 * std::sin(7.0 * sim.grid().x(c)) * std::cos(5.0 * sim.grid().y(c));
    s.e[k] = internal_energy(s.theta[k], s.z[k], cfg.laws.psi());
  }
  sim.reset(s);
  while (!sim.done()) sim.advance();
  const auto& rows = sim.energy().rows();
  REQUIRE(rows.size() == 6);
  for (std::size_t k = 1; k < rows.size(); ++k)
    CHECK(std::abs(rows[k].internal_energy - rows[k - 1].internal_energy) <= 1e-10 * rows[k - 1].internal_energy);
  // Constant mu in air and coils, z unchanged: no mu term.
  CHECK(rows.back().mu_term == 0.0);
}

TEST_CASE("stepper: determinism, restart and audit") {
  const RunConfig cfg = small({"stepper.snapshot_every=1"});
  const std::string d1 = scratch("run1"), d2 = scratch("run2"), d3 = scratch("run3");
  const RunSummary s1 = run(cfg, d1);
  run(cfg, d2);
  CHECK(s1.passed());
  const CsvTable l1 = read_csv(d1 + "/ledger.csv"), l2 = read_csv(d2 + "/ledger.csv");
  CHECK(l1.rows == l2.rows);
  CHECK(l1.hash == cfg.hash);

  run(cfg, d3, d1 + "/snapshots/0002");
  const CsvTable l3 = read_csv(d3 + "/ledger.csv");
  REQUIRE(l3.rows.size() == 4);  // steps 2..5
  for (const char* col : {"internal_energy", "magnetic_energy", "source_work", "slack", "theta_max"}) {
    const std::size_t c = l1.column(col);
    for (std::size_t r = 0; r < l3.rows.size(); ++r) {
      const double a = l1.rows[r + 2][c], b = l3.rows[r][c];
      CHECK(std::abs(a - b) <= 1e-9 * (std::abs(a) + 1e-12));
    }
  }

  const AuditReport audit = audit_run(cfg, d1);
  CHECK(audit.hash_ok);
  CHECK(audit.steps_checked == 5);
  CHECK(audit.passed());
}

TEST_CASE("stepper: sweep policies") {
  const RunConfig abort_cfg = small({"stepper.max_sweeps=1", "stepper.sweep_tol=1e-30", "stepper.on_sweep_failure=abort"});
  Simulation sim(abort_cfg);
  CHECK_THROWS_AS(sim.advance(), StepFailure);

  const RunConfig accept_cfg = small({"stepper.max_sweeps=1", "stepper.sweep_tol=1e-30"});
  Simulation acc(accept_cfg);
  acc.advance();
  CHECK(acc.sweep_failures() == 1);
}

TEST_CASE("compare: identical and incompatible runs") {
  const RunConfig cfg = small();
  const CompareReport r = weak_strong_compare(cfg, cfg, CompareOptions{});
  CHECK(r.identical_initial);
  CHECK(r.max_e <= 1e-10 * r.field_scale);
  CHECK(r.passed());

  const RunConfig other = small({"source.amplitude=10"});
  CHECK_THROWS_AS(weak_strong_compare(cfg, other, CompareOptions{}), ConfigError);
  const RunConfig finer = small({"grid.nx=32", "grid.ny=32"});
  CHECK_THROWS_AS(weak_strong_compare(cfg, finer, CompareOptions{}), ConfigError);
}
