#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "trapx/constants.hpp"
#include "trapx/errors.hpp"
#include "trapx/harness.hpp"

using namespace trapx;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(bool(f));
  return std::string(std::istreambuf_iterator<char>(f),
                     std::istreambuf_iterator<char>());
}

std::vector<std::string> data_lines(const std::string& body) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t nl = body.find('\n', pos);
    if (nl == std::string::npos) nl = body.size();
    std::string line = body.substr(pos, nl - pos);
    if (!line.empty() && line[0] != '#') out.push_back(line);
    pos = nl + 1;
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t c = line.find(sep, pos);
    if (c == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, c - pos));
    pos = c + 1;
  }
}

Config config_with(std::initializer_list<std::pair<const char*, const char*>>
                       overrides) {
  Config c = Config::from_defaults();
  for (const auto& [k, v] : overrides) c.set(k, v);
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("sig12 formatting and fnv1a hashing: reference values") {
  CHECK(format_sig12(1.0) == "1");
  CHECK(format_sig12(0.1) == "0.1");
  CHECK(format_sig12(1.0 / 3.0) == "0.333333333333");
  CHECK(format_sig12(299792458.0) == "299792458");
  CHECK(format_sig12(1e-30) == "1e-30");
  CHECK(format_sig12(-2.5e-3) == "-0.0025");

  CHECK(fnv1a_hash("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a_hash("a") == 0xaf63dc4c8601ec8cull);
  CHECK(hash_hex(0) == "0000000000000000");
  CHECK(hash_hex(fnv1a_hash("")) == "cbf29ce484222325");
}

TEST_CASE("csv table: layout, validation, file round trip") {
  CsvTable t({"x", "tag"}, {"m", "name"});
  t.comment("note");
  t.row({1.5, std::string("abc")});
  t.row({2.0, std::string("def")});
  std::string expect =
      "# units: x [m], tag [name]\n"
      "# manifest: fnv1a:0000000000001234\n"
      "# note\n"
      "x,tag\n"
      "1.5,abc\n"
      "2,def\n";
  CHECK(t.str(0x1234) == expect);
  CHECK(t.rows() == 2);

  CHECK_THROWS_AS(t.row({1.0}), UsageError);
  CHECK_THROWS_AS(CsvTable({"a"}, {}), UsageError);
  CHECK_THROWS_AS(CsvTable({}, {}), UsageError);

  auto path = (std::filesystem::temp_directory_path() / "trapx_csv_rt.csv")
                  .string();
  t.write(path, 0x1234);
  CHECK(slurp(path) == expect);
  std::filesystem::remove(path);
}

TEST_CASE("config: defaults, parsing, typed getters, merge") {
  Config d = Config::from_defaults();
  CHECK(d.get("trap.f0z_hz") == "2500");
  CHECK(d.get_double("beam.waist_m") == doctest::Approx(3e-6));
  CHECK(d.get_int("grid.nz") == 0);
  CHECK(d.get_bool("protocol.allow_repulsive") == false);

  Config p = Config::parse_text(
      "# leading comment\n"
      "trap.f0z_hz = 3000   # inline comment\n"
      "\n"
      "beam.waist_m=5e-6\n");
  CHECK(p.get_double("trap.f0z_hz") == doctest::Approx(3000));
  CHECK(p.get_double("beam.waist_m") == doctest::Approx(5e-6));
  CHECK(p.get("trap.ffz_hz") == "250");  // untouched default

  CHECK_THROWS_AS(Config::parse_text("not a pair\n"), UsageError);
  CHECK_THROWS_AS(Config::parse_text("beam.radius_m = 1\n"), UsageError);
  CHECK_THROWS_AS(d.get("nope"), UsageError);
  Config bad = config_with({{"grid.nz", "2.5"}});
  CHECK_THROWS_AS(bad.get_int("grid.nz"), UsageError);
  Config badb = config_with({{"protocol.allow_repulsive", "maybe"}});
  CHECK_THROWS_AS(badb.get_bool("protocol.allow_repulsive"), UsageError);
  for (const char* v : {"true", "1", "yes"})
    CHECK(config_with({{"protocol.allow_repulsive", v}})
              .get_bool("protocol.allow_repulsive"));

  Config base = config_with({{"trap.f0z_hz", "999"}});
  base.merge(config_with({{"trap.ffz_hz", "100"}}));
  CHECK(base.get("trap.f0z_hz") == "999");  // override kept default value
  CHECK(base.get("trap.ffz_hz") == "100");

  Config rt = Config::parse_text(base.canonical_text());
  CHECK(rt.canonical_text() == base.canonical_text());
}

TEST_CASE("protocol names and scenario mapping from config") {
  CHECK(parse_protocol("invariant") == ProtocolKind::invariant);
  CHECK(parse_protocol("inverse_engineering") == ProtocolKind::invariant);
  CHECK(parse_protocol("bang-bang") == ProtocolKind::bang_bang);
  CHECK(parse_protocol("fast_adiabatic") == ProtocolKind::fast_adiabatic);
  CHECK_THROWS_AS(parse_protocol("sudden"), UsageError);
  for (ProtocolKind k : {ProtocolKind::invariant, ProtocolKind::bang_bang,
                         ProtocolKind::fast_adiabatic})
    CHECK(parse_protocol(protocol_name(k)) == k);

  Config cfg = config_with({{"trap.f0z_hz", "2000"},
                            {"trap.ffz_hz", "200"},
                            {"beam.waist_m", "5e-6"},
                            {"protocol.tf_s", "2e-3"},
                            {"protocol.kind", "fast_adiabatic"},
                            {"state.n", "3"},
                            {"state.nu", "1"},
                            {"grid.nz", "128"}});
  Scenario s = scenario_from_config(cfg, RunAxis::radial);
  CHECK(s.task.omega0_z == doctest::Approx(2 * kPi * 2000).epsilon(1e-14));
  CHECK(s.task.omegaf_z == doctest::Approx(2 * kPi * 200).epsilon(1e-14));
  CHECK(s.task.t_final == doctest::Approx(2e-3));
  CHECK(s.task.geometry.waist_w0 == doctest::Approx(5e-6));
  CHECK(s.protocol == ProtocolKind::fast_adiabatic);
  CHECK(s.axis == RunAxis::radial);
  CHECK(s.levels == std::vector<int>{3});
  CHECK(s.nu == 1);
  CHECK(s.numerics.nz == 128);
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("default final-time grid: 31 log-spaced points on [0.2, 3] ms") {
  auto g = default_tf_grid();
  REQUIRE(g.size() == 31);
  CHECK(g.front() == doctest::Approx(0.2e-3).epsilon(1e-12));
  CHECK(g.back() == doctest::Approx(3e-3).epsilon(1e-12));
  double ratio = std::pow(15.0, 1.0 / 30.0);
  for (std::size_t i = 1; i < g.size(); ++i)
    CHECK(g[i] / g[i - 1] == doctest::Approx(ratio).epsilon(1e-12));
}

TEST_CASE("scenario validation rejects malformed sweeps") {
  Scenario ok = scenario_from_config(Config::from_defaults(),
                                     RunAxis::longitudinal);
  CHECK_NOTHROW(ok.validate());

  Scenario s = ok;
  s.waists = {2e-6, 1e-6};
  CHECK_THROWS_AS(s.validate(), UsageError);
  s = ok;
  s.tf_grid = {1e-3, 1e-3};
  CHECK_THROWS_AS(s.validate(), UsageError);
  s = ok;
  s.levels = {0, 0};
  CHECK_THROWS_AS(s.validate(), UsageError);
  s = ok;
  s.levels = {-1};
  CHECK_THROWS_AS(s.validate(), UsageError);
  s = ok;
  s.nu = -1;
  CHECK_THROWS_AS(s.validate(), UsageError);
  s = ok;
  s.numerics.nz = -4;
  CHECK_THROWS_AS(s.validate(), UsageError);
  s = ok;
  s.numerics.res_divisor = 0;
  CHECK_THROWS_AS(s.validate(), UsageError);
  s = ok;
  s.numerics.dt_scale = 0.0;
  CHECK_THROWS_AS(s.validate(), UsageError);
}

TEST_CASE("worker budget from the environment") {
  unsetenv(kWorkerEnv);
  CHECK(worker_budget() == 1);
  setenv(kWorkerEnv, "6", 1);
  CHECK(worker_budget() == 6);
  setenv(kWorkerEnv, "200", 1);
  CHECK(worker_budget() == 64);
  setenv(kWorkerEnv, "abc", 1);
  CHECK_THROWS_AS(worker_budget(), UsageError);
  setenv(kWorkerEnv, "", 1);
  CHECK(worker_budget() == 1);
  unsetenv(kWorkerEnv);
}

TEST_CASE("parallel sweep covers every point once and rethrows the lowest failure") {
  const int n = 23;
  std::vector<std::atomic<int>> hits(n);
  sweep_parallel(n, 4, [&](int i) { hits[i].fetch_add(1); });
  for (int i = 0; i < n; ++i) CHECK(hits[i].load() == 1);

  try {
    sweep_parallel(n, 4, [&](int i) {
      if (i == 5 || i == 11) throw UsageError("boom " + std::to_string(i));
    });
    FAIL("expected a rethrown point failure");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()) == "boom 5");
  }
}

TEST_CASE("run records are deterministic across worker budgets") {
  Config cfg = config_with({{"protocol.allow_repulsive", "true"},
                            {"grid.nz", "256"}});
  Scenario s = scenario_from_config(cfg, RunAxis::longitudinal);
  s.tf_grid = {5e-4, 1e-3};

  unsetenv(kWorkerEnv);
  auto serial = run_scenario(s);
  setenv(kWorkerEnv, "8", 1);
  auto threaded = run_scenario(s);
  unsetenv(kWorkerEnv);

  CHECK(serial.manifest.text() == threaded.manifest.text());
  REQUIRE(serial.records.size() == 2);
  for (std::size_t i = 0; i < serial.records.size(); ++i) {
    CHECK(serial.records[i].fidelity == threaded.records[i].fidelity);
    CHECK(serial.records[i].status == "ok");
    CHECK(serial.records[i].fidelity > 0.99);
    CHECK(serial.records[i].norm_final == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(serial.records[i].nz == 256);
    CHECK(serial.records[i].steps > 0);
  }
  CHECK(serial.manifest.text().rfind(kVersionTag, 0) == 0);
}

TEST_CASE("too-fast radial sweep points become attractivity rows") {
  Config cfg = Config::from_defaults();  // opt-in off
  Scenario s = scenario_from_config(cfg, RunAxis::radial);
  s.tf_grid = {2e-4};
  auto res = run_scenario(s);
  REQUIRE(res.records.size() == 1);
  CHECK(res.records[0].status == "attractivity_error");
  CHECK(std::isnan(res.records[0].fidelity));
  CHECK(res.records[0].steps == 0);

  // same ramp propagates under the repulsive opt-in on the beam axis
  Config on = config_with({{"protocol.allow_repulsive", "true"}});
  Scenario sl = scenario_from_config(on, RunAxis::longitudinal);
  sl.tf_grid = {2e-4};
  sl.numerics.res_divisor = 2;
  auto resl = run_scenario(sl);
  REQUIRE(resl.records.size() == 1);
  CHECK(resl.records[0].status == "ok");
  CHECK(resl.records[0].fidelity > 0.0);
  CHECK(resl.records[0].fidelity <= 1.0 + 1e-9);
  CHECK(resl.records[0].norm_final == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("coupled 2d sweep: smoke run and level guard") {
  Config cfg = Config::from_defaults();
  Scenario s = scenario_from_config(cfg, RunAxis::threed);
  s.tf_grid = {5e-4};
  s.numerics.nz = 96;
  s.numerics.nr = 96;
  s.numerics.dt_scale = 4.0;
  auto res = run_scenario(s);
  REQUIRE(res.records.size() == 1);
  const auto& r = res.records[0];
  CHECK(r.status == "ok");
  CHECK(r.nz == 96);
  CHECK(r.nr == 96);
  CHECK(r.fidelity > 0.5);
  CHECK(r.fidelity <= 1.0 + 1e-9);
  CHECK(r.norm_final == doctest::Approx(1.0).epsilon(1e-7));

  Scenario bad = s;
  bad.levels = {1};
  CHECK_THROWS_AS(run_scenario(bad), UsageError);
}

TEST_CASE("empty expansion is exact for every protocol") {
  Config cfg = config_with({{"trap.ffz_hz", "2500"},  // gamma = 1
                            {"protocol.tf_s", "3e-4"}});
  for (const char* proto : {"invariant", "bang_bang", "fast_adiabatic"}) {
    Config c = cfg;
    c.set("protocol.kind", proto);
    Scenario s = scenario_from_config(c, RunAxis::longitudinal);
    s.numerics.res_divisor = 2;
    auto res = run_scenario(s);
    REQUIRE(res.records.size() == 1);
    INFO("protocol ", proto);
    CHECK(res.records[0].status == "ok");
    CHECK(res.records[0].fidelity >= 1.0 - 1e-6);
  }
  Scenario sr = scenario_from_config(cfg, RunAxis::radial);
  sr.numerics.res_divisor = 2;
  auto resr = run_scenario(sr);
  CHECK(resr.records[0].status == "ok");
  CHECK(resr.records[0].fidelity >= 1.0 - 1e-6);
}

TEST_CASE("trajectory table: structure and determinism") {
  Config cfg = config_with({{"protocol.allow_repulsive", "true"}});
  Scenario s = scenario_from_config(cfg, RunAxis::longitudinal);
  auto traj = make_trajectory(ProtocolKind::invariant, s.task);
  auto tr = trajectory_table(traj, 11);
  CHECK(tr.table.rows() == 11);
  std::uint64_t h = fnv1a_hash(tr.manifest_text);
  std::string body = tr.table.str(h);
  CHECK(body.find("# manifest: fnv1a:" + hash_hex(h)) != std::string::npos);
  CHECK(tr.manifest_text.rfind(kVersionTag, 0) == 0);
  auto lines = data_lines(body);
  REQUIRE(lines.size() == 12);  // header + 11 samples
  CHECK(lines[0] == "t_s,omega_z_rad_s,omega_z_sq,V0_J,omega_R_rad_s");
  auto first = split(lines[1], ',');
  CHECK(std::strtod(first[0].c_str(), nullptr) == 0.0);
  CHECK(std::strtod(first[1].c_str(), nullptr) ==
        doctest::Approx(s.task.omega0_z).epsilon(1e-9));
  auto last = split(lines.back(), ',');
  CHECK(std::strtod(last[0].c_str(), nullptr) ==
        doctest::Approx(traj.t_f).epsilon(1e-12));
  CHECK(std::strtod(last[1].c_str(), nullptr) ==
        doctest::Approx(s.task.omegaf_z).epsilon(1e-9));

  auto tr2 = trajectory_table(traj, 11);
  CHECK(tr2.table.str(fnv1a_hash(tr2.manifest_text)) == body);
  CHECK_THROWS_AS(trajectory_table(traj, 1), UsageError);
}

TEST_CASE("bounds table: six levels with perturbative and measured columns") {
  Config cfg = config_with({{"protocol.allow_repulsive", "true"}});
  auto res = bounds_table(cfg, true);
  CHECK(res.table.rows() == 6);
  auto lines = data_lines(res.table.str(fnv1a_hash(res.manifest_text)));
  REQUIRE(lines.size() == 7);
  double prev_bound = 2.0;
  for (int n = 0; n < 6; ++n) {
    auto cells = split(lines[1 + n], ',');
    REQUIRE(cells.size() == 9);
    CHECK(std::strtod(cells[3].c_str(), nullptr) == double(n));
    double bound = std::strtod(cells[4].c_str(), nullptr);
    double est1 = std::strtod(cells[5].c_str(), nullptr);
    double est2 = std::strtod(cells[6].c_str(), nullptr);
    double meas = std::strtod(cells[7].c_str(), nullptr);
    CHECK(bound > 0.0);
    CHECK(bound < prev_bound);  // deficit grows with level
    CHECK(bound >= est1);       // minimal action inside the bound
    CHECK(est2 > 0.9);          // gamma = sqrt(10): weak coupling
    CHECK(meas > 0.9);
    CHECK(meas <= 1.0 + 1e-9);
    CHECK(cells[8] == "ok");
    prev_bound = bound;
  }
}

TEST_CASE("figure presets: protocol dump is deterministic, unknown name rejected") {
  auto dir = (std::filesystem::temp_directory_path() / "trapx_fig_test")
                 .string();
  auto paths = write_figure("fig5", dir, false, Config::from_defaults());
  REQUIRE(paths.size() == 2);  // table + its manifest
  CHECK(paths[1].find(".manifest.txt") != std::string::npos);
  CHECK(!slurp(paths[1]).empty());
  std::string body = slurp(paths[0]);
  CHECK(body.rfind("# units:", 0) == 0);
  auto lines = data_lines(body);
  REQUIRE(lines.size() == 602);  // header + 601 samples
  CHECK(lines[0] ==
        "t_s,omega_r_sq_actual,omega_r_sq_ideal_inverse,"
        "omega_r_sq_fast_adiabatic");
  auto cells = split(lines[1], ',');
  // longitudinally-designed ramp starts on the initial radial frequency
  double wr0sq = std::strtod(cells[1].c_str(), nullptr);
  CHECK(std::strtod(cells[2].c_str(), nullptr) ==
        doctest::Approx(wr0sq).epsilon(1e-9));
  CHECK(std::strtod(cells[3].c_str(), nullptr) ==
        doctest::Approx(wr0sq).epsilon(1e-9));

  auto again = write_figure("fig5", dir, false, Config::from_defaults());
  CHECK(slurp(again[0]) == body);
  CHECK_THROWS_AS(write_figure("fig9", dir, false, Config::from_defaults()),
                  UsageError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("overlap series: trivial ramp never leaves the mode") {
  auto atom = AtomSpecies::make(kRb87MassKg);
  auto geom = BeamGeometry::make(3e-6, 1.06e-6);
  double w0 = 2 * kPi * 2500;
  auto task = ExpansionTask::make(w0, w0, 3e-4, atom, geom);
  auto series = overlap_series(task, true);
  REQUIRE(series.t_s.size() > 10);
  CHECK(series.t_s.front() == 0.0);
  CHECK(series.t_s.back() == doctest::Approx(3e-4).epsilon(1e-12));
  CHECK(series.min_instantaneous >= 1.0 - 1e-6);
  CHECK(series.min_expanding_mode >= 1.0 - 1e-6);
  CHECK(series.final_fidelity >= 1.0 - 1e-6);
}

TEST_CASE("overlap series: fast 10x drop dips, mode tracking worse") {
  // Frozen minima, cross-checked against a grid-free Gaussian-width ODE
  // computation: instantaneous 0.977, expanding-mode 0.923-0.924.
  auto atom = AtomSpecies::make(kRb87MassKg);
  auto geom = BeamGeometry::make(3e-6, 1.06e-6);
  auto task =
      ExpansionTask::make(2 * kPi * 2500, 2 * kPi * 250, 0.6e-3, atom, geom);
  auto series = overlap_series(task, true);
  CHECK(series.min_instantaneous == doctest::Approx(0.9774).epsilon(5e-3));
  CHECK(series.min_expanding_mode == doctest::Approx(0.9243).epsilon(5e-3));
  CHECK(series.min_expanding_mode <
        series.min_instantaneous - 0.04);  // mode tracking is clearly worse
  CHECK(series.final_fidelity == doctest::Approx(0.9768).epsilon(5e-3));
}

TEST_CASE("self checks all pass") {
  auto checks = run_checks();
  REQUIRE(checks.size() == 6);
  for (const auto& c : checks) {
    INFO(c.name, ": ", c.detail);
    CHECK(c.pass);
  }
}

TEST_SUITE_END();
