#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "trapx/errors.hpp"
#include "trapx/harness.hpp"

namespace {

std::string trimmed(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

void apply_set(trapx::Config& cfg, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw trapx::UsageError("--set expects key=value, got: " + kv);
    cfg.set(trimmed(kv.substr(0, eq)), trimmed(kv.substr(eq + 1)));
  }
}

void write_pair(const std::string& out_dir, const std::string& name,
                const trapx::CsvTable& table, const std::string& mtext) {
  std::filesystem::create_directories(out_dir);
  auto csv = (std::filesystem::path(out_dir) / (name + ".csv")).string();
  table.write(csv, trapx::fnv1a_hash(mtext));
  auto man =
      (std::filesystem::path(out_dir) / (name + ".manifest.txt")).string();
  std::ofstream f(man, std::ios::binary);
  if (!f) throw trapx::UsageError("cannot open for writing: " + man);
  f << mtext;
  std::printf("wrote %s\n", csv.c_str());
  std::printf("wrote %s\n", man.c_str());
}

// Single-axis run from the resolved config; physics-error rows map to the
// physics exit code so scripted single runs can branch on it.
int run_single(const trapx::Config& cfg, trapx::RunAxis axis,
               const std::string& out_dir, const std::string& name) {
  auto s = trapx::scenario_from_config(cfg, axis);
  auto res = trapx::run_scenario(s);
  write_pair(out_dir, name, trapx::records_table(res, protocol_name(s.protocol)),
             res.manifest.text());
  const auto& r = res.records.at(0);
  std::printf("status=%s tf_s=%s fidelity=%s norm_final=%s steps=%d\n",
              r.status.c_str(), trapx::format_sig12(r.tf_s).c_str(),
              trapx::format_sig12(r.fidelity).c_str(),
              trapx::format_sig12(r.norm_final).c_str(), r.steps);
  return r.status == "ok" ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design trap-frequency ramps for fast excitation-free "
               "expansions in a Gaussian-beam trap and verify them by "
               "wavefunction propagation."};
  app.set_version_flag("--version", std::string(trapx::kVersionTag));
  app.footer(std::string("Environment: ") + trapx::kWorkerEnv +
             "=N runs sweep points on N workers (default 1).");
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> sets;
  std::string opt_protocol, opt_tf, opt_waist, opt_level;
  bool opt_repulsive = false;
  app.add_option("--config", config_path, "config file (key = value lines)")
      ->check(CLI::ExistingFile);
  app.add_option("--set", sets,
                 "override a config key, e.g. --set trap.f0z_hz=2000 "
                 "(repeatable)");
  app.add_option("-o,--out", out_dir, "output directory (default: out)");
  app.add_option("--protocol", opt_protocol,
                 "protocol kind: invariant | bang_bang | fast_adiabatic");
  app.add_option("--tf", opt_tf, "final time in seconds");
  app.add_option("--waist", opt_waist, "beam waist in meters");
  app.add_option("--level", opt_level, "initial eigenstate index n");
  app.add_flag("--allow-repulsive", opt_repulsive,
               "permit transiently repulsive ramps");

  auto* c_protocol = app.add_subcommand(
      "protocol", "dump the designed frequency ramp as CSV");
  int samples = 501;
  c_protocol->add_option("--samples", samples, "number of time samples");

  auto* c_z = app.add_subcommand(
      "expand-z", "single run: beam-axis (longitudinal) propagation");
  auto* c_r = app.add_subcommand(
      "expand-r", "single run: radial propagation");
  auto* c_3d = app.add_subcommand(
      "expand-3d", "single run: coupled cylindrical 2D propagation");

  auto* c_figure =
      app.add_subcommand("figure", "emit a preset figure dataset");
  std::string fig_name;
  bool fig_fast = false;
  c_figure->add_option("name", fig_name,
                       "fig2a | fig2b | fig3 | fig4 | fig5 | fig6 | fig7")
      ->required();
  c_figure->add_flag("--fast", fig_fast,
                     "smoke variant: thinner sweeps, coarser numerics");

  auto* c_bounds = app.add_subcommand(
      "bounds", "perturbative fidelity bounds vs measured, levels 0..5");
  bool bounds_fast = false;
  c_bounds->add_flag("--fast", bounds_fast, "coarser numerics");

  auto* c_check = app.add_subcommand(
      "check", "run the invariant/property self-checks");

  try {
    app.parse(argc, argv);

    trapx::Config cfg = config_path.empty()
                            ? trapx::Config::from_defaults()
                            : trapx::Config::parse_file(config_path);
    apply_set(cfg, sets);
    if (!opt_protocol.empty()) cfg.set("protocol.kind", opt_protocol);
    if (!opt_tf.empty()) cfg.set("protocol.tf_s", opt_tf);
    if (!opt_waist.empty()) cfg.set("beam.waist_m", opt_waist);
    if (!opt_level.empty()) cfg.set("state.n", opt_level);
    if (opt_repulsive) cfg.set("protocol.allow_repulsive", "true");

    if (c_protocol->parsed()) {
      auto s = trapx::scenario_from_config(cfg, trapx::RunAxis::longitudinal);
      auto traj = trapx::make_trajectory(s.protocol, s.task);
      auto tr = trapx::trajectory_table(traj, samples);
      write_pair(out_dir, "protocol", tr.table, tr.manifest_text);
      return 0;
    }
    if (c_z->parsed())
      return run_single(cfg, trapx::RunAxis::longitudinal, out_dir,
                        "expand_z");
    if (c_r->parsed())
      return run_single(cfg, trapx::RunAxis::radial, out_dir, "expand_r");
    if (c_3d->parsed())
      return run_single(cfg, trapx::RunAxis::threed, out_dir, "expand_3d");
    if (c_figure->parsed()) {
      auto paths = trapx::write_figure(fig_name, out_dir, fig_fast, cfg);
      for (const auto& p : paths) std::printf("wrote %s\n", p.c_str());
      return 0;
    }
    if (c_bounds->parsed()) {
      auto b = trapx::bounds_table(cfg, bounds_fast);
      write_pair(out_dir, "bounds", b.table, b.manifest_text);
      return 0;
    }
    if (c_check->parsed()) {
      auto checks = trapx::run_checks();
      bool all = true;
      for (const auto& c : checks) {
        std::printf("%s %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
        all = all && c.pass;
      }
      return all ? 0 : 2;
    }
    throw trapx::UsageError("no subcommand selected");
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const trapx::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const trapx::PhysicsError& e) {
    std::fprintf(stderr, "physics error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
