#include "trapx/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "trapx/constants.hpp"
#include "trapx/errors.hpp"
#include "trapx/perturbation.hpp"
#include "trapx/quadrature.hpp"
#include "trapx/units.hpp"

namespace trapx {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* axis_name(RunAxis a) {
  switch (a) {
    case RunAxis::longitudinal: return "longitudinal";
    case RunAxis::radial: return "radial";
    case RunAxis::threed: return "3d";
  }
  throw UsageError("unknown axis");
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ";";
    out += format_sig12(v[i]);
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ";";
    out += std::to_string(v[i]);
  }
  return out;
}

int round_up_pow2(double need, int lo, int hi) {
  int n = lo;
  while (n < hi && n < need) n *= 2;
  return n;
}

// 1D grids: task-sized defaults, then explicit override or smoke divisor.
Grid1D sized_longitudinal(const ExpansionTask& task, int level,
                          const NumericsOverrides& num) {
  Grid1D g = default_longitudinal_grid(task, level, task.gamma);
  int n = num.nz > 0 ? num.nz : g.n / std::max(1, num.res_divisor);
  n = std::max(n, 64);
  if (n == g.n) return g;
  return Grid1D::longitudinal(-g.x0, n);
}

Grid1D sized_radial(const ExpansionTask& task, int level,
                    const NumericsOverrides& num) {
  Grid1D g = default_radial_grid(task, level, task.gamma);
  int n = num.nr > 0 ? num.nr : g.n / std::max(1, num.res_divisor);
  n = std::max(n, 64);
  if (n == g.n) return g;
  return Grid1D::radial(g.n * g.dx, n);
}

// 2D grids: the coupled solver carries both axes, so points are budgeted
// more tightly than the 1D defaults (self-consistency error at this density
// measured ~1e-3 on the coupled fidelity, far below the comparison bands).
Grid1D grid2d_z(const ExpansionTask& task, const NumericsOverrides& num) {
  double a0 = std::sqrt(kHbar / (task.atom.mass_kg * task.omega0_z));
  double half = 8.0 * std::sqrt(0.5) * a0 * std::max(1.0, 1.2 * task.gamma);
  int n = num.nz > 0 ? num.nz
                     : round_up_pow2(2.0 * half / (0.17 * a0), 64, 4096) /
                           std::max(1, num.res_divisor);
  return Grid1D::longitudinal(half, std::max(64, n));
}

Grid1D grid2d_r(const ExpansionTask& task, const NumericsOverrides& num) {
  double wR = omega_r_from_omega_z(task.omega0_z, task.geometry);
  double aR = std::sqrt(kHbar / (task.atom.mass_kg * wR));
  double rmax = 8.0 * aR * std::max(1.0, 1.2 * task.gamma);
  int n = num.nr > 0 ? num.nr
                     : round_up_pow2(rmax / (0.12 * aR), 64, 2048) /
                           std::max(1, num.res_divisor);
  return Grid1D::radial(rmax, std::max(64, n));
}

// Relaxed 2D ground states, keyed by trap + grid; shared across a sweep so
// each (waist, depth) pair relaxes once.
class GroundCache {
 public:
  const Wavefunction2D& get(const TrapSnapshot& snap, const AtomSpecies& atom,
                            const Grid1D& gr, const Grid1D& gz, int nu,
                            double omega_ref) {
    std::string key = format_sig12(snap.depth_V0) + "|" +
                      format_sig12(snap.geometry.waist_w0) + "|" +
                      std::to_string(gr.n) + "|" + format_sig12(gr.dx) + "|" +
                      std::to_string(gz.n) + "|" + format_sig12(gz.dx) + "|" +
                      std::to_string(nu);
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = states_.find(key);
      if (it != states_.end()) return it->second;
    }
    Wavefunction2D psi = ground_state_2d(snap, atom, gr, gz, nu, omega_ref);
    std::lock_guard<std::mutex> lk(mu_);
    return states_.emplace(key, std::move(psi)).first->second;
  }

 private:
  std::mutex mu_;
  std::map<std::string, Wavefunction2D> states_;
};

struct PointSpec {
  double waist;
  int level;
  double tf;
};

RunRecord execute_point(const Scenario& s, const PointSpec& p, int index,
                        GroundCache& cache) {
  RunRecord rec;
  rec.index = index;
  rec.waist_m = p.waist;
  rec.tf_s = p.tf;
  rec.level = p.level;
  rec.fidelity = rec.norm_final = rec.norm_min = rec.boundary_leak = kNaN;
  rec.dt_s = kNaN;
  try {
    auto geom = BeamGeometry::make(p.waist, s.task.geometry.wavelength_lambda);
    auto task = ExpansionTask::make(s.task.omega0_z, s.task.omegaf_z, p.tf,
                                    s.task.atom, geom, s.task.allow_repulsive);
    auto traj = make_trajectory(s.protocol, task);
    rec.tf_s = traj.t_f;  // bang-bang pins its own duration
    task = task.with_t_final(traj.t_f);

    bool radial_clock = s.axis != RunAxis::longitudinal;
    double dt_req = s.numerics.dt_s;
    if (dt_req <= 0.0 && s.numerics.dt_scale != 1.0) {
      auto probe = step_schedule(traj, radial_clock, 0.0);
      dt_req = s.numerics.dt_scale * (probe[1] - probe[0]);
    }

    TrapSnapshot s0{v0_from_omega_z(task.omega0_z, geom, task.atom), geom,
                    s.nu};
    TrapSnapshot sf{v0_from_omega_z(task.omegaf_z, geom, task.atom), geom,
                    s.nu};
    FidelityReport rep{};
    switch (s.axis) {
      case RunAxis::longitudinal: {
        Grid1D g = sized_longitudinal(task, p.level, s.numerics);
        auto vz0 = [&](double z) { return potential(0.0, z, s0); };
        auto vzf = [&](double z) { return potential(0.0, z, sf); };
        auto initial =
            stationary_state_numeric(vz0, g, p.level, task.atom).first;
        auto target =
            stationary_state_numeric(vzf, g, p.level, task.atom).first;
        PropagationPlan plan{traj, Scheme::split_operator_z,
                             PotentialForm::full, g, Grid1D{}, dt_req};
        auto run = propagate_longitudinal(initial, plan);
        rep = fidelity_report(run, target);
        rec.nz = g.n;
        break;
      }
      case RunAxis::radial: {
        Grid1D g = sized_radial(task, p.level, s.numerics);
        auto vr0 = [&](double r) { return potential(r, 0.0, s0); };
        auto vrf = [&](double r) { return potential(r, 0.0, sf); };
        auto initial =
            stationary_state_numeric(vr0, g, p.level, task.atom, s.nu).first;
        auto target =
            stationary_state_numeric(vrf, g, p.level, task.atom, s.nu).first;
        PropagationPlan plan{traj, Scheme::crank_nicolson_r,
                             PotentialForm::full, Grid1D{}, g, dt_req};
        auto run = propagate_radial(initial, plan, s.nu);
        rep = fidelity_report(run, target);
        rec.nr = g.n;
        break;
      }
      case RunAxis::threed: {
        if (p.level != 0)
          throw UsageError("coupled 2d runs support level 0 only");
        Grid1D gr = grid2d_r(task, s.numerics);
        Grid1D gz = grid2d_z(task, s.numerics);
        const auto& initial =
            cache.get(s0, task.atom, gr, gz, s.nu, task.omega0_z);
        const auto& target =
            cache.get(sf, task.atom, gr, gz, s.nu, task.omega0_z);
        PropagationPlan plan{traj, Scheme::adi_2d, PotentialForm::full, gz, gr,
                             dt_req};
        auto run = propagate_3d(initial, plan, s.nu);
        rep = fidelity_report(run, target);
        rec.nz = gz.n;
        rec.nr = gr.n;
        break;
      }
    }
    auto times = step_schedule(traj, radial_clock, dt_req);
    rec.steps = static_cast<int>(times.size()) - 1;
    rec.dt_s = traj.t_f / rec.steps;
    rec.fidelity = rep.fidelity;
    rec.norm_final = rep.norm_final;
    rec.norm_min = rep.norm_min;
    rec.boundary_leak = rep.boundary_leak_max;
    rec.status = "ok";
  } catch (const AttractivityError&) {
    rec.status = "attractivity_error";
  } catch (const DomainError&) {
    rec.status = "domain_error";
  } catch (const SpectrumError&) {
    rec.status = "spectrum_error";
  } catch (const ConvergenceError&) {
    rec.status = "convergence_error";
  } catch (const PhysicsError&) {
    rec.status = "physics_error";
  } catch (const UsageError& e) {
    throw UsageError("sweep point " + std::to_string(index) + " (waist " +
                     format_sig12(p.waist) + " m, tf " + format_sig12(p.tf) +
                     " s, level " + std::to_string(p.level) + "): " + e.what());
  }
  return rec;
}

void check_increasing(const std::vector<double>& v, const char* what) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1]))
      throw UsageError(std::string(what) + " grid must be strictly increasing");
}

// Both standard waists for the preset figures.
const std::vector<double> kFigureWaists = {3e-6, 1e-5};

Config figure_config(const Config& base, double ff_divisor) {
  Config cfg = base;
  cfg.set("trap.ffz_hz",
          format_sig12(cfg.get_double("trap.f0z_hz") / ff_divisor));
  return cfg;
}

void append_run_rows(CsvTable& t, const ScenarioResult& res,
                     const std::string& proto) {
  for (const auto& r : res.records)
    t.row({static_cast<double>(r.index), proto, r.waist_m, r.tf_s,
           static_cast<double>(r.level), r.fidelity, r.norm_final,
           r.boundary_leak, r.status});
}

CsvTable run_table() {
  return CsvTable({"point", "protocol", "waist_m", "tf_s", "level", "fidelity",
                   "norm_final", "boundary_leak", "status"},
                  {"1", "name", "m", "s", "1", "1", "1", "1", "flag"});
}

// CSV next to its manifest, so the stamped hash can be re-verified.
std::vector<std::string> emit(const std::string& out_dir,
                              const std::string& name, const CsvTable& t,
                              const std::string& mtext) {
  std::filesystem::create_directories(out_dir);
  auto csv = (std::filesystem::path(out_dir) / (name + ".csv")).string();
  t.write(csv, fnv1a_hash(mtext));
  auto man =
      (std::filesystem::path(out_dir) / (name + ".manifest.txt")).string();
  std::ofstream f(man, std::ios::binary);
  if (!f) throw UsageError("cannot open for writing: " + man);
  f << mtext;
  return {csv, man};
}

// Per-level perturbative columns next to the measured full-potential
// fidelity, for one configured waist.
void bounds_rows(CsvTable& t, std::string& mtext, const Config& cfg,
                 bool fast) {
  Scenario s = scenario_from_config(cfg, RunAxis::longitudinal);
  s.levels = {0, 1, 2, 3, 4, 5};
  if (fast) s.numerics.res_divisor = 2;
  auto res = run_scenario(s);
  mtext += res.manifest.text();
  auto sc = quintic_scaling(s.task);
  for (const auto& r : res.records) {
    auto ctx = PerturbationContext::make(s.task, sc, r.level);
    auto fb = fidelity_first_order_bound(ctx);
    double f2 = second_order_fidelity(ctx);
    t.row({static_cast<double>(r.index), r.waist_m, s.task.t_final,
           static_cast<double>(r.level), fb.bound, fb.estimate, f2, r.fidelity,
           r.status});
  }
}

// fig2a: invariant-designed expansion, full beam potential, ground level,
// fidelity vs final time at both waists.
std::vector<std::string> fig2a(const std::string& out_dir, bool fast,
                               const Config& base) {
  Config cfg = figure_config(base, 10.0);
  cfg.set("protocol.kind", "invariant");
  cfg.set("protocol.allow_repulsive", "true");
  Scenario s = scenario_from_config(cfg, RunAxis::longitudinal);
  s.waists = kFigureWaists;
  s.levels = {0};
  s.tf_grid = default_tf_grid();
  if (fast) {
    std::vector<double> thin;
    for (std::size_t i = 0; i < s.tf_grid.size(); i += 4)
      thin.push_back(s.tf_grid[i]);
    s.tf_grid = thin;
    s.numerics.res_divisor = 2;
  }
  auto res = run_scenario(s);
  CsvTable t = run_table();
  append_run_rows(t, res, protocol_name(s.protocol));
  return emit(out_dir, "fig2a", t, res.manifest.text());
}

// fig2b: tenfold-deeper expansion (factor-100 frequency drop), invariant vs
// fast-adiabatic ramp, both waists.
std::vector<std::string> fig2b(const std::string& out_dir, bool fast,
                               const Config& base) {
  Config cfg = figure_config(base, 100.0);
  CsvTable t = run_table();
  std::string mtext;
  for (ProtocolKind pk :
       {ProtocolKind::invariant, ProtocolKind::fast_adiabatic}) {
    Config c = cfg;
    c.set("protocol.kind", protocol_name(pk));
    if (pk == ProtocolKind::invariant) c.set("protocol.allow_repulsive", "true");
    Scenario s = scenario_from_config(c, RunAxis::longitudinal);
    s.waists = kFigureWaists;
    s.levels = {0};
    s.tf_grid = default_tf_grid();
    if (fast) {
      std::vector<double> thin;
      for (std::size_t i = 0; i < s.tf_grid.size(); i += 4)
        thin.push_back(s.tf_grid[i]);
      s.tf_grid = thin;
      s.numerics.res_divisor = 2;
    }
    auto res = run_scenario(s);
    mtext += res.manifest.text();
    append_run_rows(t, res, protocol_name(pk));
  }
  return emit(out_dir, "fig2b", t, mtext);
}

// fig3: perturbative bound / estimates vs measured fidelity per level, both
// waists, at the deep-expansion operating point.
std::vector<std::string> fig3(const std::string& out_dir, bool fast,
                              const Config& base) {
  Config cfg = figure_config(base, 100.0);
  cfg.set("protocol.kind", "invariant");
  cfg.set("protocol.allow_repulsive", "true");
  cfg.set("protocol.tf_s", format_sig12(2.5e-3));
  CsvTable t({"point", "waist_m", "tf_s", "level", "bound",
              "first_order_estimate", "second_order_estimate",
              "numeric_fidelity", "status"},
             {"1", "m", "s", "1", "1", "1", "1", "1", "flag"});
  std::string mtext;
  for (double w : kFigureWaists) {
    Config c = cfg;
    c.set("beam.waist_m", format_sig12(w));
    bounds_rows(t, mtext, c, fast);
  }
  return emit(out_dir, "fig3", t, mtext);
}

// fig4: radial fidelity vs final time for the longitudinally-designed
// invariant ramp (no repulsive opt-in: too-fast points record the
// attractivity failure), the bang-bang marker, and the adiabatic
// perturbation estimate.
std::vector<std::string> fig4(const std::string& out_dir, bool fast,
                              const Config& base) {
  Config cfg = figure_config(base, 10.0);
  cfg.set("protocol.kind", "invariant");
  cfg.set("protocol.allow_repulsive", "false");
  CsvTable t({"point", "protocol", "waist_m", "tf_s", "fidelity",
              "apt_estimate", "norm_final", "status"},
             {"1", "name", "m", "s", "1", "1", "1", "flag"});
  std::string mtext;
  auto apt_for = [](const Scenario& s, const RunRecord& r) {
    if (r.status != "ok") return kNaN;
    auto geom =
        BeamGeometry::make(r.waist_m, s.task.geometry.wavelength_lambda);
    auto task = ExpansionTask::make(s.task.omega0_z, s.task.omegaf_z, r.tf_s,
                                    s.task.atom, geom, true);
    auto traj = make_trajectory(s.protocol, task);
    return adiabatic_amplitude(traj, traj.t_f).fidelity_estimate();
  };
  int idx = 0;
  for (double w : kFigureWaists) {
    Config c = cfg;
    c.set("beam.waist_m", format_sig12(w));
    Scenario s = scenario_from_config(c, RunAxis::radial);
    s.tf_grid = default_tf_grid();
    if (fast) {
      std::vector<double> thin;
      for (std::size_t i = 0; i < s.tf_grid.size(); i += 4)
        thin.push_back(s.tf_grid[i]);
      s.tf_grid = thin;
      s.numerics.res_divisor = 2;
    }
    auto res = run_scenario(s);
    mtext += res.manifest.text();
    for (const auto& r : res.records)
      t.row({static_cast<double>(idx++), "invariant", r.waist_m, r.tf_s,
             r.fidelity, apt_for(s, r), r.norm_final, r.status});

    Config cb = c;
    cb.set("protocol.kind", "bang_bang");
    Scenario sb = scenario_from_config(cb, RunAxis::radial);
    if (fast) sb.numerics.res_divisor = 2;
    auto resb = run_scenario(sb);
    mtext += resb.manifest.text();
    for (const auto& r : resb.records)
      t.row({static_cast<double>(idx++), "bang_bang", r.waist_m, r.tf_s,
             r.fidelity, apt_for(sb, r), r.norm_final, r.status});
  }
  return emit(out_dir, "fig4", t, mtext);
}

// fig5: the radial frequency the longitudinally-designed ramp actually
// produces vs the ramp a radial inverse design would need, vs the
// fast-adiabatic ramp.
std::vector<std::string> fig5(const std::string& out_dir, bool /*fast*/,
                              const Config& base) {
  Config cfg = figure_config(base, 10.0);
  cfg.set("beam.waist_m", format_sig12(3e-6));
  cfg.set("protocol.tf_s", format_sig12(0.36e-3));
  Scenario s = scenario_from_config(cfg, RunAxis::radial);
  auto inv = make_trajectory(ProtocolKind::invariant, s.task);
  auto fa = make_trajectory(ProtocolKind::fast_adiabatic, s.task);
  auto sc = quintic_scaling(s.task);
  double wR0 = omega_r_from_omega_z(s.task.omega0_z, s.task.geometry);
  double T = sc.domain_T;
  CsvTable t({"t_s", "omega_r_sq_actual", "omega_r_sq_ideal_inverse",
              "omega_r_sq_fast_adiabatic"},
             {"s", "rad^2/s^2", "rad^2/s^2", "rad^2/s^2"});
  int samples = 601;
  for (int i = 0; i < samples; ++i) {
    double tt = s.task.t_final * i / (samples - 1);
    auto d = sc.eval(tt / T);
    double bdd = d.d2b / (T * T);
    double ideal = wR0 * wR0 / std::pow(d.b, 4) - bdd / d.b;
    t.row({tt, inv.omega_r_sq(tt), ideal, fa.omega_r_sq(tt)});
  }
  RunManifest m;
  m.params.emplace_back("figure", "fig5");
  m.params.emplace_back("waist_m", format_sig12(3e-6));
  m.params.emplace_back("tf_s", format_sig12(s.task.t_final));
  m.params.emplace_back("omega0_z_rad_s", format_sig12(s.task.omega0_z));
  m.params.emplace_back("omegaf_z_rad_s", format_sig12(s.task.omegaf_z));
  return emit(out_dir, "fig5", t, m.text());
}

// fig6: overlap of the radially evolving state with the instantaneous
// harmonic level and with the ideal expanding mode along one ramp.
std::vector<std::string> fig6(const std::string& out_dir, bool fast,
                              const Config& base) {
  Config cfg = figure_config(base, 10.0);
  cfg.set("beam.waist_m", format_sig12(3e-6));
  cfg.set("protocol.tf_s", format_sig12(0.6e-3));
  cfg.set("protocol.allow_repulsive", "true");
  Scenario s = scenario_from_config(cfg, RunAxis::radial);
  auto series = overlap_series(s.task, fast);
  CsvTable t({"t_s", "overlap_instantaneous", "overlap_expanding_mode"},
             {"s", "1", "1"});
  for (std::size_t i = 0; i < series.t_s.size(); ++i)
    t.row({series.t_s[i], series.instantaneous[i], series.expanding_mode[i]});
  RunManifest m;
  m.params.emplace_back("figure", "fig6");
  m.params.emplace_back("waist_m", format_sig12(3e-6));
  m.params.emplace_back("tf_s", format_sig12(s.task.t_final));
  m.params.emplace_back("final_fidelity", format_sig12(series.final_fidelity));
  m.params.emplace_back("min_overlap_instantaneous",
                        format_sig12(series.min_instantaneous));
  m.params.emplace_back("min_overlap_expanding_mode",
                        format_sig12(series.min_expanding_mode));
  return emit(out_dir, "fig6", t, m.text());
}

// fig7: coupled 2D runs vs their 1D counterparts at the wide waist, for the
// invariant, fast-adiabatic, and bang-bang protocols.
std::vector<std::string> fig7(const std::string& out_dir, bool fast,
                              const Config& base) {
  Config cfg = figure_config(base, 10.0);
  cfg.set("beam.waist_m", format_sig12(1e-5));
  cfg.set("protocol.allow_repulsive", "false");
  std::vector<double> tfs = fast
                                ? std::vector<double>{6e-4, 1e-3, 1.4e-3, 2e-3}
                                : default_tf_grid();
  NumericsOverrides num;
  if (fast) {
    num.res_divisor = 2;
    num.dt_scale = 2.0;
  }
  auto sweep = [&](ProtocolKind pk, RunAxis ax,
                   const std::vector<double>& grid) {
    Config c = cfg;
    c.set("protocol.kind", protocol_name(pk));
    Scenario s = scenario_from_config(c, ax);
    s.tf_grid = grid;
    s.numerics = num;
    return run_scenario(s);
  };
  std::string mtext;
  auto inv3 = sweep(ProtocolKind::invariant, RunAxis::threed, tfs);
  mtext += inv3.manifest.text();
  auto invr = sweep(ProtocolKind::invariant, RunAxis::radial, tfs);
  mtext += invr.manifest.text();
  auto fa3 = sweep(ProtocolKind::fast_adiabatic, RunAxis::threed, tfs);
  mtext += fa3.manifest.text();
  auto fal = sweep(ProtocolKind::fast_adiabatic, RunAxis::longitudinal, tfs);
  mtext += fal.manifest.text();
  auto bb3 = sweep(ProtocolKind::bang_bang, RunAxis::threed, {});
  mtext += bb3.manifest.text();
  auto bbr = sweep(ProtocolKind::bang_bang, RunAxis::radial, {});
  mtext += bbr.manifest.text();

  CsvTable t({"point", "protocol", "tf_s", "f_3d", "f_radial_1d",
              "f_longitudinal_1d", "norm_3d", "status"},
             {"1", "name", "s", "1", "1", "1", "1", "flag"});
  int idx = 0;
  auto combined = [](const RunRecord& a, const RunRecord& b) {
    return a.status != "ok" ? a.status : b.status;
  };
  for (std::size_t i = 0; i < inv3.records.size(); ++i) {
    const auto& a = inv3.records[i];
    const auto& b = invr.records[i];
    t.row({static_cast<double>(idx++), "invariant", a.tf_s, a.fidelity,
           b.fidelity, kNaN, a.norm_final, combined(a, b)});
  }
  for (std::size_t i = 0; i < fa3.records.size(); ++i) {
    const auto& a = fa3.records[i];
    const auto& b = fal.records[i];
    t.row({static_cast<double>(idx++), "fast_adiabatic", a.tf_s, a.fidelity,
           kNaN, b.fidelity, a.norm_final, combined(a, b)});
  }
  for (std::size_t i = 0; i < bb3.records.size(); ++i) {
    const auto& a = bb3.records[i];
    const auto& b = bbr.records[i];
    t.row({static_cast<double>(idx++), "bang_bang", a.tf_s, a.fidelity,
           b.fidelity, kNaN, a.norm_final, combined(a, b)});
  }
  return emit(out_dir, "fig7", t, mtext);
}

}  // namespace

void Scenario::validate() const {
  if (!(task.omega0_z > 0.0) || !(task.omegaf_z > 0.0))
    throw UsageError("trap frequencies must be positive");
  if (!(task.t_final > 0.0)) throw UsageError("final time must be positive");
  if (!(task.atom.mass_kg > 0.0)) throw UsageError("mass must be positive");
  if (!(task.geometry.waist_w0 > 0.0) ||
      !(task.geometry.wavelength_lambda > 0.0))
    throw UsageError("beam geometry must be positive");
  for (double w : waists)
    if (!(w > 0.0)) throw UsageError("waists must be positive");
  check_increasing(waists, "waist");
  for (double t : tf_grid)
    if (!(t > 0.0)) throw UsageError("final times must be positive");
  check_increasing(tf_grid, "final-time");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0) throw UsageError("levels must be non-negative");
    if (i > 0 && levels[i] <= levels[i - 1])
      throw UsageError("level grid must be strictly increasing");
  }
  if (nu < 0) throw UsageError("azimuthal number must be non-negative");
  if (numerics.nz < 0 || numerics.nr < 0 || numerics.dt_s < 0.0)
    throw UsageError("numerics overrides must be non-negative");
  if (numerics.res_divisor < 1)
    throw UsageError("resolution divisor must be >= 1");
  if (!(numerics.dt_scale > 0.0))
    throw UsageError("time-step scale must be positive");
}

std::string RunManifest::text() const {
  std::string out = version;
  out += "\n";
  for (const auto& [k, v] : params) out += k + " = " + v + "\n";
  for (const auto& r : records) {
    out += "record," + std::to_string(r.index) + "," +
           format_sig12(r.waist_m) + "," + format_sig12(r.tf_s) + "," +
           std::to_string(r.level) + "," + r.status + "," +
           format_sig12(r.fidelity) + "," + format_sig12(r.norm_final) + "," +
           format_sig12(r.norm_min) + "," + format_sig12(r.boundary_leak) +
           "," + format_sig12(r.dt_s) + "," + std::to_string(r.steps) + "," +
           std::to_string(r.nz) + "," + std::to_string(r.nr) + "\n";
  }
  return out;
}

int worker_budget() {
  const char* env = std::getenv(kWorkerEnv);
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0')
    throw UsageError(std::string(kWorkerEnv) + " must be an integer");
  return static_cast<int>(std::clamp(v, 1L, 64L));
}

void sweep_parallel(int n_points, int budget,
                    const std::function<void(int)>& work) {
  if (n_points <= 0) return;
  budget = std::clamp(budget, 1, n_points);
  if (budget == 1) {
    for (int i = 0; i < n_points; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errs(n_points);
  std::vector<std::thread> pool;
  pool.reserve(budget);
  for (int w = 0; w < budget; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n_points; i = next.fetch_add(1)) {
        try {
          work(i);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (int i = 0; i < n_points; ++i)
    if (errs[i]) std::rethrow_exception(errs[i]);
}

ScenarioResult run_scenario(const Scenario& s) {
  s.validate();
  std::vector<double> waists =
      s.waists.empty() ? std::vector<double>{s.task.geometry.waist_w0}
                       : s.waists;
  std::vector<int> levels = s.levels.empty() ? std::vector<int>{0} : s.levels;
  std::vector<double> tfs =
      s.tf_grid.empty() ? std::vector<double>{s.task.t_final} : s.tf_grid;

  std::vector<PointSpec> points;
  for (double w : waists)
    for (int n : levels)
      for (double tf : tfs) points.push_back({w, n, tf});

  ScenarioResult out;
  out.records.resize(points.size());
  GroundCache cache;
  sweep_parallel(
      static_cast<int>(points.size()), worker_budget(),
      [&](int i) { out.records[i] = execute_point(s, points[i], i, cache); });

  TrapUnits units{s.task.omega0_z, s.task.atom.mass_kg};
  auto& params = out.manifest.params;
  auto put = [&](const char* k, const std::string& v) {
    params.emplace_back(k, v);
  };
  put("axis", axis_name(s.axis));
  put("protocol", protocol_name(s.protocol));
  put("atom.mass_kg", format_sig12(s.task.atom.mass_kg));
  put("laser.wavelength_m", format_sig12(s.task.geometry.wavelength_lambda));
  put("trap.omega0_z_rad_s", format_sig12(s.task.omega0_z));
  put("trap.omegaf_z_rad_s", format_sig12(s.task.omegaf_z));
  put("trap.allow_repulsive", s.task.allow_repulsive ? "true" : "false");
  put("sweep.waists_m", join_numbers(waists));
  put("sweep.levels", join_ints(levels));
  put("sweep.tf_s", join_numbers(tfs));
  put("state.nu", std::to_string(s.nu));
  put("numerics.nz", std::to_string(s.numerics.nz));
  put("numerics.nr", std::to_string(s.numerics.nr));
  put("numerics.dt_s", format_sig12(s.numerics.dt_s));
  put("numerics.res_divisor", std::to_string(s.numerics.res_divisor));
  put("numerics.dt_scale", format_sig12(s.numerics.dt_scale));
  put("trap_unit.length_m", format_sig12(units.length_m()));
  put("trap_unit.time_s", format_sig12(units.time_s()));
  put("trap_unit.energy_J", format_sig12(units.energy_J()));
  out.manifest.records = out.records;
  return out;
}

Scenario scenario_from_config(const Config& cfg, RunAxis axis) {
  auto atom = AtomSpecies::make(cfg.get_double("atom.mass_kg"));
  auto geom = BeamGeometry::make(cfg.get_double("beam.waist_m"),
                                 cfg.get_double("laser.wavelength_m"));
  double w0 = 2.0 * kPi * cfg.get_double("trap.f0z_hz");
  double wf = 2.0 * kPi * cfg.get_double("trap.ffz_hz");
  Scenario s;
  s.task = ExpansionTask::make(w0, wf, cfg.get_double("protocol.tf_s"), atom,
                               geom, cfg.get_bool("protocol.allow_repulsive"));
  s.protocol = parse_protocol(cfg.get("protocol.kind"));
  s.axis = axis;
  s.levels = {cfg.get_int("state.n")};
  s.nu = cfg.get_int("state.nu");
  s.numerics.nz = cfg.get_int("grid.nz");
  s.numerics.nr = cfg.get_int("grid.nr");
  s.numerics.dt_s = cfg.get_double("grid.dt_s");
  return s;
}

ProtocolKind parse_protocol(const std::string& name) {
  if (name == "invariant" || name == "inverse_engineering" ||
      name == "inverse-engineering")
    return ProtocolKind::invariant;
  if (name == "bang_bang" || name == "bang-bang")
    return ProtocolKind::bang_bang;
  if (name == "fast_adiabatic" || name == "fast-adiabatic")
    return ProtocolKind::fast_adiabatic;
  throw UsageError("unknown protocol: " + name);
}

std::string protocol_name(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::invariant: return "invariant";
    case ProtocolKind::bang_bang: return "bang_bang";
    case ProtocolKind::fast_adiabatic: return "fast_adiabatic";
  }
  throw UsageError("unknown protocol kind");
}

std::vector<double> default_tf_grid() {
  std::vector<double> out;
  out.reserve(31);
  for (int i = 0; i <= 30; ++i)
    out.push_back(0.2e-3 * std::pow(15.0, i / 30.0));
  return out;
}

CsvTable records_table(const ScenarioResult& res,
                       const std::string& protocol) {
  CsvTable t = run_table();
  append_run_rows(t, res, protocol);
  return t;
}

TableResult trajectory_table(const FrequencyTrajectory& traj, int samples) {
  if (samples < 2) throw UsageError("trajectory table needs >= 2 samples");
  CsvTable t({"t_s", "omega_z_rad_s", "omega_z_sq", "V0_J", "omega_R_rad_s"},
             {"s", "rad/s", "rad^2/s^2", "J", "rad/s"});
  for (int i = 0; i < samples; ++i) {
    double tt = traj.t_f * i / (samples - 1);
    t.row({tt, traj.omega_z(tt), traj.omega_z_sq(tt), traj.v0(tt),
           traj.omega_r(tt)});
  }
  RunManifest m;
  m.params.emplace_back("protocol", protocol_name(traj.protocol));
  m.params.emplace_back("tf_s", format_sig12(traj.t_f));
  m.params.emplace_back("omega0_z_rad_s", format_sig12(traj.omega0_z));
  m.params.emplace_back("omegaf_z_rad_s", format_sig12(traj.omegaf_z));
  m.params.emplace_back("waist_m", format_sig12(traj.geometry.waist_w0));
  m.params.emplace_back("wavelength_m",
                        format_sig12(traj.geometry.wavelength_lambda));
  m.params.emplace_back("atom.mass_kg", format_sig12(traj.atom.mass_kg));
  m.params.emplace_back("samples", std::to_string(samples));
  return {t, m.text()};
}

TableResult bounds_table(const Config& base, bool fast) {
  CsvTable t({"point", "waist_m", "tf_s", "level", "bound",
              "first_order_estimate", "second_order_estimate",
              "numeric_fidelity", "status"},
             {"1", "m", "s", "1", "1", "1", "1", "1", "flag"});
  std::string mtext;
  bounds_rows(t, mtext, base, fast);
  return {t, mtext};
}

// Radial diagnostics: the radial state follows the ratio-scaled designed
// frequency (not a designed radial ramp), so it is compared against the
// instantaneous harmonic level and against the ideal expanding mode built on
// the longitudinal scaling — the mode the design would produce if the radial
// frequency could be engineered independently.
OverlapSeries overlap_series(const ExpansionTask& task, bool fast) {
  auto traj = make_trajectory(ProtocolKind::invariant, task);
  NumericsOverrides num;
  if (fast) num.res_divisor = 2;
  Grid1D g = sized_radial(task, 0, num);
  const int nu = 0;
  TrapSnapshot s0{v0_from_omega_z(task.omega0_z, task.geometry, task.atom),
                  task.geometry, nu};
  TrapSnapshot sf{v0_from_omega_z(task.omegaf_z, task.geometry, task.atom),
                  task.geometry, nu};
  auto initial = stationary_state_numeric(
                     [&](double r) { return potential(r, 0.0, s0); }, g, 0,
                     task.atom, nu)
                     .first;
  auto target = stationary_state_numeric(
                    [&](double r) { return potential(r, 0.0, sf); }, g, 0,
                    task.atom, nu)
                    .first;
  auto sc = quintic_scaling(task);
  double T = sc.domain_T;
  CumulativeIntegral theta(
      [&sc, T](double t) {
        double b = sc.eval(std::clamp(t / T, 0.0, 1.0)).b;
        return 1.0 / (b * b);
      },
      task.t_final, 512);
  double wr0 = omega_r_from_omega_z(task.omega0_z, task.geometry);

  double dt_req = fast ? 2.0 * (step_schedule(traj, true, 0.0)[1]) : 0.0;
  auto times = step_schedule(traj, true, dt_req);
  int steps = static_cast<int>(times.size()) - 1;
  std::vector<std::pair<double, Wavefunction1D>> snaps;
  PropagationPlan plan{traj, Scheme::crank_nicolson_r, PotentialForm::full,
                       Grid1D{}, g, dt_req};
  plan.snapshot_stride = std::max(1, steps / (fast ? 60 : 150));
  plan.observer_1d = [&snaps](double t, const Wavefunction1D& w) {
    snaps.emplace_back(t, w);
  };
  auto run = propagate_radial(initial, plan, nu);

  OverlapSeries out;
  out.final_fidelity = fidelity(run.final, target);
  for (const auto& [t, w] : snaps) {
    auto d = sc.eval(std::clamp(t / T, 0.0, 1.0));
    auto mode =
        expanding_mode({0, wr0, d.b, d.db / T, theta(t)}, task.atom, g);
    double om = overlap_abs(w, mode);
    double wr2 = traj.omega_r_sq(t);
    // The instantaneous level exists only while the trap is attractive.
    double oi = std::numeric_limits<double>::quiet_NaN();
    if (wr2 > 0.0) {
      auto inst = radial_eigenstate(0, std::sqrt(wr2), task.atom, g);
      oi = overlap_abs(w, inst);
      out.min_instantaneous = std::min(out.min_instantaneous, oi);
    }
    out.t_s.push_back(t);
    out.instantaneous.push_back(oi);
    out.expanding_mode.push_back(om);
    out.min_expanding_mode = std::min(out.min_expanding_mode, om);
  }
  return out;
}

std::vector<std::string> write_figure(const std::string& name,
                                      const std::string& out_dir, bool fast,
                                      const Config& base) {
  if (name == "fig2a") return fig2a(out_dir, fast, base);
  if (name == "fig2b") return fig2b(out_dir, fast, base);
  if (name == "fig3") return fig3(out_dir, fast, base);
  if (name == "fig4") return fig4(out_dir, fast, base);
  if (name == "fig5") return fig5(out_dir, fast, base);
  if (name == "fig6") return fig6(out_dir, fast, base);
  if (name == "fig7") return fig7(out_dir, fast, base);
  throw UsageError("unknown figure: " + name +
                   " (expected fig2a, fig2b, fig3, fig4, fig5, fig6, fig7)");
}

std::vector<CheckResult> run_checks() {
  std::vector<CheckResult> out;
  auto add = [&](const char* name, bool pass, std::string detail) {
    out.push_back({name, pass, std::move(detail)});
  };
  auto atom = AtomSpecies::make(kRb87MassKg);
  auto geom = BeamGeometry::make(3e-6, 1.06e-6);
  double w0 = 2.0 * kPi * 2500.0, wf = 2.0 * kPi * 250.0;
  auto task = ExpansionTask::make(w0, wf, 1e-3, atom, geom);

  {  // designed ramp satisfies the width equation it was derived from
    auto traj = make_trajectory(ProtocolKind::invariant, task);
    auto sc = quintic_scaling(task);
    double T = sc.domain_T;
    double worst = 0.0;
    for (int i = 0; i <= 10000; ++i) {
      double s = i / 10000.0;
      auto d = sc.eval(s);
      double bdd = d.d2b / (T * T);
      double res = bdd + traj.omega_z_sq(s * T) * d.b -
                   w0 * w0 / std::pow(d.b, 3);
      worst = std::max(worst, std::abs(res) / (w0 * w0));
    }
    add("width_equation_residual", worst <= 1e-9,
        "max residual " + format_sig12(worst) + " (tol 1e-9)");
  }
  {  // nondimensionalization round-trips
    TrapUnits u{w0, atom.mass_kg};
    double worst = 0.0;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    worst = std::max(worst, rel(u.from_trap_length(u.to_trap_length(3e-6)), 3e-6));
    worst = std::max(worst, rel(u.from_trap_time(u.to_trap_time(1e-3)), 1e-3));
    worst = std::max(worst,
                     rel(u.from_trap_energy(u.to_trap_energy(1e-30)), 1e-30));
    worst = std::max(worst, rel(u.to_trap_length(u.from_trap_length(2.5)), 2.5));
    add("unit_round_trip", worst <= 1e-12,
        "max relative error " + format_sig12(worst) + " (tol 1e-12)");
  }
  {  // variational minimizer really is minimal
    double gamma = 4.0;
    double a_opt = scaling_action_integral(ScalingKind::optimal_bound, gamma, 1e-3);
    double a_qui = scaling_action_integral(ScalingKind::quintic, gamma, 1e-3);
    add("action_minimality", a_opt <= a_qui,
        "optimal " + format_sig12(a_opt) + " <= quintic " + format_sig12(a_qui));
  }
  {  // quartic coupling selection rule
    double worst = 0.0;
    for (int n = 0; n <= 6; ++n)
      for (int np = 0; np <= 6; ++np) {
        int d = std::abs(n - np);
        if (d == 0 || d == 2 || d == 4) continue;
        worst = std::max(worst, std::abs(alpha_coefficient(n, np)) /
                                    alpha_coefficient(n, n));
      }
    add("quartic_selection_rule", worst <= 1e-9,
        "max off-band ratio " + format_sig12(worst) + " (tol 1e-9)");
  }
  {  // quick propagation conserves probability
    auto traj = make_trajectory(ProtocolKind::invariant, task);
    Grid1D g = default_longitudinal_grid(task, 0, task.gamma);
    auto psi0 = harmonic_eigenstate_z(0, w0, atom, g);
    PropagationPlan plan{traj, Scheme::split_operator_z,
                         PotentialForm::harmonic, g, Grid1D{}, 0.0};
    auto run = propagate_longitudinal(psi0, plan);
    double err = std::abs(run.norm_final - 1.0);
    add("norm_conservation", err <= 1e-7,
        "|norm - 1| = " + format_sig12(err) + " (tol 1e-7)");
  }
  {  // bang-bang duration closed form
    auto bb = bang_bang(task);
    double expect = kPi / (2.0 * std::sqrt(w0 * wf));
    double err = std::abs(bb.t_f - expect) / expect;
    add("bang_bang_duration", err <= 1e-6,
        "t_f " + format_sig12(bb.t_f) + " vs " + format_sig12(expect) +
            " (rel tol 1e-6)");
  }
  return out;
}

}  // namespace trapx
