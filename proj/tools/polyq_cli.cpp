// polyq — analysis, synthesis, and verification for discrete-time polytopic
// LPV / switched linear systems.
//
//   polyq detect   --system sys.json [--out-dir D] [--seed N] [--common] ...
//   polyq stab     --system sys.json [--method auto|slack|vertex] ...
//   polyq synth    --system sys.json --certificate cert.json [--out-dir D]
//   polyq simulate --system sys.json --certificate cert.json [--gains g.json]
//                  [--schedule sched.json | --steps T --schedule-mode vertex|interior]
//                  [--x0 a,b,...] [--seed N] [--out-dir D]
//   polyq verify   --system sys.json --certificate cert.json [--grid M] [--eps E]
//
// Exit codes: 0 property holds / checks pass; 1 usage or input error;
// 2 necessary conditions fail; 3 inconclusive; 4 verification failure.
// Messages go to stderr; machine-readable artifacts go to files only, so
// runs can be scripted without scraping human text. A fixed seed makes
// repeated runs byte-identical, files included.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyq/artifacts_io.hpp"
#include "polyq/io.hpp"
#include "polyq/lmi.hpp"
#include "polyq/solver.hpp"
#include "polyq/synthesis.hpp"
#include "polyq/system.hpp"
#include "polyq/verify.hpp"

namespace {

namespace fs = std::filesystem;
using namespace polyq;

int verdict_exit(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Holds: return 0;
    case VerdictStatus::FailsNecessary: return 2;
    default: return 3;
  }
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string describe_point(const SimplexPoint& xi) {
  std::string s = "(";
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (i) s += ", ";
    s += fmt(xi[i]);
  }
  return s + ")";
}

void report_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

struct SolverFlags {
  std::uint64_t seed = 1;
  std::size_t max_iters = 20000;
  std::size_t max_restarts = 4;
  double target_margin = 1e-6;

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.seed = seed;
    cfg.max_iters = max_iters;
    cfg.max_restarts = max_restarts;
    cfg.target_margin = target_margin;
    return cfg;
  }
};

void add_solver_flags(CLI::App* sub, SolverFlags& flags) {
  sub->add_option("--seed", flags.seed, "seed for solver restarts and schedules");
  sub->add_option("--max-iters", flags.max_iters, "subgradient iteration budget per restart");
  sub->add_option("--max-restarts", flags.max_restarts, "solver restart budget");
  sub->add_option("--target-margin", flags.target_margin, "feasibility margin to certify");
}

int run_detect(const std::string& system_path, const std::string& out_dir,
               const SolverFlags& flags, bool common) {
  const PolytopicSystem sys = load_system(system_path);
  AnalysisOptions opts;
  opts.solver = flags.config();
  opts.common_block = common;
  const Verdict v = verdict_detect(sys, opts);
  fs::create_directories(out_dir);
  save_verdict(out_dir + "/verdict.json", v);
  if (v.detect_certificate) {
    save_certificate(out_dir + "/certificate.json", *v.detect_certificate);
  }
  if (v.gains) {
    save_gains(out_dir + "/gains.json", *v.gains);
    report_warnings(v.gains->warnings);
  }
  std::cerr << "detectability: " << to_string(v.status) << " — " << v.note << "\n";
  return verdict_exit(v.status);
}

int run_stab(const std::string& system_path, const std::string& out_dir,
             const SolverFlags& flags, const std::string& method, bool common) {
  const PolytopicSystem sys = load_system(system_path);
  AnalysisOptions opts;
  opts.solver = flags.config();
  opts.common_block = common;
  opts.method = method == "slack"    ? StabMethod::Slack
                : method == "vertex" ? StabMethod::Vertex
                                     : StabMethod::Auto;
  const Verdict v = verdict_stab(sys, opts);
  fs::create_directories(out_dir);
  save_verdict(out_dir + "/verdict.json", v);
  if (v.status == VerdictStatus::Holds && v.stab_certificate) {
    save_certificate(out_dir + "/certificate.json", *v.stab_certificate);
    save_controller_gains(out_dir + "/gains.json", *v.stab_certificate);
  }
  std::cerr << "stabilizability: " << to_string(v.status) << " — " << v.note << "\n";
  return verdict_exit(v.status);
}

int run_synth(const std::string& system_path, const std::string& cert_path,
              const std::string& out_dir) {
  const PolytopicSystem sys = load_system(system_path);
  const CertificateFile cf = load_certificate(cert_path);
  fs::create_directories(out_dir);
  if (cf.detect) {
    const ObserverGains gains = observer_gains(*cf.detect, sys);
    save_gains(out_dir + "/gains.json", gains);
    report_warnings(gains.warnings);
    std::cerr << "wrote observer gains for " << gains.L.size() << " vertices\n";
  } else {
    require_valid(*cf.stab, sys);
    save_controller_gains(out_dir + "/gains.json", *cf.stab);
    std::cerr << "wrote controller blocks; gains are evaluated per parameter pair\n";
  }
  return 0;
}

int run_simulate(const std::string& system_path, const std::string& cert_path,
                 const std::string& gains_path, const std::string& schedule_path,
                 std::size_t steps, const std::string& mode_name, std::uint64_t seed,
                 const std::vector<double>& x0_flag, const std::string& out_dir) {
  const PolytopicSystem sys = load_system(system_path);
  const Schedule sched =
      !schedule_path.empty()
          ? load_schedule(schedule_path)
          : random_schedule(sys.vertex_count(), steps,
                            mode_name == "interior" ? ScheduleMode::InteriorDirichlet
                                                    : ScheduleMode::VertexSwitching,
                            seed);
  const Vec x0 = x0_flag.empty() ? Vec(sys.n_x(), 1.0) : x0_flag;

  SimRun run;
  if (!cert_path.empty()) {
    const CertificateFile cf = load_certificate(cert_path);
    if (cf.detect) {
      ObserverGains gains;
      if (!gains_path.empty()) {
        const GainsFile gf = load_gains(gains_path);
        if (!gf.observer) {
          throw InvalidInputError("simulate: a detect certificate needs observer-kind gains");
        }
        gains = *gf.observer;
      } else {
        gains = observer_gains(*cf.detect, sys);
        report_warnings(gains.warnings);
      }
      run = simulate_error_system(sys, *cf.detect, gains, sched, x0);
    } else {
      if (!gains_path.empty()) {
        throw InvalidInputError(
            "simulate: controller gains are recomputed from the certificate; "
            "--gains applies to observer runs only");
      }
      run = simulate_closed_loop(sys, *cf.stab, sched, x0);
    }
  } else if (!gains_path.empty()) {
    const GainsFile gf = load_gains(gains_path);
    if (gf.observer) {
      throw InvalidInputError(
          "simulate: observer runs need --certificate for the Lyapunov monitor");
    }
    StabCertificate cert;
    cert.kind = StabKind::Vertex;
    cert.S_bar = *gf.controller_S_bar;
    run = simulate_closed_loop(sys, cert, sched, x0);
  } else {
    throw InvalidInputError("simulate: pass --certificate (or controller --gains)");
  }

  fs::create_directories(out_dir);
  save_text(out_dir + "/trajectory.csv",
            trajectory_to_csv(sched, run.trajectory.states, run.trajectory.lyapunov));
  save_sim_report(out_dir + "/report.json", run.report);
  std::cerr << "simulated " << run.report.steps << " steps"
            << (run.trajectory.aborted ? " (aborted by the divergence guard)" : "")
            << "; violations: " << run.report.violations.size()
            << "; worst V ratio: " << fmt(run.report.worst_ratio)
            << "; terminal norm: " << fmt(run.report.max_terminal_norm) << "\n";
  return run.report.violations.empty() ? 0 : 4;
}

int run_verify(const std::string& system_path, const std::string& cert_path, std::size_t grid_m,
               double eps) {
  const PolytopicSystem sys = load_system(system_path);
  const CertificateFile cf = load_certificate(cert_path);
  if (cf.detect) {
    const CertificateCheck check = check_detect_certificate(sys, *cf.detect, eps);
    const auto worst = *std::min_element(
        check.margins.begin(), check.margins.end(),
        [](const auto& a, const auto& b) { return a.second < b.second; });
    std::cerr << "detect certificate: min margin " << fmt(check.min_margin) << " at "
              << worst.first << (check.pass ? " (pass)" : " (FAIL)") << "\n";
    return check.pass ? 0 : 4;
  }

  const StabCertificate& cert = *cf.stab;
  Assignment assignment = cert.S_bar;
  const LmiProblem prob =
      cert.kind == StabKind::Slack ? build_stab_slack(sys) : build_stab_vertex(sys);
  if (cert.kind == StabKind::Slack) {
    assignment.insert(assignment.end(), cert.X.begin(), cert.X.end());
  }
  const auto margins = evaluate_constraints(prob, assignment);
  const auto worst = *std::min_element(
      margins.begin(), margins.end(),
      [](const auto& a, const auto& b) { return a.second < b.second; });
  std::cerr << "stab certificate (" << to_string(cert.kind) << "): min constraint margin "
            << fmt(worst.second) << " at " << worst.first << "\n";
  if (worst.second < eps) {
    std::cerr << "verification FAILED: constraint " << worst.first << " has margin "
              << fmt(worst.second) << " < " << fmt(eps) << "\n";
    return 4;
  }
  const GridCheckResult res = grid_check_stab(sys, cert, GridSpec{grid_m}, eps);
  std::cerr << "grid check (m = " << res.m << ", " << res.pair_count << " pairs): worst value "
            << fmt(res.worst_value) << " at xi = " << describe_point(res.worst_xi)
            << ", xi_next = " << describe_point(res.worst_xi_next)
            << (res.pass ? " (pass; sampled evidence, not proof)" : " (FAIL)") << "\n";
  return res.pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analysis, synthesis, and verification for discrete-time polytopic systems"};
  app.require_subcommand(1);

  // detect ---------------------------------------------------------------
  auto* detect = app.add_subcommand("detect", "decide poly-quadratic detectability");
  std::string detect_system;
  std::string detect_out = ".";
  SolverFlags detect_flags;
  bool detect_common = false;
  detect->add_option("--system", detect_system, "system JSON file")->required();
  detect->add_option("--out-dir", detect_out, "directory for verdict/certificate/gains");
  detect->add_flag("--common", detect_common, "restrict to one shared Lyapunov block");
  add_solver_flags(detect, detect_flags);

  // stab -----------------------------------------------------------------
  auto* stab = app.add_subcommand("stab", "decide poly-quadratic stabilizability");
  std::string stab_system;
  std::string stab_out = ".";
  std::string stab_method = "auto";
  SolverFlags stab_flags;
  bool stab_common = false;
  stab->add_option("--system", stab_system, "system JSON file")->required();
  stab->add_option("--out-dir", stab_out, "directory for verdict/certificate/gains");
  stab->add_option("--method", stab_method, "slack test, vertex test, or auto ladder")
      ->check(CLI::IsMember({"auto", "slack", "vertex"}));
  stab->add_flag("--common", stab_common, "restrict the vertex test to one shared block");
  add_solver_flags(stab, stab_flags);

  // synth ----------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "derive gains from an existing certificate");
  std::string synth_system;
  std::string synth_cert;
  std::string synth_out = ".";
  synth->add_option("--system", synth_system, "system JSON file")->required();
  synth->add_option("--certificate", synth_cert, "certificate JSON file")->required();
  synth->add_option("--out-dir", synth_out, "directory for the gains file");

  // simulate ---------------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "run a Lyapunov-monitored trajectory");
  std::string sim_system;
  std::string sim_cert;
  std::string sim_gains;
  std::string sim_schedule;
  std::string sim_mode = "vertex";
  std::string sim_out = ".";
  std::size_t sim_steps = 100;
  std::uint64_t sim_seed = 1;
  std::vector<double> sim_x0;
  simulate->add_option("--system", sim_system, "system JSON file")->required();
  simulate->add_option("--certificate", sim_cert, "certificate JSON file");
  simulate->add_option("--gains", sim_gains, "gains JSON file");
  simulate->add_option("--schedule", sim_schedule, "schedule JSON file (overrides generation)");
  simulate->add_option("--steps", sim_steps, "steps for the generated schedule");
  simulate->add_option("--schedule-mode", sim_mode, "generated schedule style")
      ->check(CLI::IsMember({"vertex", "interior"}));
  simulate->add_option("--seed", sim_seed, "seed for the generated schedule");
  simulate->add_option("--x0", sim_x0, "initial state (comma-separated; default all ones)")
      ->delimiter(',');
  simulate->add_option("--out-dir", sim_out, "directory for trajectory.csv and report.json");

  // verify -----------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "independently re-check a certificate");
  std::string verify_system;
  std::string verify_cert;
  std::size_t verify_grid = 20;
  double verify_eps = 1e-9;
  verify->add_option("--system", verify_system, "system JSON file")->required();
  verify->add_option("--certificate", verify_cert, "certificate JSON file")->required();
  verify->add_option("--grid", verify_grid, "simplex grid resolution for stab certificates");
  verify->add_option("--eps", verify_eps, "margin every condition must clear");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, std::cerr, std::cerr);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (detect->parsed()) return run_detect(detect_system, detect_out, detect_flags, detect_common);
    if (stab->parsed()) return run_stab(stab_system, stab_out, stab_flags, stab_method, stab_common);
    if (synth->parsed()) return run_synth(synth_system, synth_cert, synth_out);
    if (simulate->parsed()) {
      return run_simulate(sim_system, sim_cert, sim_gains, sim_schedule, sim_steps, sim_mode,
                          sim_seed, sim_x0, sim_out);
    }
    if (verify->parsed()) return run_verify(verify_system, verify_cert, verify_grid, verify_eps);
  } catch (const polyq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
