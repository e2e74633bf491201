// Command-line front end: reads a scenario config, runs one solver and writes
// CSV artifacts plus manifest.txt into the output directory.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rsmfg/analysis.hpp"
#include "rsmfg/csv.hpp"
#include "rsmfg/mfg.hpp"
#include "rsmfg/particles.hpp"
#include "rsmfg/riccati.hpp"
#include "rsmfg/scenarios.hpp"

#ifndef RSMFG_VERSION
#define RSMFG_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace rsmfg;

namespace {

constexpr int kOk = 0;
constexpr int kFault = 1;
constexpr int kNotConverged = 2;

struct Run {
  ScenarioConfig cfg;
  fs::path out;
  std::string command;
  std::map<std::string, std::string> manifest;

  void write(const std::string& file, const csv::Table& t) const { csv::write_file(out / file, t); }

  void finish() {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    manifest["command"] = command;
    manifest["config_hash"] = hash;
    manifest["scenario"] = cfg.name;
    manifest["seed"] = std::to_string(cfg.seed);
    manifest["version"] = RSMFG_VERSION;
    manifest["horizon"] = csv::format_number(cfg.T);
    manifest["cli11"] = CLI11_VERSION;
    if (cfg.name == "mckean-vlasov") manifest["note"] = "horizon T is a preset choice; override with time.T";
    csv::write_manifest(out / "manifest.txt", manifest);
  }
};

Run prepare(const std::optional<std::string>& config, const std::string& fallback, const std::string& out_override,
            std::string command) {
  Run run;
  run.cfg = config ? load_config(*config) : preset(fallback);
  run.out = out_override.empty() ? fs::path(run.cfg.output_dir) : fs::path(out_override);
  run.command = std::move(command);
  fs::create_directories(run.out);
  return run;
}

void require_valid(const ModelSpec& model, const Grid1D& grid, const TimeGrid& times) {
  const ValidationReport report = validate_model(model, grid, times);
  if (!report.ok) {
    std::string msg = "model validation failed:";
    for (const auto& f : report.findings) msg += "\n  " + f;
    throw SolverError(msg);
  }
}

// LQ presets use the coupled Riccati path; the others have no closed form.
Feedback scenario_feedback(const ScenarioConfig& cfg, std::size_t n) {
  if (cfg.name == "kuramoto") return per_particle_feedback(kuramoto_frequencies(cfg, n));
  if (cfg.name == "ou-benchmark") return zero_feedback();
  const LQSpec spec = make_lq(cfg);
  const TimeGrid times = make_times(cfg);
  const ReducedMeanField path = solve_reduced_mean_field(spec, initial_mean(cfg), times);
  return [spec, sol = path.riccati](double t, double x, std::size_t) {
    const double pos = std::clamp(t / sol.times.dt(), 0.0, static_cast<double>(sol.z.size() - 1));
    const auto s = static_cast<std::size_t>(std::lround(pos));
    return lq_feedback(spec, sol, x, s);
  };
}

int run_solve_mfg(Run& run, const std::string& prefix = "") {
  const ModelSpec model = make_model(run.cfg);
  const Grid1D grid = make_grid(run.cfg);
  const TimeGrid times = make_times(run.cfg);
  require_valid(model, grid, times);
  MfgOptions opts;
  opts.theta = run.cfg.theta;
  opts.tol = run.cfg.tol;
  opts.max_iter = run.cfg.max_iter;
  const MfgSolution sol = solve_mfg(model, grid, times, opts);
  run.write(prefix + "value.csv", csv::value_table(sol.value));
  run.write(prefix + "density.csv", csv::density_table(sol.density));
  run.write(prefix + "moments.csv", csv::moments_table(sol.density));
  run.write(prefix + "history.csv", csv::history_table(sol.report));
  run.manifest["iterations"] = std::to_string(sol.report.iterations);
  run.manifest["converged"] = sol.report.converged ? "true" : "false";
  run.manifest["final_gap"] = csv::format_number(sol.report.final_gap);
  run.manifest["fpk_clipped_nodes"] = std::to_string(sol.report.clipped_nodes);
  std::cout << "fixed point: " << sol.report.iterations << " iterations, gap " << sol.report.final_gap
            << (sol.report.converged ? " (converged)" : " (NOT converged)") << '\n';
  return sol.report.converged ? kOk : kNotConverged;
}

int run_riccati(Run& run, bool frozen, bool z_only) {
  const LQSpec spec = make_lq(run.cfg);
  const TimeGrid times = make_times(run.cfg);
  RiccatiSolution sol{times, {}, {}};
  if (frozen) {
    sol = solve_offset_ode(spec, solve_riccati_scalar(spec, times), times);
  } else {
    const ReducedMeanField path = solve_reduced_mean_field(spec, initial_mean(run.cfg), times);
    if (!path.converged) std::cerr << "warning: reduced mean path did not converge\n";
    sol = path.riccati;
  }
  run.write("riccati.csv", z_only ? csv::riccati_z_table(sol) : csv::riccati_table(sol));
  std::cout << "z(0) = " << csv::format_number(sol.z.front()) << ", z(T) = " << csv::format_number(sol.z.back())
            << '\n';
  return kOk;
}

int run_simulate(Run& run, std::size_t snapshots) {
  const ModelSpec model = make_model(run.cfg);
  const Grid1D grid = make_grid(run.cfg);
  const TimeGrid times = make_times(run.cfg);
  const std::size_t n = run.cfg.n;
  const Feedback feedback = scenario_feedback(run.cfg, n);
  const std::size_t steps = times.size() - 1;
  const std::size_t every = std::max<std::size_t>(1, steps / std::max<std::size_t>(1, snapshots));
  std::vector<ParticleEnsemble> frames;
  csv::Table summary{{"t", "mean", "variance"}, {}};
  auto observe = [&](const ParticleEnsemble& e) {
    if (e.step_index % every == 0 || e.step_index == steps) {
      frames.push_back(e);
      const Moments m = ensemble_moments(e);
      summary.rows.push_back({e.time, m.mean, m.variance});
    }
  };
  auto start = ParticleEnsemble::create(sample_initial_states(model, grid, n, run.cfg.seed), run.cfg.seed);
  simulate_particles(std::move(start), model, feedback, times.dt(), steps, observe);
  run.write("snapshots.csv", csv::snapshot_table(frames));
  run.write("ensemble_moments.csv", summary);
  return kOk;
}

int run_convergence(Run& run, const std::vector<std::size_t>& n_values) {
  const ModelSpec model = make_model(run.cfg);
  ConvergenceOptions opts;
  opts.n_values = n_values;
  opts.horizon = run.cfg.T;
  opts.dt = run.cfg.T / static_cast<double>(run.cfg.nt - 1);
  opts.replicas = run.cfg.replicas;
  opts.seed = run.cfg.seed;
  opts.grid = make_grid(run.cfg);
  const ConvergenceReport rep = convergence_study(model, scenario_feedback(run.cfg, n_values.back()), opts);
  run.write("convergence.csv", csv::convergence_table(rep));
  run.manifest["fitted_exponent"] = csv::format_number(rep.fitted_exponent);
  run.manifest["exponent_stderr"] = csv::format_number(rep.exponent_stderr);
  run.manifest["deterministic_regime"] = rep.deterministic_regime ? "true" : "false";
  std::cout << "fitted exponent " << rep.fitted_exponent << " +/- " << rep.exponent_stderr
            << (rep.deterministic_regime ? " (deterministic regime)" : "") << '\n';
  return kOk;
}

int run_estimate_cost(Run& run, const std::vector<double>& starts) {
  const ModelSpec model = make_model(run.cfg);
  const Grid1D grid = make_grid(run.cfg);
  const TimeGrid times = make_times(run.cfg);
  const DensityTrajectory field = frozen_density(model, grid, times);
  const Feedback feedback = scenario_feedback(run.cfg, 1);
  std::vector<std::pair<double, CostEstimate>> rows;
  for (double x0 : starts) {
    rows.emplace_back(x0, estimate_risk_sensitive_cost(model, feedback, x0, field, run.cfg.paths, run.cfg.seed));
    std::cout << "x0 = " << x0 << ": " << rows.back().second.estimate << " +/- "
              << rows.back().second.standard_error << '\n';
  }
  run.write("cost.csv", csv::cost_table(rows));
  return kOk;
}

int run_check_uniqueness(Run& run) {
  std::vector<double> xs(10);
  std::vector<double> ps(21);
  std::vector<double> zs(10);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = -1.0 + 2.0 * static_cast<double>(i) / 9.0;
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i] = -2.0 + 0.2 * static_cast<double>(i);
  for (std::size_t i = 0; i < zs.size(); ++i) zs[i] = 0.2 + 0.2 * static_cast<double>(i);
  const auto lattice = make_lattice(xs, ps, zs);

  const std::map<std::string, std::function<double(double, double, double)>> families{
      {"log", [](double, double p, double z) { return 0.5 * p * p - std::log(z); }},
      {"increasing", [](double, double p, double z) { return 0.5 * p * p + z; }},
      {"z_free", [](double x, double p, double) { return 0.5 * p * p + x * p; }},
  };
  for (const auto& [name, H] : families) {
    HamiltonianSpec spec{H, run.cfg.epsilon, run.cfg.delta, run.cfg.sigma};
    const auto neutral = check_uniqueness_risk_neutral(spec, lattice);
    const auto sensitive = check_uniqueness_risk_sensitive(spec, lattice);
    run.write("uniqueness_" + name + "_neutral.csv", csv::uniqueness_table(neutral));
    run.write("uniqueness_" + name + "_sensitive.csv", csv::uniqueness_table(sensitive));
    std::cout << name << ": risk-neutral " << neutral.points_passed << "/" << neutral.points_checked
              << ", risk-sensitive " << sensitive.points_passed << "/" << sensitive.points_checked << '\n';
  }
  return kOk;
}

int run_bvp_demo(Run& run, bool printed_orientation) {
  const BvpOrientation orientation =
      printed_orientation ? BvpOrientation::vdot_equals_m : BvpOrientation::mdot_equals_v;
  csv::Table t{{"T", "m0", "class", "alpha", "beta"}, {}};
  auto add = [&](double T, double m0) {
    const BvpResult r = detect_bvp_solvability(m0, T, orientation);
    t.rows.push_back({T, m0, static_cast<double>(r.classification), r.alpha, r.beta});
    return r;
  };
  for (int k = 1; k <= 400; ++k) {
    const double T = 2.0 * std::numbers::pi * k / 200.0;
    add(T, 1.0);
    add(T, 0.0);
  }
  const double singular = 7.0 * std::numbers::pi / 4.0;
  const auto a = add(singular, 1.0);
  const auto b = add(singular, 0.0);
  run.write("bvp.csv", t);
  std::cout << "T = 7pi/4: m0 = 1 -> " << to_string(a.classification) << ", m0 = 0 -> "
            << to_string(b.classification) << "  (class codes: 0 Unique, 1 NoSolution, 2 InfinitelyMany)\n";
  return kOk;
}

int run_reproduce(Run& run, const std::string& figure) {
  if (figure == "fig4") {
    const LQSpec spec = make_lq(run.cfg);
    const ReducedMeanField path = solve_reduced_mean_field(spec, initial_mean(run.cfg), make_times(run.cfg));
    run.write("fig4.csv", csv::riccati_z_table(path.riccati));
    return kOk;
  }
  const int code = run_solve_mfg(run);
  const csv::Table density = csv::read_file(run.out / "density.csv");
  const csv::Table moments = csv::read_file(run.out / "moments.csv");
  if (figure == "fig1" || figure == "fig5") {
    run.write(figure + ".csv", density);
  } else {
    run.write(figure + ".csv", moments);
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-sensitive mean-field game solvers"};
  app.require_subcommand(1);

  std::optional<std::string> config;
  std::string out;
  auto common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("-c,--config", config, "scenario config file");
    if (config_required) opt->required();
    sub->add_option("-o,--out", out, "output directory (overrides output.dir)");
  };

  auto* solve = app.add_subcommand("solve-mfg", "damped fixed point between HJB and FPK");
  common(solve, true);

  bool frozen = false;
  auto* riccati = app.add_subcommand("riccati", "scalar Riccati path t,z,k");
  common(riccati, true);
  riccati->add_flag("--frozen-mean", frozen, "hold the mean at its initial value");

  std::size_t snapshots = 50;
  auto* simulate = app.add_subcommand("simulate", "particle ensemble snapshots");
  common(simulate, true);
  simulate->add_option("--snapshots", snapshots, "number of snapshot times");

  std::vector<std::size_t> n_values{16, 64, 256, 1024};
  auto* convergence = app.add_subcommand("convergence", "W1 convergence-rate study");
  common(convergence, true);
  convergence->add_option("--n-values", n_values, "population sizes")->expected(3, 64);

  std::vector<double> starts{1.0};
  auto* cost = app.add_subcommand("estimate-cost", "Monte Carlo risk-sensitive cost");
  common(cost, true);
  cost->add_option("--x0", starts, "initial states");

  auto* uniq = app.add_subcommand("check-uniqueness", "lattice checks of the uniqueness conditions");
  common(uniq, false);

  bool printed = false;
  auto* bvp = app.add_subcommand("bvp-demo", "solvability of the linear backward-forward system over T");
  common(bvp, false);
  bvp->add_flag("--vdot-m", printed, "use dv/dt = m, dm/dt = -v");

  std::string figure;
  auto* reproduce = app.add_subcommand("reproduce", "canned figure scenarios fig1..fig7");
  common(reproduce, false);
  reproduce->add_option("figure", figure, "fig1..fig7")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"}));

  if (argc > 1 && argv[1][0] != '-') {
    const std::string first = argv[1];
    const auto subs = app.get_subcommands([](CLI::App*) { return true; });
    const bool known = std::any_of(subs.begin(), subs.end(), [&](CLI::App* s) { return s->get_name() == first; });
    if (!known) {
      std::cerr << "error: unknown subcommand '" << first << "'\n";
      return kFault;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kFault;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    std::string fallback = "affine-lq";
    if (name == "reproduce") {
      fallback = (figure == "fig5" || figure == "fig6" || figure == "fig7") ? "mckean-vlasov" : "affine-lq";
    }
    Run run = prepare(config, fallback, out, name == "reproduce" ? name + " " + figure : name);
    int code = kOk;
    if (name == "solve-mfg") code = run_solve_mfg(run);
    else if (name == "riccati") code = run_riccati(run, frozen, false);
    else if (name == "simulate") code = run_simulate(run, snapshots);
    else if (name == "convergence") code = run_convergence(run, n_values);
    else if (name == "estimate-cost") code = run_estimate_cost(run, starts);
    else if (name == "check-uniqueness") code = run_check_uniqueness(run);
    else if (name == "bvp-demo") code = run_bvp_demo(run, printed);
    else if (name == "reproduce") code = run_reproduce(run, figure);
    run.finish();
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const CflViolation& e) {
    std::cerr << "error: " << e.what() << " (increase time.nt or coarsen grid.nx)\n";
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kFault;
}
