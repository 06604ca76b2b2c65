// Command-line front end: spectrum, eigenstates, evolve, classical,
// map-params and check (the acceptance suite).

#include "kerr/acceptance.hpp"
#include "kerr/commands.hpp"
#include "kerr/io.hpp"

#include "CLI11.hpp"

#include <functional>
#include <iostream>
#include <sstream>

namespace {

using kerr::io::RunConfig;

// Flags write into a scratch config; after parsing, only the flags actually
// given are copied over the file-loaded (or default) config.
class Bindings {
 public:
  explicit Bindings(RunConfig& scratch) : scratch_(scratch) {}

  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& flag, T RunConfig::*member, const std::string& help) {
    CLI::Option* o = app->add_option(flag, scratch_.*member, help);
    entries_.push_back({o, [member](RunConfig& dst, const RunConfig& src) { dst.*member = src.*member; }});
    return o;
  }

  void custom(CLI::Option* o, std::function<void(RunConfig&)> apply) {
    customs_.push_back({o, std::move(apply)});
  }

  void apply(RunConfig& dst) const {
    for (const auto& [o, copy] : entries_)
      if (o->count() > 0) copy(dst, scratch_);
    for (const auto& [o, fn] : customs_)
      if (o->count() > 0) fn(dst);
  }

 private:
  RunConfig& scratch_;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&, const RunConfig&)>>> entries_;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> customs_;
};

std::array<double, 2> parse_point(const std::string& s) {
  std::array<double, 2> pt{};
  char comma = 0;
  std::istringstream in(s);
  if (!(in >> pt[0] >> comma >> pt[1]) || comma != ',') throw kerr::io::UsageError("expected q,p but got '" + s + "'");
  return pt;
}

std::vector<double> parse_range(const std::string& s) {
  double lo = 0, hi = 0;
  long n = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1)
    throw kerr::io::UsageError("expected --xi-range lo:hi:count, got '" + s + "'");
  std::vector<double> v;
  for (long i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Squeeze-driven Kerr oscillator: spectra, ESQPT diagnostics, dynamics, classical limit"};
  app.require_subcommand(1);

  RunConfig scratch;
  Bindings bind(scratch);
  std::string config_path, save_path, sign, xi_range;
  std::vector<std::string> points, starts;

  std::vector<CLI::App*> runs;
  auto* spectrum = app.add_subcommand("spectrum", "sweep xi: levels.csv, gaps.csv, esqpt_line.csv");
  auto* eigen = app.add_subcommand("eigenstates", "single xi: DOS, participation ratio, occupation, Husimi grids");
  auto* evolve = app.add_subcommand("evolve", "survival probability, FOTOC and Husimi entropy of initial states");
  auto* classical = app.add_subcommand("classical", "contours, separatrix, fixed points, trajectories");
  auto* mapp = app.add_subcommand("map-params", "effective K, epsilon2 and xi from circuit parameters");
  auto* check = app.add_subcommand("check", "run the acceptance suite");

  for (auto* sub : {spectrum, eigen, evolve, classical}) {
    sub->add_option("--config", config_path, "JSON run config (flags override it)");
    sub->add_option("--save-config", save_path, "write the effective config to this file");
    bind.add(sub, "-o,--out", &RunConfig::output_dir, "output directory");
    bind.add(sub, "-j,--jobs", &RunConfig::jobs, "worker threads");
    runs.push_back(sub);
  }
  for (auto* sub : {spectrum, eigen, evolve}) {
    bind.add(sub, "-K,--kerr", &RunConfig::kerr_K, "Kerr constant K");
    bind.add(sub, "--n-eff", &RunConfig::n_eff, "effective Planck scale N_eff");
    bind.add(sub, "-N,--dim", &RunConfig::dim_N, "Fock truncation");
    bind.custom(sub->add_option("--sign", sign, "main_text | lab_frame"),
                [&sign](RunConfig& c) { c.sign = kerr::sign_convention_from_string(sign); });
  }
  for (auto* sub : {eigen, evolve}) bind.add(sub, "--xi", &RunConfig::xi, "squeezing ratio epsilon2/K");

  bind.add(spectrum, "--xi-grid", &RunConfig::xi_grid, "comma-separated xi values")->delimiter(',');
  bind.custom(spectrum->add_option("--xi-range", xi_range, "lo:hi:count"),
              [&xi_range](RunConfig& c) { c.xi_grid = parse_range(xi_range); });
  bind.add(spectrum, "--levels", &RunConfig::levels, "levels written per xi");
  bind.add(spectrum, "--pairs", &RunConfig::pairs, "even/odd pairs tracked");

  bind.add(eigen, "--bins", &RunConfig::dos_bins, "DOS bins (0: 2 ceil(sqrt(count)))");
  bind.add(eigen, "--indices", &RunConfig::eigenstates, "eigenstate indices for Husimi grids")->delimiter(',');
  bind.add(eigen, "--husimi-samples", &RunConfig::husimi_samples, "Husimi grid samples per axis");
  bind.add(eigen, "--husimi-esqpt", &RunConfig::husimi_near_esqpt, "also grid the level nearest K xi^2 (true/false)");

  bind.add(evolve, "--states", &RunConfig::states, "preset ids (O,A,B,C,D,E)")->delimiter(',');
  bind.custom(evolve->add_option("--point", points, "explicit initial point q,p (repeatable)"), [&points](RunConfig& c) {
    c.points.clear();
    for (const auto& s : points) c.points.push_back(parse_point(s));
  });
  bind.add(evolve, "--t-max", &RunConfig::t_max, "final Kt");
  bind.add(evolve, "--t-samples", &RunConfig::t_samples, "uniform samples on [0, t_max]");
  bind.add(evolve, "--t-log-samples", &RunConfig::t_log_samples, "log-spaced prefix samples");
  bind.add(evolve, "--snapshots", &RunConfig::snapshot_times, "Kt values for Husimi snapshots")->delimiter(',');
  bind.add(evolve, "--entropy", &RunConfig::entropy, "compute the Husimi entropy series (true/false)");

  bind.add(classical, "--K-cl", &RunConfig::K_cl, "classical Kerr constant");
  bind.add(classical, "--xi-cl", &RunConfig::xi_cl, "classical xi");
  bind.add(classical, "--energies", &RunConfig::energies, "contour energies (units K_cl)")->delimiter(',');
  bind.add(classical, "--contour-samples", &RunConfig::contour_samples, "polar samples per contour");
  bind.add(classical, "--separatrix-samples", &RunConfig::separatrix_samples, "separatrix samples");
  bind.custom(classical->add_option("--start", starts, "trajectory start q,p (repeatable)"), [&starts](RunConfig& c) {
    c.trajectory_starts.clear();
    for (const auto& s : starts) c.trajectory_starts.push_back(parse_point(s));
  });
  bind.add(classical, "--traj-t", &RunConfig::trajectory_t, "trajectory length (Kt)");
  bind.add(classical, "--traj-dt", &RunConfig::trajectory_dt, "RK4 step (0: automatic)");

  kerr::MicroscopicParams micro;
  mapp->add_option("--g3", micro.g3, "three-wave coefficient")->required();
  mapp->add_option("--g4", micro.g4, "four-wave coefficient")->required();
  mapp->add_option("--Omega-d", micro.Omega_d, "drive amplitude")->required();
  mapp->add_option("--omega-d", micro.omega_d, "drive frequency")->required();

  std::vector<int> only;
  check->add_option("--only", only, "criterion ids to run")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kerr::cli::kExitUsage;
  }

  try {
    if (*mapp) {
      std::cout << kerr::cli::cmd_map_params(micro).dump(2) << '\n';
      return 0;
    }
    if (*check) {
      const auto results = kerr::acceptance::run({only}, std::cout);
      std::size_t failed = 0;
      for (const auto& r : results) failed += r.pass ? 0 : 1;
      std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
      return failed == 0 ? 0 : kerr::cli::kExitNumerical;
    }
    RunConfig cfg = config_path.empty() ? RunConfig{} : kerr::io::load_config(config_path);
    bind.apply(cfg);
    for (auto* sub : runs)
      if (*sub) cfg.command = sub->get_name();
    kerr::cli::CommandResult result;
    if (*spectrum) result = kerr::cli::cmd_spectrum(cfg);
    if (*eigen) result = kerr::cli::cmd_eigenstates(cfg);
    if (*evolve) result = kerr::cli::cmd_evolve(cfg);
    if (*classical) result = kerr::cli::cmd_classical(cfg);
    if (!save_path.empty()) kerr::io::save_config(cfg, save_path);
    for (const auto& n : result.notes) std::cerr << "note: " << n << '\n';
    std::cout << result.run_dir.string() << ": " << result.files.size() << " files\n";
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kerr::cli::exit_code_for(e);
  }
}
