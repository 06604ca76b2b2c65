#include "kerr/commands.hpp"

#include "kerr/classical.hpp"
#include "kerr/dynamics.hpp"
#include "kerr/fock.hpp"
#include "kerr/phasespace.hpp"
#include "kerr/spectral.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>

namespace kerr::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using spectral::Parity;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const io::UsageError*>(&e)) return kExitUsage;
  if (dynamic_cast<const NumericalError*>(&e) || dynamic_cast<const TruncationTooSmall*>(&e)) return kExitNumerical;
  if (dynamic_cast<const Error*>(&e)) return kExitDomain;
  return kExitNumerical;
}

namespace {

std::string iso_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// One output directory per run; owns the manifest and all writes.
class Run {
 public:
  Run(const io::RunConfig& config, const std::string& command) : dir_(config.output_dir) {
    manifest_.config = config;
    manifest_.config.command = command;
    manifest_.started_at = iso_now();
    fs::create_directories(dir_);
    start_ = std::chrono::steady_clock::now();
  }

  const fs::path& dir() const { return dir_; }
  fs::path path(const std::string& file) const { return dir_ / file; }
  void record(const std::string& file) {
    manifest_.add_output(dir_, file);
    result_.files.push_back(file);
  }
  void note(const std::string& n) {
    manifest_.notes.push_back(n);
    result_.notes.push_back(n);
  }
  void convergence(const fock::ConvergenceReport& r, double xi) {
    json j = io::to_json(r);
    j["xi"] = xi;
    manifest_.convergence.push_back(j);
    if (!r.converged) fail("nonconverged", "truncation not converged at xi = " + io::format_real(xi));
  }
  void fail(const std::string& status, const std::string& why) {
    manifest_.status = status;
    note(why);
    result_.exit_code = kExitNumerical;
  }
  void write_json(const std::string& file, const json& j) {
    std::ofstream out(path(file));
    out << j.dump(2) << '\n';
    out.close();
    record(file);
  }

  CommandResult finish() {
    manifest_.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    manifest_.write(dir_);
    result_.run_dir = dir_;
    return result_;
  }

 private:
  fs::path dir_;
  io::RunManifest manifest_;
  CommandResult result_;
  std::chrono::steady_clock::time_point start_;
};

std::string parity_name(Parity p) { return p == Parity::even ? "even" : "odd"; }

void write_husimi(Run& run, const std::string& file, const phasespace::HusimiGrid& h, const json& meta,
                  SignConvention sign) {
  json header = meta;
  header["grid"] = {{"q_min", h.spec.q_min}, {"q_max", h.spec.q_max}, {"p_min", h.spec.p_min},
                    {"p_max", h.spec.p_max}, {"nq", h.spec.nq},       {"np", h.spec.np}};
  header["riemann_mass"] = h.riemann_mass;
  header["coarse"] = h.coarse;
  std::vector<std::string> cols = {"q\\p"};
  for (Index j = 0; j < h.spec.np; ++j) cols.push_back(io::format_real(h.spec.p(j)));
  io::CsvWriter w(run.path(file), io::units_comment(sign, "husimi " + header.dump()), cols);
  for (Index i = 0; i < h.spec.nq; ++i) {
    w.cell(h.spec.q(i));
    for (Index j = 0; j < h.spec.np; ++j) w.cell(h.values(i, j));
    w.end_row();
  }
  w.close();
  run.record(file);
}

void write_series(Run& run, const std::string& file, const dynamics::TimeSeries& s, double kerr_K,
                  SignConvention sign, const std::string& what) {
  io::CsvWriter w(run.path(file), io::units_comment(sign, what), {"Kt", s.label});
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    w.cell(kerr_K * s.grid.times[i]).cell(s.values[i]);
    w.end_row();
  }
  w.close();
  run.record(file);
}

json fit_json(const LinearFit& f) { return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}}; }

}  // namespace

CommandResult cmd_spectrum(const io::RunConfig& config) {
  if (config.xi_grid.empty()) throw io::UsageError("spectrum needs a non-empty xi grid");
  if (config.levels < 1) throw io::UsageError("levels must be >= 1");
  if (config.pairs < 0) throw io::UsageError("pairs must be >= 0");
  const ModelParams base = config.model();
  base.with_xi(0.0).validate();
  if (config.levels > base.dim_N || 2 * config.pairs > base.dim_N)
    throw io::UsageError("levels/pairs exceed the truncation");

  struct Point {
    double xi;
    std::vector<double> e_prime;
    std::vector<Parity> parity;
    std::vector<double> gap;
    std::vector<bool> below;
    fock::ConvergenceReport report;
  };
  const auto points = io::parallel_map<Point>(config.xi_grid.size(), config.jobs, [&](std::size_t i) {
    const ModelParams p = base.with_xi(config.xi_grid[i]);
    const spectral::SpectralDecomposition spec = spectral::diagonalize(p);
    Point pt{p.xi, {}, {}, {}, {}, fock::truncation_check_spectrum(p, std::max(config.levels, 2 * config.pairs))};
    const double e0 = spec.ground_energy();
    for (Index k = 0; k < config.levels; ++k) {
      pt.e_prime.push_back(spec.eigenvalues()(k) - e0);
      pt.parity.push_back(spec.parity()[static_cast<std::size_t>(k)]);
    }
    for (Index k = 0; k < config.pairs; ++k) {
      const double even = spec.block_values(Parity::even)(k), odd = spec.block_values(Parity::odd)(k);
      pt.gap.push_back(odd - even);
      pt.below.push_back(even - e0 < spectral::esqpt_energy(p));
    }
    return pt;
  });

  Run run(config, "spectrum");
  const SignConvention sign = config.sign;
  {
    io::CsvWriter w(run.path("levels.csv"), io::units_comment(sign), {"xi", "index", "parity", "E_prime"});
    for (const auto& pt : points)
      for (std::size_t k = 0; k < pt.e_prime.size(); ++k) {
        w.cell(pt.xi).cell(static_cast<Index>(k)).cell(parity_name(pt.parity[k])).cell(pt.e_prime[k]);
        w.end_row();
      }
    w.close();
    run.record("levels.csv");
  }
  {
    io::CsvWriter w(run.path("gaps.csv"), io::units_comment(sign, "gap = E(odd k) - E(even k)"),
                    {"xi", "pair", "gap", "kissed", "below_esqpt"});
    for (const auto& pt : points)
      for (std::size_t k = 0; k < pt.gap.size(); ++k) {
        const bool kissed = spectral::is_kissed(std::abs(pt.gap[k]), base.with_xi(pt.xi));
        w.cell(pt.xi).cell(static_cast<Index>(k)).cell(pt.gap[k]).cell(Index{kissed}).cell(Index{pt.below[k]});
        w.end_row();
      }
    w.close();
    run.record("gaps.csv");
  }
  {
    io::CsvWriter w(run.path("esqpt_line.csv"), io::units_comment(sign), {"xi", "E_prime_esqpt"});
    for (const auto& pt : points) {
      w.cell(pt.xi).cell(base.kerr_K * pt.xi * pt.xi);
      w.end_row();
    }
    w.close();
    run.record("esqpt_line.csv");
  }
  for (const auto& pt : points) run.convergence(pt.report, pt.xi);
  return run.finish();
}

CommandResult cmd_eigenstates(const io::RunConfig& config) {
  const ModelParams p = config.model();
  p.validate();
  const spectral::SpectralDecomposition spec = spectral::diagonalize(p);
  const double target = spectral::esqpt_energy(p);
  const Eigen::VectorXd ep = spec.excitation_energies();
  for (Index k : config.eigenstates)
    if (k < 0 || k >= spec.size()) throw io::UsageError("eigenstate index " + std::to_string(k) + " out of range");

  Run run(config, "eigenstates");
  const SignConvention sign = config.sign;

  const auto range = spectral::default_dos_range(spec);
  Index in_range = 0;
  for (Index k = 0; k < ep.size(); ++k) in_range += ep(k) <= range.second ? 1 : 0;
  run.convergence(fock::truncation_check_spectrum(p, std::max<Index>(in_range, 2)), p.xi);

  const spectral::DosHistogram hist = spectral::dos_histogram(spec, config.dos_bins, range);
  {
    io::CsvWriter w(run.path("dos.csv"), io::units_comment(sign, "unit-area histogram of E_prime"),
                    {"bin_lo", "bin_hi", "center", "count", "density"});
    for (std::size_t i = 0; i < hist.bins(); ++i) {
      w.cell(hist.edges[i]).cell(hist.edges[i + 1]).cell(hist.center(i)).cell(hist.counts[i]).cell(hist.density[i]);
      w.end_row();
    }
    w.close();
    run.record("dos.csv");
  }

  json summary = {{"xi", p.xi}, {"E_prime_esqpt", target}};
  const auto cp = classical::ClassicalParams::from_model(p);
  if (p.xi > 0.0 && p.kerr_K > 0.0) {
    const std::vector<double> sc = classical::semiclassical_bin_density(cp, hist.edges);
    const auto cmp = classical::compare_dos(hist.edges, hist.density, sc, target, 0.05 * target);
    io::CsvWriter w(run.path("dos_semiclassical.csv"),
                    io::units_comment(sign, "unit-area semiclassical density, bin averages over E_prime"),
                    {"bin_lo", "bin_hi", "center", "density", "excluded"});
    for (std::size_t i = 0; i < sc.size(); ++i) {
      w.cell(hist.edges[i]).cell(hist.edges[i + 1]).cell(hist.center(i)).cell(sc[i]).cell(Index{cmp.excluded[i]});
      w.end_row();
    }
    w.close();
    run.record("dos_semiclassical.csv");
    summary["dos_l1_distance"] = cmp.l1;
    summary["dos_bins_compared"] = cmp.bins_used;
  } else {
    run.note("semiclassical DOS skipped (needs xi > 0 and K > 0)");
  }

  {
    io::CsvWriter wp(run.path("pr.csv"), io::units_comment(sign), {"index", "parity", "E_prime", "participation_ratio"});
    io::CsvWriter wo(run.path("occupation.csv"), io::units_comment(sign), {"index", "parity", "E_prime", "n_mean"});
    for (Index k = 0; k < spec.size(); ++k) {
      const StateVector v = spec.eigenvector(k);
      const std::string par = parity_name(spec.parity()[static_cast<std::size_t>(k)]);
      wp.cell(k).cell(par).cell(ep(k)).cell(spectral::participation_ratio(v));
      wp.end_row();
      wo.cell(k).cell(par).cell(ep(k)).cell(spectral::occupation_expectation(v));
      wo.end_row();
    }
    wp.close();
    wo.close();
    run.record("pr.csv");
    run.record("occupation.csv");
  }

  if (p.xi > 0.0) {
    try {
      const spectral::EsqptEstimates est = spectral::locate_esqpt(spec);
      summary["estimates"] = {{"E_peak_dos", est.E_peak_dos},
                              {"E_dip_pr", est.E_dip_pr},
                              {"E_dip_occ", est.E_dip_occ},
                              {"E_hist_peak", est.E_hist_peak},
                              {"E_hist_peak_interp", est.E_hist_peak_interp},
                              {"level_dip_pr", est.level_dip_pr},
                              {"spread", est.spread}};
    } catch (const DomainError& e) {
      run.note(std::string("locate_esqpt: ") + e.what());
    }
  }

  std::vector<Index> husimi = config.eigenstates;
  if (config.husimi_near_esqpt && p.xi > 0.0) {
    Index best = 0;
    for (Index k = 1; k < ep.size(); ++k)
      if (std::abs(ep(k) - target) < std::abs(ep(best) - target)) best = k;
    if (std::find(husimi.begin(), husimi.end(), best) == husimi.end()) husimi.push_back(best);
    summary["level_nearest_esqpt"] = best;
  }
  for (Index k : husimi) {
    const StateVector v = spec.eigenvector(k);
    const auto grid = phasespace::default_grid(v, p.xi, config.husimi_samples);
    const auto h = phasespace::husimi_eval(v, grid);
    const auto [qm, pm] = h.argmax();
    write_husimi(run, "husimi_" + std::to_string(k) + ".csv", h,
                 {{"state", "eigenstate"}, {"index", k}, {"E_prime", ep(k)}, {"argmax", {qm, pm}}}, sign);
  }
  run.write_json("esqpt.json", summary);
  return run.finish();
}

CommandResult cmd_evolve(const io::RunConfig& config) {
  const ModelParams p = config.model();
  struct Initial {
    std::string id;
    double q, p;
  };
  std::vector<Initial> initial;
  for (const auto& s : config.states) {
    dynamics::PresetId id;
    try {
      id = dynamics::preset_from_string(s);
    } catch (const DomainError& e) {
      throw io::UsageError(e.what());
    }
    if (std::abs(p.xi - 180.0) > 1e-9) throw io::UsageError("preset state ids are tabulated for xi = 180 only");
    const auto& pr = dynamics::preset(id);
    initial.push_back({std::string(1, pr.name), pr.q, pr.p});
  }
  for (std::size_t i = 0; i < config.points.size(); ++i)
    initial.push_back({"pt" + std::to_string(i), config.points[i][0], config.points[i][1]});
  if (initial.empty()) throw io::UsageError("evolve needs preset state ids or explicit (q,p) points");
  if (!(config.t_max > 0.0) || config.t_samples < 2) throw io::UsageError("need t_max > 0 and t_samples >= 2");
  p.validate();

  const double K = p.kerr_K;
  dynamics::TimeGrid grid = dynamics::TimeGrid::uniform(0.0, config.t_max / K, static_cast<std::size_t>(config.t_samples));
  if (config.t_log_samples > 1)
    grid = dynamics::TimeGrid::merge(
        grid, dynamics::TimeGrid::logarithmic(config.t_log_min / K, config.t_log_max / K,
                                              static_cast<std::size_t>(config.t_log_samples)));

  Run run(config, "evolve");
  std::vector<StateVector> states;
  for (const auto& ini : initial) {
    try {
      states.push_back(fock::coherent_state_with_tail(ini.q, ini.p, p).state);
    } catch (const TruncationTooSmall& e) {
      run.fail("truncation_failure", "state " + ini.id + ": " + e.what());
      return run.finish();
    }
  }
  const spectral::SpectralDecomposition spec = spectral::diagonalize(p);

  struct Output {
    dynamics::TimeSeries sp, fotoc, sh2;
    json fits;
    std::vector<phasespace::HusimiGrid> snapshots;
  };
  const auto outputs = io::parallel_map<Output>(initial.size(), config.jobs, [&](std::size_t i) {
    Output o;
    const auto dist = dynamics::energy_distribution(states[i], spec);
    const auto ev = dynamics::evolve(states[i], spec, grid);
    o.sp = dynamics::survival_probability(ev);
    o.fotoc = dynamics::fotoc(ev);
    if (config.entropy) o.sh2 = dynamics::husimi_entropy_series(ev);
    const auto drift = dynamics::conservation_drifts(ev);
    json f = {{"state", initial[i].id},
              {"q", initial[i].q},
              {"p", initial[i].p},
              {"energy_mean", dist.mean},
              {"energy_width", dist.width()},
              {"completeness", dist.completeness},
              {"conservation",
               {{"norm", drift.norm_drift},
                {"energy", drift.energy_drift},
                {"energy2", drift.energy2_drift},
                {"parity", drift.parity_drift}}}};
    const bool origin = initial[i].q == 0.0 && initial[i].p == 0.0;
    auto short_fit = [&](const dynamics::TimeSeries& s, dynamics::ShortTimeLaw law, double expected) -> json {
      try {
        const auto r = dynamics::short_time_coefficients(s, law, p.xi, K, expected);
        json j = {{"coefficient", r.coefficient}, {"window", r.window}, {"points", r.points}};
        if (expected != 0.0) {
          j["expected"] = expected;
          j["relative_deviation"] = r.relative_deviation;
          j["max_pointwise_deviation"] = r.max_pointwise_deviation;
        }
        return j;
      } catch (const NumericalError& e) {
        return {{"error", e.what()}};
      }
    };
    f["short_time_survival"] = short_fit(o.sp, dynamics::ShortTimeLaw::survival, dist.variance);
    f["short_time_fotoc"] = short_fit(o.fotoc, dynamics::ShortTimeLaw::fotoc,
                                      origin ? dynamics::short_time_closed_form(dynamics::ShortTimeLaw::fotoc, p.xi, K) : 0.0);
    if (p.xi > 1.0) {
      const auto [t1, t2] = dynamics::lyapunov_window(p.xi, K);
      f["lyapunov_window"] = {K * t1, K * t2};
      f["lambda"] = 2.0 * K * p.xi;
      try {
        f["ln_fotoc_fit"] = fit_json(dynamics::growth_fit(o.fotoc, t1, t2, true));
        if (config.entropy) f["entropy_fit"] = fit_json(dynamics::growth_fit(o.sh2, t1, t2, false));
      } catch (const NumericalError& e) {
        f["growth_fit_error"] = e.what();
      }
      try {
        f["ehrenfest_time"] = K * dynamics::ehrenfest_time(o.fotoc);
        f["ehrenfest_formula"] = K * dynamics::ehrenfest_formula(p.xi, K);
      } catch (const NumericalError& e) {
        f["ehrenfest_error"] = e.what();
      }
      const double tmax = grid.times.back();
      if (tmax / 2.0 >= dynamics::characteristic_span(p.xi, K))
        f["long_time_fotoc_average"] = {{"window", {K * tmax / 2.0, K * tmax}},
                                        {"value", dynamics::long_time_average(o.fotoc, tmax / 2.0, tmax)}};
    }
    o.fits = f;
    if (!config.snapshot_times.empty()) {
      dynamics::TimeGrid sg;
      for (double kt : config.snapshot_times) sg.times.push_back(kt / K);
      std::sort(sg.times.begin(), sg.times.end());
      const auto sev = dynamics::evolve(states[i], spec, sg);
      for (std::size_t j = 0; j < sg.size(); ++j) {
        const StateVector s = sev.state(j);
        o.snapshots.push_back(phasespace::husimi_eval(s, phasespace::default_grid(states[i], p.xi, 161)));
      }
    }
    return o;
  });

  json fits = json::array();
  for (std::size_t i = 0; i < initial.size(); ++i) {
    const auto& o = outputs[i];
    const std::string id = initial[i].id;
    write_series(run, "sp_" + id + ".csv", o.sp, K, p.sign, "survival probability, state " + id);
    write_series(run, "fotoc_" + id + ".csv", o.fotoc, K, p.sign, "FOTOC, state " + id);
    if (config.entropy) write_series(run, "sh2_" + id + ".csv", o.sh2, K, p.sign, "Husimi entropy, state " + id);
    std::vector<double> st = config.snapshot_times;
    std::sort(st.begin(), st.end());
    for (std::size_t j = 0; j < o.snapshots.size(); ++j)
      write_husimi(run, "husimi_" + id + "_" + std::to_string(j) + ".csv", o.snapshots[j],
                   {{"state", id}, {"Kt", st[j]}}, p.sign);
    fits.push_back(o.fits);
  }
  run.write_json("fits.json", {{"xi", p.xi}, {"kerr_K", K}, {"dim_N", p.dim_N}, {"states", fits}});
  return run.finish();
}

CommandResult cmd_classical(const io::RunConfig& config) {
  const classical::ClassicalParams cp{config.K_cl, config.xi_cl};
  if (!(cp.K_cl > 0.0) || !(cp.xi_cl >= 0.0) || !std::isfinite(cp.K_cl) || !std::isfinite(cp.xi_cl))
    throw InvalidParams("classical run needs K_cl > 0 and xi_cl >= 0");
  const double scale = cp.K_cl * cp.xi_cl * cp.xi_cl;
  std::vector<double> energies = config.energies;
  if (energies.empty())
    for (double f : {-0.75, -0.5, -0.25, 0.25, 0.5, 1.0}) energies.push_back(f * std::max(scale, cp.K_cl));

  Run run(config, "classical");
  const SignConvention sign = SignConvention::main_text;
  {
    io::CsvWriter w(run.path("contours.csv"), io::units_comment(sign, "energy in K_cl"), {"energy", "q", "p", "H"});
    for (double E : energies)
      for (const auto& pt : classical::contour_points(E, cp, config.contour_samples)) {
        w.cell(E).cell(pt.q).cell(pt.p).cell(classical::h_cl(pt, cp));
        w.end_row();
      }
    w.close();
    run.record("contours.csv");
  }
  if (cp.xi_cl > 0.0) {
    io::CsvWriter w(run.path("separatrix.csv"), io::units_comment(sign, "energy in K_cl"), {"q", "p", "H"});
    for (const auto& pt : classical::separatrix_points(cp, config.separatrix_samples)) {
      w.cell(pt.q).cell(pt.p).cell(classical::h_cl(pt, cp));
      w.end_row();
    }
    w.close();
    run.record("separatrix.csv");
  } else {
    run.note("no separatrix at xi_cl = 0");
  }
  {
    json pts = json::array();
    for (const auto& s : classical::stationary_points(cp).points) {
      const auto lin = classical::linearize(s.point, cp);
      const char* kind = s.kind == classical::PointKind::center   ? "center"
                         : s.kind == classical::PointKind::saddle ? "saddle"
                                                                  : "degenerate";
      pts.push_back({{"q", s.point.q},
                     {"p", s.point.p},
                     {"energy", s.energy},
                     {"kind", kind},
                     {"eigenvalues",
                      {{lin.eigenvalues[0].real(), lin.eigenvalues[0].imag()},
                       {lin.eigenvalues[1].real(), lin.eigenvalues[1].imag()}}}});
    }
    run.write_json("fixed_points.json",
                   {{"K_cl", cp.K_cl}, {"xi_cl", cp.xi_cl}, {"lyapunov_origin", classical::lyapunov_origin(cp)}, {"points", pts}});
  }

  std::vector<std::array<double, 2>> starts = config.trajectory_starts;
  if (starts.empty() && std::abs(cp.xi_cl - 180.0) < 1e-9)
    for (const auto& pr : dynamics::presets()) starts.push_back({pr.q, pr.p});
  if (!starts.empty()) {
    const double dt = config.trajectory_dt > 0.0 ? config.trajectory_dt : 1e-3 / (cp.K_cl * std::max(1.0, cp.xi_cl));
    const auto steps = static_cast<Index>(std::ceil(config.trajectory_t / dt));
    const Index stride = std::max<Index>(1, steps / 1500);
    const auto trajs = io::parallel_map<classical::Trajectory>(starts.size(), config.jobs, [&](std::size_t i) {
      return classical::integrate_trajectory({starts[i][0], starts[i][1]}, cp, config.trajectory_t, dt, stride);
    });
    io::CsvWriter w(run.path("trajectories.csv"), io::units_comment(sign, "RK4 dt=" + io::format_real(dt)),
                    {"trajectory", "Kt", "q", "p", "H"});
    json drifts = json::array();
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      for (std::size_t k = 0; k < trajs[i].t.size(); ++k) {
        w.cell(static_cast<Index>(i)).cell(cp.K_cl * trajs[i].t[k]).cell(trajs[i].x[k].q).cell(trajs[i].x[k].p).cell(trajs[i].energy[k]);
        w.end_row();
      }
      drifts.push_back(trajs[i].relative_drift);
    }
    w.close();
    run.record("trajectories.csv");
    run.write_json("trajectories.json", {{"dt", dt}, {"stride", stride}, {"relative_drift", drifts}});
  }
  return run.finish();
}

json cmd_map_params(const MicroscopicParams& micro) {
  const fock::KerrMap m = fock::microscopic_map(micro);
  return {{"format", io::kFormat}, {"K", m.K}, {"epsilon2", m.epsilon2}, {"xi", m.xi}};
}

}  // namespace kerr::cli
