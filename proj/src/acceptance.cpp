#include "kerr/acceptance.hpp"

#include "kerr/classical.hpp"
#include "kerr/dynamics.hpp"
#include "kerr/errors.hpp"
#include "kerr/fock.hpp"
#include "kerr/phasespace.hpp"
#include "kerr/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace kerr::acceptance {

namespace {

using dynamics::PresetId;
using spectral::Parity;

std::string fmt(double v, int prec = 6) {
  std::ostringstream o;
  o.precision(prec);
  o << v;
  return o.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Lazily built shared state: the xi = 180 spectrum and the preset evolutions.
class Context {
 public:
  const ModelParams& params180() const { return params_; }

  const spectral::SpectralDecomposition& spec180() {
    if (!spec_) spec_.emplace(spectral::diagonalize(params_));
    return *spec_;
  }

  const StateVector& preset(PresetId id) {
    auto it = states_.find(id);
    if (it == states_.end()) it = states_.emplace(id, dynamics::preset_state(id, params_)).first;
    return it->second;
  }

  const dynamics::Evolution& evolution(PresetId id) {
    auto it = evolutions_.find(id);
    if (it == evolutions_.end())
      it = evolutions_
               .emplace(id, std::make_unique<dynamics::Evolution>(
                                dynamics::evolve(preset(id), spec180(), dynamics::TimeGrid::default_grid())))
               .first;
    return *it->second;
  }

 private:
  ModelParams params_ = [] {
    ModelParams p;
    p.xi = 180.0;
    p.dim_N = 900;
    return p;
  }();
  std::optional<spectral::SpectralDecomposition> spec_;
  std::map<PresetId, StateVector> states_;
  std::map<PresetId, std::unique_ptr<dynamics::Evolution>> evolutions_;
};

const std::vector<PresetId> kAll = {PresetId::O, PresetId::A, PresetId::B, PresetId::C, PresetId::D, PresetId::E};

CriterionResult esqpt_location(Context& ctx) {
  CriterionResult r{1, "ESQPT location (xi=180, N=900)"};
  const auto t0 = std::chrono::steady_clock::now();
  const auto est = spectral::locate_esqpt(ctx.spec180());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double target = est.target;
  const double d_dos = rel(est.E_peak_dos, target), d_hist = rel(est.E_hist_peak_interp, target);
  const double d_pr = rel(est.E_dip_pr, target), d_occ = rel(est.E_dip_occ, target);
  r.pass = d_dos <= 0.02 && d_hist <= 0.02 && d_pr <= 0.02 && d_occ <= 0.02 && secs < 120.0;
  r.detail = "dos peak " + fmt(d_dos * 100, 3) + "%, histogram peak " + fmt(d_hist * 100, 3) + "%, PR dip " +
             fmt(d_pr * 100, 3) + "%, <n> dip " + fmt(d_occ * 100, 3) + "% (raw bin center " +
             fmt(rel(est.E_hist_peak, target) * 100, 3) + "%); " + fmt(secs, 3) + " s";
  return r;
}

CriterionResult ground_pair(Context& ctx) {
  CriterionResult r{2, "ground-pair degeneracy"};
  r.pass = true;
  for (auto [xi, dim] : {std::pair{10.0, Index{160}}, std::pair{50.0, Index{300}}, std::pair{180.0, Index{900}}}) {
    ModelParams p;
    p.xi = xi;
    p.dim_N = dim;
    const auto spec = xi == 180.0 ? ctx.spec180() : spectral::diagonalize(p);
    const double split =
        std::abs(spec.block_values(Parity::odd)(0) - spec.block_values(Parity::even)(0)) / (p.kerr_K * xi * xi);
    r.pass = r.pass && split <= 1e-10;
    r.detail += "xi=" + fmt(xi) + ": " + fmt(split, 3) + "; ";
  }
  r.detail += "(splitting / K xi^2, bound 1e-10)";
  return r;
}

CriterionResult kissing(Context&) {
  CriterionResult r{3, "spectral kissing R^2 (pairs 1-4, xi in [2,12])"};
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(2.0 + 0.1 * i);
  ModelParams tmpl;
  tmpl.dim_N = 80;
  const auto series = spectral::kissing_gaps(grid, 5, tmpl);
  r.pass = true;
  for (Index k = 1; k <= 4; ++k) {
    const auto& s = series[static_cast<std::size_t>(k)];
    const auto f = spectral::fit_log_gap(s, tmpl.kerr_K);
    if (f.points >= 3) {
      r.pass = r.pass && f.fit.r2 >= 0.98;
      r.detail += "pair " + std::to_string(k) + ": R2=" + fmt(f.fit.r2, 5) + " (" + std::to_string(f.points) + " pts); ";
    } else {
      r.pass = false;
      r.detail += "pair " + std::to_string(k) + ": " + std::to_string(f.points) +
                  " points inside 1e-12 K < gap < 1e-2 K xi^2 (gap at xi=12 is " + fmt(s.gap.back(), 4) +
                  " K, above the 1.44 K bound), no fit; ";
    }
  }
  return r;
}

CriterionResult energy_width(Context& ctx) {
  CriterionResult r{4, "energy width of state O"};
  const auto d = dynamics::energy_distribution(ctx.preset(PresetId::O), ctx.spec180());
  const double expected = std::sqrt(2.0) * 180.0;
  const double dev = rel(d.width(), expected);
  r.pass = dev <= 1e-10;
  r.detail = "Gamma=" + fmt(d.width(), 15) + " vs sqrt(2) K xi, rel dev " + fmt(dev, 3);
  return r;
}

CriterionResult short_time(Context& ctx) {
  CriterionResult r{5, "short-time laws of state O"};
  const auto& ev = ctx.evolution(PresetId::O);
  const double xi = 180.0;
  const auto sp = dynamics::survival_probability(ev);
  const auto ft = dynamics::fotoc(ev);
  const auto fs = dynamics::short_time_coefficients(sp, dynamics::ShortTimeLaw::survival, xi, 1.0,
                                                    dynamics::short_time_closed_form(dynamics::ShortTimeLaw::survival, xi, 1.0));
  const auto ff = dynamics::short_time_coefficients(ft, dynamics::ShortTimeLaw::fotoc, xi, 1.0,
                                                    dynamics::short_time_closed_form(dynamics::ShortTimeLaw::fotoc, xi, 1.0));
  r.pass = fs.max_pointwise_deviation <= 0.01 && ff.max_pointwise_deviation <= 0.01;
  r.detail = "survival: max dev " + fmt(fs.max_pointwise_deviation * 100, 3) + "% (" + std::to_string(fs.points) +
             " pts, coef " + fmt(fs.coefficient, 7) + "); fotoc: max dev " + fmt(ff.max_pointwise_deviation * 100, 3) +
             "% (" + std::to_string(ff.points) + " pts, coef " + fmt(ff.coefficient, 7) + ")";
  return r;
}

CriterionResult lyapunov(Context& ctx) {
  CriterionResult r{6, "Lyapunov rate from FOTOC and Husimi entropy"};
  const auto& ev = ctx.evolution(PresetId::O);
  const auto [t1, t2] = dynamics::lyapunov_window(180.0, 1.0);
  const auto lnf = dynamics::growth_fit(dynamics::fotoc(ev), t1, t2, true);
  const auto sh2 = dynamics::growth_fit(dynamics::husimi_entropy_series(ev), t1, t2, false);
  const double lam = 360.0;
  const double d1 = rel(lnf.slope, 2.0 * lam), d2 = rel(sh2.slope, lam);
  r.pass = d1 <= 0.15 && d2 <= 0.20;
  r.detail = "window Kt in [" + fmt(t1, 4) + ", " + fmt(t2, 4) + "]; ln F slope " + fmt(lnf.slope, 5) + " vs 720 (" +
             fmt(d1 * 100, 3) + "%); S_H2 slope " + fmt(sh2.slope, 5) + " vs 360 (" + fmt(d2 * 100, 3) + "%)";
  return r;
}

CriterionResult ehrenfest(Context& ctx) {
  CriterionResult r{7, "Ehrenfest time"};
  r.pass = true;
  for (auto [xi, dim] : {std::pair{100.0, Index{600}}, std::pair{180.0, Index{900}}, std::pair{300.0, Index{1200}}}) {
    ModelParams p;
    p.xi = xi;
    p.dim_N = dim;
    std::optional<spectral::SpectralDecomposition> own;
    if (xi != 180.0) own.emplace(spectral::diagonalize(p));
    const auto& spec = own ? *own : ctx.spec180();
    const auto ev = dynamics::evolve(StateVector::fock(dim, 0), spec, dynamics::TimeGrid::uniform(0.0, 0.06, 3001));
    const double t = dynamics::ehrenfest_time(dynamics::fotoc(ev));
    const double formula = dynamics::ehrenfest_formula(xi, 1.0);
    const double d = rel(t, formula);
    r.pass = r.pass && d <= 0.20;
    r.detail += "xi=" + fmt(xi) + ": " + fmt(t, 5) + " vs " + fmt(formula, 5) + " (" + fmt(d * 100, 3) + "%); ";
  }
  return r;
}

CriterionResult m2_oracle(Context&) {
  CriterionResult r{8, "M2 closed form vs quadrature"};
  const phasespace::GridSpec grid = phasespace::GridSpec::square(12.0, 193);
  std::vector<std::pair<std::string, StateVector>> cases;
  cases.emplace_back("vacuum", StateVector::fock(20, 0));
  cases.emplace_back("|1>", StateVector::fock(20, 1));
  ModelParams small;
  small.dim_N = 40;
  for (auto [q, p] : {std::pair{1.0, 0.0}, std::pair{0.5, -1.2}, std::pair{-2.0, 1.5}})
    cases.emplace_back("coherent(" + fmt(q) + "," + fmt(p) + ")", fock::coherent_state(q, p, small));
  ModelParams sq;
  sq.xi = 0.6;
  sq.dim_N = 20;
  const auto spec = spectral::diagonalize(sq);
  for (Index n : {0, 1}) {
    const auto ev = dynamics::evolve(StateVector::fock(20, n), spec, dynamics::TimeGrid{{0.0, 0.35}});
    cases.emplace_back("evolved |" + std::to_string(n) + ">", ev.state(1));
  }
  double worst = 0.0, coherent_worst = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const double exact = phasespace::m2_exact(cases[i].second);
    const double quad = phasespace::m2_quadrature(cases[i].second, grid);
    worst = std::max(worst, std::abs(exact - quad));
    if (i >= 2 && i < 5) coherent_worst = std::max(coherent_worst, std::abs(exact - 0.5));
  }
  r.pass = worst <= 1e-6 && coherent_worst <= 1e-9;
  r.detail = std::to_string(cases.size()) + " states, max |exact - quadrature| " + fmt(worst, 3) +
             ", coherent |M2 - 1/2| " + fmt(coherent_worst, 3);
  return r;
}

CriterionResult classical_exactness(Context&) {
  CriterionResult r{9, "classical exactness"};
  const classical::ClassicalParams cp{1.0, 180.0};
  double stat = 0.0;
  for (const auto& s : classical::stationary_points(cp).points) {
    const double expect = s.kind == classical::PointKind::saddle ? 0.0 : -32400.0;
    stat = std::max(stat, std::abs(classical::h_cl(s.point, cp) - expect) / 32400.0);
  }
  const auto lin = classical::linearize({0.0, 0.0}, cp);
  const double eig = std::max(std::abs(lin.eigenvalues[0] - Complex(360.0, 0.0)),
                              std::abs(lin.eigenvalues[1] - Complex(-360.0, 0.0))) / 360.0;
  bool digits = true;
  std::string bad;
  for (const auto& pr : dynamics::presets()) {
    const double e = classical::h_cl({pr.q, pr.p}, cp);
    const double ok = pr.tabulated_energy == 0.0 ? std::abs(e) < 0.5 : rel(e, pr.tabulated_energy) < 5e-4;
    if (!ok) {
      digits = false;
      bad += std::string(1, pr.name) + "=" + fmt(e) + " ";
    }
  }
  double drift = 0.0;
  for (PresetId id : {PresetId::A, PresetId::B, PresetId::C, PresetId::D, PresetId::E}) {
    const auto& pr = dynamics::preset(id);
    const auto tr = classical::integrate_trajectory({pr.q, pr.p}, cp, 1.0, 1e-6, 100000);
    drift = std::max(drift, tr.relative_drift);
  }
  r.pass = stat <= 1e-12 && eig <= 1e-14 && digits && drift <= 1e-8;
  r.detail = "stationary energies rel err " + fmt(stat, 3) + "; origin eigenvalues rel err " + fmt(eig, 3) +
             "; preset energies " + (digits ? std::string("match to 4 digits") : "mismatch: " + bad) +
             "; RK4 drift over Kt=1 " + fmt(drift, 3);
  return r;
}

CriterionResult semiclassical(Context& ctx) {
  CriterionResult r{10, "semiclassical DOS"};
  const auto& spec = ctx.spec180();
  const auto hist = spectral::dos_histogram(spec, 0, spectral::default_dos_range(spec));
  const auto cp = classical::ClassicalParams::from_model(ctx.params180());
  const auto sc = classical::semiclassical_bin_density(cp, hist.edges);
  const double target = spectral::esqpt_energy(ctx.params180());
  const auto cmp = classical::compare_dos(hist.edges, hist.density, sc, target, 0.05 * target);
  const auto logfit = classical::log_singularity_fit(cp);
  const double pred = -1.0 / (std::numbers::pi * cp.lambda());
  const bool log_ok = logfit.below.slope < 0.0 && logfit.above.slope < 0.0 && logfit.below.r2 >= 0.99 &&
                      logfit.above.r2 >= 0.99;
  r.pass = cmp.l1 < 0.1 && log_ok;
  r.detail = "L1=" + fmt(cmp.l1, 4) + " over " + std::to_string(cmp.bins_used) + " bins; d nu / d ln|E|: below " +
             fmt(logfit.below.slope / pred, 4) + ", above " + fmt(logfit.above.slope / pred, 4) +
             " x (-1/(pi lambda)), R2 " + fmt(std::min(logfit.below.r2, logfit.above.r2), 6);
  return r;
}

CriterionResult orderings(Context& ctx) {
  CriterionResult r{11, "dynamical orderings (xi=180)"};
  const auto& spec = ctx.spec180();
  std::map<PresetId, double> sp, fbar;
  const dynamics::TimeGrid at{{0.002}};
  const dynamics::TimeGrid late = dynamics::TimeGrid::uniform(1.0, 2.0, 2001);
  for (PresetId id : kAll) {
    sp[id] = dynamics::survival_probability(dynamics::evolve(ctx.preset(id), spec, at)).values[0];
    const auto ev = dynamics::evolve(ctx.preset(id), spec, late);
    fbar[id] = dynamics::long_time_average(dynamics::fotoc(ev), 1.0, 2.0, dynamics::characteristic_span(180.0, 1.0));
  }
  bool sp_ok = true;
  for (PresetId id : kAll)
    if (id != PresetId::O) sp_ok = sp_ok && sp[PresetId::O] > sp[id];
  const double mid_lo = std::min({fbar[PresetId::O], fbar[PresetId::B], fbar[PresetId::C]});
  const double mid_hi = std::max({fbar[PresetId::O], fbar[PresetId::B], fbar[PresetId::C]});
  const double de = std::abs(fbar[PresetId::D] - fbar[PresetId::E]) / (0.5 * (fbar[PresetId::D] + fbar[PresetId::E]));
  const bool f_ok = fbar[PresetId::A] < mid_lo && mid_hi < std::min(fbar[PresetId::D], fbar[PresetId::E]) && de <= 0.05;
  r.pass = sp_ok && f_ok;
  std::string s = "S_p(0.002):";
  for (PresetId id : kAll) s += " " + std::string(1, dynamics::preset(id).name) + "=" + fmt(sp[id], 3);
  s += "; Fbar[1,2]:";
  for (PresetId id : kAll) s += " " + std::string(1, dynamics::preset(id).name) + "=" + fmt(fbar[id], 4);
  r.detail = s + "; |D-E|/mean=" + fmt(de * 100, 3) + "%";
  return r;
}

CriterionResult conservation(Context& ctx) {
  CriterionResult r{12, "conservation suite"};
  double worst = 0.0;
  std::string s;
  for (PresetId id : kAll) {
    const auto d = dynamics::conservation_drifts(ctx.evolution(id));
    worst = std::max({worst, d.norm_drift, d.energy_drift, d.parity_drift});
    s += std::string(1, dynamics::preset(id).name) + "=" + fmt(std::max({d.norm_drift, d.energy_drift, d.parity_drift}), 2) + " ";
  }
  r.pass = worst <= 1e-9;
  r.detail = "max drift of norm, <H>, parity over Kt in [0,0.15]: " + s;
  return r;
}

}  // namespace

std::vector<CriterionResult> run(const Options& options, std::ostream& out) {
  Context ctx;
  const std::vector<std::function<CriterionResult(Context&)>> all = {
      esqpt_location, ground_pair, kissing,     energy_width,  short_time, lyapunov,
      ehrenfest,      m2_oracle,   classical_exactness, semiclassical, orderings, conservation};
  std::vector<CriterionResult> results;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = all[i](ctx);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion " + std::to_string(id);
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out << (r.pass ? "PASS" : "FAIL") << "  [" << (id < 10 ? " " : "") << id << "] " << r.name << " -- " << r.detail
        << " (" << fmt(r.seconds, 3) << " s)" << std::endl;
    results.push_back(r);
  }
  return results;
}

}  // namespace kerr::acceptance
