#include "kdvlab/lab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <fmt/format.h>

#include "kdvlab/averaging.hpp"
#include "kdvlab/error.hpp"
#include "kdvlab/kdv_flow.hpp"
#include "kdvlab/lab/csv.hpp"
#include "kdvlab/parallel.hpp"
#include "kdvlab/rng.hpp"

namespace kdvlab::lab {

namespace {

constexpr std::uint64_t kSweepTag = 0x5EE9;
constexpr std::uint64_t kAvgTag = 0xA7E;
constexpr std::uint64_t kQiTag = 0x91;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

double quantile(std::vector<double> x, double q) {
  if (x.empty()) return NAN;
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

void write_manifest(const ExperimentConfig& cfg, const fs::path& out_dir, const std::string& command) {
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "manifest.toml", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest in " + out_dir.string());
  out << "# kdvlab manifest v" << kCsvSchemaVersion << " config_hash=" << cfg.hash_hex() << " command=" << command
      << "\n";
  out << cfg.canonical();
}

SimulateResult run_simulate(const ExperimentConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_manifest(cfg, out_dir, "simulate");
  const SpectralField u0 = cfg.make_initial();
  FlowParams fp;
  fp.eps = cfg.simulate.eps;
  fp.dt = cfg.grid.dt_fast;
  fp.t_end = cfg.simulate.t_end_fast;
  fp.record_every = cfg.simulate.record_every;
  fp.norm_p = SobolevIndex(cfg.simulate.norm_p);
  const PerturbationSpec f = cfg.make_perturbation();
  const Trajectory traj = integrate(u0, fp, f);

  const ActionBackend backend = parse_backend(cfg.simulate.backend);
  const int K = cfg.simulate.n_actions;
  std::vector<std::string> cols{"t", "tau", "H", "norm0", "norm_p"};
  for (int k = 1; k <= K; ++k) cols.push_back("I_" + std::to_string(k));

  SimulateResult res;
  res.csv = out_dir / "trajectory.csv";
  CsvWriter csv(res.csv, "trajectory", cfg.hash_hex(), cols,
                {{"backend", std::string(to_string(backend))}, {"norm_p", format_double(cfg.simulate.norm_p)}});
  std::vector<std::vector<double>> I(traj.size());
  parallel_for(traj.size(), [&](std::size_t i) { I[i] = backend_actions(traj.states[i], K, backend); });
  const double H0 = hamiltonian(u0);
  const double n0 = sobolev_norm(u0, SobolevIndex(0.0));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double H = hamiltonian(traj.states[i]);
    const double n = sobolev_norm(traj.states[i], SobolevIndex(0.0));
    if (H0 != 0.0) res.H_drift = std::max(res.H_drift, std::abs(H - H0) / std::abs(H0));
    if (n0 != 0.0) res.l2_drift = std::max(res.l2_drift, std::abs(n - n0) / n0);
    csv << traj.times[i] << traj.tau(i) << H << n << sobolev_norm(traj.states[i], fp.norm_p);
    for (double x : I[i]) csv << x;
    csv.end_row();
  }
  res.records = traj.size();
  return res;
}

int EnsembleResult::failures() const {
  int n = 0;
  for (const auto& m : members) n += !m.ok;
  return n;
}

EnsembleResult run_ensemble(const ExperimentConfig& cfg, double eps, bool with_averaging) {
  EnsembleResult res;
  res.eps = eps;
  res.L = weyl_frequencies(cfg.equidist.m_angles, cfg.equidist.order);
  res.members.resize(static_cast<std::size_t>(cfg.sweep.ensemble));

  const MeasureSpec measure = cfg.make_measure();
  const PerturbationSpec f = cfg.make_perturbation();
  const AveragingConfig acfg = cfg.make_averaging();
  const int n = cfg.grid.n_modes;
  const SobolevIndex p_report(cfg.sweep.report_p);
  const SobolevIndex p_weight = measure.p();

  FlowParams fp;
  fp.eps = eps;
  fp.dt = cfg.grid.dt_fast;
  fp.t_end = cfg.sweep.horizon_slow / eps;
  fp.record_every = cfg.sweep.record_every;
  fp.norm_p = p_weight;
  fp.norm_ceiling_factor = cfg.sweep.norm_ceiling_factor;

  parallel_for(res.members.size(), [&](std::size_t m) {
    MemberResult& r = res.members[m];
    try {
      const BirkhoffState v0 = sample(measure, derive_seed(cfg.seed, {kSweepTag}), m);
      const SpectralField u0 = linear_birkhoff_inverse(v0, cfg.grid.grid_size);
      const Trajectory traj = integrate(u0, fp, f);

      if (with_averaging) {
        const ActionVector J0(backend_actions(u0, n, acfg.backend, acfg.hill), p_weight);
        const AveragedTrajectory avg = integrate_averaged(J0, cfg.sweep.horizon_slow, f, acfg,
                                                          derive_seed(cfg.seed, {kAvgTag, m}), {}, cfg.grid.grid_size);
        r.clip_events = avg.clip_events;
        r.D = compare_actions(traj, avg, p_report, acfg.backend, acfg.hill);
        r.Dp = compare_actions(traj, avg, p_weight, acfg.backend, acfg.hill);
      }

      std::vector<AngleVector> series;
      for (std::size_t i = 0; i < traj.size(); ++i) {
        const double tau = traj.tau(i);
        if (tau < cfg.equidist.window_lo_slow || tau > cfg.equidist.window_hi_slow) continue;
        series.push_back(angles(linear_birkhoff(traj.states[i])));
      }
      r.weyl.resize(res.L.size());
      for (std::size_t l = 0; l < res.L.size(); ++l) {
        r.weyl[l] = weyl_sum(series, res.L[l]);
        r.weyl_max = std::max(r.weyl_max, r.weyl[l]);
      }
    } catch (const IntegrationBlowup& e) {
      r.ok = false;
      r.ceiling_violation = true;
      r.error = e.what();
    } catch (const NumericalError& e) {
      r.ok = false;
      r.error = e.what();
    }
  });

  if (4 * res.failures() > cfg.sweep.ensemble) {
    throw NumericalError(fmt::format("sweep at eps={}: {} of {} members failed (first: {})", format_double(eps),
                                     res.failures(), cfg.sweep.ensemble,
                                     std::find_if(res.members.begin(), res.members.end(),
                                                  [](const MemberResult& r) { return !r.ok; })->error));
  }
  return res;
}

SweepReport summarize(const std::vector<EnsembleResult>& runs, double rho) {
  SweepReport rep;
  for (const auto& run : runs) {
    SweepRow row;
    row.eps = run.eps;
    row.members = static_cast<int>(run.members.size());
    row.failures = run.failures();
    std::vector<double> D, Dp, W;
    int good = 0;
    for (const auto& m : run.members) {
      row.clip_events += m.clip_events;
      row.ceiling_violations += m.ceiling_violation;
      if (!m.ok) continue;
      D.push_back(m.D);
      Dp.push_back(m.Dp);
      W.push_back(m.weyl_max);
      good += m.D <= rho;
    }
    row.D_median = quantile(D, 0.5);
    row.D_q1 = quantile(D, 0.25);
    row.D_q3 = quantile(D, 0.75);
    row.Dp_median = quantile(Dp, 0.5);
    row.Dp_q1 = quantile(Dp, 0.25);
    row.Dp_q3 = quantile(Dp, 0.75);
    row.good_fraction = static_cast<double>(good) / static_cast<double>(run.members.size());
    row.weyl_max_median = quantile(W, 0.5);
    row.weyl_max_max = W.empty() ? NAN : *std::max_element(W.begin(), W.end());
    rep.rows.push_back(row);

    for (std::size_t l = 0; l < run.L.size(); ++l) {
      std::vector<double> x;
      for (const auto& m : run.members) {
        if (m.ok) x.push_back(m.weyl[l]);
      }
      WeylRow w;
      w.eps = run.eps;
      w.L = run.L[l];
      double s = 0.0;
      for (double v : x) s += v;
      w.mean = x.empty() ? NAN : s / static_cast<double>(x.size());
      w.median = quantile(x, 0.5);
      w.max = x.empty() ? NAN : *std::max_element(x.begin(), x.end());
      rep.weyl.push_back(w);
    }
  }
  rep.D_strictly_decreasing = !rep.rows.empty();
  rep.weyl_decreasing = !rep.rows.empty();
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    rep.D_strictly_decreasing = rep.D_strictly_decreasing && rep.rows[i].D_median < rep.rows[i - 1].D_median;
    rep.weyl_decreasing = rep.weyl_decreasing && rep.rows[i].weyl_max_median < rep.rows[i - 1].weyl_max_median;
  }
  rep.D_halved = !rep.rows.empty() && rep.rows.back().D_median <= 0.5 * rep.rows.front().D_median;
  return rep;
}

namespace {

std::vector<EnsembleResult> run_all(const ExperimentConfig& cfg, bool with_averaging) {
  std::vector<EnsembleResult> runs;
  for (double eps : cfg.sweep.eps) {
    const auto t0 = Clock::now();
    runs.push_back(run_ensemble(cfg, eps, with_averaging));
    std::fprintf(stderr, "eps=%s: %d members, %d failed, %.1f s\n", format_double(eps).c_str(), cfg.sweep.ensemble,
                 runs.back().failures(), seconds_since(t0));
  }
  return runs;
}

void write_weyl(const ExperimentConfig& cfg, const SweepReport& rep, const fs::path& path) {
  std::vector<std::string> cols{"eps"};
  for (int i = 1; i <= cfg.equidist.m_angles; ++i) cols.push_back("L" + std::to_string(i));
  for (const char* c : {"weyl_mean", "weyl_median", "weyl_max"}) cols.emplace_back(c);
  CsvWriter csv(path, "weyl", cfg.hash_hex(), cols,
                {{"window_slow", format_double(cfg.equidist.window_lo_slow) + ":" +
                                     format_double(cfg.equidist.window_hi_slow)},
                 {"angles", "linear"}});
  for (const auto& w : rep.weyl) {
    csv << w.eps;
    for (int l : w.L) csv << l;
    csv << w.mean << w.median << w.max;
    csv.end_row();
  }
}

}  // namespace

SweepReport run_sweep(const ExperimentConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_manifest(cfg, out_dir, "sweep");
  const auto runs = run_all(cfg, true);
  const SweepReport rep = summarize(runs, cfg.sweep.rho);
  const std::string backend = cfg.averaging.backend;
  {
    CsvWriter csv(out_dir / "sweep.csv", "sweep", cfg.hash_hex(),
                  {"eps", "T_fast", "members", "failures", "D_median", "D_q1", "D_q3", "Dp_median", "Dp_q1", "Dp_q3",
                   "good_fraction", "weyl_max_median", "weyl_max_max", "clip_events", "ceiling_violations"},
                  {{"backend", backend},
                   {"report_p", format_double(cfg.sweep.report_p)},
                   {"weight_p", format_double(cfg.measure.p)},
                   {"D_strictly_decreasing", rep.D_strictly_decreasing ? "1" : "0"},
                   {"D_halved", rep.D_halved ? "1" : "0"}});
    for (const auto& r : rep.rows) {
      csv << r.eps << cfg.sweep.horizon_slow / r.eps << r.members << r.failures << r.D_median << r.D_q1 << r.D_q3
          << r.Dp_median << r.Dp_q1 << r.Dp_q3 << r.good_fraction << r.weyl_max_median << r.weyl_max_max
          << r.clip_events << r.ceiling_violations;
      csv.end_row();
    }
  }
  {
    CsvWriter csv(out_dir / "sweep_members.csv", "sweep_members", cfg.hash_hex(),
                  {"eps", "member", "status", "D", "Dp", "weyl_max", "clip_events"}, {{"backend", backend}});
    for (const auto& run : runs) {
      for (std::size_t m = 0; m < run.members.size(); ++m) {
        const auto& r = run.members[m];
        csv << run.eps << static_cast<long long>(m) << std::string(r.ok ? "ok" : (r.ceiling_violation ? "ceiling" : "failed"))
            << r.D << r.Dp << r.weyl_max << r.clip_events;
        csv.end_row();
      }
    }
  }
  write_weyl(cfg, rep, out_dir / "weyl.csv");
  return rep;
}

SweepReport run_equidist(const ExperimentConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_manifest(cfg, out_dir, "equidist");
  const auto runs = run_all(cfg, false);
  const SweepReport rep = summarize(runs, cfg.sweep.rho);
  write_weyl(cfg, rep, out_dir / "weyl.csv");
  CsvWriter csv(out_dir / "weyl_summary.csv", "weyl_summary", cfg.hash_hex(),
                {"eps", "members", "failures", "weyl_max_median", "weyl_max_max"},
                {{"weyl_decreasing", rep.weyl_decreasing ? "1" : "0"}});
  for (const auto& r : rep.rows) {
    csv << r.eps << r.members << r.failures << r.weyl_max_median << r.weyl_max_max;
    csv.end_row();
  }
  return rep;
}

QiRun run_qi(const ExperimentConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_manifest(cfg, out_dir, "qi");
  const MeasureSpec measure = cfg.make_measure();
  const PerturbationSpec f = cfg.make_perturbation();
  const std::uint64_t seed = derive_seed(cfg.seed, {kQiTag});
  QiOptions opts;
  opts.ball_samples = cfg.qi.ball_samples;
  opts.record_points = cfg.qi.record_points;

  QiRun run;
  for (int n : cfg.qi.n_list) {
    const auto t0 = Clock::now();
    run.probes.push_back(quasi_invariance_probe(measure.truncated(n), f, cfg.qi.eps, cfg.qi.horizon_slow,
                                                cfg.qi.ensemble, seed, opts));
    std::fprintf(stderr, "qi n=%d: %.1f s\n", n, seconds_since(t0));
    CsvWriter csv(out_dir / fmt::format("qi_n{}.csv", n), "qi_members", cfg.hash_hex(),
                  {"member", "tau", "log_b", "cn", "A"}, {{"n", std::to_string(n)}, {"field", "linearized"}});
    const QiReport& rep = run.probes.back();
    for (std::size_t m = 0; m < rep.members.size(); ++m) {
      for (const auto& r : rep.members[m].records) {
        csv << static_cast<long long>(m) << r.tau << r.log_b << r.cn << r.A;
        csv.end_row();
      }
    }
  }
  QiOptions control_opts = opts;
  control_opts.ball_samples = 0;
  run.control = quasi_invariance_probe(measure.truncated(cfg.qi.n_list.back()),
                                       PerturbationSpec::none(cfg.grid.n_modes), cfg.qi.eps, cfg.qi.horizon_slow,
                                       cfg.qi.ensemble, seed, control_opts);

  double lo = INFINITY, hi = 0.0;
  for (const auto& p : run.probes) {
    lo = std::min(lo, p.max_abs_cn);
    hi = std::max(hi, p.max_abs_cn);
  }
  run.cn_spread = lo > 0.0 ? hi / lo - 1.0 : (hi > 0.0 ? INFINITY : 0.0);

  CsvWriter csv(out_dir / "qi_summary.csv", "qi_summary", cfg.hash_hex(),
                {"kind", "n", "eps", "tau_end", "members", "c_hat_tau", "max_abs_cn", "identity_residual",
                 "rotation_residual", "ball_radius", "ball_hits_initial", "ball_hits_flowed", "ball_ratio", "ball_ci_lo",
                 "ball_ci_hi", "bound_lo", "bound_hi", "ball_pass"},
                {{"field", "linearized"}, {"cn_spread", format_double(run.cn_spread)}});
  auto row = [&](const std::string& kind, const QiReport& r) {
    csv << kind << r.n_modes << r.eps << r.tau_end << static_cast<long long>(r.members.size()) << r.c_hat_tau
        << r.max_abs_cn << r.identity_residual << r.rotation_residual << r.ball.radius << r.ball.hits_initial
        << r.ball.hits_flowed << r.ball.ratio << r.ball.ci_lo << r.ball.ci_hi << r.ball.bound_lo << r.ball.bound_hi
        << (r.ball.passed ? 1 : 0);
    csv.end_row();
  };
  for (const auto& p : run.probes) row("probe", p);
  row("control", run.control);
  return run;
}

namespace {

std::string gp_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

void require_columns(const fs::path& csv, const std::vector<std::string>& cols) {
  const CsvTable t = read_csv(csv);
  for (const auto& c : cols) {
    try {
      (void)t.column(c);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(csv.string() + ": " + e.what());
    }
  }
}

}  // namespace

fs::path emit_plots(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("no report directory " + dir.string());
  std::string s;
  s += "# kdvlab plot script v1; run with gnuplot from this directory\n";
  s += "set datafile separator ','\n";
  s += "set datafile commentschars '#'\n";
  s += "set terminal pngcairo size 900,600\n";

  if (fs::exists(dir / "sweep.csv")) {
    require_columns(dir / "sweep.csv", {"eps", "D_median", "D_q1", "D_q3", "Dp_median"});
    const std::string f = gp_quote("sweep.csv");
    s += "\nset output 'D_eps.png'\nset logscale xy\nset xlabel 'eps'\nset ylabel 'D(eps)'\nset key top left\n";
    s += "plot " + f + " using 'eps':'D_median':'D_q1':'D_q3' with yerrorlines title 'median, quartiles', \\\n";
    s += "     " + f + " using 'eps':'Dp_median' with linespoints title 'weight p'\n";
    s += "unset logscale\n";
  }
  if (fs::exists(dir / "weyl.csv")) {
    require_columns(dir / "weyl.csv", {"eps", "weyl_mean", "weyl_max"});
    const std::string f = gp_quote("weyl.csv");
    s += "\nset output 'weyl_eps.png'\nset logscale x\nset xlabel 'eps'\nset ylabel 'Weyl sum'\n";
    s += "plot " + f + " using 'eps':'weyl_mean' with points title 'mean over ensemble', \\\n";
    s += "     " + f + " using 'eps':'weyl_max' with points title 'max over ensemble'\n";
    s += "unset logscale\n";
  }
  std::vector<fs::path> qi;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("qi_n", 0) == 0 && e.path().extension() == ".csv") qi.push_back(e.path().filename());
  }
  std::sort(qi.begin(), qi.end());
  if (!qi.empty()) {
    s += "\nset output 'A_tau.png'\nset xlabel 'tau'\nset ylabel 'A(tau)'\n";
    for (std::size_t i = 0; i < qi.size(); ++i) {
      require_columns(dir / qi[i], {"tau", "A"});
      s += (i ? "     " : "plot ") + gp_quote(qi[i].string()) + " using 'tau':'A' with dots title " +
           gp_quote(qi[i].stem().string()) + (i + 1 < qi.size() ? ", \\\n" : "\n");
    }
  }
  const fs::path script = dir / "plots.gp";
  std::ofstream out(script, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + script.string());
  out << s;
  return script;
}

}  // namespace kdvlab::lab
