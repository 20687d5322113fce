#include "oscmfg/runner.hpp"

#include <Eigen/Core>
#include <cstdlib>
#include <fstream>
#include "json.hpp"
#include <ostream>

#include "oscmfg/csv.hpp"
#include "oscmfg/error.hpp"
#include "oscmfg/linearized.hpp"
#include "oscmfg/oracles.hpp"
#include "oscmfg/simulate.hpp"
#include "oscmfg/spectral.hpp"

namespace oscmfg {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return format_number(v); }

std::string opt_num(const std::optional<double>& v) { return v ? format_number(*v) : "none"; }

void write_results(const RunResult& r) {
  std::ofstream out(r.out_dir / "results.txt");
  for (const auto& [k, v] : r.summary) out << k << " = " << v << '\n';
  if (!out) throw DomainError("io", "cannot write results.txt");
}

void write_manifest(const fs::path& dir, const ExperimentConfig& resolved) {
  std::ofstream out(dir / "manifest.txt");
  out << "# oscmfg " << kVersion << '\n';
  out << "# eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n';
#if defined(__VERSION__)
  out << "# compiler " << __VERSION__ << '\n';
#endif
  out << print_config(resolved);
  if (!out) throw DomainError("io", "cannot write manifest.txt");
}

void run_simulate(const ExperimentConfig& c, RunResult& r) {
  const auto& s = c.simulate;
  SimulationResult sim = simulate_kuramoto(s.params, {s.T, c.seed, c.record_stride, s.record_phases});
  {
    CsvWriter w(r.out_dir / "summary.csv", {"t", "gamma_sq", "circular_mean"});
    for (const auto& rec : sim.records) w.row({rec.t, rec.gamma_sq, rec.mean_phase});
    r.artifacts.push_back("summary.csv");
  }
  if (s.record_phases) {
    std::vector<std::string> header{"t"};
    for (std::size_t i = 1; i <= s.params.N; ++i) header.push_back("theta_" + std::to_string(i));
    CsvWriter w(r.out_dir / "trajectory.csv", header);
    std::vector<double> row(s.params.N + 1);
    for (const auto& rec : sim.records) {
      row[0] = rec.t;
      std::copy(rec.phases.begin(), rec.phases.end(), row.begin() + 1);
      w.row(row);
    }
    r.artifacts.push_back("trajectory.csv");
    if (sim.records.size() >= 2) {
      std::vector<PhaseSnapshot> traj;
      std::vector<std::vector<double>> controls;
      for (const auto& rec : sim.records) {
        traj.push_back({rec.t, rec.phases});
        controls.push_back(rec.controls);
      }
      CostBreakdown cost = empirical_cost(traj, controls, s.params.R, CostSpec::kuramoto());
      CsvWriter cw(r.out_dir / "cost.csv", {"oscillator", "state_cost", "control_cost", "total_cost"});
      double mean = 0.0;
      for (std::size_t i = 0; i < cost.total.size(); ++i) {
        cw.row({static_cast<double>(i + 1), cost.state[i], cost.control[i], cost.total[i]});
        mean += cost.total[i];
      }
      r.artifacts.push_back("cost.csv");
      r.summary.push_back({"mean_total_cost", num(mean / static_cast<double>(cost.total.size()))});
    }
  }
  PlotSeries g{"gamma_sq", {}, {}};
  for (const auto& rec : sim.records) {
    g.x.push_back(rec.t);
    g.y.push_back(rec.gamma_sq);
  }
  emit_plotdata(r.out_dir / "plotdata.csv", {g});
  r.artifacts.push_back("plotdata.csv");
  r.summary.push_back({"mean_gamma_sq", num(sim.mean_gamma_sq)});
  r.summary.push_back({"kappa_c", num(critical_kappa(s.params.gamma, s.params.sigma))});
}

void run_spectrum(const ExperimentConfig& c, RunResult& r) {
  const auto& s = c.spectrum;
  ModelParams p;
  p.sigma = s.sigma;
  p.gamma = s.gamma;
  const CostSpec cost = CostSpec::kuramoto();
  auto grid = default_R_grid(s.k, p, cost, s.floor_fraction);
  EigenPath right = discrete_eigenpath(s.k, grid, p, cost, Branch::Right);
  EigenPath left = discrete_eigenpath(s.k, grid, p, cost, Branch::Left);
  {
    CsvWriter w(r.out_dir / "eigenpath.csv", {"R", "re_lambda_1", "im_lambda_1", "re_lambda_2", "im_lambda_2"});
    for (std::size_t i = 0; i < grid.size(); ++i)
      w.row({grid[i], right.samples[i].lambda.real(), right.samples[i].lambda.imag(), left.samples[i].lambda.real(),
             left.samples[i].lambda.imag()});
    r.artifacts.push_back("eigenpath.csv");
  }
  {
    CsvWriter w(r.out_dir / "continuous_spectrum.csv", {"real_part", "imag_lo", "imag_hi"});
    for (const auto& seg : continuous_spectrum(s.k, s.sigma, s.gamma)) w.row({seg.real_part, seg.imag_lo, seg.imag_hi});
    r.artifacts.push_back("continuous_spectrum.csv");
  }
  std::vector<PlotSeries> series(4);
  const char* names[4] = {"re_lambda_1", "im_lambda_1", "re_lambda_2", "im_lambda_2"};
  for (int j = 0; j < 4; ++j) series[static_cast<std::size_t>(j)].name = names[j];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ys[4] = {right.samples[i].lambda.real(), right.samples[i].lambda.imag(),
                          left.samples[i].lambda.real(), left.samples[i].lambda.imag()};
    for (std::size_t j = 0; j < 4; ++j) {
      series[j].x.push_back(grid[i]);
      series[j].y.push_back(ys[j]);
    }
  }
  r.summary.push_back({"R_first", num(grid.front())});
  r.summary.push_back({"lambda_first_right", num(right.samples.front().lambda.real()) + " " +
                                                 num(right.samples.front().lambda.imag())});
  r.summary.push_back({"critical_R_numeric", opt_num(right.critical_R)});
  if (std::abs(s.k) == 1) {
    r.summary.push_back({"critical_R_closed", num(critical_R_closed(s.gamma, s.sigma))});
    r.summary.push_back({"kappa_c", num(critical_kappa(s.gamma, s.sigma))});
  }
  if (s.ivp_R > 0.0) {
    LinearizedEvolver ev(s.ivp_R, p, cost, {s.K_max, s.n_omega});
    NormHistory h = ev.evolve(first_harmonic_perturbation(ev, std::max<std::size_t>(64, 2 * s.K_max + 1)), s.ivp_T, 400);
    CsvWriter w(r.out_dir / "linearized_norm.csv", {"t", "norm", "ratio"});
    PlotSeries ns{"norm_ratio", {}, {}};
    for (std::size_t i = 0; i < h.t.size(); ++i) {
      const double ratio = h.norm[0] > 0.0 ? h.norm[i] / h.norm[0] : 0.0;
      w.row({h.t[i], h.norm[i], ratio});
      ns.x.push_back(h.t[i]);
      ns.y.push_back(ratio);
    }
    series.push_back(ns);
    r.artifacts.push_back("linearized_norm.csv");
    const double rc = critical_R_closed(s.gamma, s.sigma);
    Verdict v = std::abs(s.ivp_R - rc) <= 1e-3 * rc ? Verdict::Marginal
                                                    : (s.ivp_R > rc ? Verdict::IncoherenceStable : Verdict::Synchrony);
    r.summary.push_back({"ivp_verdict", to_string(v)});
    r.summary.push_back({"ivp_final_ratio", num(h.norm[0] > 0.0 ? h.norm.back() / h.norm[0] : 0.0)});
  }
  emit_plotdata(r.out_dir / "plotdata.csv", series);
  r.artifacts.push_back("plotdata.csv");
}

void run_bifurcation(const ExperimentConfig& c, RunResult& r) {
  const auto& b = c.bifurcation;
  std::vector<double> gammas;
  for (std::size_t i = 0; i < b.gamma_count; ++i)
    gammas.push_back(b.gamma_count == 1 ? b.gamma_min
                                        : b.gamma_min + (b.gamma_max - b.gamma_min) * static_cast<double>(i) /
                                                            static_cast<double>(b.gamma_count - 1));
  auto rows = bifurcation_table(gammas, b.sigma);
  CsvWriter w(r.out_dir / "bifurcation.csv", {"gamma", "R_c_closed", "R_c_numeric", "kappa_c"});
  std::vector<PlotSeries> series{{"R_c_closed", {}, {}}, {"R_c_numeric", {}, {}}, {"kappa_c", {}, {}}};
  double worst = 0.0;
  for (const auto& row : rows) {
    w.row({row.gamma, row.R_c_closed, row.R_c_numeric, row.kappa_c});
    const double ys[3] = {row.R_c_closed, row.R_c_numeric, row.kappa_c};
    for (std::size_t j = 0; j < 3; ++j) {
      series[j].x.push_back(row.gamma);
      series[j].y.push_back(ys[j]);
    }
    worst = std::max(worst, std::abs(row.R_c_numeric / row.R_c_closed - 1.0));
  }
  r.artifacts.push_back("bifurcation.csv");
  emit_plotdata(r.out_dir / "plotdata.csv", series);
  r.artifacts.push_back("plotdata.csv");
  r.summary.push_back({"max_relative_gap", num(worst)});
}

void run_learn(const ExperimentConfig& c, RunResult& r) {
  const auto& e = c.learn.experiment;
  LearningRun run = run_learning_experiment(e, c.seed, c.record_stride);
  {
    CsvWriter w(r.out_dir / "learning.csv", {"t", "A_1", "zeta_1", "gamma_sq"});
    for (const auto& s : run.samples) w.row({s.t, s.A, s.zeta, s.gamma_sq});
    r.artifacts.push_back("learning.csv");
  }
  std::vector<PlotSeries> series{{"A_1", {}, {}}, {"zeta_1", {}, {}}, {"gamma_sq", {}, {}}};
  for (const auto& s : run.samples) {
    const double ys[3] = {s.A, s.zeta, s.gamma_sq};
    for (std::size_t j = 0; j < 3; ++j) {
      series[j].x.push_back(s.t);
      series[j].y.push_back(ys[j]);
    }
  }
  emit_plotdata(r.out_dir / "plotdata.csv", series);
  r.artifacts.push_back("plotdata.csv");
  if (c.learn.portrait) {
    ModelParams p;
    p.sigma = e.sigma;
    p.gamma = e.gamma;
    p.wave_speed = e.wave_speed;
    p.epsilon = 1.0;
    const double span = 2.0 * std::max(1.0, run.target.A);
    CsvWriter w(r.out_dir / "phase_portrait.csv", {"A", "zeta", "dA_dt", "dzeta_dt"});
    for (const auto& row : phase_portrait(e.omega1, p, -span, span, 21, 24)) w.row({row.A, row.zeta, row.dA_dt, row.dzeta_dt});
    r.artifacts.push_back("phase_portrait.csv");
  }
  r.summary.push_back({"A_star", num(run.target.A)});
  r.summary.push_back({"zeta_star", num(run.target.zeta)});
  r.summary.push_back({"first_entry", opt_num(run.first_entry)});
  r.summary.push_back({"settle_time", opt_num(run.settle_time)});
  r.summary.push_back({"mean_gamma_sq", num(run.mean_gamma_sq)});
  r.summary.push_back({"final_A", num(run.final_policy.A)});
  r.summary.push_back({"final_zeta", num(run.final_policy.zeta)});
}

void run_fpf(const ExperimentConfig& c, RunResult& r) {
  const auto& f = c.fpf;
  FpfRun run = run_fpf_experiment(f.filter, c.seed, c.record_stride, f.snapshots, f.bins);
  {
    CsvWriter w(r.out_dir / "fpf.csv", {"t", "theta_true", "theta_hat", "spread", "kappa1", "kappa2", "dZ"});
    for (const auto& row : run.rows) w.row({row.t, row.theta_true, row.theta_hat, row.spread, row.kappa1, row.kappa2, row.dz});
    r.artifacts.push_back("fpf.csv");
  }
  if (!run.snapshots.empty()) {
    CsvWriter w(r.out_dir / "histogram.csv", {"t", "theta", "density"});
    for (const auto& snap : run.snapshots) {
      const double width = kTwoPi / static_cast<double>(snap.density.size());
      for (std::size_t b = 0; b < snap.density.size(); ++b)
        w.row({snap.t, (static_cast<double>(b) + 0.5) * width, snap.density[b]});
    }
    r.artifacts.push_back("histogram.csv");
  }
  std::vector<PlotSeries> series{{"theta_true", {}, {}}, {"theta_hat", {}, {}}};
  for (const auto& row : run.rows) {
    series[0].x.push_back(row.t);
    series[0].y.push_back(row.theta_true);
    series[1].x.push_back(row.t);
    series[1].y.push_back(row.theta_hat);
  }
  emit_plotdata(r.out_dir / "plotdata.csv", series);
  r.artifacts.push_back("plotdata.csv");
  r.summary.push_back({"rmse", num(run.rmse)});
  r.summary.push_back({"exact_configuration", f.filter.is_exact_configuration() ? "true" : "false"});
}

void run_oracle(const ExperimentConfig& c, RunResult& r) {
  const auto& o = c.oracle;
  OracleComparison cmp =
      compare_fpf_with_ks(o.filter, c.seed, o.exact_gain ? GainSource::Exact : GainSource::Galerkin, o.M, o.bins);
  {
    CsvWriter w(r.out_dir / "oracle_compare.csv", {"t", "tv_distance"});
    for (std::size_t i = 0; i < cmp.t.size(); ++i)
      if (i % c.record_stride == 0 || i + 1 == cmp.t.size()) w.row({cmp.t[i], cmp.tv[i]});
    r.artifacts.push_back("oracle_compare.csv");
  }
  {
    CsvWriter w(r.out_dir / "density.csv", {"theta", "p"});
    for (std::size_t j = 0; j < cmp.final_density.size(); ++j)
      w.row({cmp.final_density.theta(j), cmp.final_density.values()[j]});
    r.artifacts.push_back("density.csv");
  }
  emit_plotdata(r.out_dir / "plotdata.csv", {{"tv_distance", cmp.t, cmp.tv}});
  r.artifacts.push_back("plotdata.csv");
  r.summary.push_back({"mean_tv", num(cmp.mean_tv)});
}

}  // namespace

fs::path resolve_output_dir(const ExperimentConfig& config) {
  if (!config.out.empty()) return config.out;
  const std::string sub = config.subcommand ? to_string(*config.subcommand) : "run";
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) return fs::path(root) / sub;
  return fs::path("out") / sub;
}

RunResult run(const ExperimentConfig& config) {
  if (!config.subcommand) throw ConfigError("no subcommand given");
  ExperimentConfig resolved = config;
  resolved.out = resolve_output_dir(config).string();
  RunResult r;
  r.out_dir = resolved.out;
  std::error_code ec;
  fs::create_directories(r.out_dir, ec);
  if (ec) throw DomainError("io", "cannot create output directory " + r.out_dir.string() + ": " + ec.message());
  r.summary.push_back({"subcommand", to_string(*config.subcommand)});
  r.summary.push_back({"seed", std::to_string(config.seed)});
  switch (*config.subcommand) {
    case Subcommand::Simulate: run_simulate(resolved, r); break;
    case Subcommand::Spectrum: run_spectrum(resolved, r); break;
    case Subcommand::Bifurcation: run_bifurcation(resolved, r); break;
    case Subcommand::Learn: run_learn(resolved, r); break;
    case Subcommand::Fpf: run_fpf(resolved, r); break;
    case Subcommand::OracleCompare: run_oracle(resolved, r); break;
  }
  write_results(r);
  r.artifacts.push_back("results.txt");
  write_manifest(r.out_dir, resolved);
  r.artifacts.push_back("manifest.txt");
  return r;
}

std::string error_record(const std::string& kind, const std::string& message, int exit_code, int line) {
  nlohmann::json j;
  j["status"] = "error";
  j["kind"] = kind;
  j["message"] = message;
  j["exit_code"] = exit_code;
  if (line > 0) j["line"] = line;
  return j.dump();
}

int run_with_status(const ExperimentConfig& config, std::ostream& err) {
  std::string record;
  int code = kExitOk;
  try {
    run(config);
    return kExitOk;
  } catch (const ConfigError& e) {
    code = kExitConfigError;
    record = error_record("config", e.what(), code, e.line());
  } catch (const DomainError& e) {
    code = kExitDomainError;
    record = error_record(e.kind(), e.what(), code);
  } catch (const std::exception& e) {
    code = kExitDomainError;
    record = error_record("internal", e.what(), code);
  }
  err << record << '\n';
  std::error_code ec;
  const fs::path dir = resolve_output_dir(config);
  fs::create_directories(dir, ec);
  if (!ec) std::ofstream(dir / "error.json") << record << '\n';
  return code;
}

}  // namespace oscmfg
