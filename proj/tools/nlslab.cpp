#include <CLI11.hpp>

#include <nlslab/config.hpp>
#include <nlslab/csv.hpp>
#include <nlslab/experiments.hpp>
#include <nlslab/functionals.hpp>
#include <nlslab/groundstate.hpp>
#include <nlslab/linops.hpp>
#include <nlslab/modulation.hpp>
#include <nlslab/propagator.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

using namespace nlslab;
namespace fs = std::filesystem;

namespace {

struct Globals {
  int threads = 0;
  std::optional<std::uint64_t> seed;

  int resolved_threads(int from_config) const {
    if (threads > 0) return threads;
    if (const char* env = std::getenv("NLSLAB_THREADS")) {
      const int n = std::atoi(env);
      if (n > 0) return n;
    }
    return std::max(1, from_config);
  }
};

std::string provenance(const std::string& cmd, const std::string& hash, std::uint64_t seed) {
  return "nlslab " + cmd + " config-hash=" + hash + " seed=" + std::to_string(seed);
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string num_list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "]";
}

class Summary {
 public:
  void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
  void add(const std::string& key, double value) { add(key, num(value)); }

  void write(std::ostream& os) const {
    for (const auto& [k, v] : lines_) os << k << " = " << v << '\n';
  }
  void save(const fs::path& path, const std::string& prov) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << "# " << prov << '\n';
    write(os);
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

ExperimentConfig load(const std::string& path, const Globals& g) {
  ExperimentConfig cfg = parse_config(path);
  cfg.threads = g.resolved_threads(cfg.threads);
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

Trajectory forward_run(const ExperimentConfig& cfg, const MultiSoliton& ms) {
  const Field u0 = ms.sum(cfg.grid, cfg.t_start);
  return propagate(u0, cfg.plan(), cfg.solitons.nl);
}

bool is_critical(const MultiSolitonConfig& c) {
  return c.nl.is_pure_power() && c.nl.criticality(c.dim) == Criticality::critical;
}

Nonlinearity make_nonlinearity(const std::string& kind, double p) {
  if (kind == "pure_power") return Nonlinearity::pure_power(p);
  if (kind == "cubic_quintic") return Nonlinearity::cubic_quintic();
  throw ConfigError("--kind must be pure_power or cubic_quintic");
}

// ---------------------------------------------------------------------------

int cmd_groundstate(const std::string& kind, double p, double omega, int d, const std::string& out,
                    const std::string& csv, const Globals& g) {
  const Nonlinearity nl = make_nonlinearity(kind, p);
  const GroundState gs = solve_ground_state(nl, omega, d);
  const Grid grid = residual_grid(omega, d);
  Field q = gs.sample(grid);
  q.label = "Q";
  const std::string hash = hex64(fnv1a("groundstate " + nl.name() + " omega=" + num(omega) + " d=" + std::to_string(d)));
  const std::string prov = provenance("groundstate", hash, g.seed.value_or(0));
  if (fs::path(out).has_parent_path()) ensure_directory(fs::path(out).parent_path());
  write_snapshot(out, q);
  const fs::path csv_path = csv.empty() ? fs::path(out).replace_extension(".csv") : fs::path(csv);
  CsvWriter w(csv_path, prov, {"r", "Q", "dQ"});
  const double r_max = 20.0 / std::sqrt(omega);
  for (int i = 0; i <= 2000; ++i) {
    const double r = r_max * i / 2000.0;
    w.row({r, gs.value(r), gs.derivative(r)});
  }
  Summary s;
  s.add("nonlinearity", nl.name());
  s.add("omega", omega);
  s.add("d", std::to_string(d));
  s.add("closed_form", gs.is_closed_form() ? "true" : "false");
  s.add("Q(0)", gs.value(0.0));
  s.add("mass", gs.mass());
  s.add("residual", profile_residual(gs));
  s.add("snapshot", out);
  s.add("profile_csv", csv_path.string());
  s.write(std::cout);
  return 0;
}

int cmd_propagate(const std::string& config, const std::string& out, const Globals& g) {
  const ExperimentConfig cfg = load(config, g);
  const MultiSoliton ms(cfg.solitons);
  const fs::path dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
  ensure_directory(dir);
  const Trajectory traj = forward_run(cfg, ms);
  const std::string prov = provenance("propagate", cfg.hash, cfg.seed);
  CsvWriter w(dir / "ledger.csv", prov,
              {"t", "mass", "energy", "momentum_x", "momentum_y", "mass_drift", "boundary_tail"});
  const auto& L = traj.ledger;
  for (std::size_t i = 0; i < L.time.size(); ++i) {
    w.row({L.time[i], L.mass[i], L.energy[i], L.momentum[i][0], L.momentum[i][1],
           (L.mass[i] - L.mass.front()) / L.mass.front(), L.boundary_tail[i]});
  }
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    std::ostringstream name;
    name << "snap_" << std::setw(5) << std::setfill('0') << i << ".nlsf";
    write_snapshot((dir / name.str()).string(), traj.snapshots[i]);
  }
  Summary s;
  s.add("steps", std::to_string(traj.steps));
  s.add("dt_effective", traj.dt_effective);
  s.add("snapshots", std::to_string(traj.snapshots.size()));
  s.add("max_mass_drift", L.max_mass_drift());
  s.add("max_energy_drift", L.max_energy_drift());
  s.add("drift_flagged", traj.drift_flagged ? "true" : "false");
  s.save(dir / "summary.txt", prov);
  s.write(std::cout);
  return 0;
}

int cmd_construct(const std::string& config, std::vector<double> ladder, std::optional<double> t1,
                  std::optional<int> smax, const std::string& out, const Globals& g) {
  ExperimentConfig cfg = load(config, g);
  if (!ladder.empty()) cfg.ladder = std::move(ladder);
  if (t1) cfg.T1 = *t1;
  if (smax) cfg.s_max = *smax;
  cfg.validate();
  const fs::path dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
  ensure_directory(dir);
  const ConstructionReport rep = run_construction(cfg.construction());
  const std::string prov = provenance("construct", cfg.hash, cfg.seed);
  const int ns = cfg.s_max + 1;

  std::vector<std::string> cols{"S", "t"};
  for (int s = 0; s < ns; ++s) cols.push_back("H" + std::to_string(s));
  CsvWriter series(dir / "series.csv", prov, cols);
  CsvWriter rates(dir / "rates.csv", prov, {"S", "s", "rho", "intercept", "points"});
  bool failed = false;
  for (const auto& run : rep.runs) {
    for (std::size_t i = 0; i < run.times.size(); ++i) {
      std::vector<double> row{run.S, run.times[i]};
      for (int s = 0; s < ns; ++s) row.push_back(run.hs_norm[static_cast<std::size_t>(s)][i]);
      series.row(row);
    }
    for (int s = 0; s < ns; ++s) {
      const auto& f = run.fits[static_cast<std::size_t>(s)];
      rates.row({run.S, double(s), run.rates[static_cast<std::size_t>(s)], f.intercept, double(f.points)});
    }
    std::ostringstream name;
    name << "u_S" << run.S << "_T1.nlsf";
    write_snapshot((dir / name.str()).string(), run.final_state);
    failed = failed || run.failed;
  }
  std::vector<std::string> gcols{"S_lo", "S_hi"};
  for (int s = 0; s < ns; ++s) gcols.push_back("gap_H" + std::to_string(s));
  CsvWriter gaps(dir / "gaps.csv", prov, gcols);
  for (std::size_t j = 0; j + 1 < rep.runs.size(); ++j) {
    std::vector<double> row{rep.runs[j].S, rep.runs[j + 1].S};
    for (int s = 0; s < ns; ++s) row.push_back(rep.cauchy_gaps[static_cast<std::size_t>(s)][j]);
    gaps.row(row);
  }
  CsvWriter theta(dir / "theta.csv", prov, {"s", "theta_s", "interpolated"});
  for (const auto& r : rep.schedule) theta.row({double(r.s), r.theta_s, r.interpolated});

  Summary s;
  s.add("ladder", num_list(cfg.ladder));
  s.add("T1", cfg.T1);
  s.add("gap_method", rep.gap_method);
  std::vector<double> rho1;
  for (const auto& run : rep.runs) rho1.push_back(ns > 1 ? run.rates[1] : run.rates[0]);
  s.add("rho_1", num_list(rho1));
  s.add("rate_drift", rep.rate_drift);
  s.add("theta_fit", rep.theta_fit);
  s.add("gaps_decreasing", rep.gaps_decreasing ? "true" : "false");
  s.add("convergence_suspect", rep.convergence_suspect ? "true" : "false");
  for (const auto& w : rep.warnings) s.add("warning", w);
  s.add("status", failed ? "partial (backward solve failed)" : "complete");
  s.save(dir / "summary.txt", prov);
  s.write(std::cout);
  return failed ? 2 : 0;
}

int cmd_diagnose(const std::string& config, const std::string& out, const Globals& g) {
  const ExperimentConfig cfg = load(config, g);
  const MultiSoliton ms(cfg.solitons);
  const fs::path dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
  ensure_directory(dir);
  const Trajectory traj = forward_run(cfg, ms);
  const int s_g = cfg.grid.dim() == 1 ? std::clamp(cfg.s_max, 2, 4) : std::clamp(cfg.s_max, 2, 3);
  const std::string prov = provenance("diagnose", cfg.hash, cfg.seed);
  CsvWriter w(dir / "functionals.csv", prov,
              {"t", "G", "G_derivative", "G_correction", "z_H1", "H", "H_tilde", "Main"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::optional<CutoffFamily> cf;
  if (ms.size() >= 2 || cfg.A0 > 0.0) cf.emplace(cfg.solitons, cfg.A0);
  for (const auto& u : traj.snapshots) {
    const auto G = eval_G(u, cfg.solitons.nl, s_g);
    const Field R = ms.sum(cfg.grid, u.time);
    const Field z = u - R;
    double H = nan, Ht = nan, M = nan;
    if (u.time > 0.0 && cf) {
      try {
        const ModulationSystem sys(ms, cfg.grid, u.time, is_critical(cfg.solitons));
        const Field zt = modulated_error(z, sys, solve_modulation(z, sys));
        H = eval_weinstein_H(zt, ms, *cf, u.time).value;
        Ht = eval_weinstein_Htilde(zt, R, ms, *cf, u.time).value;
        M = eval_main_term(zt, *cf, cfg.solitons, u.time);
      } catch (const NumericError&) {
      }
    }
    w.row({u.time, G.value, G.part("derivative"), G.part("correction"), sobolev_norm(z, 1), H, Ht, M});
  }
  DriftFitOptions opt;
  opt.solitons = &ms;
  const auto drift = eval_G_drift(traj.snapshots, cfg.solitons.nl, s_g, opt);
  Summary s;
  s.add("G_order", std::to_string(s_g));
  s.add("G_max_abs_drift", drift.max_abs_drift);
  s.add("G_drift_decay_rate", drift.decay_rate);
  s.add("G_drift_status", drift.status);
  s.save(dir / "summary.txt", prov);
  s.write(std::cout);
  return 0;
}

int cmd_modulate(const std::string& config, const std::string& out, const Globals& g) {
  const ExperimentConfig cfg = load(config, g);
  const MultiSoliton ms(cfg.solitons);
  const bool critical = is_critical(cfg.solitons);
  const fs::path dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
  ensure_directory(dir);
  const Trajectory traj = forward_run(cfg, ms);
  const std::size_t K = ms.size();
  const int d = cfg.grid.dim();
  const std::size_t unknowns = K * static_cast<std::size_t>(1 + d + (critical ? 1 : 0));
  std::vector<std::string> cols{"t"};
  for (std::size_t k = 1; k <= K; ++k) cols.push_back("a_" + std::to_string(k));
  for (std::size_t k = 1; k <= K; ++k)
    for (int i = 1; i <= d; ++i) cols.push_back("b_" + std::to_string(k) + "_" + std::to_string(i));
  if (critical)
    for (std::size_t k = 1; k <= K; ++k) cols.push_back("c_" + std::to_string(k));
  cols.push_back("det");
  cols.push_back("cond");
  for (std::size_t r = 1; r <= unknowns; ++r) cols.push_back("residual_" + std::to_string(r));
  const std::string prov = provenance("modulate", cfg.hash, cfg.seed);
  CsvWriter w(dir / "modulation.csv", prov, cols);
  for (const auto& u : traj.snapshots) {
    const Field z = u - ms.sum(cfg.grid, u.time);
    const auto st = solve_modulation(z, ms, u.time, critical);
    std::vector<double> row{u.time};
    for (double a : st.a) row.push_back(a);
    for (const auto& b : st.b)
      for (int i = 0; i < d; ++i) row.push_back(b[static_cast<std::size_t>(i)]);
    if (critical)
      for (double c : *st.c) row.push_back(c);
    row.push_back(st.det);
    row.push_back(st.cond);
    for (double r : st.residuals) row.push_back(r);
    w.row(row);
  }
  Summary s;
  s.add("snapshots", std::to_string(traj.snapshots.size()));
  s.add("critical", critical ? "true" : "false");
  s.save(dir / "summary.txt", prov);
  s.write(std::cout);
  return 0;
}

int cmd_coerce(const std::string& kind, double p, double omega, int d, const std::string& op_name,
               const std::vector<std::string>& names, int M, double X, const std::string& out, const Globals& g) {
  const Nonlinearity nl = make_nonlinearity(kind, p);
  const GroundState gs = solve_ground_state(nl, omega, d);
  OperatorKind op_kind = OperatorKind::L_plus;
  if (op_name == "L_minus") op_kind = OperatorKind::L_minus;
  else if (op_name != "L_plus") throw ConfigError("--op must be L_plus or L_minus");

  std::ostringstream os;
  os << std::setprecision(17);
  os << "{\n  \"nonlinearity\": \"" << nl.name() << "\",\n  \"omega\": " << omega << ",\n  \"d\": " << d
     << ",\n  \"operator\": \"" << op_name << "\",\n  \"constraints\": [";
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? ", " : "") << '"' << names[i] << '"';
  os << "],\n  \"M\": " << M << ",\n  \"extent\": " << X << ",\n";
  if (d == 1) {
    const auto op = assemble(op_kind, gs, M, X);
    const auto rep = constrained_min_eig(op, constraints(op, names));
    os << "  \"min_eig_constrained\": " << rep.min_eig_constrained << ",\n"
       << "  \"min_eig_unconstrained\": " << rep.min_eig_unconstrained << ",\n"
       << "  \"mu_plus\": " << rep.mu_plus << ",\n"
       << "  \"coercive\": " << (rep.coercive() ? "true" : "false") << ",\n"
       << "  \"spectrum_head\": " << num_list(rep.spectrum_head) << ",\n"
       << "  \"rayleigh_head\": " << num_list(rep.rayleigh_head);
  } else {
    const auto rep = sector_coercivity(op_kind, gs, names, M, X);
    os << "  \"sector_min_eig\": " << num_list(rep.min_eig) << ",\n"
       << "  \"mu_plus\": " << rep.mu << ",\n"
       << "  \"coercive\": " << (rep.mu > 0.0 ? "true" : "false");
  }
  if (nl.is_pure_power() && nl.criticality(d) == Criticality::critical) {
    const auto id = verify_critical_identities(gs);
    os << ",\n  \"critical_identity_residual\": " << id.identity_residual
       << ",\n  \"nonzero_value\": " << id.nonzero_value << ",\n  \"lambda_norm_squared\": " << id.lambda_norm_squared;
  }
  if (d == 1 && nl.is_pure_power() && nl.criticality(d) == Criticality::supercritical) {
    const auto pair = instability_eigenpair(gs, M, X);
    os << ",\n  \"instability_e0\": " << pair.e0 << ",\n  \"instability_residual\": " << pair.residual;
  }
  os << "\n}\n";
  std::cout << os.str();
  if (!out.empty()) {
    if (fs::path(out).has_parent_path()) ensure_directory(fs::path(out).parent_path());
    std::ofstream f(out);
    if (!f) throw IoError("cannot write " + out);
    f << os.str();
  }
  (void)g;
  return 0;
}

int cmd_uniq(const std::string& a_path, const std::string& b_path, const std::string& out, const Globals& g) {
  const ExperimentConfig a = load(a_path, g), b = load(b_path, g);
  const fs::path dir = out.empty() ? fs::path(a.output_dir) : fs::path(out);
  ensure_directory(dir);
  const auto rep = run_uniqueness(a.construction(), b.construction(), {a.t_max, a.A0});
  const std::string hash = hex64(fnv1a(a.source + "\n--\n" + b.source));
  const std::string prov = provenance("uniq", hash, a.seed);
  std::vector<std::string> cols{"t", "z_H1", "ztilde_H1", "H", "H_tilde", "Main"};
  for (std::size_t k = 1; k <= a.solitons.size(); ++k) cols.push_back("re_ztilde_R_" + std::to_string(k));
  cols.push_back("modulated");
  CsvWriter w(dir / "uniqueness.csv", prov, cols);
  for (const auto& s : rep.samples) {
    std::vector<double> row{s.t, s.z_h1, s.ztilde_h1, s.H, s.Htilde, s.main};
    for (double r : s.re_ztilde_R) row.push_back(r);
    row.push_back(s.modulated ? 1.0 : 0.0);
    w.row(row);
  }
  write_snapshot((dir / "reference_T1.nlsf").string(), rep.reference);
  write_snapshot((dir / "candidate_T1.nlsf").string(), rep.candidate);
  Summary s;
  s.add("z_method", rep.z_method);
  s.add("max_z_H1", rep.max_z_h1);
  s.add("larger_ladder_final_gap", rep.larger_ladder_gap());
  s.add("agree_below_gap", rep.max_z_h1 < rep.larger_ladder_gap() ? "true" : "false");
  s.add("coercivity_c_fit", rep.coercivity.c_fit);
  s.add("coercivity_C_fit", rep.coercivity.C_fit);
  s.add("coercivity_c_bound", rep.coercivity.c_bound);
  for (std::size_t k = 0; k < rep.derre.size(); ++k) {
    s.add("derre_" + std::to_string(k + 1) + "_C", rep.derre[k].constant);
    s.add("derre_" + std::to_string(k + 1) + "_gamma", rep.derre[k].rate);
  }
  s.add("coefficient_constant", rep.coefficient_constant);
  s.add("main_constant", rep.main_constant);
  s.add("class_exponent", rep.class_exponent);
  for (const auto& x : rep.warnings) s.add("warning", x);
  s.save(dir / "summary.txt", prov);
  s.write(std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nlslab: multi-soliton construction and uniqueness diagnostics for NLS"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "worker threads (falls back to NLSLAB_THREADS)");
  app.add_option("--seed", g.seed, "seed recorded in the provenance of every output");

  std::string config, out, kind = "pure_power";
  double p = 3.0, omega = 1.0;
  int d = 1;

  auto* gs = app.add_subcommand("groundstate", "solve for Q and export snapshot and profile CSV");
  std::string csv;
  gs->add_option("--kind", kind, "pure_power or cubic_quintic");
  gs->add_option("--p", p, "power exponent");
  gs->add_option("--omega", omega, "frequency");
  gs->add_option("--d", d, "dimension (1 or 2)");
  gs->add_option("--out", out, "snapshot path")->default_val("q.nlsf");
  gs->add_option("--csv", csv, "profile CSV path (default: snapshot path with .csv)");

  auto* pr = app.add_subcommand("propagate", "forward propagation of the configured multi-soliton");
  pr->add_option("--config", config, "configuration file")->required();
  pr->add_option("--out", out, "output directory");

  auto* co = app.add_subcommand("construct", "backward construction ladder");
  std::vector<double> ladder;
  std::optional<double> t1;
  std::optional<int> smax;
  co->add_option("--config", config, "configuration file")->required();
  co->add_option("--ladder", ladder, "final times S_n")->delimiter(',');
  co->add_option("--t1", t1, "analysis start time T1");
  co->add_option("--smax", smax, "highest Sobolev index");
  co->add_option("--out", out, "output directory");

  auto* di = app.add_subcommand("diagnose", "G, H, H_tilde and Main along a forward run");
  di->add_option("--config", config, "configuration file")->required();
  di->add_option("--out", out, "output directory");

  auto* mo = app.add_subcommand("modulate", "modulation coefficients along a forward run");
  mo->add_option("--config", config, "configuration file")->required();
  mo->add_option("--out", out, "output directory");

  auto* ce = app.add_subcommand("coerce", "constrained coercivity of the linearized operators");
  std::vector<std::string> names{"Q", "dQ", "xdQ"};
  std::string op_name = "L_plus";
  int M = 1000;
  double X = 20.0;
  ce->add_option("--kind", kind, "pure_power or cubic_quintic");
  ce->add_option("--p", p, "power exponent");
  ce->add_option("--omega", omega, "frequency");
  ce->add_option("--d", d, "dimension (1 or 2)");
  ce->add_option("--op", op_name, "L_plus or L_minus");
  ce->add_option("--constraints", names, "comma separated subset of Q,dQ,xdQ")->delimiter(',');
  ce->add_option("--M", M, "interior nodes");
  ce->add_option("--X", X, "domain half-length (radius in 2D)");
  ce->add_option("--out", out, "report path");

  auto* un = app.add_subcommand("uniq", "compare two independent constructions");
  std::string a_path, b_path;
  un->add_option("--a", a_path, "reference configuration")->required();
  un->add_option("--b", b_path, "candidate configuration")->required();
  un->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*gs) return cmd_groundstate(kind, p, omega, d, out, csv, g);
    if (*pr) return cmd_propagate(config, out, g);
    if (*co) return cmd_construct(config, ladder, t1, smax, out, g);
    if (*di) return cmd_diagnose(config, out, g);
    if (*mo) return cmd_modulate(config, out, g);
    if (*ce) return cmd_coerce(kind, p, omega, d, op_name, names, M, X, out, g);
    if (*un) return cmd_uniq(a_path, b_path, out, g);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
