// qom_cli: scenario runner for the dissipative state-preparation toolkit.
//
// Subcommands: steady, pert, sweep, strobe, plan, figure <id>.
// Global flags: --config <path>, --out <dir>, --workers <n>, --fock-dim <n>.
// The QOM_OUT_DIR environment variable overrides the output directory.
// All outputs are deterministic: identical inputs give byte-identical files.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qom/dynamics.hpp"
#include "qom/experiments.hpp"
#include "qom/io.hpp"
#include "qom/law_eberly.hpp"
#include "qom/perturbation.hpp"
#include "qom/steady_state.hpp"

using namespace qom;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = "out";
  int workers = 1;
  Eigen::Index fock_dim = 0;  // 0 = not set on the command line
  io::Config config;

  fs::path resolve_out() const {
    const char* env = std::getenv("QOM_OUT_DIR");
    fs::path dir = env != nullptr && *env != '\0' ? fs::path(env) : fs::path(out_dir);
    fs::create_directories(dir);
    return dir;
  }
};

std::string fmt(double v) { return io::format_number(v); }

std::string kv(const std::string& key, double v) { return key + "=" + fmt(v); }
std::string kv(const std::string& key, const std::string& v) { return key + "=" + v; }

AuxJumpKind parse_aux_kind(const std::string& name) {
  if (name == "optimal") return AuxJumpKind::Optimal;
  if (name == "pump") return AuxJumpKind::Pump;
  if (name == "plus") return AuxJumpKind::Plus;
  if (name == "creation") return AuxJumpKind::Creation;
  throw std::invalid_argument("unknown aux jump kind: " + name +
                              " (expected optimal|pump|plus|creation)");
}

const char* aux_kind_name(AuxJumpKind k) {
  switch (k) {
    case AuxJumpKind::Optimal: return "optimal";
    case AuxJumpKind::Pump: return "pump";
    case AuxJumpKind::Plus: return "plus";
    case AuxJumpKind::Creation: return "creation";
  }
  return "?";
}

EngineeredParams<double> engineered_from_config(const io::Config& cfg, const std::string& section,
                                                Eigen::Index fock_override) {
  EngineeredParams<double> p;
  auto key = [&](const char* k) { return section + "." + k; };
  p.zeta = cfg.get_double(key("zeta"), p.zeta);
  p.C_q = cfg.get_double(key("C_q"), 100.0);
  p.C_m = cfg.get_double(key("C_m"), 100.0);
  p.gamma_aux = cfg.get_double(key("gamma_aux"), 1.0);
  p.gamma_eff = cfg.get_double(key("gamma_eff"), p.gamma_eff);
  p.n_fock = cfg.get_int(key("n_fock"), p.n_fock);
  p.num_osc = static_cast<int>(cfg.get_int(key("num_osc"), p.num_osc));
  p.rel_relax = cfg.get_double(key("rel_relax"), p.rel_relax);
  p.aux_kind = parse_aux_kind(cfg.get_string(key("aux_kind"), "optimal"));
  if (fock_override > 0) p.n_fock = fock_override;
  return p;
}

std::vector<std::string> engineered_comments(const EngineeredParams<double>& p) {
  return {kv("zeta", p.zeta),
          kv("C_q", p.C_q),
          kv("C_m", p.C_m),
          kv("gamma_aux", p.gamma_aux),
          kv("gamma_eff", p.gamma_eff),
          kv("n_fock", static_cast<double>(p.n_fock)),
          kv("num_osc", static_cast<double>(p.num_osc)),
          kv("rel_relax", p.rel_relax),
          kv("aux_kind", aux_kind_name(p.aux_kind))};
}

// ---------------------------------------------------------------------------
// steady

int run_steady(const GlobalOpts& g) {
  auto p = engineered_from_config(g.config, "steady", g.fock_dim);
  auto L = compile(engineered_model(p));
  auto rho = steady_state(L);
  double residual =
      (L.matrix * vectorize<double>(rho.matrix)).lpNorm<Eigen::Infinity>();

  auto comments = engineered_comments(p);
  comments.push_back(kv("residual", residual));
  io::CsvWriter csv((g.resolve_out() / "steady.csv").string(), comments, {"quantity", "value"});

  auto put = [&](const std::string& name, double v) {
    csv.row(std::vector<std::string>{name, fmt(v)});
  };
  put("trace", rho.matrix.trace().real());
  put("purity", (rho.matrix * rho.matrix).trace().real());
  put("fidelity_dark", fidelity(rho, target_rho_A(rho.space, p.zeta)));
  put("fidelity_vacuum", fidelity(rho, target_rho_B<double>(rho.space)));
  auto [mp, prob_plus] = measure_postselect(rho, MeasurementSpec<double>::plus_minus(p.zeta));
  put("prob_plus", prob_plus);
  put("fidelity_superposition", superposition_weight(mp));
  auto [mg, prob_g] = measure_postselect(rho, MeasurementSpec<double>::ground_excited(0));
  put("prob_ground", prob_g);
  if (p.num_osc == 1) {
    put("fidelity_fock1", fidelity(mg, fock_target<double>(p.n_fock, 1)));
  } else {
    put("fidelity_w_state", fidelity(mg, w_state_target<double>(p.n_fock, p.num_osc)));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// pert

int run_pert(const GlobalOpts& g) {
  const auto& cfg = g.config;
  double zeta = cfg.get_double("pert.zeta", 0.25);
  double gq = cfg.get_double("pert.gamma_q", 0.01);
  double gm = cfg.get_double("pert.gamma_m", 0.01);
  double ga = cfg.get_double("pert.gamma_aux", 0.1);
  Eigen::Index nf = g.fock_dim > 0 ? g.fock_dim : cfg.get_int("pert.n_fock", 4);

  TensorSpace sp({ModeSpec::qubit(), ModeSpec::boson(nf)});
  ComplexMatrix<double> zero = ComplexMatrix<double>::Zero(sp.dim, sp.dim);
  LindbladModel<double> m0{sp, Operator<double>(sp, zero), {build_L0<double>(1.0, zeta, sp)}};
  LindbladModel<double> mp{sp, Operator<double>(sp, zero), {}};
  auto q = qubit_ops<double>();
  if (gq > 0) mp.dissipators.push_back({gq, embed(q.sm, sp, 0)});
  if (gm > 0) {
    ComplexMatrix<double> b = cm_mode<double>(sp).matrix;
    mp.dissipators.push_back({gm, Operator<double>(sp, ComplexMatrix<double>(b + b.adjoint()))});
  }
  if (ga > 0) {
    JumpFamily<double> f;
    f.zeta = zeta;
    mp.dissipators.push_back(build_L_aux<double>(ga, f, sp));
  }
  auto L0 = compile(m0);
  auto Lp = compile(mp);
  auto fo = first_order_steady(L0, Lp);
  auto pd = build_projector(L0, Lp);
  ComplexMatrix<double> mix = fo.alpha * pd.rights[0].matrix + fo.beta * pd.rights[1].matrix;
  auto [measured, prob] = measure_postselect(DensityOperator<double>(sp, mix),
                                             MeasurementSpec<double>::plus_minus(zeta));

  std::vector<std::string> comments{kv("zeta", zeta), kv("gamma_q", gq), kv("gamma_m", gm),
                                    kv("gamma_aux", ga),
                                    kv("n_fock", static_cast<double>(nf))};
  io::CsvWriter csv((g.resolve_out() / "pert.csv").string(), comments, {"quantity", "value"});
  auto put = [&](const std::string& name, double v) {
    csv.row(std::vector<std::string>{name, fmt(v)});
  };
  put("alpha_numeric", fo.alpha);
  put("beta_numeric", fo.beta);
  put("alpha_closed", coeffs_aux(gq, gm, ga, zeta).alpha);
  put("alpha_measured_numeric", superposition_weight(measured));
  put("alpha_measured_closed", coeffs_measured(gq, gm, ga, zeta).alpha);
  if (zeta == 1.0 && gq + gm > 0) put("alpha_noise_closed", coeffs_noise(gq, gm).alpha);
  put("relaxation_gap", -pd.diag_eigenvalues(1).real());
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

int run_sweep(const GlobalOpts& g) {
  const auto& cfg = g.config;
  auto base = engineered_from_config(cfg, "sweep", g.fock_dim);
  std::string param = cfg.get_string("sweep.param", "zeta");

  std::vector<double> grid = cfg.get_double_array("sweep.grid");
  if (grid.empty()) {
    double start = cfg.get_double("sweep.grid_start", 0.05);
    double stop = cfg.get_double("sweep.grid_stop", 0.8);
    double step = cfg.get_double("sweep.grid_step", 0.05);
    if (step <= 0) throw std::invalid_argument("sweep: grid_step must be positive");
    for (double v = start; v <= stop + step / 2; v += step) grid.push_back(v);
  }

  std::vector<std::string> targets;
  {
    std::istringstream ss(cfg.get_string("sweep.targets", "dark,superposition"));
    std::string item;
    while (std::getline(ss, item, ',')) targets.push_back(io::trim(item));
  }

  auto apply_param = [&](EngineeredParams<double> p, double v) {
    if (param == "zeta")
      p.zeta = v;
    else if (param == "gamma_aux")
      p.gamma_aux = v;
    else if (param == "C")
      p.C_q = p.C_m = v;
    else if (param == "C_q")
      p.C_q = v;
    else if (param == "C_m")
      p.C_m = v;
    else
      throw std::invalid_argument("sweep: unknown param " + param);
    return p;
  };

  SweepSpec<double> spec;
  spec.grid = grid;
  spec.n_fock = base.n_fock;
  spec.workers = g.workers;
  spec.model = [&](double v, Eigen::Index nf) {
    auto p = apply_param(base, v);
    p.n_fock = nf;
    return engineered_model(p);
  };
  spec.evaluate = [&](const DensityOperator<double>& rho, double v, Eigen::Index nf) {
    auto p = apply_param(base, v);
    std::vector<double> out;
    for (const auto& t : targets) {
      if (t == "dark") {
        out.push_back(fidelity(rho, target_rho_A(rho.space, p.zeta)));
      } else if (t == "vacuum") {
        out.push_back(fidelity(rho, target_rho_B<double>(rho.space)));
      } else if (t == "superposition") {
        auto [m, prob] = measure_postselect(rho, MeasurementSpec<double>::plus_minus(p.zeta));
        out.push_back(superposition_weight(m));
      } else if (t == "fock1") {
        auto [m, prob] = measure_postselect(rho, MeasurementSpec<double>::ground_excited(0));
        out.push_back(fidelity(m, fock_target<double>(nf, 1)));
      } else {
        throw std::invalid_argument("sweep: unknown target " + t);
      }
    }
    return out;
  };

  auto rows = sweep(spec);

  auto comments = engineered_comments(base);
  comments.push_back(kv("param", param));
  comments.push_back(kv("workers", static_cast<double>(g.workers)));
  std::vector<std::string> columns{"param_name", "param_value"};
  for (const auto& t : targets) columns.push_back("fidelity_" + t);
  columns.push_back("null_dim");
  columns.push_back("residual");
  columns.push_back("truncation_flag");
  io::CsvWriter csv((g.resolve_out() / "sweep.csv").string(), comments, columns);

  size_t flagged = 0;
  for (const auto& r : rows) {
    std::vector<std::string> cells{param, fmt(r.param)};
    for (size_t k = 0; k < targets.size(); ++k)
      cells.push_back(r.failed || k >= r.fidelities.size() ? "nan" : fmt(r.fidelities[k]));
    cells.push_back(std::to_string(r.null_dim));
    cells.push_back(r.failed ? "nan" : fmt(r.residual));
    bool flag = r.truncation_flag || r.failed;
    cells.push_back(flag ? "1" : "0");
    csv.row(cells);
    if (flag) ++flagged;
  }
  if (2 * flagged > rows.size()) {
    std::fprintf(stderr, "sweep: %zu of %zu rows flagged (truncation or failure)\n", flagged,
                 rows.size());
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// strobe

void write_condition_manifest(const fs::path& path, const StroboscopicParams<double>& p,
                              const FrequencySchedule<double>& sched,
                              const ConditionReport<double>& rep, double g_eff,
                              double max_error, bool dissipative) {
  std::ofstream out(path, std::ios::binary);
  out << "# version=" << kPackageVersion << "\n";
  out << "Delta=" << fmt(p.Delta) << "\n";
  out << "delta=" << fmt(p.delta) << "\n";
  out << "g_q=" << fmt(p.g_q) << "\n";
  out << "g_m=" << fmt(p.g_m) << "\n";
  out << "C_q=" << fmt(p.C_q) << "\n";
  out << "C_m=" << fmt(p.C_m) << "\n";
  out << "omega_on=" << fmt(sched.omega_on) << "\n";
  out << "omega_off=" << fmt(sched.omega_off) << "\n";
  out << "tau=" << fmt(sched.tau) << "\n";
  out << "g_eff=" << fmt(g_eff) << "\n";
  out << "mode=" << (dissipative ? "dissipative" : "coherent_comparison") << "\n";
  out << "condition_i=" << (rep.i ? "pass" : "fail") << "\n";
  out << "margin_i=" << fmt(rep.margin_i) << "\n";
  out << "condition_ii=" << (rep.ii ? "pass" : "fail") << "\n";
  out << "margin_ii=" << fmt(rep.margin_ii) << "\n";
  out << "condition_iii=" << (rep.iii ? "pass" : "fail") << "\n";
  out << "margin_iii=" << fmt(rep.margin_iii) << "\n";
  out << "condition_iv=" << (rep.iv ? "pass" : "fail") << "\n";
  out << "margin_iv=" << fmt(rep.margin_iv) << "\n";
  out << "condition_v=" << (rep.v ? "pass" : "fail") << "\n";
  out << "margin_v=" << fmt(rep.margin_v) << "\n";
  out << "all_coherent=" << (rep.all_coherent() ? "true" : "false") << "\n";
  if (!dissipative) out << "max_error=" << fmt(max_error) << "\n";
}

int run_strobe(const GlobalOpts& g) {
  const auto& cfg = g.config;
  StroboscopicParams<double> p;
  p.Delta = cfg.get_double("strobe.Delta", p.Delta);
  p.delta = cfg.get_double("strobe.delta", p.delta);
  p.g_q = cfg.get_double("strobe.g_q", p.g_q);
  p.g_m = cfg.get_double("strobe.g_m", p.g_m);
  p.C_q = cfg.get_double("strobe.C_q", kInf);
  p.C_m = cfg.get_double("strobe.C_m", kInf);
  p.cavity_dim = cfg.get_int("strobe.cavity_dim", p.cavity_dim);
  p.osc_dim = cfg.get_int("strobe.osc_dim", p.osc_dim);
  double omega_on = cfg.get_double("strobe.omega_on", 0.8);
  double omega_off = cfg.get_double("strobe.omega_off", 8.8);
  int n = static_cast<int>(cfg.get_int("strobe.n", 11));
  auto sched = FrequencySchedule<double>::commensurate(omega_on, omega_off, n);
  sched.tau *= cfg.get_double("strobe.tau_scale", 1.0);
  const double g_eff = strobe_exchange_rate(p, sched);
  double t_end = cfg.get_double("strobe.t_end", 2 * std::numbers::pi / g_eff);
  double dt_max = cfg.get_double("strobe.dt_max", 0.02);
  bool dissipative = cfg.get_bool("strobe.dissipative", false);

  auto rep = check_conditions(p, sched);
  fs::path out = g.resolve_out();

  std::vector<std::string> comments{
      kv("Delta", p.Delta),       kv("delta", p.delta),
      kv("g_q", p.g_q),           kv("g_m", p.g_m),
      kv("C_q", p.C_q),           kv("C_m", p.C_m),
      kv("omega_on", omega_on),   kv("omega_off", omega_off),
      kv("tau", sched.tau),       kv("g_eff", g_eff),
      kv("t_end", t_end),         kv("dt_max", dt_max)};

  double max_error = 0;
  if (dissipative) {
    auto trace = strobe_dissipative(p, sched, t_end);
    io::CsvWriter csv((out / "strobe.csv").string(), comments, {"time", "n1", "n2"});
    for (size_t i = 0; i < trace.times.size(); ++i)
      csv.row(std::vector<double>{trace.times[i], trace.n1_elim[i], trace.n2_elim[i]});
  } else {
    auto trace = compare_full_vs_eliminated(p, sched, t_end, dt_max);
    max_error = trace.max_error;
    comments.push_back(kv("max_error", trace.max_error));
    io::CsvWriter csv((out / "strobe.csv").string(), comments,
                      {"time", "n1_full", "n2_full", "qubit_full", "n1_elim", "n2_elim",
                       "qubit_elim", "error"});
    for (size_t i = 0; i < trace.times.size(); ++i)
      csv.row(std::vector<double>{trace.times[i], trace.n1_full[i], trace.n2_full[i],
                                  trace.qubit_full[i], trace.n1_elim[i], trace.n2_elim[i],
                                  trace.qubit_elim[i], trace.error[i]});
  }
  write_condition_manifest(out / "strobe_manifest.txt", p, sched, rep, g_eff, max_error,
                           dissipative);
  return 0;
}

// ---------------------------------------------------------------------------
// plan

int run_plan(const GlobalOpts& g) {
  const auto& cfg = g.config;
  std::vector<double> dims_d = cfg.get_double_array("plan.dims");
  if (dims_d.empty()) throw std::invalid_argument("plan: missing plan.dims");
  std::vector<Eigen::Index> dims;
  for (double d : dims_d) dims.push_back(static_cast<Eigen::Index>(d));

  PlanParams<double> pp;
  pp.l = cfg.get_double_array("plan.l");
  if (pp.l.empty()) throw std::invalid_argument("plan: missing plan.l");
  pp.coupling_scale = cfg.get_double("plan.coupling_scale", pp.coupling_scale);
  pp.drive_scale = cfg.get_double("plan.drive_scale", pp.drive_scale);
  pp.selectivity = cfg.get_double("plan.selectivity", pp.selectivity);

  // Target: states as colon-separated occupations, amplitudes aligned by index.
  FockTarget<double> target;
  {
    std::string states = cfg.get_string("plan.states");
    std::vector<double> amps = cfg.get_double_array("plan.amplitudes");
    if (states.empty()) throw std::invalid_argument("plan: missing plan.states");
    std::istringstream ss(states);
    std::string item;
    size_t idx = 0;
    while (std::getline(ss, item, ',')) {
      std::vector<Eigen::Index> occ;
      std::istringstream os(io::trim(item));
      std::string part;
      while (std::getline(os, part, ':')) occ.push_back(std::stoll(io::trim(part)));
      if (occ.size() != dims.size())
        throw std::invalid_argument("plan: state arity does not match plan.dims");
      if (idx >= amps.size()) throw std::invalid_argument("plan: fewer amplitudes than states");
      target[occ] = amps[idx++];
    }
    if (idx != amps.size()) throw std::invalid_argument("plan: more amplitudes than states");
  }

  auto plan = plan_many<double>(target, dims, pp);
  auto res = simulate_plan(plan, pp);

  std::vector<std::string> comments;
  for (const auto& [occ, amp] : plan.target) {
    std::string s = "target ";
    for (size_t i = 0; i < occ.size(); ++i)
      s += (i > 0 ? ":" : "") + std::to_string(occ[i]);
    comments.push_back(s + " amplitude=" + fmt(amp));
  }
  comments.push_back(kv("coupling_scale", pp.coupling_scale));
  comments.push_back(kv("drive_scale", pp.drive_scale));
  comments.push_back(kv("selectivity", pp.selectivity));
  comments.push_back(kv("coupling_steps", static_cast<double>(plan.coupling_steps())));
  comments.push_back(kv("predicted_fidelity", plan.predicted_fidelity));
  comments.push_back(kv("simulated_fidelity", res.fidelity));

  io::CsvWriter csv((g.resolve_out() / "plan.csv").string(), comments,
                    {"step", "oscillator", "control", "amplitude", "duration", "base_level",
                     "condition"});
  for (size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& st = plan.steps[i];
    std::string cond;
    for (size_t k = 0; k < st.condition_occupations.size(); ++k)
      cond += (k > 0 ? ";" : "") + std::to_string(st.condition_occupations[k]);
    csv.row(std::vector<std::string>{
        std::to_string(i), std::to_string(st.oscillator_index),
        st.control == PulseControl::Coupling ? "coupling" : "drive", fmt(st.amplitude),
        fmt(st.duration), std::to_string(st.base_level), cond});
  }
  return 0;
}

// ---------------------------------------------------------------------------
// figures

double steady_dark_fidelity(const EngineeredParams<double>& p) {
  auto L = compile(engineered_model(p));
  auto rho = steady_state(L, 1);  // unique steady state: sparse solve
  return fidelity(rho, target_rho_A(rho.space, p.zeta));
}

std::pair<double, double> steady_dark_and_measured(const EngineeredParams<double>& p) {
  auto L = compile(engineered_model(p));
  auto rho = steady_state(L, 1);
  double dark = fidelity(rho, target_rho_A(rho.space, p.zeta));
  auto [m, prob] = measure_postselect(rho, MeasurementSpec<double>::plus_minus(p.zeta));
  return {dark, superposition_weight(m)};
}

// Dark-state fidelity vs mechanical cooperativity, noise only (no auxiliary
// jump), one column per qubit cooperativity plus the closed-form curve.
int run_fig1(const GlobalOpts& g, const fs::path& out) {
  const Eigen::Index nf = g.fock_dim > 0 ? g.fock_dim : 10;
  const std::vector<double> cqs{kInf, 100, 20, 10, 5};
  std::vector<double> cms;
  for (int k = 0; k <= 16; ++k) cms.push_back(std::pow(10.0, 0.25 * k));

  io::CsvWriter csv((out / "fig1.csv").string(),
                    {kv("zeta", 1.0), kv("gamma_aux", 0.0), kv("n_fock", double(nf))},
                    {"C_m", "F_Cq_inf", "F_Cq_100", "F_Cq_20", "alpha_Cq_20", "F_Cq_10",
                     "F_Cq_5"});
  for (double cm : cms) {
    std::vector<double> cells{cm};
    for (double cq : cqs) {
      EngineeredParams<double> p;
      p.zeta = 1.0;
      p.gamma_aux = 0.0;
      p.C_q = cq;
      p.C_m = cm;
      p.n_fock = nf;
      cells.push_back(steady_dark_fidelity(p));
      if (cq == 20.0) cells.push_back(coeffs_noise(1.0 / cq, 1.0 / cm).alpha);
    }
    csv.row(cells);
  }
  return 0;
}

// Dark-state (panel a) and measured (panel b) fidelities vs zeta in the
// perturbative regime gamma_aux/gamma_eff = 0.1, numeric vs closed form.
int run_fig2(const GlobalOpts& g, const fs::path& out) {
  const Eigen::Index nf = g.fock_dim > 0 ? g.fock_dim : 10;
  const double ga = 0.1;
  const std::vector<std::pair<std::string, double>> coops{
      {"Cinf", kInf}, {"C100", 100}, {"C20", 20}, {"C10", 10}};

  std::vector<std::string> cols_a{"zeta"}, cols_b{"zeta"};
  for (const auto& [name, c] : coops) {
    cols_a.push_back("F_num_" + name);
    cols_a.push_back("F_pert_" + name);
    cols_b.push_back("F_num_" + name);
    cols_b.push_back("F_pert_" + name);
  }
  std::vector<std::string> comments{kv("gamma_aux", ga), kv("n_fock", double(nf))};
  io::CsvWriter csv_a((out / "fig2a.csv").string(), comments, cols_a);
  io::CsvWriter csv_b((out / "fig2b.csv").string(), comments, cols_b);

  for (double zeta = 0.05; zeta <= 0.95 + 1e-9; zeta += 0.05) {
    std::vector<double> row_a{zeta}, row_b{zeta};
    for (const auto& [name, c] : coops) {
      EngineeredParams<double> p;
      p.zeta = zeta;
      p.C_q = p.C_m = c;
      p.gamma_aux = ga;
      p.n_fock = nf;
      auto [dark, meas] = steady_dark_and_measured(p);
      double rate = std::isfinite(c) ? 1.0 / c : 0.0;
      row_a.push_back(dark);
      row_a.push_back(coeffs_aux(rate, rate, ga, zeta).alpha);
      row_b.push_back(meas);
      row_b.push_back(coeffs_measured(rate, rate, ga, zeta).alpha);
    }
    csv_a.row(row_a);
    csv_b.row(row_b);
  }
  return 0;
}

// Panels a/b of the engineered-environment study at gamma_aux = gamma_eff:
// fidelity vs zeta per cooperativity; panel a carries the truncation-check
// column (C=100 recomputed at Fock dimension 30).
int run_fig3ab(const GlobalOpts& g, const fs::path& out, bool measured) {
  const Eigen::Index nf = g.fock_dim > 0 ? g.fock_dim : 10;
  const std::vector<std::pair<std::string, double>> coops{
      {"Cinf", kInf}, {"C100", 100}, {"C20", 20}, {"C10", 10}};
  std::vector<std::string> cols{"zeta"};
  for (const auto& [name, c] : coops) cols.push_back("F_" + name);
  if (!measured) cols.push_back("F_C100_N30");

  std::vector<std::string> comments{kv("gamma_aux", 1.0), kv("n_fock", double(nf))};
  io::CsvWriter csv((out / (measured ? "fig3b.csv" : "fig3a.csv")).string(), comments, cols);

  for (double zeta = 0.05; zeta <= 0.95 + 1e-9; zeta += 0.05) {
    std::vector<double> row{zeta};
    for (const auto& [name, c] : coops) {
      EngineeredParams<double> p;
      p.zeta = zeta;
      p.C_q = p.C_m = c;
      p.gamma_aux = 1.0;
      p.n_fock = nf;
      auto [dark, meas] = steady_dark_and_measured(p);
      row.push_back(measured ? meas : dark);
    }
    if (!measured) {
      EngineeredParams<double> p;
      p.zeta = zeta;
      p.C_q = p.C_m = 100;
      p.gamma_aux = 1.0;
      p.n_fock = 30;
      row.push_back(steady_dark_fidelity(p));
    }
    csv.row(row);
  }
  return 0;
}

// Measured fidelity vs gamma_aux/gamma_eff for the four jump-operator
// variants at zeta = 0.2, C = 1000.
int run_fig3c(const GlobalOpts& g, const fs::path& out) {
  const Eigen::Index nf = g.fock_dim > 0 ? g.fock_dim : 10;
  io::CsvWriter csv((out / "fig3c.csv").string(),
                    {kv("zeta", 0.2), kv("C", 1000.0), kv("n_fock", double(nf))},
                    {"gamma_ratio", "F_optimal", "F_pump", "F_plus", "F_creation"});
  for (double ratio = 0.1; ratio <= 3.0 + 1e-9; ratio += 0.1) {
    std::vector<double> row{ratio};
    for (AuxJumpKind kind : {AuxJumpKind::Optimal, AuxJumpKind::Pump, AuxJumpKind::Plus,
                             AuxJumpKind::Creation}) {
      EngineeredParams<double> p;
      p.zeta = 0.2;
      p.C_q = p.C_m = 1000;
      p.gamma_aux = ratio;
      p.aux_kind = kind;
      p.n_fock = nf;
      row.push_back(steady_dark_and_measured(p).second);
    }
    csv.row(row);
  }
  return 0;
}

// Stroboscopic two-oscillator dynamics: full vs eliminated over one Rabi
// period with the switching aligned (top left) and misaligned (top right),
// plus the dissipative eliminated run per cooperativity (bottom).
int run_fig4(const GlobalOpts& g, const fs::path& out) {
  StroboscopicParams<double> p;
  auto sched = FrequencySchedule<double>::commensurate(0.8, 8.8, 11);
  const double g_eff = strobe_exchange_rate(p, sched);
  const double T = 2 * std::numbers::pi / g_eff;
  std::vector<std::string> base_comments{kv("Delta", p.Delta),     kv("delta", p.delta),
                                         kv("g_q", p.g_q),         kv("g_m", p.g_m),
                                         kv("omega_on", sched.omega_on),
                                         kv("omega_off", sched.omega_off),
                                         kv("g_eff", g_eff),       kv("t_end", T)};

  auto emit = [&](const StroboTrace<double>& tr, const std::string& name, double tau) {
    auto comments = base_comments;
    comments.push_back(kv("tau", tau));
    comments.push_back(kv("max_error", tr.max_error));
    io::CsvWriter csv((out / name).string(), comments,
                      {"time", "n1_full", "n1_elim", "error"});
    for (size_t i = 0; i < tr.times.size(); ++i)
      csv.row(std::vector<double>{tr.times[i], tr.n1_full[i], tr.n1_elim[i], tr.error[i]});
  };
  emit(compare_full_vs_eliminated(p, sched, T), "fig4_top_aligned.csv", sched.tau);
  auto broken = sched;
  broken.tau *= 1.03;
  emit(compare_full_vs_eliminated(p, broken, T), "fig4_top_broken.csv", broken.tau);

  const std::vector<std::pair<std::string, double>> coops{
      {"Cinf", kInf}, {"C1000", 1000}, {"C100", 100}, {"C10", 10}};
  std::vector<StroboTrace<double>> traces;
  for (const auto& [name, c] : coops) {
    StroboscopicParams<double> pd = p;
    pd.C_q = pd.C_m = c;
    traces.push_back(strobe_dissipative(pd, sched, 1.5 * T));
  }
  auto comments = base_comments;
  comments.push_back(kv("tau", sched.tau));
  comments.push_back(kv("t_end_bottom", 1.5 * T));
  io::CsvWriter csv((out / "fig4_bottom.csv").string(), comments,
                    {"time", "n1_Cinf", "n1_C1000", "n1_C100", "n1_C10"});
  for (size_t i = 0; i < traces[0].times.size(); ++i)
    csv.row(std::vector<double>{traces[0].times[i], traces[0].n1_elim[i], traces[1].n1_elim[i],
                                traces[2].n1_elim[i], traces[3].n1_elim[i]});
  return 0;
}

int run_figure(const GlobalOpts& g, const std::string& id) {
  fs::path out = g.resolve_out();
  if (id == "fig1") return run_fig1(g, out);
  if (id == "fig2") return run_fig2(g, out);
  if (id == "fig3a") return run_fig3ab(g, out, false);
  if (id == "fig3b") return run_fig3ab(g, out, true);
  if (id == "fig3c") return run_fig3c(g, out);
  if (id == "fig4") return run_fig4(g, out);
  throw std::invalid_argument("unknown figure id: " + id);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qubit-assisted mechanical-oscillator state preparation toolkit"};
  GlobalOpts g;
  app.add_option("--config", g.config_path, "Key-value configuration file");
  app.add_option("--out", g.out_dir, "Output directory (QOM_OUT_DIR overrides)");
  app.add_option("--workers", g.workers, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--fock-dim", g.fock_dim, "Override the Fock-space dimension")
      ->check(CLI::PositiveNumber);
  app.require_subcommand(1);

  auto* steady_cmd = app.add_subcommand("steady", "Engineered-environment steady state");
  auto* pert_cmd = app.add_subcommand("pert", "First-order degenerate perturbation theory");
  auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweep of steady-state fidelities");
  auto* strobe_cmd = app.add_subcommand("strobe", "Stroboscopic two-oscillator dynamics");
  auto* plan_cmd = app.add_subcommand("plan", "Pulse plan for a many-body Fock target");
  auto* figure_cmd = app.add_subcommand("figure", "Built-in figure data sets");
  std::string figure_id;
  figure_cmd->add_option("id", figure_id, "fig1|fig2|fig3a|fig3b|fig3c|fig4")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3a", "fig3b", "fig3c", "fig4"}));
  for (auto* sub : {steady_cmd, pert_cmd, sweep_cmd, strobe_cmd, plan_cmd, figure_cmd})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!g.config_path.empty()) g.config = io::Config::parse_file(g.config_path);
    if (steady_cmd->parsed()) return run_steady(g);
    if (pert_cmd->parsed()) return run_pert(g);
    if (sweep_cmd->parsed()) return run_sweep(g);
    if (strobe_cmd->parsed()) return run_strobe(g);
    if (plan_cmd->parsed()) return run_plan(g);
    if (figure_cmd->parsed()) return run_figure(g, figure_id);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
