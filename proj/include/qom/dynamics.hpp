#pragma once

// Time-dependent master-equation integration with piecewise-constant
// generators, stroboscopic frequency scheduling, full-vs-eliminated model
// comparison, phonon-blockade spectra, and stroboscopic ground-state cooling.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qom/lindblad.hpp"
#include "qom/steady_state.hpp"
#include "qom/tensor.hpp"

namespace qom {

// ---------------------------------------------------------------------------
// Schedules and validity conditions

template <typename S>
struct FrequencySchedule {
  S omega_on = 0, omega_off = 0;
  S tau = 0;        // full switching period
  int n = 0;        // tau = 2 pi n / omega_off when condition (i) holds
  int num_osc = 2;  // oscillators take turns; slot length = tau / num_osc

  S slot_duration() const { return tau / num_osc; }
  int active_oscillator(int window_index) const { return window_index % num_osc; }

  static FrequencySchedule commensurate(S omega_on, S omega_off, int n, int num_osc = 2) {
    FrequencySchedule s;
    s.omega_on = omega_on;
    s.omega_off = omega_off;
    s.n = n;
    s.num_osc = num_osc;
    s.tau = 2 * std::numbers::pi_v<S> * n / omega_off;
    return s;
  }
};

template <typename S>
struct StroboscopicParams {
  S Delta = 1;
  S delta = S(0.8);
  S g_q = S(0.0125), g_m = S(0.0125);
  S C_q = std::numeric_limits<S>::infinity(), C_m = std::numeric_limits<S>::infinity();
  Eigen::Index cavity_dim = 3, osc_dim = 4;
};

template <typename S>
struct ConditionThresholds {
  S small = S(0.1);  // "much smaller than one"
  S large = S(10);   // "much larger than one"
};

template <typename S>
struct ConditionReport {
  bool i = false, ii = false, iii = false, iv = false, v = false;
  S margin_i = 0;    // distance of tau*omega_off/(2 pi) from the nearest integer
  S margin_ii = 0;   // max of g_q/|Delta-delta|, g_m/|Delta-omega(t)|
  S margin_iii = 0;  // max of g_m*tau, g_q*tau
  S margin_iv = 0;   // (omega_on - omega_off)*tau magnitude
  S margin_v = 0;    // min cooperativity
  bool all_coherent() const { return i && ii && iii && iv; }
};

template <typename S>
ConditionReport<S> check_conditions(const StroboscopicParams<S>& p,
                                    const FrequencySchedule<S>& sched,
                                    const ConditionThresholds<S>& thr = {}) {
  ConditionReport<S> r;
  S cycles = sched.tau * sched.omega_off / (2 * std::numbers::pi_v<S>);
  r.margin_i = std::abs(cycles - std::round(cycles));
  r.i = r.margin_i < S(1e-9);
  r.margin_ii = std::max({std::abs(p.g_q / (p.Delta - p.delta)),
                          std::abs(p.g_m / (p.Delta - sched.omega_on)),
                          std::abs(p.g_m / (p.Delta - sched.omega_off))});
  r.ii = r.margin_ii <= thr.small;
  r.margin_iii = std::max(p.g_m * sched.tau, p.g_q * sched.tau);
  r.iii = r.margin_iii <= thr.small;
  r.margin_iv = std::abs((sched.omega_on - sched.omega_off) * sched.tau);
  r.iv = r.margin_iv >= thr.large;
  r.margin_v = std::min(p.C_q, p.C_m);
  r.v = r.margin_v >= thr.large;
  return r;
}

// ---------------------------------------------------------------------------
// Fixed-step fourth-order integration of piecewise-constant models

template <typename S>
struct PiecewiseModel {
  std::vector<LindbladModel<S>> windows;  // cycled in order
  S window_duration = 0;

  bool dissipation_free() const {
    for (const auto& w : windows)
      if (!w.dissipators.empty()) return false;
    return true;
  }
};

namespace detail {

// One classical fourth-order step for x' = A x (A a matvec closure).
template <typename S, typename Vec, typename MatVec>
Vec rk4_step(const MatVec& A, const Vec& x, S dt) {
  Vec k1 = A(x);
  Vec k2 = A(Vec(x + (dt / 2) * k1));
  Vec k3 = A(Vec(x + (dt / 2) * k2));
  Vec k4 = A(Vec(x + dt * k3));
  return x + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace detail

template <typename S>
struct Trajectory {
  std::vector<S> times;
  std::vector<DensityOperator<S>> states;
};

// RK4 on vec(rho) (or on the state vector when the model is dissipation-free
// and rho0 is pure).  Steps subdivide each schedule window exactly; if the
// trace (norm) drifts beyond 1e-8 over a window, the step is halved and the
// window retried, up to 10 times.
template <typename S>
Trajectory<S> evolve(const DensityOperator<S>& rho0, const PiecewiseModel<S>& model,
                     const std::vector<S>& t_grid, S dt_max) {
  using C = std::complex<S>;
  if (model.windows.empty() || model.window_duration <= 0)
    throw std::invalid_argument("evolve: empty schedule");
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (t_grid[i] <= t_grid[i - 1])
      throw std::invalid_argument("evolve: t_grid must be strictly increasing");
  if (t_grid.empty() || t_grid.front() < 0) throw std::invalid_argument("evolve: bad t_grid");

  const Eigen::Index d = rho0.space.dim;
  const bool pure_path = model.dissipation_free() &&
                         std::abs((rho0.matrix * rho0.matrix).trace().real() - S(1)) < S(1e-10);

  // Precompile the generator for every distinct window (sparse in both
  // paths: -iH for pure states, the full Liouvillian otherwise).
  std::vector<SparseComplex<S>> gens;
  for (const auto& w : model.windows) {
    if (pure_path)
      gens.push_back(SparseComplex<S>(C(0, -1) * to_sparse<S>(w.hamiltonian.matrix)));
    else
      gens.push_back(compile(w).matrix);
  }

  ComplexVector<S> state;
  if (pure_path) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix<S>> es(rho0.matrix);
    state = es.eigenvectors().col(d - 1);  // dominant eigenvector of a pure state
  } else {
    state = vectorize<S>(rho0.matrix);
  }

  Trajectory<S> out;
  auto emit = [&](S t) {
    out.times.push_back(t);
    if (pure_path) {
      ComplexMatrix<S> r = state * state.adjoint();
      out.states.emplace_back(rho0.space, std::move(r));
    } else {
      ComplexMatrix<S> X = devectorize<S>(state, d);
      out.states.emplace_back(rho0.space, ComplexMatrix<S>((X + X.adjoint()) / S(2)));
    }
  };

  size_t gi = 0;
  if (t_grid[0] == S(0)) {
    emit(S(0));
    gi = 1;
  }
  S t = 0;
  int window_index = 0;
  const size_t nwin = model.windows.size();
  while (gi < t_grid.size()) {
    S win_start = t;
    S win_end = win_start + model.window_duration;
    const SparseComplex<S>& G = gens[window_index % nwin];
    auto matvec = [&](const ComplexVector<S>& x) -> ComplexVector<S> { return G * x; };
    // integrate this window, landing exactly on interior grid points
    ComplexVector<S> saved = state;
    const S norm_in = pure_path ? state.norm() : devectorize<S>(state, d).trace().real();
    S dt_window = dt_max;
    for (int attempt = 0;; ++attempt) {
      state = saved;
      S tcur = win_start;
      size_t gj = gi;
      bool drifted = false;
      while (tcur < win_end - S(1e-12) * model.window_duration) {
        S target = win_end;
        if (gj < t_grid.size() && t_grid[gj] < target - S(1e-12)) target = t_grid[gj];
        S span = target - tcur;
        int nsteps = std::max(1, static_cast<int>(std::ceil(span / dt_window - S(1e-9))));
        S dt = span / nsteps;
        for (int s = 0; s < nsteps; ++s)
          state = detail::rk4_step<S, ComplexVector<S>>(matvec, state, dt);
        tcur = target;
        if (gj < t_grid.size() && std::abs(tcur - t_grid[gj]) <= S(1e-9) * (S(1) + tcur)) {
          emit(t_grid[gj]);
          // defer advancing gi until the window is accepted
          ++gj;
        }
      }
      // change of the conserved normalization across this window
      S drift = pure_path ? std::abs(state.norm() - norm_in)
                          : std::abs(devectorize<S>(state, d).trace().real() - norm_in);
      drifted = drift > S(1e-10);
      if (!drifted) {
        gi = gj;
        break;
      }
      // discard emitted points of the failed attempt and retry
      size_t emitted = gj - gi;
      out.times.resize(out.times.size() - emitted);
      out.states.resize(out.states.size() - emitted);
      if (attempt >= 10) throw std::domain_error("evolve: trace drift persists after 10 halvings");
      dt_window /= 2;
    }
    t = win_end;
    ++window_index;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stroboscopic full-vs-eliminated comparison

template <typename S>
struct StroboTrace {
  std::vector<S> times;
  std::vector<S> n1_full, n2_full, qubit_full;
  std::vector<S> n1_elim, n2_elim, qubit_elim;
  std::vector<S> error;  // |n1_full - n1_elim|
  S max_error = 0;
};

namespace detail {

// Full microscopic Hamiltonian for one window: qubit + cavity + 2 oscillators
// with instantaneous frequencies (w1, w2).
template <typename S>
Operator<S> strobe_full_hamiltonian(const StroboscopicParams<S>& p, const TensorSpace& space,
                                    S w1, S w2) {
  auto q = qubit_ops<S>();
  Operator<S> sm = embed(q.sm, space, 0), sp = embed(q.sp, space, 0), sz = embed(q.sz, space, 0);
  Operator<S> a = embed(boson_ladder<S>(space.modes[1]), space, 1);
  Operator<S> b1 = embed(boson_ladder<S>(space.modes[2]), space, 2);
  Operator<S> b2 = embed(boson_ladder<S>(space.modes[3]), space, 3);
  ComplexMatrix<S> H =
      p.Delta * (a.matrix.adjoint() * a.matrix) + (p.delta / 2) * sz.matrix +
      w1 * (b1.matrix.adjoint() * b1.matrix) + w2 * (b2.matrix.adjoint() * b2.matrix) +
      p.g_m * (a.matrix.adjoint() * (b1.matrix + b2.matrix) +
               a.matrix * (b1.matrix + b2.matrix).adjoint()) -
      p.g_q * (a.matrix * sp.matrix + a.matrix.adjoint() * sm.matrix);
  return Operator<S>(space, std::move(H));
}

// Adiabatically eliminated window Hamiltonian in the frame co-rotating with
// the bare frequencies: only the renormalization shifts and the resonant
// exchange with the active oscillator remain.  Second-order elimination of
// the cavity from H = Delta a^+a + ... + g(a J^+ + a^+ J) produces level
// shifts -g^2/(Delta - freq) and the exchange coupling
// g_q g_m (2 Delta - omega - delta) / [2 (Delta-delta)(Delta-omega)].
template <typename S>
Operator<S> strobe_eliminated_hamiltonian(const StroboscopicParams<S>& p, const TensorSpace& space,
                                          const FrequencySchedule<S>& sched, int active) {
  auto q = qubit_ops<S>();
  Operator<S> sm = embed(q.sm, space, 0), sp = embed(q.sp, space, 0), sz = embed(q.sz, space, 0);
  const S shift_q = -p.g_q * p.g_q / (p.Delta - p.delta);
  const S shift_on = -p.g_m * p.g_m / (p.Delta - sched.omega_on);
  const S shift_off = -p.g_m * p.g_m / (p.Delta - sched.omega_off);
  const S g_eff = p.g_q * p.g_m * (2 * p.Delta - sched.omega_on - p.delta) /
                  (2 * (p.Delta - p.delta) * (p.Delta - sched.omega_on));
  ComplexMatrix<S> H = (shift_q / 2) * sz.matrix;
  for (int i = 0; i < sched.num_osc; ++i) {
    Operator<S> bi = embed(boson_ladder<S>(space.modes[1 + i]), space, 1 + i);
    H += (i == active ? shift_on : shift_off) * (bi.matrix.adjoint() * bi.matrix);
    if (i == active)
      H -= g_eff * (sp.matrix * bi.matrix + sm.matrix * bi.matrix.adjoint());
  }
  return Operator<S>(space, std::move(H));
}

}  // namespace detail

// Cavity-mediated exchange rate of the eliminated stroboscopic model.
template <typename S>
S strobe_exchange_rate(const StroboscopicParams<S>& p, const FrequencySchedule<S>& sched) {
  return std::abs(p.g_q * p.g_m * (2 * p.Delta - sched.omega_on - p.delta) /
                  (2 * (p.Delta - p.delta) * (p.Delta - sched.omega_on)));
}

// Noiseless comparison of the full cavity model against the eliminated
// Jaynes-Cummings chain, sampled at window boundaries.
template <typename S>
StroboTrace<S> compare_full_vs_eliminated(const StroboscopicParams<S>& p,
                                          const FrequencySchedule<S>& sched, S t_end,
                                          S dt_max = S(0.02)) {
  if (sched.num_osc != 2)
    throw std::invalid_argument("compare_full_vs_eliminated: two oscillators expected");
  TensorSpace full_space({ModeSpec::qubit(), ModeSpec::boson(p.cavity_dim),
                          ModeSpec::boson(p.osc_dim), ModeSpec::boson(p.osc_dim)});
  TensorSpace elim_space(
      {ModeSpec::qubit(), ModeSpec::boson(p.osc_dim), ModeSpec::boson(p.osc_dim)});

  PiecewiseModel<S> full, elim;
  full.window_duration = elim.window_duration = sched.slot_duration();
  full.windows = {
      LindbladModel<S>{full_space,
                       detail::strobe_full_hamiltonian(p, full_space, sched.omega_on,
                                                       sched.omega_off),
                       {}},
      LindbladModel<S>{full_space,
                       detail::strobe_full_hamiltonian(p, full_space, sched.omega_off,
                                                       sched.omega_on),
                       {}}};
  elim.windows = {
      LindbladModel<S>{elim_space, detail::strobe_eliminated_hamiltonian(p, elim_space, sched, 0),
                       {}},
      LindbladModel<S>{elim_space, detail::strobe_eliminated_hamiltonian(p, elim_space, sched, 1),
                       {}}};

  DensityOperator<S> rho0_full = basis_state<S>(full_space, {1, 0, 0, 0});
  DensityOperator<S> rho0_elim = basis_state<S>(elim_space, {1, 0, 0});

  std::vector<S> grid;
  const S w = sched.slot_duration();
  for (S t = w; t <= t_end + w / 2; t += w) grid.push_back(t);

  Trajectory<S> tf = evolve(rho0_full, full, grid, dt_max);
  Trajectory<S> te = evolve(rho0_elim, elim, grid, std::min(dt_max * 50, w));

  auto expect_n = [](const DensityOperator<S>& rho, Eigen::Index mode) {
    Operator<S> b = embed(boson_ladder<S>(rho.space.modes[mode]), rho.space, mode);
    return (b.matrix.adjoint() * b.matrix * rho.matrix).trace().real();
  };
  auto expect_e = [](const DensityOperator<S>& rho) {
    auto q = qubit_ops<S>();
    Operator<S> pe = embed(Operator<S>(TensorSpace({ModeSpec::qubit()}),
                                       ComplexMatrix<S>(q.sp.matrix * q.sm.matrix)),
                           rho.space, 0);
    return (pe.matrix * rho.matrix).trace().real();
  };

  StroboTrace<S> out;
  for (size_t i = 0; i < tf.times.size(); ++i) {
    out.times.push_back(tf.times[i]);
    out.n1_full.push_back(expect_n(tf.states[i], 2));
    out.n2_full.push_back(expect_n(tf.states[i], 3));
    out.qubit_full.push_back(expect_e(tf.states[i]));
    out.n1_elim.push_back(expect_n(te.states[i], 1));
    out.n2_elim.push_back(expect_n(te.states[i], 2));
    out.qubit_elim.push_back(expect_e(te.states[i]));
    out.error.push_back(std::abs(out.n1_full.back() - out.n1_elim.back()));
    out.max_error = std::max(out.max_error, out.error.back());
  }
  return out;
}

// Eliminated-model stroboscopic run with qubit decay and mechanical
// localization noise at finite cooperativity (rates gamma = g_eff / C).
template <typename S>
StroboTrace<S> strobe_dissipative(const StroboscopicParams<S>& p, const FrequencySchedule<S>& sched,
                                  S t_end) {
  TensorSpace elim_space(
      {ModeSpec::qubit(), ModeSpec::boson(p.osc_dim), ModeSpec::boson(p.osc_dim)});
  const S g_eff = strobe_exchange_rate(p, sched);
  auto q = qubit_ops<S>();
  std::vector<DissipatorTerm<S>> diss;
  if (std::isfinite(p.C_q) && p.C_q > 0) diss.push_back({g_eff / p.C_q, embed(q.sm, elim_space, 0)});
  if (std::isfinite(p.C_m) && p.C_m > 0)
    for (int i = 0; i < sched.num_osc; ++i) {
      Operator<S> bi = embed(boson_ladder<S>(elim_space.modes[1 + i]), elim_space, 1 + i);
      diss.push_back({g_eff / p.C_m, Operator<S>(elim_space, bi.matrix + bi.matrix.adjoint())});
    }
  PiecewiseModel<S> elim;
  elim.window_duration = sched.slot_duration();
  for (int a = 0; a < sched.num_osc; ++a)
    elim.windows.push_back(LindbladModel<S>{
        elim_space, detail::strobe_eliminated_hamiltonian(p, elim_space, sched, a), diss});
  DensityOperator<S> rho0 = basis_state<S>(elim_space, {1, 0, 0});
  std::vector<S> grid;
  const S w = sched.slot_duration();
  for (S t = w; t <= t_end + w / 2; t += w) grid.push_back(t);
  Trajectory<S> te = evolve(rho0, elim, grid, w);

  StroboTrace<S> out;
  auto expect_n = [](const DensityOperator<S>& rho, Eigen::Index mode) {
    Operator<S> b = embed(boson_ladder<S>(rho.space.modes[mode]), rho.space, mode);
    return (b.matrix.adjoint() * b.matrix * rho.matrix).trace().real();
  };
  for (size_t i = 0; i < te.times.size(); ++i) {
    out.times.push_back(te.times[i]);
    out.n1_elim.push_back(expect_n(te.states[i], 1));
    out.n2_elim.push_back(expect_n(te.states[i], 2));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phonon blockade

template <typename S>
struct BlockadeSpectrum {
  std::vector<S> eigenvalues;  // omega~ n + chi n^2
  S chi = 0;
  S anharmonicity = 0;  // (E2 - E1) - (E1 - E0) = 2 chi
  bool dispersive_warning = false;
};

// Spectrum of H_phon = omega~ b^+b + g^4/(delta-omega)^3 (b^+b)^2.
template <typename S>
BlockadeSpectrum<S> phonon_blockade_spectrum(const JcParams<S>& p, Eigen::Index n_max) {
  if (p.delta == p.omega)
    throw std::invalid_argument("phonon_blockade_spectrum: delta equals omega");
  JcCoefficients<S> c = jc_coefficients(p);
  BlockadeSpectrum<S> out;
  S d3 = (p.delta - p.omega) * (p.delta - p.omega) * (p.delta - p.omega);
  out.chi = c.g * c.g * c.g * c.g / d3;
  out.dispersive_warning = std::abs(c.g / (p.delta - p.omega)) > S(0.1);
  for (Eigen::Index n = 0; n <= n_max; ++n)
    out.eigenvalues.push_back(c.omega_tilde * n + out.chi * S(n) * S(n));
  if (n_max >= 2)
    out.anharmonicity =
        (out.eigenvalues[2] - out.eigenvalues[1]) - (out.eigenvalues[1] - out.eigenvalues[0]);
  return out;
}

// ---------------------------------------------------------------------------
// Stroboscopic ground-state cooling

template <typename S>
struct CoolingResult {
  std::vector<S> residual_occupations;
  int windows_used = 0;
  DensityOperator<S> state;  // product of the cooled mechanical marginals
};

template <typename S>
struct CoolingParams {
  S g_eff = S(0.001);
  S gamma_q = S(0.001);
  Eigen::Index n_fock = 4;
  Eigen::Index start_occupation = 1;
  S window_duration = 0;  // default: pi / (2 g_eff)
  int max_windows = 200;
  S target_occupation = S(0.01);
};

// Sequentially cools each oscillator through resonant exchange windows with a
// decaying qubit until the occupation drops below the target.
template <typename S>
CoolingResult<S> cooling_to_ground(int n_osc, const CoolingParams<S>& p) {
  if (n_osc < 1) throw std::invalid_argument("cooling_to_ground: need at least one oscillator");
  TensorSpace space({ModeSpec::qubit(), ModeSpec::boson(p.n_fock)});
  auto q = qubit_ops<S>();
  Operator<S> sm = embed(q.sm, space, 0), sp = embed(q.sp, space, 0);
  Operator<S> b = embed(boson_ladder<S>(space.modes[1]), space, 1);
  ComplexMatrix<S> H = -p.g_eff * (sp.matrix * b.matrix + sm.matrix * b.matrix.adjoint());
  LindbladModel<S> model{space, Operator<S>(space, H), {{p.gamma_q, sm}}};
  PiecewiseModel<S> pw;
  const S w = p.window_duration > 0 ? p.window_duration
                                    : std::numbers::pi_v<S> / (2 * p.g_eff);
  pw.window_duration = w;
  pw.windows = {model};

  // identical oscillators cool identically; simulate one and replicate
  DensityOperator<S> rho = basis_state<S>(space, {0, p.start_occupation});
  Operator<S> num(space, ComplexMatrix<S>(b.matrix.adjoint() * b.matrix));
  int windows = 0;
  S occ = (num.matrix * rho.matrix).trace().real();
  while (occ >= p.target_occupation) {
    if (windows >= p.max_windows)
      throw std::domain_error("cooling_to_ground: did not converge within max windows");
    Trajectory<S> tr = evolve(rho, pw, {w}, w / 64);
    rho = tr.states.back();
    occ = (num.matrix * rho.matrix).trace().real();
    ++windows;
  }
  DensityOperator<S> mech = partial_trace(rho, {1});
  ComplexMatrix<S> prod = ComplexMatrix<S>::Identity(1, 1);
  std::vector<ModeSpec> modes;
  CoolingResult<S> out;
  for (int i = 0; i < n_osc; ++i) {
    prod = kron<S>(prod, mech.matrix);
    modes.push_back(ModeSpec::boson(p.n_fock));
    out.residual_occupations.push_back(occ);
  }
  out.windows_used = windows;
  out.state = DensityOperator<S>(TensorSpace(modes), std::move(prod));
  return out;
}

}  // namespace qom
