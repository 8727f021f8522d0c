#pragma once

// Pulse-sequence planning and simulation for preparing Fock superpositions of
// one or several oscillators through the qubit.
//
// Planning runs the inverse evolution: starting from the target, the highest
// occupied level is emptied by a resonant exchange pulse (|g,n> -> |e,n-1>)
// followed by a qubit drive pulse (|e,n-1> -> |g,n-1>); pulse areas are
// solved analytically.  With real target coefficients the ground-level
// amplitudes stay real and the excited-level amplitudes stay imaginary, so a
// signed real area always exists.  The forward plan is the reversed adjoint
// sequence.
//
// For several oscillators the inverse pass empties oscillator 1 first, then
// 2, ..., conditioning each sub-plan on the occupations of the off-resonant
// oscillators: their renormalization shifts l_i = -2 g_i^2/(delta - omega_i)
// displace the qubit transition per occupation manifold, so a weak pulse
// addresses one manifold at a time.  Idle dynamical phases are compensated by
// frame bookkeeping (an exact diagonal counter-rotation after every pulse).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qom/tensor.hpp"

namespace qom {

enum class PulseControl { QubitDrive, Coupling };

template <typename S>
struct PulseStep {
  int oscillator_index = 0;
  PulseControl control = PulseControl::Coupling;
  S amplitude = 0;  // signed; |amplitude| is the pulse strength
  S duration = 0;
  int base_level = 1;  // exchange pulses: the |g,n> level being addressed
  std::vector<Eigen::Index> condition_occupations;  // off-resonant oscillators, ascending index

  S area() const { return amplitude * duration; }
};

template <typename S>
using FockTarget = std::map<std::vector<Eigen::Index>, S>;  // occupations -> real amplitude

template <typename S>
struct PulsePlan {
  int num_oscillators = 1;
  std::vector<Eigen::Index> dims;  // per-oscillator truncation
  std::vector<PulseStep<S>> steps;  // forward order
  FockTarget<S> target;
  S predicted_fidelity = 1;

  int coupling_steps() const {
    int c = 0;
    for (const auto& s : steps)
      if (s.control == PulseControl::Coupling) ++c;
    return c;
  }
};

namespace detail {

// Abstract inverse rounds on real amplitude pairs (cg real, ce = i*de).
// Returns (kind, theta, base level) in inverse application order.
template <typename S>
struct InverseStep {
  PulseControl kind;
  S theta;
  int level;
};

template <typename S>
void apply_coupling(std::vector<S>& cg, std::vector<S>& de, S theta, int base) {
  const int M = static_cast<int>(cg.size()) - 1;
  std::vector<S> ncg = cg, nde = de;
  for (int m = 1; m <= M; ++m) {
    S tm = theta * std::sqrt(S(m) / S(base));
    ncg[m] = std::cos(tm) * cg[m] - std::sin(tm) * de[m - 1];
    nde[m - 1] = std::sin(tm) * cg[m] + std::cos(tm) * de[m - 1];
  }
  cg = ncg;
  de = nde;
}

template <typename S>
void apply_drive(std::vector<S>& cg, std::vector<S>& de, S theta) {
  const int M = static_cast<int>(cg.size()) - 1;
  std::vector<S> ncg = cg, nde = de;
  for (int m = 0; m <= M; ++m) {
    ncg[m] = std::cos(theta) * cg[m] + std::sin(theta) * de[m];
    nde[m] = std::cos(theta) * de[m] - std::sin(theta) * cg[m];
  }
  cg = ncg;
  de = nde;
}

// Inverse single-oscillator construction; coefficients must be real and
// normalized.  On return, sign receives the residual amplitude (+-1) left on
// |g,0>.
template <typename S>
std::vector<InverseStep<S>> inverse_rounds(std::vector<S> cg, S* sign) {
  const int M = static_cast<int>(cg.size()) - 1;
  std::vector<S> de(M + 1, S(0));
  std::vector<InverseStep<S>> steps;
  for (int n = M; n >= 1; --n) {
    if (std::abs(cg[n]) > S(1e-13)) {
      S th = std::atan2(cg[n], de[n - 1]);
      apply_coupling(cg, de, th, n);
      steps.push_back({PulseControl::Coupling, th, n});
    }
    if (std::abs(de[n - 1]) > S(1e-13)) {
      S th = std::atan2(de[n - 1], cg[n - 1]);
      apply_drive(cg, de, th);
      steps.push_back({PulseControl::QubitDrive, th, n});
    }
  }
  if (std::abs(std::abs(cg[0]) - S(1)) > S(1e-9))
    throw std::domain_error("inverse_rounds: construction failed to reach the ground level");
  if (sign) *sign = cg[0] < 0 ? S(-1) : S(1);
  return steps;
}

}  // namespace detail

template <typename S>
struct PlanParams {
  std::vector<S> l;           // renormalization shifts per oscillator
  S coupling_scale = S(0.05); // pulse strength used when no manifold must be resolved
  S drive_scale = S(0.05);
  S selectivity = S(1e-3);    // pulse strength as a fraction of the manifold gap
};

// Single-oscillator Law-Eberly plan for target sum_n c_n |n> (real c).
template <typename S>
PulsePlan<S> plan_single(const std::vector<S>& coefficients, const PlanParams<S>& params = {}) {
  S norm2 = 0;
  for (S c : coefficients) norm2 += c * c;
  if (std::abs(norm2 - S(1)) > S(1e-9))
    throw std::invalid_argument("plan_single: target is not normalized");
  PulsePlan<S> plan;
  plan.num_oscillators = 1;
  plan.dims = {static_cast<Eigen::Index>(coefficients.size())};
  for (size_t n = 0; n < coefficients.size(); ++n)
    if (coefficients[n] != S(0))
      plan.target[{static_cast<Eigen::Index>(n)}] = coefficients[n];
  S sign = 1;
  auto inv = detail::inverse_rounds<S>(coefficients, &sign);
  // forward = reversed adjoint: apply the inverse pulses with negated areas
  for (auto it = inv.rbegin(); it != inv.rend(); ++it) {
    PulseStep<S> st;
    st.oscillator_index = 0;
    st.control = it->kind;
    st.base_level = it->level;
    S scale = it->kind == PulseControl::Coupling ? params.coupling_scale : params.drive_scale;
    S theta = -it->theta;
    S rate = it->kind == PulseControl::Coupling ? scale * std::sqrt(S(it->level)) : scale;
    st.duration = std::abs(theta) / rate;
    st.amplitude = theta < 0 ? -scale : scale;
    plan.steps.push_back(st);
  }
  return plan;
}

// Many-body plan: inverse pass over oscillators 1..N, each conditioned on the
// occupations of the others; occupation manifolds are visited in descending
// lexicographic order.
template <typename S>
PulsePlan<S> plan_many(const FockTarget<S>& target, const std::vector<Eigen::Index>& dims,
                       const PlanParams<S>& params) {
  const int N = static_cast<int>(dims.size());
  if (N == 0) throw std::invalid_argument("plan_many: no oscillators");
  if (static_cast<int>(params.l.size()) != N)
    throw std::invalid_argument("plan_many: need one shift coefficient per oscillator");
  S norm2 = 0;
  for (const auto& [occ, amp] : target) {
    if (static_cast<int>(occ.size()) != N)
      throw std::invalid_argument("plan_many: occupation vector length mismatch");
    for (int i = 0; i < N; ++i)
      if (occ[i] < 0 || occ[i] >= dims[i])
        throw std::invalid_argument("plan_many: occupation exceeds truncation");
    norm2 += amp * amp;
  }
  if (std::abs(norm2 - S(1)) > S(1e-9))
    throw std::invalid_argument("plan_many: target is not normalized");

  PulsePlan<S> plan;
  plan.num_oscillators = N;
  plan.dims = dims;
  plan.target = target;

  FockTarget<S> amps = target;
  // inverse steps accumulated in inverse application order
  struct TaggedStep {
    int osc;
    std::vector<Eigen::Index> cond;
    detail::InverseStep<S> step;
    S pulse_scale;
  };
  std::vector<TaggedStep> inverse;

  for (int j = 0; j < N; ++j) {
    // group amplitudes by the occupations of the other oscillators
    std::map<std::vector<Eigen::Index>, std::map<Eigen::Index, S>, std::greater<>> groups;
    for (const auto& [occ, amp] : amps) {
      std::vector<Eigen::Index> cond;
      for (int i = 0; i < N; ++i)
        if (i != j) cond.push_back(occ[i]);
      groups[cond][occ[j]] = amp;
    }
    // manifold gap governing the pulse strength for this pass
    S gap = std::numeric_limits<S>::infinity();
    std::vector<S> lo;
    for (int i = 0; i < N; ++i)
      if (i != j) lo.push_back(params.l[i]);
    std::vector<const std::vector<Eigen::Index>*> conds;
    for (const auto& [cond, g] : groups) conds.push_back(&cond);
    for (size_t u = 0; u < conds.size(); ++u)
      for (size_t v = u + 1; v < conds.size(); ++v) {
        S s = 0;
        for (size_t k = 0; k < lo.size(); ++k)
          s += lo[k] * S((*conds[u])[k] - (*conds[v])[k]);
        if (s == 0)
          throw std::domain_error("plan_many: degenerate occupation manifolds (addressability)");
        gap = std::min(gap, 2 * std::abs(s));
      }
    S scale = std::isfinite(gap) ? std::min(params.coupling_scale, gap * params.selectivity)
                                 : params.coupling_scale;

    for (const auto& [cond, group] : groups) {
      Eigen::Index M = 0;
      for (const auto& [k, v] : group) M = std::max(M, k);
      if (M == 0) continue;
      std::vector<S> c(M + 1, S(0));
      S nrm = 0;
      for (const auto& [k, v] : group) nrm += v * v;
      nrm = std::sqrt(nrm);
      for (const auto& [k, v] : group) c[k] = v / nrm;
      S sign = 1;
      auto steps = detail::inverse_rounds<S>(c, &sign);
      for (const auto& st : steps) inverse.push_back({j, cond, st, scale});
      for (const auto& [k, v] : group) {
        std::vector<Eigen::Index> occ = cond;
        occ.insert(occ.begin() + j, k);
        amps.erase(occ);
      }
      std::vector<Eigen::Index> occ0 = cond;
      occ0.insert(occ0.begin() + j, 0);
      amps[occ0] = nrm * sign;
    }
  }
  if (amps.size() != 1 || amps.begin()->first != std::vector<Eigen::Index>(N, 0))
    throw std::domain_error("plan_many: inverse pass did not reach the ground state");

  for (auto it = inverse.rbegin(); it != inverse.rend(); ++it) {
    PulseStep<S> st;
    st.oscillator_index = it->osc;
    st.control = it->step.kind;
    st.base_level = it->step.level;
    st.condition_occupations = it->cond;
    S theta = -it->step.theta;
    S rate = it->step.kind == PulseControl::Coupling
                 ? it->pulse_scale * std::sqrt(S(it->step.level))
                 : it->pulse_scale;
    st.duration = std::abs(theta) / rate;
    st.amplitude = theta < 0 ? -it->pulse_scale : it->pulse_scale;
    plan.steps.push_back(st);
  }
  return plan;
}

// Coupling pulses actually required by the constructed plan.
template <typename S>
int count_steps(const FockTarget<S>& target, const std::vector<Eigen::Index>& dims,
                const PlanParams<S>& params) {
  return plan_many(target, dims, params).coupling_steps();
}

template <typename S>
struct AddressabilityResult {
  bool ok = true;
  S margin = std::numeric_limits<S>::infinity();  // minimum nonzero shift-sum gap
};

// Distinct occupation vectors must produce distinct shift sums sum_i l_i n_i.
template <typename S>
AddressabilityResult<S> addressability_check(const std::vector<S>& couplings,
                                             const std::vector<S>& detunings,
                                             const std::vector<std::vector<Eigen::Index>>& occs) {
  if (couplings.size() != detunings.size())
    throw std::invalid_argument("addressability_check: size mismatch");
  std::vector<S> l(couplings.size());
  for (size_t i = 0; i < l.size(); ++i) {
    if (detunings[i] == 0)
      throw std::invalid_argument("addressability_check: off-resonant oscillator at resonance");
    l[i] = -2 * couplings[i] * couplings[i] / detunings[i];
  }
  AddressabilityResult<S> res;
  for (size_t u = 0; u < occs.size(); ++u)
    for (size_t v = u + 1; v < occs.size(); ++v) {
      S s = 0;
      for (size_t i = 0; i < l.size(); ++i) s += l[i] * S(occs[u][i] - occs[v][i]);
      if (s == 0 && occs[u] != occs[v]) {
        res.ok = false;
        res.margin = 0;
        return res;
      }
      if (s != 0) res.margin = std::min(res.margin, std::abs(s));
    }
  return res;
}

// ---------------------------------------------------------------------------
// Simulation

template <typename S>
struct SimulationResult {
  ComplexVector<S> state;  // full qubit (x) oscillators state vector
  S fidelity = 0;          // squared overlap with the target (qubit in |g>)
};

// Executes the plan on the effective Jaynes-Cummings chain including the
// sigma_z occupation shifts of the off-resonant oscillators.  Each pulse is a
// constant Hamiltonian exponentiated exactly; the known diagonal shift phase
// is counter-rotated after every pulse (frame bookkeeping).
template <typename S>
SimulationResult<S> simulate_plan(const PulsePlan<S>& plan, const PlanParams<S>& params) {
  using C = std::complex<S>;
  const int N = plan.num_oscillators;
  if (static_cast<int>(params.l.size()) < N)
    throw std::invalid_argument("simulate_plan: need shift coefficients for every oscillator");
  std::vector<ModeSpec> modes{ModeSpec::qubit()};
  for (auto d : plan.dims) modes.push_back(ModeSpec::boson(d));
  TensorSpace space(modes);
  auto q = qubit_ops<S>();
  Operator<S> sm = embed(q.sm, space, 0), sp = embed(q.sp, space, 0), sz = embed(q.sz, space, 0);
  std::vector<ComplexMatrix<S>> b, num;
  for (int i = 0; i < N; ++i) {
    Operator<S> bi = embed(boson_ladder<S>(space.modes[1 + i]), space, 1 + i);
    b.push_back(bi.matrix);
    num.push_back(bi.matrix.adjoint() * bi.matrix);
  }

  ComplexVector<S> psi = state_vector<S>(space, std::vector<Eigen::Index>(N + 1, 0));
  for (const auto& st : plan.steps) {
    const int j = st.oscillator_index;
    // diagonal shift relative to the addressed manifold
    ComplexMatrix<S> diag = ComplexMatrix<S>::Zero(space.dim, space.dim);
    if (!st.condition_occupations.empty()) {
      S c0 = 0;
      int k = 0;
      ComplexMatrix<S> shift = ComplexMatrix<S>::Zero(space.dim, space.dim);
      for (int i = 0; i < N; ++i) {
        if (i == j) continue;
        shift += params.l[i] * num[i];
        c0 += params.l[i] * S(st.condition_occupations[k++]);
      }
      diag = sz.matrix * (shift - c0 * ComplexMatrix<S>::Identity(space.dim, space.dim));
    }
    ComplexMatrix<S> pulse;
    if (st.control == PulseControl::Coupling)
      pulse = -st.amplitude * (sp.matrix * b[j] + sm.matrix * b[j].adjoint());
    else
      pulse = st.amplitude * (sp.matrix + sm.matrix);
    ComplexMatrix<S> H = diag + pulse;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix<S>> es(H);
    psi = es.eigenvectors() *
          ((C(0, -1) * st.duration * es.eigenvalues().template cast<C>().array())
               .exp()
               .matrix()
               .asDiagonal() *
           (es.eigenvectors().adjoint() * psi));
    if (!st.condition_occupations.empty()) {
      // counter-rotate the known diagonal phase (frame bookkeeping)
      Eigen::SelfAdjointEigenSolver<ComplexMatrix<S>> ed(diag);
      psi = ed.eigenvectors() *
            ((C(0, 1) * st.duration * ed.eigenvalues().template cast<C>().array())
                 .exp()
                 .matrix()
                 .asDiagonal() *
             (ed.eigenvectors().adjoint() * psi));
    }
  }
  ComplexVector<S> tgt = ComplexVector<S>::Zero(space.dim);
  for (const auto& [occ, amp] : plan.target) {
    std::vector<Eigen::Index> labels{0};
    labels.insert(labels.end(), occ.begin(), occ.end());
    tgt(space.flat_index(labels)) = amp;
  }
  SimulationResult<S> out;
  out.state = psi;
  out.fidelity = std::norm(tgt.dot(psi));
  return out;
}

}  // namespace qom
