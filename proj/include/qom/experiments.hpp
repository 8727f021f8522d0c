#pragma once

// Ready-made model builders and target states for the dissipative
// state-preparation protocols: the engineered single- and multi-oscillator
// reservoir models with their imperfection channels, and the pure targets the
// steady states are compared against.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qom/lindblad.hpp"
#include "qom/tensor.hpp"

namespace qom {

// Auxiliary-jump variants compared when maximizing the postselected fidelity.
enum class AuxJumpKind {
  Optimal,   // sigma^+ - zeta b^+
  Pump,      // sigma^+
  Plus,      // sigma^+ + zeta b^+
  Creation,  // b^+
};

template <typename S>
struct EngineeredParams {
  S zeta = S(0.25);
  S C_q = std::numeric_limits<S>::infinity();  // qubit cooperativity
  S C_m = std::numeric_limits<S>::infinity();  // mechanical cooperativity
  S gamma_aux = 0;                             // auxiliary engineered rate
  S gamma_eff = 1;                             // primary engineered rate (time unit)
  Eigen::Index n_fock = 10;
  int num_osc = 1;
  AuxJumpKind aux_kind = AuxJumpKind::Optimal;
  // Multi-oscillator runs: small relaxation of the relative modes.  They are
  // exactly decoupled from the center-of-mass protocol, so without this term
  // the steady state is not unique; the rate only selects the cold branch
  // (relative modes in vacuum) and does not affect it.
  S rel_relax = 0;
};

template <typename S>
LindbladModel<S> engineered_model(const EngineeredParams<S>& p) {
  if (p.num_osc < 1) throw std::invalid_argument("engineered_model: need >= 1 oscillator");
  std::vector<ModeSpec> modes{ModeSpec::qubit()};
  for (int i = 0; i < p.num_osc; ++i) modes.push_back(ModeSpec::boson(p.n_fock));
  TensorSpace space(modes);
  LindbladModel<S> model{space,
                         Operator<S>(space, ComplexMatrix<S>::Zero(space.dim, space.dim)),
                         {}};
  model.dissipators.push_back(build_L0<S>(p.gamma_eff, p.zeta, space));
  if (p.gamma_aux > 0) {
    if (p.aux_kind == AuxJumpKind::Creation) {
      model.dissipators.push_back(
          {p.gamma_aux, Operator<S>(space, cm_mode<S>(space).matrix.adjoint())});
    } else {
      JumpFamily<S> f;
      if (p.aux_kind == AuxJumpKind::Optimal) f.zeta = p.zeta;
      if (p.aux_kind == AuxJumpKind::Plus) f.zeta = -p.zeta;
      model.dissipators.push_back(build_L_aux<S>(p.gamma_aux, f, space));
    }
  }
  if (std::isfinite(p.C_q) && p.C_q > 0) {
    auto q = qubit_ops<S>();
    model.dissipators.push_back({p.gamma_eff / p.C_q, embed(q.sm, space, 0)});
  }
  if (std::isfinite(p.C_m) && p.C_m > 0) {
    ComplexMatrix<S> b = cm_mode<S>(space).matrix;
    model.dissipators.push_back(
        {p.gamma_eff / p.C_m, Operator<S>(space, b + b.adjoint())});
  }
  if (p.num_osc > 1 && p.rel_relax > 0) {
    for (int i = 1; i < p.num_osc; ++i) {
      ComplexMatrix<S> bi = embed(boson_ladder<S>(space.modes[i]), space, i).matrix;
      ComplexMatrix<S> bj = embed(boson_ladder<S>(space.modes[i + 1]), space, i + 1).matrix;
      model.dissipators.push_back(
          {p.rel_relax, Operator<S>(space, (bi - bj) / std::sqrt(S(2)))});
    }
  }
  return model;
}

// Dark state of the engineered jump b_cm - zeta sigma^-:
//   |psi_A(zeta)> = (zeta |g, 1_cm> + |e, vac>) / sqrt(1 + zeta^2).
template <typename S>
DensityOperator<S> target_rho_A(const TensorSpace& space, S zeta) {
  if (space.modes.empty() || space.modes[0].kind != ModeKind::Qubit)
    throw std::invalid_argument("target_rho_A: mode 0 must be the qubit");
  const Eigen::Index n = space.num_modes();
  ComplexVector<S> vac_g = state_vector<S>(space, std::vector<Eigen::Index>(n, 0));
  std::vector<Eigen::Index> exc(n, 0);
  exc[0] = 1;
  ComplexVector<S> psi = zeta * (cm_mode<S>(space).matrix.adjoint() * vac_g) +
                         state_vector<S>(space, exc);
  return pure_state<S>(space, psi);
}

// The trivial dark state |g, vac>.
template <typename S>
DensityOperator<S> target_rho_B(const TensorSpace& space) {
  return basis_state<S>(space, std::vector<Eigen::Index>(space.num_modes(), 0));
}

// Single-mode target after the balanced qubit measurement: (|0> + |1>)/sqrt(2).
template <typename S>
DensityOperator<S> target_rho_A_measured(Eigen::Index n_fock) {
  TensorSpace space({ModeSpec::boson(n_fock)});
  ComplexVector<S> v = ComplexVector<S>::Zero(n_fock);
  v(0) = v(1) = S(1);
  return pure_state<S>(space, v);
}

// Single-mode Fock projector |n><n|.
template <typename S>
DensityOperator<S> fock_target(Eigen::Index n_fock, Eigen::Index n) {
  TensorSpace space({ModeSpec::boson(n_fock)});
  return basis_state<S>(space, {n});
}

// Symmetric single-excitation state over N oscillators (boson-only space).
template <typename S>
DensityOperator<S> w_state_target(Eigen::Index n_fock, int num_osc) {
  if (num_osc < 2) throw std::invalid_argument("w_state_target: need >= 2 oscillators");
  std::vector<ModeSpec> modes(num_osc, ModeSpec::boson(n_fock));
  TensorSpace space(modes);
  ComplexVector<S> v = ComplexVector<S>::Zero(space.dim);
  for (int i = 0; i < num_osc; ++i) {
    std::vector<Eigen::Index> labels(num_osc, 0);
    labels[i] = 1;
    v(space.flat_index(labels)) = S(1);
  }
  return pure_state<S>(space, v);
}

}  // namespace qom
