#pragma once

// Assembly of Hamiltonians and dissipators into Lindblad models, and their
// compilation into superoperators acting on column-vectorized density
// operators:
//   M vec(rho) = vec(-i[H,rho] + sum_k r_k (J rho J^+ - 1/2 {J^+J, rho})).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qom/tensor.hpp"

namespace qom {

template <typename S>
using SparseComplex = Eigen::SparseMatrix<std::complex<S>>;

template <typename S>
struct DissipatorTerm {
  S rate;  // nonnegative, units 1/time
  Operator<S> jump;
};

template <typename S>
struct LindbladModel {
  TensorSpace space;
  Operator<S> hamiltonian;
  std::vector<DissipatorTerm<S>> dissipators;
};

template <typename S>
struct Superoperator {
  TensorSpace space;
  SparseComplex<S> matrix;  // d^2 x d^2, column-stacking convention

  ComplexMatrix<S> dense() const { return ComplexMatrix<S>(matrix); }
};

// ---------------------------------------------------------------------------
// Sparse helpers

template <typename S>
SparseComplex<S> sparse_kron(const SparseComplex<S>& a, const SparseComplex<S>& b) {
  using Triplet = Eigen::Triplet<std::complex<S>>;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(a.nonZeros()) * static_cast<size_t>(b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (typename SparseComplex<S>::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (typename SparseComplex<S>::InnerIterator ib(b, kb); ib; ++ib)
          trips.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                             ia.value() * ib.value());
  SparseComplex<S> out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

template <typename S>
SparseComplex<S> to_sparse(const ComplexMatrix<S>& m, S prune = S(0)) {
  SparseComplex<S> s = m.sparseView(std::complex<S>(1, 0), prune);
  s.makeCompressed();
  return s;
}

// ---------------------------------------------------------------------------
// Hamiltonians

template <typename S>
struct FullHamiltonianParams {
  S Delta = 0, delta = 0, omega = 0, g_m = 0, g_q = 0, Omega = 0;
  bool has_aux = false;
  S Delta_aux = 0, g_m_aux = 0, g_q_aux = 0;
};

// Microscopic model on [qubit, cavity a1 (, cavity a2), mechanical b]:
//   H = Delta a1^+a1 + (delta/2) sigma_z + omega b^+b
//       + g_m (a1^+ b + a1 b^+) - g_q (a1 sigma^+ + a1^+ sigma^-)
//       + Omega (sigma^+ + sigma^-)
//       [+ Delta_aux a2^+a2 - g_m_aux (a2^+ b^+ + a2 b) + g_q_aux (a2^+ sigma^+ + a2 sigma^-)]
template <typename S>
Operator<S> build_full_hamiltonian(const FullHamiltonianParams<S>& p, const TensorSpace& space) {
  const Eigen::Index needed = p.has_aux ? 4 : 3;
  if (space.num_modes() != needed || space.modes[0].kind != ModeKind::Qubit)
    throw std::invalid_argument("build_full_hamiltonian: space must be qubit + cavity(s) + mech");
  for (Eigen::Index m = 1; m < needed; ++m)
    if (space.modes[m].kind != ModeKind::Boson)
      throw std::invalid_argument("build_full_hamiltonian: modes 1.. must be bosonic");
  auto q = qubit_ops<S>();
  Operator<S> sm = embed(q.sm, space, 0), sp = embed(q.sp, space, 0), sz = embed(q.sz, space, 0);
  Operator<S> a1 = embed(boson_ladder<S>(space.modes[1]), space, 1);
  const Eigen::Index mech_index = needed - 1;
  Operator<S> b = embed(boson_ladder<S>(space.modes[mech_index]), space, mech_index);

  ComplexMatrix<S> H = p.Delta * (a1.matrix.adjoint() * a1.matrix) + (p.delta / 2) * sz.matrix +
                       p.omega * (b.matrix.adjoint() * b.matrix) +
                       p.g_m * (a1.matrix.adjoint() * b.matrix + a1.matrix * b.matrix.adjoint()) -
                       p.g_q * (a1.matrix * sp.matrix + a1.matrix.adjoint() * sm.matrix) +
                       p.Omega * (sp.matrix + sm.matrix);
  if (p.has_aux) {
    Operator<S> a2 = embed(boson_ladder<S>(space.modes[2]), space, 2);
    H += p.Delta_aux * (a2.matrix.adjoint() * a2.matrix) -
         p.g_m_aux * (a2.matrix.adjoint() * b.matrix.adjoint() + a2.matrix * b.matrix) +
         p.g_q_aux * (a2.matrix.adjoint() * sp.matrix + a2.matrix * sm.matrix);
  }
  return Operator<S>(space, std::move(H));
}

template <typename S>
struct JcParams {
  S Delta = 0, delta = 0, omega = 0, g_m = 0, g_q = 0, Omega = 0;
};

template <typename S>
struct JcCoefficients {
  S delta_tilde, omega_tilde, g;
  bool adiabaticity_warning;  // true when g/(Delta - freq) exceeds 0.1
};

// Renormalized Jaynes-Cummings coefficients after eliminating the cavity:
//   delta~ = delta - 2 g_q^2/(Delta-delta), omega~ = omega - 2 g_m^2/(Delta-omega),
//   g = g_q g_m (2 Delta - omega - delta) / [(Delta-delta)(Delta-omega)].
template <typename S>
JcCoefficients<S> jc_coefficients(const JcParams<S>& p) {
  if (p.Delta == p.delta || p.Delta == p.omega)
    throw std::invalid_argument("jc_coefficients: cavity resonant with qubit or oscillator");
  JcCoefficients<S> c;
  c.delta_tilde = p.delta - 2 * p.g_q * p.g_q / (p.Delta - p.delta);
  c.omega_tilde = p.omega - 2 * p.g_m * p.g_m / (p.Delta - p.omega);
  c.g = p.g_q * p.g_m * (2 * p.Delta - p.omega - p.delta) /
        ((p.Delta - p.delta) * (p.Delta - p.omega));
  c.adiabaticity_warning = std::abs(p.g_q / (p.Delta - p.delta)) > S(0.1) ||
                           std::abs(p.g_m / (p.Delta - p.omega)) > S(0.1);
  return c;
}

// Effective Jaynes-Cummings model on [qubit, boson(n_fock)]:
//   H_eff = (delta~/2) sigma_z + omega~ b^+b - g (sigma^+ b + sigma^- b^+)
//           + Omega (sigma^+ + sigma^-).
template <typename S>
LindbladModel<S> build_effective_jc(const JcParams<S>& p, Eigen::Index n_fock) {
  JcCoefficients<S> c = jc_coefficients(p);
  TensorSpace space({ModeSpec::qubit(), ModeSpec::boson(n_fock)});
  auto q = qubit_ops<S>();
  Operator<S> sm = embed(q.sm, space, 0), sp = embed(q.sp, space, 0), sz = embed(q.sz, space, 0);
  Operator<S> b = embed(boson_ladder<S>(space.modes[1]), space, 1);
  ComplexMatrix<S> H =
      (c.delta_tilde / 2) * sz.matrix + c.omega_tilde * (b.matrix.adjoint() * b.matrix) -
      c.g * (sp.matrix * b.matrix + sm.matrix * b.matrix.adjoint()) +
      p.Omega * (sp.matrix + sm.matrix);
  return LindbladModel<S>{space, Operator<S>(space, std::move(H)), {}};
}

// ---------------------------------------------------------------------------
// Dissipators

template <typename S>
struct StandardRates {
  S kappa = 0, kappa_aux = 0, gamma_q = 0, gamma_m = 0;
};

// Cavity decay enters with prefactor 2*kappa; qubit decay (sigma^-) with
// gamma_q; mechanical localization noise (b + b^+) with gamma_m.
template <typename S>
std::vector<DissipatorTerm<S>> standard_dissipators(const StandardRates<S>& r,
                                                    const TensorSpace& space) {
  if (r.kappa < 0 || r.kappa_aux < 0 || r.gamma_q < 0 || r.gamma_m < 0)
    throw std::invalid_argument("standard_dissipators: negative rate");
  if (space.modes.empty() || space.modes[0].kind != ModeKind::Qubit)
    throw std::invalid_argument("standard_dissipators: mode 0 must be the qubit");
  std::vector<DissipatorTerm<S>> out;
  auto q = qubit_ops<S>();
  const Eigen::Index n = space.num_modes();
  const bool has_aux_cavity = n >= 4;
  if (r.kappa > 0) {
    if (n < 2 || space.modes[1].kind != ModeKind::Boson)
      throw std::invalid_argument("standard_dissipators: no cavity mode for kappa");
    out.push_back({2 * r.kappa, embed(boson_ladder<S>(space.modes[1]), space, 1)});
  }
  if (r.kappa_aux > 0) {
    if (!has_aux_cavity)
      throw std::invalid_argument("standard_dissipators: no auxiliary cavity mode");
    out.push_back({2 * r.kappa_aux, embed(boson_ladder<S>(space.modes[2]), space, 2)});
  }
  if (r.gamma_q > 0) out.push_back({r.gamma_q, embed(q.sm, space, 0)});
  if (r.gamma_m > 0) {
    const Eigen::Index mech = n - 1;
    if (space.modes[mech].kind != ModeKind::Boson)
      throw std::invalid_argument("standard_dissipators: no mechanical mode");
    Operator<S> b = embed(boson_ladder<S>(space.modes[mech]), space, mech);
    out.push_back({r.gamma_m, Operator<S>(space, b.matrix + b.matrix.adjoint())});
  }
  return out;
}

// Center-of-mass annihilation operator over all bosonic modes of the space.
template <typename S>
Operator<S> cm_mode(const TensorSpace& space) {
  ComplexMatrix<S> acc = ComplexMatrix<S>::Zero(space.dim, space.dim);
  Eigen::Index count = 0;
  for (Eigen::Index m = 0; m < space.num_modes(); ++m)
    if (space.modes[m].kind == ModeKind::Boson) {
      acc += embed(boson_ladder<S>(space.modes[m]), space, m).matrix;
      ++count;
    }
  if (count == 0) throw std::invalid_argument("cm_mode: no bosonic modes");
  acc /= std::sqrt(S(count));
  return Operator<S>(space, std::move(acc));
}

// Engineered dissipator with jump J0~ = b - zeta sigma^- (b is the
// center-of-mass mode when several oscillators are present).
template <typename S>
DissipatorTerm<S> build_L0(S gamma_eff, S zeta, const TensorSpace& space) {
  if (!(zeta > 0 && zeta <= 1))
    throw std::invalid_argument("build_L0: zeta must lie in (0, 1]");
  if (gamma_eff < 0) throw std::invalid_argument("build_L0: negative rate");
  if (space.modes.empty() || space.modes[0].kind != ModeKind::Qubit)
    throw std::invalid_argument("build_L0: mode 0 must be the qubit");
  auto q = qubit_ops<S>();
  ComplexMatrix<S> J = cm_mode<S>(space).matrix - zeta * embed(q.sm, space, 0).matrix;
  return {gamma_eff, Operator<S>(space, std::move(J))};
}

template <typename S>
struct JumpFamily {
  S eta = 0, nu = 0, zeta = 0;
};

// Auxiliary dissipator with jump J1 = sigma^+ + eta sigma^- + nu b - zeta b^+.
template <typename S>
DissipatorTerm<S> build_L_aux(S gamma_aux, const JumpFamily<S>& f, const TensorSpace& space) {
  if (gamma_aux < 0) throw std::invalid_argument("build_L_aux: negative rate");
  if (space.modes.empty() || space.modes[0].kind != ModeKind::Qubit)
    throw std::invalid_argument("build_L_aux: mode 0 must be the qubit");
  auto q = qubit_ops<S>();
  ComplexMatrix<S> b = cm_mode<S>(space).matrix;
  ComplexMatrix<S> J = embed(q.sp, space, 0).matrix + f.eta * embed(q.sm, space, 0).matrix +
                       f.nu * b - f.zeta * b.adjoint();
  return {gamma_aux, Operator<S>(space, std::move(J))};
}

// ---------------------------------------------------------------------------
// Compilation

template <typename S>
Superoperator<S> compile(const LindbladModel<S>& model) {
  using C = std::complex<S>;
  const Eigen::Index d = model.space.dim;
  if (model.hamiltonian.matrix.rows() != d)
    throw std::invalid_argument("compile: Hamiltonian does not match space");
  if ((model.hamiltonian.matrix - model.hamiltonian.matrix.adjoint()).cwiseAbs().maxCoeff() >
      Tol<S>::herm)
    throw std::invalid_argument("compile: Hamiltonian is not Hermitian");

  SparseComplex<S> id(d, d);
  id.setIdentity();
  SparseComplex<S> H = to_sparse<S>(model.hamiltonian.matrix);
  SparseComplex<S> Ht = to_sparse<S>(ComplexMatrix<S>(model.hamiltonian.matrix.transpose()));
  SparseComplex<S> M = C(0, -1) * (sparse_kron<S>(id, H) - sparse_kron<S>(Ht, id));
  for (const auto& term : model.dissipators) {
    if (term.jump.matrix.rows() != d)
      throw std::invalid_argument("compile: jump operator does not match space");
    if (term.rate < 0) throw std::invalid_argument("compile: negative rate");
    SparseComplex<S> J = to_sparse<S>(term.jump.matrix);
    SparseComplex<S> Jc = to_sparse<S>(ComplexMatrix<S>(term.jump.matrix.conjugate()));
    ComplexMatrix<S> JdJ_dense = term.jump.matrix.adjoint() * term.jump.matrix;
    SparseComplex<S> JdJ = to_sparse<S>(JdJ_dense);
    SparseComplex<S> JdJt = to_sparse<S>(ComplexMatrix<S>(JdJ_dense.transpose()));
    M += term.rate * (sparse_kron<S>(Jc, J) -
                      C(S(0.5), 0) * (sparse_kron<S>(id, JdJ) + sparse_kron<S>(JdJt, id)));
  }
  M.makeCompressed();
  return Superoperator<S>{model.space, std::move(M)};
}

// vec / unvec in the column-stacking convention.
template <typename S>
ComplexVector<S> vectorize(const ComplexMatrix<S>& m) {
  return Eigen::Map<const ComplexVector<S>>(m.data(), m.size());
}

template <typename S>
ComplexMatrix<S> devectorize(const ComplexVector<S>& v, Eigen::Index d) {
  return Eigen::Map<const ComplexMatrix<S>>(v.data(), d, d);
}

}  // namespace qom
