#pragma once

// First-order perturbation theory for Liouvillians with a two-dimensional
// degenerate steady-state space, plus the closed-form mixture coefficients
// used as mutual cross-checks.
//
// The physical right pair {rho_A-like, rho_B-like} consists of the two
// extreme density operators of the kernel; the left pair {chi_A, chi_B} is
// the biorthonormal dual, normalized so chi_A + chi_B = identity.  The
// projected perturbation M_ij = tr(chi_i L_pert[rho_j]) has zero column sums
// (trace preservation), so it is generically not diagonal in the physical
// basis; the rotated eigenbasis in which it *is* diagonal (one trace-one
// steady mixture plus one traceless decaying direction) is exposed
// separately as diag_rights / diag_lefts.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>

#include "qom/lindblad.hpp"
#include "qom/steady_state.hpp"
#include "qom/tensor.hpp"

namespace qom {

template <typename S>
struct FirstOrderCoefficients {
  S alpha = 0, beta = 0;
};

template <typename S>
struct ProjectorData {
  TensorSpace space;
  std::array<DensityOperator<S>, 2> rights;  // physical pair, each trace 1
  std::array<Operator<S>, 2> lefts;          // duals, sum to identity
  Eigen::Matrix<std::complex<S>, 2, 2> projected;  // tr(chi_i L_pert[rho_j])
  std::array<Operator<S>, 2> diag_rights;    // basis in which projected is diagonal
  std::array<Operator<S>, 2> diag_lefts;
  Eigen::Matrix<std::complex<S>, 2, 1> diag_eigenvalues;

  // P[mu] = sum_i tr(chi_i mu) rho_i
  ComplexMatrix<S> apply(const ComplexMatrix<S>& mu) const {
    ComplexMatrix<S> out = ComplexMatrix<S>::Zero(mu.rows(), mu.cols());
    for (int i = 0; i < 2; ++i)
      out += (lefts[i].matrix.adjoint() * mu).trace() * rights[i].matrix;
    return out;
  }
};

namespace detail {

// Orthonormal Hermitian basis (Hilbert-Schmidt) of the span of the
// Hermitian/anti-Hermitian parts of the given kernel vectors.
template <typename S>
std::vector<ComplexMatrix<S>> hermitian_kernel_basis(const std::vector<ComplexVector<S>>& vecs,
                                                     Eigen::Index d) {
  std::vector<ComplexMatrix<S>> cands;
  for (const auto& v : vecs) {
    ComplexMatrix<S> X = devectorize<S>(v, d);
    cands.push_back((X + X.adjoint()) / S(2));
    ComplexMatrix<S> A = (X - X.adjoint()) / std::complex<S>(0, 2);
    cands.push_back(A);
  }
  // Rank decision via the real Gram spectrum: dependent candidates produced
  // by nearly parallel eigenvectors then fall cleanly below the threshold.
  const Eigen::Index m = static_cast<Eigen::Index>(cands.size());
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> G(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) G(i, j) = (cands[i] * cands[j]).trace().real();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>> es(G);
  const S lmax = es.eigenvalues().maxCoeff();
  std::vector<ComplexMatrix<S>> basis;
  for (Eigen::Index kk = m - 1; kk >= 0; --kk) {
    S lambda = es.eigenvalues()(kk);
    if (lambda < S(1e-10) * lmax) break;
    ComplexMatrix<S> b = ComplexMatrix<S>::Zero(d, d);
    for (Eigen::Index i = 0; i < m; ++i) b += es.eigenvectors()(i, kk) * cands[i];
    basis.push_back(b / std::sqrt(lambda));
  }
  return basis;
}

template <typename S>
S min_eigenvalue(const ComplexMatrix<S>& H) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<S>> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Largest t >= 0 such that base + t * dir stays positive semidefinite.
template <typename S>
S psd_extent(const ComplexMatrix<S>& base, const ComplexMatrix<S>& dir) {
  S lo = 0, hi = 1;
  int guard = 0;
  while (min_eigenvalue<S>(ComplexMatrix<S>(base + hi * dir)) > -Tol<S>::psd) {
    lo = hi;
    hi *= 2;
    if (++guard > 80) throw std::domain_error("psd_extent: direction never leaves the cone");
  }
  for (int it = 0; it < 100; ++it) {
    S mid = (lo + hi) / 2;
    if (min_eigenvalue<S>(ComplexMatrix<S>(base + mid * dir)) > -Tol<S>::psd / 2)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace detail

// The unperturbed kernel comes in two shapes.  When the two steady states
// share no coherent subspace the kernel is a two-dimensional Hermitian plane
// and the physical pair consists of the extreme density operators of its
// trace-one segment.  When the steady states are two pure dark vectors the
// kernel is the full operator algebra on their span (dimension four,
// populations plus coherences); the physical pair is then the orthonormal
// dark basis ordered by qubit excitation, and the duals are built to
// annihilate the coherence directions as well.
template <typename S>
ProjectorData<S> build_projector(const Superoperator<S>& L0, const Superoperator<S>& L_pert) {
  if (!(L0.space == L_pert.space))
    throw std::invalid_argument("build_projector: space mismatch");
  const Eigen::Index d = L0.space.dim;
  NullSpaceResult<S> ns = null_space<S>(L0, S(1e-10), 8);
  if (ns.right_vectors.size() != ns.left_vectors.size())
    throw std::domain_error("build_projector: left/right kernel dimensions differ");

  auto rbasis = detail::hermitian_kernel_basis<S>(ns.right_vectors, d);
  auto lbasis = detail::hermitian_kernel_basis<S>(ns.left_vectors, d);
  const size_t k = rbasis.size();
  if ((k != 2 && k != 4) || lbasis.size() != k)
    throw std::domain_error("build_projector: kernel dimension is neither two nor four");

  auto excitation = [&](const ComplexMatrix<S>& r) {
    auto q = qubit_ops<S>();
    Operator<S> pe = embed(Operator<S>(TensorSpace({ModeSpec::qubit()}),
                                       ComplexMatrix<S>(q.sp.matrix * q.sm.matrix)),
                           L0.space, 0);
    return (pe.matrix * r).trace().real();
  };

  ProjectorData<S> pd;
  pd.space = L0.space;
  std::vector<ComplexMatrix<S>> Rn;  // right elements the duals are paired against

  if (k == 2) {
    // Extreme points of the density-operator segment inside the plane.
    std::complex<S> t0 = rbasis[0].trace(), t1 = rbasis[1].trace();
    ComplexMatrix<S> delta = t1.real() * rbasis[0] - t0.real() * rbasis[1];
    S dn = std::sqrt((delta.adjoint() * delta).trace().real());
    if (dn < S(1e-10))
      throw std::domain_error("build_projector: kernel plane lacks a traceless direction");
    delta /= dn;
    ComplexMatrix<S> mean;
    if (std::abs(t0) > std::abs(t1))
      mean = rbasis[0] / t0.real();
    else if (std::abs(t1) > S(1e-10))
      mean = rbasis[1] / t1.real();
    else
      throw std::domain_error("build_projector: kernel contains no trace-one element");
    ComplexMatrix<S> rho_plus = mean + detail::psd_extent<S>(mean, delta) * delta;
    ComplexMatrix<S> rho_minus =
        mean - detail::psd_extent<S>(mean, ComplexMatrix<S>(-delta)) * delta;
    if (excitation(rho_plus) < excitation(rho_minus)) std::swap(rho_plus, rho_minus);
    pd.rights = {DensityOperator<S>(L0.space, rho_plus), DensityOperator<S>(L0.space, rho_minus)};
    Rn = {pd.rights[0].matrix, pd.rights[1].matrix};
  } else {
    // Support subspace of the kernel algebra.
    ComplexMatrix<S> supp = ComplexMatrix<S>::Zero(d, d);
    for (const auto& b : rbasis) supp += b * b;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix<S>> es(supp);
    const auto& ev = es.eigenvalues();
    if (ev(d - 3) > S(1e-8) * ev(d - 1))
      throw std::domain_error("build_projector: kernel support is not two-dimensional");
    ComplexMatrix<S> V(d, 2);
    V.col(0) = es.eigenvectors().col(d - 1);
    V.col(1) = es.eigenvectors().col(d - 2);
    // Dark basis: eigenvectors of the qubit excitation restricted to the
    // support, descending, so rights[0] is the rho_A-like state.
    auto q = qubit_ops<S>();
    ComplexMatrix<S> Nq = embed(Operator<S>(TensorSpace({ModeSpec::qubit()}),
                                            ComplexMatrix<S>(q.sp.matrix * q.sm.matrix)),
                                L0.space, 0)
                              .matrix;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<std::complex<S>, 2, 2>> e2(
        Eigen::Matrix<std::complex<S>, 2, 2>(V.adjoint() * Nq * V));
    ComplexVector<S> psiA = V * e2.eigenvectors().col(1);
    ComplexVector<S> psiB = V * e2.eigenvectors().col(0);
    pd.rights = {DensityOperator<S>(L0.space, ComplexMatrix<S>(psiA * psiA.adjoint())),
                 DensityOperator<S>(L0.space, ComplexMatrix<S>(psiB * psiB.adjoint()))};
    ComplexMatrix<S> coh = psiA * psiB.adjoint();
    Rn = {pd.rights[0].matrix, pd.rights[1].matrix,
          ComplexMatrix<S>((coh + coh.adjoint()) / std::sqrt(S(2))),
          ComplexMatrix<S>((coh - coh.adjoint()) / std::complex<S>(0, std::sqrt(S(2))))};
  }

  // Duals from the Hermitian left-kernel span via Gram inversion; pairing
  // against all kernel directions makes the duals annihilate the coherences.
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> G(k, k);
  for (size_t m = 0; m < k; ++m)
    for (size_t j = 0; j < k; ++j) G(m, j) = (lbasis[m] * Rn[j]).trace().real();
  Eigen::FullPivLU<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>> lu(G);
  if (!lu.isInvertible())
    throw std::domain_error("build_projector: degenerate left/right pairing");
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> Cmat = lu.inverse();
  for (int i = 0; i < 2; ++i) {
    ComplexMatrix<S> chi = ComplexMatrix<S>::Zero(d, d);
    for (size_t m = 0; m < k; ++m) chi += Cmat(i, m) * lbasis[m];
    pd.lefts[i] = Operator<S>(L0.space, std::move(chi));
  }

  // Projected perturbation.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      ComplexVector<S> lv = L_pert.matrix * vectorize<S>(pd.rights[j].matrix);
      pd.projected(i, j) = (pd.lefts[i].matrix * devectorize<S>(lv, d)).trace();
    }

  // Rotated basis in which the projected matrix is diagonal: eigenvalues are
  // {0, -(a+b)} with a = flow A->B and b = flow B->A.
  S a = pd.projected(1, 0).real(), b = pd.projected(0, 1).real();
  S scale = pd.projected.cwiseAbs().maxCoeff();
  if (scale > 0 && std::abs(a + b) < S(1e-10) * scale)
    throw std::domain_error("build_projector: projected perturbation is defective");
  if (a + b != S(0)) {
    pd.diag_rights = {
        Operator<S>(L0.space, ComplexMatrix<S>((b * pd.rights[0].matrix + a * pd.rights[1].matrix) /
                                               (a + b))),
        Operator<S>(L0.space, ComplexMatrix<S>(pd.rights[0].matrix - pd.rights[1].matrix))};
    pd.diag_lefts = {
        Operator<S>(L0.space, ComplexMatrix<S>(pd.lefts[0].matrix + pd.lefts[1].matrix)),
        Operator<S>(L0.space, ComplexMatrix<S>((a * pd.lefts[0].matrix - b * pd.lefts[1].matrix) /
                                               (a + b)))};
    pd.diag_eigenvalues << std::complex<S>(0, 0), std::complex<S>(-(a + b), 0);
  } else {
    pd.diag_rights = {Operator<S>(L0.space, pd.rights[0].matrix),
                      Operator<S>(L0.space, pd.rights[1].matrix)};
    pd.diag_lefts = {Operator<S>(L0.space, pd.lefts[0].matrix),
                     Operator<S>(L0.space, pd.lefts[1].matrix)};
    pd.diag_eigenvalues.setZero();
  }
  return pd;
}

// Mixture weights (alpha, beta) on (rho_A-like, rho_B-like) of the zero mode
// of L0 + eps P L_pert P; independent of eps at first order.
template <typename S>
FirstOrderCoefficients<S> first_order_steady(const Superoperator<S>& L0,
                                             const Superoperator<S>& L_pert, S eps = S(1)) {
  if (eps < 0) throw std::invalid_argument("first_order_steady: eps must be nonnegative");
  ProjectorData<S> pd = build_projector(L0, L_pert);
  S a = pd.projected(1, 0).real(), b = pd.projected(0, 1).real();
  if (std::abs(a) + std::abs(b) < S(1e-14))
    throw std::domain_error("first_order_steady: perturbation does not lift the degeneracy");
  return {b / (a + b), a / (a + b)};
}

// ---------------------------------------------------------------------------
// Closed forms

// alpha_n = 4 gamma_m / (4 gamma_q + 9 gamma_m)
template <typename S>
FirstOrderCoefficients<S> coeffs_noise(S gamma_q, S gamma_m) {
  if (gamma_q + gamma_m <= 0) throw std::invalid_argument("coeffs_noise: both rates zero");
  S denom = 4 * gamma_q + 9 * gamma_m;
  return {4 * gamma_m / denom, (4 * gamma_q + 5 * gamma_m) / denom};
}

// alpha_aux = A (gamma_m z^2 + gamma_aux (1-z^2)^2) / (gamma_q A + gamma_m B + gamma_aux C),
// A = 3 + 4z^2 + z^4, B = 2z^2 (3 + 4z^2 + 2z^4), C = 3 - 2z^2 + 2z^4 - 2z^6 + 3z^8.
// beta_aux is returned as 1 - alpha_aux (the normalized complement).
template <typename S>
FirstOrderCoefficients<S> coeffs_aux(S gamma_q, S gamma_m, S gamma_aux, S zeta) {
  S z2 = zeta * zeta, z4 = z2 * z2, z6 = z4 * z2, z8 = z4 * z4;
  S A = 3 + 4 * z2 + z4;
  S B = 2 * z2 * (3 + 4 * z2 + 2 * z4);
  S C = 3 - 2 * z2 + 2 * z4 - 2 * z6 + 3 * z8;
  S denom = gamma_q * A + gamma_m * B + gamma_aux * C;
  if (denom <= 0) throw std::invalid_argument("coeffs_aux: zero denominator");
  S alpha = A * (gamma_m * z2 + gamma_aux * (1 - z2) * (1 - z2)) / denom;
  return {alpha, 1 - alpha};
}

// alpha_m = (2z^2 gamma_aux (3 - 5z^2 + z^4 + z^6) + 2z^4 gamma_m (3 + z^2))
//           / (A gamma_q + D gamma_m + E gamma_aux),
// D = z^2 (3 + 10z^2 + 5z^4), E = z^2 (6 - 4z^2 - 2z^4 + 4z^6).
template <typename S>
FirstOrderCoefficients<S> coeffs_measured(S gamma_q, S gamma_m, S gamma_aux, S zeta) {
  S z2 = zeta * zeta, z4 = z2 * z2, z6 = z4 * z2;
  S A = 3 + 4 * z2 + z4;
  S D = z2 * (3 + 10 * z2 + 5 * z4);
  S E = z2 * (6 - 4 * z2 - 2 * z4 + 4 * z6);
  S denom = A * gamma_q + D * gamma_m + E * gamma_aux;
  if (denom <= 0) throw std::invalid_argument("coeffs_measured: zero denominator");
  S alpha = (2 * z2 * gamma_aux * (3 - 5 * z2 + z4 + z6) + 2 * z4 * gamma_m * (3 + z2)) / denom;
  return {alpha, 1 - alpha};
}

}  // namespace qom
