#pragma once

// Null-space extraction of superoperators, steady-state normalization,
// overlap fidelities, and qubit measurement with postselection.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <atomic>
#include <functional>
#include <future>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qom/lindblad.hpp"
#include "qom/tensor.hpp"

namespace qom {

template <typename S>
struct NullSpaceResult {
  TensorSpace space;
  std::vector<ComplexVector<S>> right_vectors;
  std::vector<ComplexVector<S>> left_vectors;
  std::vector<S> residuals;
  S tol_used = S(0);
};

namespace detail {

template <typename S>
std::vector<ComplexVector<S>> small_eigvecs(const ComplexMatrix<S>& M, S tol_rel, S* tol_abs_out) {
  Eigen::ComplexEigenSolver<ComplexMatrix<S>> es(M);
  const auto& vals = es.eigenvalues();
  S max_abs = vals.cwiseAbs().maxCoeff();
  S tol_abs = tol_rel * std::max(max_abs, S(1e-300));
  if (tol_abs_out) *tol_abs_out = tol_abs;
  std::vector<ComplexVector<S>> out;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (std::abs(vals(i)) <= tol_abs) out.push_back(es.eigenvectors().col(i));
  return out;
}

}  // namespace detail

// All right/left eigenvectors with |eigenvalue| <= tol * spectral scale.
// Dense eigendecomposition; intended for d^2 <= ~2500.
template <typename S>
NullSpaceResult<S> null_space(const Superoperator<S>& L, S tol = S(1e-10),
                              Eigen::Index max_dim = 8) {
  if (tol <= 0) throw std::invalid_argument("null_space: tol must be positive");
  NullSpaceResult<S> res;
  res.space = L.space;
  ComplexMatrix<S> M = L.dense();
  S tol_abs = 0;
  res.right_vectors = detail::small_eigvecs<S>(M, tol, &tol_abs);
  res.left_vectors = detail::small_eigvecs<S>(ComplexMatrix<S>(M.adjoint()), tol, nullptr);
  res.tol_used = tol;
  if (static_cast<Eigen::Index>(res.right_vectors.size()) > max_dim ||
      static_cast<Eigen::Index>(res.left_vectors.size()) > max_dim)
    throw std::domain_error("null_space: zero eigenspace larger than max_dim");
  S op_scale = M.cwiseAbs().maxCoeff();
  for (const auto& v : res.right_vectors) res.residuals.push_back((M * v).norm() / op_scale);
  return res;
}

// Normalize a unique zero mode into a density operator.
template <typename S>
DensityOperator<S> steady_density(const NullSpaceResult<S>& result) {
  if (result.right_vectors.size() != 1)
    throw std::domain_error("steady_density: null space is not one-dimensional");
  const Eigen::Index d = result.space.dim;
  ComplexMatrix<S> X = devectorize<S>(result.right_vectors[0], d);
  ComplexMatrix<S> H = (X + X.adjoint()) / S(2);
  std::complex<S> tr = H.trace();
  if (std::abs(tr) < S(1e-12))
    throw std::domain_error("steady_density: zero-trace null vector");
  H /= tr;
  DensityOperator<S> rho(result.space, std::move(H));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<S>> es(rho.matrix, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -Tol<S>::psd)
    throw std::domain_error("steady_density: negative eigenvalue beyond tolerance");
  return rho;
}

// Unique steady state via a bordered sparse solve: the trace-normalization
// row replaces one equation of L vec(rho) = 0.  Robust and fast for large
// dimensions where a dense eigendecomposition is impractical.
template <typename S>
DensityOperator<S> steady_unique_sparse(const Superoperator<S>& L) {
  using C = std::complex<S>;
  const Eigen::Index d = L.space.dim;
  const Eigen::Index d2 = d * d;
  std::vector<Eigen::Triplet<C>> trips;
  trips.reserve(L.matrix.nonZeros() + d);
  for (int k = 0; k < L.matrix.outerSize(); ++k)
    for (typename SparseComplex<S>::InnerIterator it(L.matrix, k); it; ++it)
      if (it.row() != 0) trips.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index i = 0; i < d; ++i) trips.emplace_back(0, i * d + i, C(1, 0));
  SparseComplex<S> A(d2, d2);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  Eigen::SparseLU<SparseComplex<S>> lu(A);
  if (lu.info() != Eigen::Success)
    throw std::domain_error("steady_unique_sparse: factorization failed");
  ComplexVector<S> rhs = ComplexVector<S>::Zero(d2);
  rhs(0) = C(1, 0);
  ComplexVector<S> v = lu.solve(rhs);
  S scale = std::max(S(1), S(v.cwiseAbs().maxCoeff()));
  S residual = (L.matrix * v).template lpNorm<Eigen::Infinity>() / scale;
  if (!(residual < S(1e-7)))
    throw std::domain_error("steady_unique_sparse: residual too large (non-unique steady state?)");
  ComplexMatrix<S> X = devectorize<S>(v, d);
  ComplexMatrix<S> H = (X + X.adjoint()) / S(2);
  H /= H.trace();
  return DensityOperator<S>(L.space, std::move(H));
}

// Dispatch: dense eigendecomposition at small dimension, bordered sparse
// solve (unique steady states) above.
template <typename S>
DensityOperator<S> steady_state(const Superoperator<S>& L, Eigen::Index dense_limit = 2500) {
  if (L.matrix.rows() <= dense_limit) return steady_density(null_space<S>(L));
  return steady_unique_sparse(L);
}

// Overlap fidelity tr(rho * target).
template <typename S>
S fidelity(const DensityOperator<S>& rho, const DensityOperator<S>& target) {
  if (rho.space != target.space) throw std::invalid_argument("fidelity: space mismatch");
  return (rho.matrix * target.matrix).trace().real();
}

// Weight of the |0>,|1> superposition component in a single-mode mixture
// alpha (|0>+|1>)(<0|+<1|)/2 + beta |0><0|; equals twice the (0,1) coherence.
template <typename S>
S superposition_weight(const DensityOperator<S>& rho_mech) {
  return 2 * rho_mech.matrix(0, 1).real();
}

template <typename S>
struct MeasurementSpec {
  Eigen::Matrix<std::complex<S>, 2, 1> basis0, basis1;
  int keep_index = 0;

  void validate() const {
    if (std::abs(basis0.norm() - S(1)) > S(1e-12) || std::abs(basis1.norm() - S(1)) > S(1e-12) ||
        std::abs(basis0.dot(basis1)) > S(1e-12))
      throw std::invalid_argument("MeasurementSpec: basis not orthonormal");
  }

  // |+>_q = (zeta|e> + |g>)/sqrt(1+zeta^2), |->_q = (|e> - zeta|g>)/sqrt(1+zeta^2)
  static MeasurementSpec plus_minus(S zeta, int keep = 0) {
    MeasurementSpec m;
    S n = std::sqrt(1 + zeta * zeta);
    m.basis0 << std::complex<S>(1 / n, 0), std::complex<S>(zeta / n, 0);
    m.basis1 << std::complex<S>(-zeta / n, 0), std::complex<S>(1 / n, 0);
    m.keep_index = keep;
    return m;
  }
  // {|g>, |e>} with |g> kept by default.
  static MeasurementSpec ground_excited(int keep = 0) {
    MeasurementSpec m;
    m.basis0 << std::complex<S>(1, 0), std::complex<S>(0, 0);
    m.basis1 << std::complex<S>(0, 0), std::complex<S>(1, 0);
    m.keep_index = keep;
    return m;
  }
};

// Project onto the kept qubit basis vector, renormalize, trace out the qubit.
template <typename S>
std::pair<DensityOperator<S>, S> measure_postselect(const DensityOperator<S>& rho,
                                                    const MeasurementSpec<S>& spec) {
  spec.validate();
  if (rho.space.modes.empty() || rho.space.modes[0].kind != ModeKind::Qubit)
    throw std::invalid_argument("measure_postselect: qubit must be mode 0");
  const auto& v2 = spec.keep_index == 0 ? spec.basis0 : spec.basis1;
  ComplexMatrix<S> proj2 = v2 * v2.adjoint();
  Operator<S> P =
      embed(Operator<S>(TensorSpace({ModeSpec::qubit()}), proj2), rho.space, 0);
  ComplexMatrix<S> cond = P.matrix * rho.matrix * P.matrix;
  S p = cond.trace().real();
  if (p < S(1e-12))
    throw std::domain_error("measure_postselect: vanishing success probability");
  cond /= p;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index m = 1; m < rho.space.num_modes(); ++m) keep.push_back(m);
  DensityOperator<S> conditional(rho.space, std::move(cond));
  return {partial_trace(conditional, keep), p};
}

// ---------------------------------------------------------------------------
// Parameter sweeps

template <typename S>
struct SweepRow {
  S param = 0;
  std::vector<S> fidelities;
  int null_dim = 0;
  S residual = 0;
  bool truncation_flag = false;  // steady state shifted materially between N and N+5
  bool failed = false;
  std::string error;
};

template <typename S>
struct SweepSpec {
  // model(param, n_fock) and targets(param, n_fock); fidelity_kind selects
  // overlap (0) or superposition weight after |+> postselection handled by
  // the caller-provided evaluator below.
  std::function<LindbladModel<S>(S, Eigen::Index)> model;
  std::function<std::vector<S>(const DensityOperator<S>&, S, Eigen::Index)> evaluate;
  std::vector<S> grid;
  Eigen::Index n_fock = 10;
  int workers = 1;
  S truncation_tol = S(0.01);
  bool check_truncation = true;
  // Sweeps target unique-steady-state regimes, so the fast bordered sparse
  // solve is the default; raise to fall back to the dense eigendecomposition
  // (its residual check turns non-unique points into failed rows either way).
  Eigen::Index dense_limit = 1;
};

template <typename S>
std::vector<SweepRow<S>> sweep(const SweepSpec<S>& spec) {
  if (spec.grid.empty()) throw std::invalid_argument("sweep: empty grid");
  std::vector<SweepRow<S>> rows(spec.grid.size());
  auto run_point = [&](size_t i) {
    SweepRow<S>& row = rows[i];
    row.param = spec.grid[i];
    try {
      Superoperator<S> L = compile(spec.model(row.param, spec.n_fock));
      DensityOperator<S> rho = steady_state(L, spec.dense_limit);
      row.residual = (L.matrix * vectorize<S>(rho.matrix)).template lpNorm<Eigen::Infinity>();
      row.null_dim = 1;
      row.fidelities = spec.evaluate(rho, row.param, spec.n_fock);
      if (spec.check_truncation) {
        Superoperator<S> L5 = compile(spec.model(row.param, spec.n_fock + 5));
        DensityOperator<S> rho5 = steady_state(L5, spec.dense_limit);
        std::vector<S> f5 = spec.evaluate(rho5, row.param, spec.n_fock + 5);
        for (size_t k = 0; k < row.fidelities.size(); ++k)
          if (std::abs(row.fidelities[k] - f5[k]) > spec.truncation_tol)
            row.truncation_flag = true;
      }
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  };
  const int workers = std::max(1, spec.workers);
  if (workers == 1) {
    for (size_t i = 0; i < spec.grid.size(); ++i) run_point(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (size_t i = next.fetch_add(1); i < spec.grid.size(); i = next.fetch_add(1))
          run_point(i);
      });
    for (auto& t : pool) t.join();
  }
  return rows;
}

}  // namespace qom
