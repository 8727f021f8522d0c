#pragma once

// Truncated composite Hilbert spaces and the elementary operators (ladder,
// Pauli, identities) embedded into them.  Mode 0 is always the qubit; bosonic
// modes follow in declaration order.  Basis labels are mixed-radix with mode 0
// most significant, matching the Kronecker-product ordering qubit (x) boson_1
// (x) ... (x) boson_N.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qom {

// Shared numerical tolerances.
template <typename Scalar>
struct Tol {
  static constexpr Scalar herm = Scalar(1e-9);
  static constexpr Scalar trace = Scalar(1e-9);
  static constexpr Scalar psd = Scalar(1e-8);
};

enum class ModeKind { Qubit, Boson };

struct ModeSpec {
  ModeKind kind;
  Eigen::Index dim;

  static ModeSpec qubit() { return {ModeKind::Qubit, 2}; }
  static ModeSpec boson(Eigen::Index n_fock) {
    if (n_fock < 2) throw std::invalid_argument("boson mode needs dim >= 2");
    return {ModeKind::Boson, n_fock};
  }
  friend bool operator==(const ModeSpec&, const ModeSpec&) = default;
};

struct TensorSpace {
  std::vector<ModeSpec> modes;
  Eigen::Index dim = 0;

  TensorSpace() = default;
  explicit TensorSpace(std::vector<ModeSpec> m) : modes(std::move(m)) {
    dim = 1;
    for (const auto& mode : modes) {
      if (mode.dim < 2 || (mode.kind == ModeKind::Qubit && mode.dim != 2))
        throw std::invalid_argument("invalid mode dimension");
      dim *= mode.dim;
    }
  }
  friend bool operator==(const TensorSpace&, const TensorSpace&) = default;

  Eigen::Index num_modes() const { return static_cast<Eigen::Index>(modes.size()); }

  // Flat index of a product basis label (mode 0 most significant).
  Eigen::Index flat_index(const std::vector<Eigen::Index>& labels) const {
    if (static_cast<Eigen::Index>(labels.size()) != num_modes())
      throw std::invalid_argument("label count does not match mode count");
    Eigen::Index idx = 0;
    for (Eigen::Index m = 0; m < num_modes(); ++m) {
      if (labels[m] < 0 || labels[m] >= modes[m].dim)
        throw std::out_of_range("basis label out of range");
      idx = idx * modes[m].dim + labels[m];
    }
    return idx;
  }
};

template <typename S>
using ComplexMatrix = Eigen::Matrix<std::complex<S>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using ComplexVector = Eigen::Matrix<std::complex<S>, Eigen::Dynamic, 1>;

template <typename S>
struct Operator {
  using Matrix = ComplexMatrix<S>;
  TensorSpace space;
  Matrix matrix;

  Operator() = default;
  Operator(TensorSpace sp, Matrix m) : space(std::move(sp)), matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != space.dim)
      throw std::invalid_argument("operator matrix does not match space dimension");
  }
  Operator adjoint() const { return Operator(space, matrix.adjoint()); }
};

template <typename S>
struct DensityOperator {
  using Matrix = ComplexMatrix<S>;
  TensorSpace space;
  Matrix matrix;

  DensityOperator() = default;
  DensityOperator(TensorSpace sp, Matrix m) : space(std::move(sp)), matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != space.dim)
      throw std::invalid_argument("density matrix does not match space dimension");
  }

  // Hermiticity / unit trace / positivity within the shared tolerances.
  void validate() const {
    if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > Tol<S>::herm)
      throw std::domain_error("density operator is not Hermitian");
    if (std::abs(matrix.trace().real() - S(1)) > Tol<S>::trace ||
        std::abs(matrix.trace().imag()) > Tol<S>::trace)
      throw std::domain_error("density operator trace is not 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -Tol<S>::psd)
      throw std::domain_error("density operator has a negative eigenvalue");
  }
};

// Dense Kronecker product.
template <typename S>
ComplexMatrix<S> kron(const ComplexMatrix<S>& a, const ComplexMatrix<S>& b) {
  ComplexMatrix<S> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Single-mode annihilation operator a[n-1,n] = sqrt(n).
template <typename S>
Operator<S> boson_ladder(const ModeSpec& spec) {
  if (spec.kind != ModeKind::Boson)
    throw std::invalid_argument("boson_ladder requires a boson mode");
  ComplexMatrix<S> m = ComplexMatrix<S>::Zero(spec.dim, spec.dim);
  for (Eigen::Index n = 1; n < spec.dim; ++n) m(n - 1, n) = std::sqrt(S(n));
  return Operator<S>(TensorSpace({spec}), m);
}

template <typename S>
struct QubitOps {
  Operator<S> sm, sp, sz, sx;  // lowering, raising, Pauli-z, Pauli-x
};

// Qubit basis: |g> = index 0, |e> = index 1; sigma^-|e> = |g>.
template <typename S>
QubitOps<S> qubit_ops() {
  TensorSpace sp({ModeSpec::qubit()});
  ComplexMatrix<S> sm = ComplexMatrix<S>::Zero(2, 2), sz = ComplexMatrix<S>::Zero(2, 2),
                   sx = ComplexMatrix<S>::Zero(2, 2);
  sm(0, 1) = S(1);
  sz(0, 0) = S(-1);
  sz(1, 1) = S(1);
  sx(0, 1) = sx(1, 0) = S(1);
  return {Operator<S>(sp, sm), Operator<S>(sp, sm.adjoint()), Operator<S>(sp, sz),
          Operator<S>(sp, sx)};
}

// Kronecker lift of a single-mode operator into a composite space.
template <typename S>
Operator<S> embed(const Operator<S>& op, const TensorSpace& space, Eigen::Index mode_index) {
  if (mode_index < 0 || mode_index >= space.num_modes())
    throw std::out_of_range("embed: mode index out of range");
  if (op.matrix.rows() != space.modes[mode_index].dim)
    throw std::invalid_argument("embed: operator dimension does not match mode");
  ComplexMatrix<S> acc = ComplexMatrix<S>::Identity(1, 1);
  for (Eigen::Index m = 0; m < space.num_modes(); ++m) {
    if (m == mode_index)
      acc = kron<S>(acc, op.matrix);
    else
      acc = kron<S>(acc, ComplexMatrix<S>::Identity(space.modes[m].dim, space.modes[m].dim));
  }
  return Operator<S>(space, std::move(acc));
}

// Product basis vector |l_0, l_1, ...>.
template <typename S>
ComplexVector<S> state_vector(const TensorSpace& space, const std::vector<Eigen::Index>& labels) {
  ComplexVector<S> v = ComplexVector<S>::Zero(space.dim);
  v(space.flat_index(labels)) = S(1);
  return v;
}

// Rank-1 projector onto a product basis vector.
template <typename S>
DensityOperator<S> basis_state(const TensorSpace& space, const std::vector<Eigen::Index>& labels) {
  ComplexVector<S> v = state_vector<S>(space, labels);
  return DensityOperator<S>(space, v * v.adjoint());
}

template <typename S>
DensityOperator<S> pure_state(const TensorSpace& space, const ComplexVector<S>& psi) {
  ComplexVector<S> v = psi / psi.norm();
  return DensityOperator<S>(space, v * v.adjoint());
}

// Reduced density operator on the kept modes (ascending index order).
template <typename S>
DensityOperator<S> partial_trace(const DensityOperator<S>& rho,
                                 const std::vector<Eigen::Index>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set must be non-empty");
  const TensorSpace& sp = rho.space;
  std::vector<bool> kept(sp.num_modes(), false);
  for (auto k : keep) {
    if (k < 0 || k >= sp.num_modes()) throw std::out_of_range("partial_trace: bad mode index");
    kept[k] = true;
  }
  std::vector<ModeSpec> kept_modes;
  for (Eigen::Index m = 0; m < sp.num_modes(); ++m)
    if (kept[m]) kept_modes.push_back(sp.modes[m]);
  TensorSpace out_space(kept_modes);

  ComplexMatrix<S> out = ComplexMatrix<S>::Zero(out_space.dim, out_space.dim);
  const Eigen::Index n = sp.num_modes();
  std::vector<Eigen::Index> row(n, 0), col(n, 0);
  // Iterate over all (row, col) pairs of the full matrix whose traced-out
  // labels coincide; accumulate into the reduced matrix.
  std::vector<Eigen::Index> dims(n);
  for (Eigen::Index m = 0; m < n; ++m) dims[m] = sp.modes[m].dim;
  for (Eigen::Index i = 0; i < sp.dim; ++i) {
    Eigen::Index rest = i;
    for (Eigen::Index m = n - 1; m >= 0; --m) {
      row[m] = rest % dims[m];
      rest /= dims[m];
    }
    for (Eigen::Index j = 0; j < sp.dim; ++j) {
      rest = j;
      for (Eigen::Index m = n - 1; m >= 0; --m) {
        col[m] = rest % dims[m];
        rest /= dims[m];
      }
      bool diag_on_traced = true;
      for (Eigen::Index m = 0; m < n; ++m)
        if (!kept[m] && row[m] != col[m]) {
          diag_on_traced = false;
          break;
        }
      if (!diag_on_traced) continue;
      Eigen::Index ri = 0, ci = 0;
      for (Eigen::Index m = 0; m < n; ++m)
        if (kept[m]) {
          ri = ri * dims[m] + row[m];
          ci = ci * dims[m] + col[m];
        }
      out(ri, ci) += rho.matrix(i, j);
    }
  }
  return DensityOperator<S>(out_space, std::move(out));
}

}  // namespace qom
