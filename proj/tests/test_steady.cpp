#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qom/experiments.hpp"
#include "qom/steady_state.hpp"

using namespace qom;
using Mat = ComplexMatrix<double>;
using Vec = ComplexVector<double>;

TEST_CASE("qubit decay steady state is the ground state") {
  TensorSpace sp({ModeSpec::qubit()});
  auto q = qubit_ops<double>();
  LindbladModel<double> m{sp, Operator<double>(sp, Mat::Zero(2, 2)), {{0.4, q.sm}}};
  auto L = compile(m);
  auto ns = null_space(L);
  REQUIRE(ns.right_vectors.size() == 1);
  CHECK(ns.residuals[0] < 1e-10);
  auto rho = steady_density(ns);
  rho.validate();
  CHECK(rho.matrix(0, 0).real() == doctest::Approx(1.0));
}

TEST_CASE("degenerate engineered jump yields a four-dimensional kernel") {
  TensorSpace sp({ModeSpec::qubit(), ModeSpec::boson(3)});
  LindbladModel<double> m{sp, Operator<double>(sp, Mat::Zero(sp.dim, sp.dim)),
                          {build_L0<double>(1.0, 1.0, sp)}};
  auto ns = null_space(compile(m));
  CHECK(ns.right_vectors.size() == 4);
  CHECK(ns.left_vectors.size() == 4);
  CHECK_THROWS(steady_density(ns));                 // not unique
  CHECK_THROWS(null_space(compile(m), 1e-10, 2));  // exceeds max_dim
}

TEST_CASE("sparse bordered solve agrees with the dense path") {
  EngineeredParams<double> p;
  p.zeta = 0.4;
  p.C_q = 50;
  p.C_m = 50;
  p.gamma_aux = 1.0;
  p.n_fock = 6;
  auto L = compile(engineered_model(p));
  auto dense = steady_density(null_space(L));
  auto sparse = steady_unique_sparse(L);
  CHECK((dense.matrix - sparse.matrix).cwiseAbs().maxCoeff() < 1e-9);
  auto dispatched = steady_state(L);
  dispatched.validate();
}

TEST_CASE("overlap fidelity basics") {
  TensorSpace sp({ModeSpec::qubit()});
  auto g = basis_state<double>(sp, {0});
  auto e = basis_state<double>(sp, {1});
  CHECK(fidelity(g, g) == doctest::Approx(1.0));
  CHECK(fidelity(g, e) == doctest::Approx(0.0));
  Mat mixed = 0.25 * e.matrix + 0.75 * g.matrix;
  CHECK(fidelity(DensityOperator<double>(sp, mixed), g) == doctest::Approx(0.75));
}

TEST_CASE("superposition weight reads the (0,1) coherence") {
  auto target = target_rho_A_measured<double>(4);
  CHECK(superposition_weight(target) == doctest::Approx(1.0));
  auto vacuum = fock_target<double>(4, 0);
  CHECK(superposition_weight(vacuum) == doctest::Approx(0.0));
  TensorSpace sp({ModeSpec::boson(4)});
  Mat mix = 0.3 * target.matrix + 0.7 * vacuum.matrix;
  CHECK(superposition_weight(DensityOperator<double>(sp, mix)) == doctest::Approx(0.3));
}

TEST_CASE("measurement specs validate orthonormality") {
  auto pm = MeasurementSpec<double>::plus_minus(0.25);
  CHECK_NOTHROW(pm.validate());
  auto ge = MeasurementSpec<double>::ground_excited();
  CHECK_NOTHROW(ge.validate());
  MeasurementSpec<double> bad = pm;
  bad.basis1 = bad.basis0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("postselection probabilities are complete and states renormalized") {
  TensorSpace sp({ModeSpec::qubit(), ModeSpec::boson(3)});
  // (|g,0> + |e,1>)/sqrt(2)
  Vec psi = Vec::Zero(sp.dim);
  psi(sp.flat_index({0, 0})) = psi(sp.flat_index({1, 1})) = 1.0;
  auto rho = pure_state<double>(sp, psi);
  auto keep_g = MeasurementSpec<double>::ground_excited(0);
  auto keep_e = MeasurementSpec<double>::ground_excited(1);
  auto [mg, pg] = measure_postselect(rho, keep_g);
  auto [me, pe] = measure_postselect(rho, keep_e);
  CHECK(pg + pe == doctest::Approx(1.0));
  CHECK(pg == doctest::Approx(0.5));
  mg.validate();
  me.validate();
  CHECK(mg.matrix(0, 0).real() == doctest::Approx(1.0));  // |0>
  CHECK(me.matrix(1, 1).real() == doctest::Approx(1.0));  // |1>

  auto zero_prob = basis_state<double>(sp, {0, 2});
  MeasurementSpec<double> keep_exc = MeasurementSpec<double>::ground_excited(1);
  CHECK_THROWS(measure_postselect(zero_prob, keep_exc));
}

TEST_CASE("balanced measurement extracts the superposition from the dark state") {
  // postselecting |+>_q on rho_A(zeta) leaves exactly (|0>+|1>)/sqrt(2)
  double zeta = 0.25;
  TensorSpace sp({ModeSpec::qubit(), ModeSpec::boson(6)});
  auto rhoA = target_rho_A(sp, zeta);
  auto [m, p] = measure_postselect(rhoA, MeasurementSpec<double>::plus_minus(zeta));
  CHECK(superposition_weight(m) == doctest::Approx(1.0));
  CHECK(fidelity(m, target_rho_A_measured<double>(6)) == doctest::Approx(1.0));
}

TEST_CASE("sweep runs points in parallel and reports failures per row") {
  SweepSpec<double> spec;
  spec.grid = {0.2, 0.3, 0.4, 1.5};  // last zeta is invalid (> 1)
  spec.n_fock = 5;
  spec.workers = 2;
  spec.check_truncation = false;
  spec.model = [](double zeta, Eigen::Index nf) {
    EngineeredParams<double> p;
    p.zeta = zeta;
    p.C_q = 100;
    p.C_m = 100;
    p.gamma_aux = 1.0;
    p.n_fock = nf;
    return engineered_model(p);
  };
  spec.evaluate = [](const DensityOperator<double>& rho, double zeta, Eigen::Index) {
    return std::vector<double>{fidelity(rho, target_rho_A(rho.space, zeta))};
  };
  auto rows = sweep(spec);
  REQUIRE(rows.size() == 4);
  for (int i = 0; i < 3; ++i) {
    CHECK_FALSE(rows[i].failed);
    CHECK(rows[i].fidelities[0] > 0.5);
    CHECK(rows[i].residual < 1e-8);
    CHECK(rows[i].null_dim == 1);
  }
  CHECK(rows[3].failed);
  CHECK(!rows[3].error.empty());
}

TEST_CASE("truncation flag trips when the cutoff matters") {
  SweepSpec<double> spec;
  spec.grid = {1.0};
  spec.n_fock = 2;  // far too small at zeta = 1
  spec.workers = 1;
  spec.check_truncation = true;
  spec.model = [](double zeta, Eigen::Index nf) {
    EngineeredParams<double> p;
    p.zeta = zeta;
    p.C_m = 5;  // strong localization noise pushes population up the ladder
    p.n_fock = nf;
    return engineered_model(p);
  };
  spec.evaluate = [](const DensityOperator<double>& rho, double zeta, Eigen::Index) {
    return std::vector<double>{fidelity(rho, target_rho_A(rho.space, zeta))};
  };
  auto rows = sweep(spec);
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].failed);
  CHECK(rows[0].truncation_flag);
}
