#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "dimer/propagation.hpp"
#include "../support/oracles.hpp"

using namespace dimer;

namespace {

ModelParams reference(int N) { return ModelParams::from_composite(N, 1.0, 0.2, 1.0, 3.4, 1.0, 0.1); }

ModelParams dark(int N) { return ModelParams::from_composite(N, 1.0, 0.0, 0.0, 0.0, 1.0, 0.1); }

VectorC vec(const MatrixC& x) { return x.reshaped(); }

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "dimer_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("Liouvillian matches the Kronecker superoperator") {
    auto gen = oracle::rng(11);
    for (int N = 1; N <= 3; ++N) {
        CAPTURE(N);
        const auto p = reference(N);
        const auto ops = build_operators(p);
        for (double t : {0.0, 1.1, 4.9}) {
            const MatrixC L = oracle::kron_liouvillian(ops, p, t);
            const MatrixC x = oracle::random_complex(p.dim(), gen);
            const VectorC expect = L * vec(x);
            CHECK(max_abs(vec(apply_liouvillian(x, t, ops, p)) - expect) < 1e-12);
        }
    }
}

TEST_CASE("Liouvillian annihilates the trace and is linear") {
    auto gen = oracle::rng(12);
    std::uniform_real_distribution<double> ut(0.0, 20.0);
    const auto p = reference(10);
    const auto ops = build_operators(p);
    const Eigen::Index d = p.dim();
    CHECK(std::abs(apply_liouvillian(MatrixC::Identity(d, d) / double(d), 0.7, ops, p).trace()) < 1e-12);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const MatrixC rho = oracle::random_hermitian(d, gen);
        worst = std::max(worst, std::abs(apply_liouvillian(rho, ut(gen), ops, p).trace()));
    }
    CHECK(worst < 1e-12);

    const MatrixC a = oracle::random_complex(d, gen), b = oracle::random_complex(d, gen);
    const cplx alpha(0.3, -1.2), beta(-2.0, 0.5);
    const double t = 2.2;
    const MatrixC lhs = apply_liouvillian(alpha * a + beta * b, t, ops, p);
    const MatrixC rhs = alpha * apply_liouvillian(a, t, ops, p) + beta * apply_liouvillian(b, t, ops, p);
    CHECK(max_abs(lhs - rhs) < 1e-12 * (1.0 + max_abs(rhs)));

    CHECK_THROWS_AS(apply_liouvillian(MatrixC::Zero(d + 1, d + 1), 0.0, ops, p), std::invalid_argument);
}

TEST_CASE("Hamiltonian part maps Hermitian to Hermitian") {
    auto gen = oracle::rng(13);
    auto p = reference(6);
    p.gamma = 0.0;
    const auto ops = build_operators(p);
    const MatrixC rho = oracle::random_hermitian(p.dim(), gen);
    CHECK(hermiticity_defect(apply_liouvillian(rho, 0.9, ops, p)) < 1e-12);
}

TEST_CASE("state propagation basics") {
    const auto p = reference(6);
    const auto ctx = PropagationContext::make(p);
    auto gen = oracle::rng(14);
    const DensityMatrix rho0{ctx.ops.basis, oracle::random_density(p.dim(), gen)};

    CHECK(max_abs(propagate_state(rho0, 1.3, 1.3, ctx).matrix - rho0.matrix) == 0.0);
    CHECK_THROWS_AS(propagate_state(rho0, 1.0, 0.5, ctx), std::invalid_argument);

    const double T = p.period();
    const auto one = propagate_state(rho0, 0.0, T, ctx);
    CHECK(std::abs(one.trace_real() - 1.0) < 1e-9);
    CHECK(hermiticity_defect(one.matrix) < 1e-10);

    // Absolute time, not elapsed time, enters the drive.
    const auto half = propagate_state(propagate_state(rho0, 0.0, T / 2, ctx), T / 2, T, ctx);
    CHECK(max_abs(half.matrix - one.matrix) < 1e-8);
}

TEST_CASE("dark state is stationary without drive and interaction") {
    for (int N : {1, 4, 9}) {
        CAPTURE(N);
        const auto p = dark(N);
        const auto ctx = PropagationContext::make(p);
        const auto rho0 = pure_state(ctx.ops.basis, symmetric_condensate(N));
        const auto rho1 = propagate_state(rho0, 0.0, 2.5 * p.period(), ctx);
        CHECK(max_abs(rho1.matrix - rho0.matrix) < 1e-8);
    }
}

TEST_CASE("unitary limit conserves purity") {
    auto p = reference(4);
    p.gamma = 0.0;
    const auto ctx = PropagationContext::make(p);
    VectorC psi = VectorC::Zero(p.dim());
    psi(2) = 1.0;
    const auto rho = propagate_state(pure_state(ctx.ops.basis, psi), 0.0, p.period(), ctx);
    CHECK(std::abs((rho.matrix * rho.matrix).trace().real() - 1.0) < 1e-8);
}

TEST_CASE("step control validation and step-halving check") {
    StepControl s;
    s.steps_per_period = 99;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    const auto p = reference(5);
    StepControl strict;
    strict.steps_per_period = 100;
    strict.convergence_check = true;
    strict.convergence_tol = 1e-15;
    const auto ctx = PropagationContext::make(p, strict);
    const auto rho0 = maximally_mixed(ctx.ops.basis);
    try {
        (void)propagate_state(rho0, 0.0, p.period(), ctx);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
        CHECK(e.defect() > 1e-15);
    }
    strict.convergence_tol = 1e-4;
    CHECK_NOTHROW((void)propagate_state(rho0, 0.0, p.period(), PropagationContext::make(p, strict)));
}

TEST_CASE("two-level unitary Floquet map equals conj(U) x U") {
    ModelParams p;
    p.N = 1;
    p.J = 1.0;
    p.mu0 = 0.7;
    p.omega = 1.3;
    const auto ctx = PropagationContext::make(p);
    const auto map = build_floquet_map(ctx);
    const MatrixC H = hamiltonian_at(0.0, ctx.ops, p).matrix;
    const MatrixC U = (cplx(0.0, -p.period()) * H).exp();
    const MatrixC expect = Eigen::kroneckerProduct(U.conjugate(), U).eval();
    CHECK(max_abs(map.matrix - expect) < 1e-7);
}

TEST_CASE("Floquet map columns reproduce propagated matrix units") {
    const auto p = reference(3);
    const auto ctx = PropagationContext::make(p);
    const auto map = build_floquet_map(ctx, 2);
    const Eigen::Index d = p.dim();
    for (Eigen::Index k = 0; k < d * d; ++k) {
        MatrixC e = MatrixC::Zero(d, d);
        e(k % d, k / d) = 1.0;
        const MatrixC x = propagate_matrix(e, 0.0, p.period(), ctx);
        CHECK(max_abs(map.matrix.col(k) - vec(x)) < 1e-8);
    }
    CHECK(map.fingerprint == params_fingerprint(p, ctx.step));
}

TEST_CASE("Floquet map against the piecewise-exponential oracle (N=4)") {
    const auto p = reference(4);
    const auto map = build_floquet_map(PropagationContext::make(p));
    CHECK(max_abs(map.matrix - oracle::piecewise_floquet(p, 10000)) < 1e-6);
}

TEST_CASE("Floquet map invariants and application") {
    const auto p = reference(6);
    const auto ctx = PropagationContext::make(p);
    const auto one = build_floquet_map(ctx, 1);
    const auto many = build_floquet_map(ctx, 3);
    CHECK(max_abs(one.matrix - many.matrix) == 0.0);  // schedule independent, bit for bit

    CHECK(trace_preservation_defect(one) < 1e-8);
    auto gen = oracle::rng(15);
    CHECK(hermiticity_preservation_defect(one, oracle::random_hermitian(p.dim(), gen)) < 1e-8);

    const Eigen::Index d = p.dim();
    CHECK(max_abs(apply_floquet(one, MatrixC::Zero(d, d))) == 0.0);
    const MatrixC x = oracle::random_complex(d, gen);
    CHECK(std::abs(apply_floquet(one, x).trace() - x.trace()) < 1e-8);
    CHECK_THROWS_AS(apply_floquet(one, MatrixC::Zero(d + 1, d + 1)), std::invalid_argument);
}

TEST_CASE("step doubling changes the N=10 map by less than 1e-8") {
    const auto p = reference(10);
    StepControl fine;
    fine.steps_per_period = 4000;
    const auto a = build_floquet_map(PropagationContext::make(p));
    const auto b = build_floquet_map(PropagationContext::make(p, fine));
    CHECK(max_abs(a.matrix - b.matrix) < 1e-8);
}

TEST_CASE("trace distance") {
    const auto basis = build_basis(3);
    VectorC a = VectorC::Zero(4), b = VectorC::Zero(4);
    a(0) = 1.0;
    b(3) = 1.0;
    CHECK(trace_distance(pure_state(basis, a).matrix, pure_state(basis, b).matrix) == doctest::Approx(1.0));
    CHECK(trace_distance(pure_state(basis, a).matrix, pure_state(basis, a).matrix) < 1e-15);
}

TEST_CASE("cache file round trip is bit exact and checks parameters") {
    const auto p = reference(3);
    const auto ctx = PropagationContext::make(p);
    const auto map = build_floquet_map(ctx);
    const auto path = scratch("roundtrip.bin");
    save_floquet_map(path, map);
    CHECK(std::filesystem::file_size(path) == 4 + 4 + 4 + 4 + 8 * 8 + 16 * 256);

    const auto back = load_floquet_map(path, p, ctx.step);
    CHECK(back.matrix.rows() == map.matrix.rows());
    CHECK(std::memcmp(back.matrix.data(), map.matrix.data(), sizeof(cplx) * map.matrix.size()) == 0);
    CHECK(back.params == p);
    CHECK(back.fingerprint == map.fingerprint);

    auto other = p;
    other.U *= 1.0 + 1e-15;
    CHECK_THROWS_AS(load_floquet_map(path, other, ctx.step), CacheMismatchError);
    StepControl steps;
    steps.steps_per_period = 3000;
    CHECK_THROWS_AS(load_floquet_map(path, p, steps), CacheMismatchError);

    const auto bad = scratch("bad.bin");
    std::ofstream(bad, std::ios::binary) << "NOPE and then some";
    CHECK_THROWS((void)read_floquet_map(bad));
}
