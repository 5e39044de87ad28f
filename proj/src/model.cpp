#include "dimer/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dimer {

ModelParams ModelParams::from_composite(int N, double J, double UN, double mu0, double mu1,
                                        double omega, double gammaN) {
    if (N < 1) throw std::invalid_argument("ModelParams: N must be >= 1, got " + std::to_string(N));
    ModelParams p;
    p.N = N;
    p.J = J;
    p.U = UN / N;
    p.mu0 = mu0;
    p.mu1 = mu1;
    p.omega = omega;
    p.gamma = gammaN / N;
    p.validate();
    return p;
}

void ModelParams::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("ModelParams: " + what); };
    if (N < 1) fail("N must be >= 1");
    if (!std::isfinite(J) || J < 0.0) fail("J must be >= 0");
    if (!std::isfinite(omega) || omega <= 0.0) fail("omega must be > 0");
    if (!std::isfinite(gamma) || gamma < 0.0) fail("gamma must be >= 0");
    if (!std::isfinite(mu1) || mu1 < 0.0) fail("mu1 must be >= 0");
    if (!std::isfinite(U) || !std::isfinite(mu0)) fail("U and mu0 must be finite");
}

FockBasis build_basis(int N) {
    if (N < 1) throw std::invalid_argument("build_basis: N must be >= 1, got " + std::to_string(N));
    FockBasis basis;
    basis.N = N;
    basis.states.reserve(static_cast<std::size_t>(N) + 1);
    for (int n = 0; n <= N; ++n) basis.states.emplace_back(n, N - n);
    return basis;
}

namespace {

Operator make_op(const FockBasis& basis, MatrixC m, bool hermitian) {
    return Operator{basis, std::move(m), hermitian};
}

}  // namespace

OperatorSet build_operators(const ModelParams& params) {
    params.validate();
    const int N = params.N;
    const Eigen::Index d = params.dim();
    const FockBasis basis = build_basis(N);

    // b1^+ b2 |n, N-n> = sqrt((n+1)(N-n)) |n+1, N-n-1>
    MatrixC raise = MatrixC::Zero(d, d);
    for (Eigen::Index n = 0; n < N; ++n) {
        raise(n + 1, n) = std::sqrt(static_cast<double>((n + 1) * (N - n)));
    }
    const MatrixC lower = raise.adjoint();  // b2^+ b1

    VectorR n1(d), n2(d);
    for (Eigen::Index n = 0; n < d; ++n) {
        n1(n) = static_cast<double>(n);
        n2(n) = static_cast<double>(N - n);
    }

    OperatorSet ops;
    ops.basis = basis;
    ops.hop = make_op(basis, -params.J * (raise + lower), true);

    ops.inter_diag = 0.5 * params.U *
                     (n1.array() * (n1.array() - 1.0) + n2.array() * (n2.array() - 1.0)).matrix();
    ops.inter = make_op(basis, ops.inter_diag.cast<cplx>().asDiagonal(), true);

    ops.tilt_diag = n2 - n1;
    ops.tilt = make_op(basis, ops.tilt_diag.cast<cplx>().asDiagonal(), true);

    // (b1^+ + b2^+)(b1 - b2) = n1 - n2 + b2^+ b1 - b1^+ b2
    MatrixC g = (n1 - n2).cast<cplx>().asDiagonal();
    g += lower - raise;
    ops.G = make_op(basis, g, false);
    ops.GdG = make_op(basis, g.adjoint() * g, true);

    const double inv2N = 1.0 / (2.0 * N);
    ops.Sx = make_op(basis, inv2N * (raise + lower), true);
    ops.Sy = make_op(basis, cplx(0.0, -inv2N) * (raise - lower), true);
    ops.Sz = make_op(basis, (inv2N * (n1 - n2)).cast<cplx>().asDiagonal(), true);

    ops.sz_weights.resize(static_cast<std::size_t>(d));
    for (Eigen::Index n = 0; n < d; ++n) {
        ops.sz_weights[static_cast<std::size_t>(n)] = static_cast<double>(n) / N - 0.5;
    }

    ops.hop_band = BandedMatrix<cplx>::from_dense(ops.hop.matrix, 1);
    ops.G_band = BandedMatrix<cplx>::from_dense(ops.G.matrix, 1);
    ops.GdG_band = BandedMatrix<cplx>::from_dense(ops.GdG.matrix, 2, 1e-9);
    return ops;
}

double drive_eps(double t, const ModelParams& params) {
    // Reduce the phase modulo 2 pi so eps(t + T) == eps(t) up to rounding of t.
    const double phase = std::fmod(params.omega * t, kTwoPi);
    return params.mu0 + params.mu1 * std::sin(phase);
}

double drive_phase(double t, const ModelParams& params) {
    return params.mu0 * t - (params.mu1 / params.omega) * (std::cos(params.omega * t) - 1.0);
}

Operator hamiltonian_at(double t, const OperatorSet& ops, const ModelParams& params) {
    if (ops.basis.N != params.N) {
        throw std::invalid_argument("hamiltonian_at: operator basis does not match params.N");
    }
    MatrixC h = ops.hop.matrix + ops.inter.matrix + drive_eps(t, params) * ops.tilt.matrix;
    return Operator{ops.basis, std::move(h), true};
}

VectorC symmetric_condensate(int N) {
    if (N < 1) throw std::invalid_argument("symmetric_condensate: N must be >= 1");
    VectorC v(N + 1);
    const double log_norm = -0.5 * N * std::log(2.0);
    for (int n = 0; n <= N; ++n) {
        const double log_binom = std::lgamma(N + 1.0) - std::lgamma(n + 1.0) - std::lgamma(N - n + 1.0);
        v(n) = std::exp(0.5 * log_binom + log_norm);
    }
    return v / v.norm();
}

}  // namespace dimer
