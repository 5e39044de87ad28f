#pragma once

// Independent reference constructions used only by the tests.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "dimer/model.hpp"
#include "dimer/propagation.hpp"

namespace oracle {

using dimer::cplx;
using dimer::MatrixC;
using dimer::VectorC;

inline double binomial(int n, int k) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

// Two-mode ladder algebra on the truncated product space (0..N per mode),
// index a*(N+1) + b for |a, b>.
struct Ladder {
    int N;
    MatrixC b1, b2;

    explicit Ladder(int N_) : N(N_) {
        const int m = N + 1;
        MatrixC a = MatrixC::Zero(m, m);
        for (int k = 1; k < m; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
        const MatrixC id = MatrixC::Identity(m, m);
        b1 = Eigen::kroneckerProduct(a, id).eval();
        b2 = Eigen::kroneckerProduct(id, a).eval();
    }

    // Restriction of a number-conserving operator to the fixed-N sector,
    // in the order |n, N-n>, n = 0..N.
    MatrixC restrict(const MatrixC& op) const {
        const int m = N + 1;
        MatrixC out(m, m);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) out(i, j) = op(i * m + (N - i), j * m + (N - j));
        }
        return out;
    }
};

// -i(I x H - H^T x I) + gamma (2 conj(G) x G - I x G^+G - (G^+G)^T x I), column stacking.
inline MatrixC kron_liouvillian(const dimer::OperatorSet& ops, const dimer::ModelParams& p, double t) {
    const MatrixC H = dimer::hamiltonian_at(t, ops, p).matrix;
    const MatrixC& G = ops.G.matrix;
    const MatrixC GdG = G.adjoint() * G;
    const Eigen::Index d = H.rows();
    const MatrixC I = MatrixC::Identity(d, d);
    MatrixC L = cplx(0, -1) * (Eigen::kroneckerProduct(I, H).eval() - Eigen::kroneckerProduct(H.transpose(), I).eval());
    L += p.gamma * (2.0 * Eigen::kroneckerProduct(G.conjugate(), G).eval() - Eigen::kroneckerProduct(I, GdG).eval() -
                    Eigen::kroneckerProduct(GdG.transpose(), I).eval());
    return L;
}

// prod_k exp(L(t_k) dt) with midpoint samples t_k = (k + 1/2) dt.
inline MatrixC piecewise_floquet(const dimer::ModelParams& p, int slices) {
    const auto ops = dimer::build_operators(p);
    const double dt = p.period() / slices;
    const Eigen::Index d2 = ops.basis.dim() * ops.basis.dim();
    MatrixC P = MatrixC::Identity(d2, d2);
    for (int k = 0; k < slices; ++k) {
        const MatrixC step = (kron_liouvillian(ops, p, (k + 0.5) * dt) * dt).exp();
        P = (step * P).eval();
    }
    return P;
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline MatrixC random_complex(Eigen::Index d, std::mt19937_64& gen) {
    std::normal_distribution<double> nd;
    MatrixC a(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(nd(gen), nd(gen));
    }
    return a;
}

inline MatrixC random_hermitian(Eigen::Index d, std::mt19937_64& gen) {
    const MatrixC a = random_complex(d, gen);
    return 0.5 * (a + a.adjoint());
}

// Random density matrix A A^+ / tr.
inline MatrixC random_density(Eigen::Index d, std::mt19937_64& gen) {
    const MatrixC a = random_complex(d, gen);
    const MatrixC rho = a * a.adjoint();
    return rho / rho.trace().real();
}

// Largest distance in a greedy nearest-neighbour pairing of two eigenvalue lists.
inline double matched_distance(const std::vector<dimer::cplx>& a, std::vector<dimer::cplx> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (const auto& x : a) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < b.size(); ++k) {
            if (std::abs(b[k] - x) < std::abs(b[best] - x)) best = k;
        }
        worst = std::max(worst, std::abs(b[best] - x));
        b.erase(b.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return worst;
}

}  // namespace oracle
