#pragma once

// Two-site Bose-Hubbard dimer at fixed particle number: Fock basis,
// Hamiltonian pieces, jump operator, collective spin operators and the drive.

#include <cstdint>
#include <utility>
#include <vector>

#include "dimer/banded.hpp"
#include "dimer/types.hpp"

namespace dimer {

// Physical constants in units hbar = 1. `U` and `gamma` are per-particle
// values; use from_composite() to enter them as U*N and gamma*N.
struct ModelParams {
    int N = 1;
    double J = 1.0;
    double U = 0.0;
    double mu0 = 0.0;
    double mu1 = 0.0;
    double omega = 1.0;
    double gamma = 0.0;

    static ModelParams from_composite(int N, double J, double UN, double mu0, double mu1,
                                      double omega, double gammaN);

    double UN() const { return U * N; }
    double gammaN() const { return gamma * N; }
    double period() const { return kTwoPi / omega; }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(N) + 1; }

    // Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    bool operator==(const ModelParams&) const = default;
};

// States |n, N-n> for n = 0..N, n counting particles on site 1.
struct FockBasis {
    int N = 0;
    std::vector<std::pair<int, int>> states;

    Eigen::Index dim() const { return static_cast<Eigen::Index>(states.size()); }
    bool operator==(const FockBasis&) const = default;
};

FockBasis build_basis(int N);

struct Operator {
    FockBasis basis;
    MatrixC matrix;
    bool hermitian = false;
};

struct OperatorSet {
    FockBasis basis;
    Operator hop;    // -J (b1^+ b2 + b2^+ b1)
    Operator inter;  // U/2 sum_j n_j (n_j - 1)
    Operator tilt;   // n2 - n1
    Operator G;      // (b1^+ + b2^+)(b1 - b2)
    Operator GdG;    // G^+ G
    Operator Sx;
    Operator Sy;
    Operator Sz;
    std::vector<double> sz_weights;  // s_n = n/N - 1/2

    // Structured forms used by the propagators.
    BandedMatrix<cplx> hop_band;   // tridiagonal
    BandedMatrix<cplx> G_band;     // tridiagonal
    BandedMatrix<cplx> GdG_band;   // pentadiagonal
    VectorR inter_diag;
    VectorR tilt_diag;
};

OperatorSet build_operators(const ModelParams& params);

// eps(t) = mu0 + mu1 sin(omega t)
double drive_eps(double t, const ModelParams& params);

// Integral of eps from 0 to t.
double drive_phase(double t, const ModelParams& params);

Operator hamiltonian_at(double t, const OperatorSet& ops, const ModelParams& params);

// Amplitudes sqrt(C(N,n)) / 2^{N/2} of the symmetric condensate (b1^+ + b2^+)^N |vac>.
VectorC symmetric_condensate(int N);

}  // namespace dimer
