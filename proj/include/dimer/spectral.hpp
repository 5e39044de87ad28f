#pragma once

// Eigendecomposition of the Floquet map: rapidities, the periodic steady
// state and the quantum bifurcation projection onto S_z eigenstates.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dimer/propagation.hpp"

namespace dimer {

struct SpectrumResult {
    std::vector<cplx> rapidities;  // sorted by modulus, largest first
    MatrixC right_eigenvectors;    // column j pairs with rapidities[j]; empty if not requested
    std::vector<double> residuals; // ||P v - lambda v|| for unit v
    double map_norm = 0.0;         // Frobenius norm of P_F

    bool has_vectors() const { return right_eigenvectors.size() > 0; }
};

class EigenSolverError : public std::runtime_error {
public:
    EigenSolverError(const std::string& what, long index) : std::runtime_error(what), index_(index) {}
    // Offending eigenpair, or -1 when the backend does not report one.
    long index() const { return index_; }

private:
    long index_;
};

// Full dense non-Hermitian eigendecomposition. Throws EigenSolverError when
// the solver fails or an eigenpair residual exceeds 1e-7 * ||P_F||.
SpectrumResult eig_floquet(const FloquetMap& map, bool compute_vectors = true);

// Eigenvalues of an arbitrary square matrix sorted like eig_floquet.
std::vector<cplx> sorted_eigenvalues(const MatrixC& a);

struct SpectrumDiagnostics {
    double leading_defect = 0.0;      // |lambda_1 - 1|
    int count_near_one = 0;           // rapidities within `unique_radius` of 1
    double max_modulus = 0.0;
    double conjugation_defect = 0.0;  // max_j min_k |lambda_k - conj(lambda_j)|
    double max_residual = 0.0;
};

SpectrumDiagnostics diagnose_spectrum(const SpectrumResult& spec, double unique_radius = 1e-6);

// Leading eigenvector, phase-fixed by its trace, Hermitized and normalized.
DensityMatrix steady_state(const SpectrumResult& spec, const FockBasis& basis);

struct SubdominantMode {
    cplx lambda2;
    double gap_to_minus_one = 0.0;
};

SubdominantMode subdominant_mode(const SpectrumResult& spec);

struct QuantumBifurcationSlice {
    double UN = 0.0;                   // interaction in units of J, times N
    std::vector<double> sz_values;     // s_n = n/N - 1/2
    std::vector<double> populations;   // <n,N-n| rho_s(0) |n,N-n>
};

QuantumBifurcationSlice bifurcation_slice(const DensityMatrix& rho_s, const OperatorSet& ops,
                                          const ModelParams& params);

// Builds P_F (or reuses `map`), extracts rho_s(0) and projects it.
QuantumBifurcationSlice quantum_bifurcation_slice(const ModelParams& params, const StepControl& step,
                                                  int threads = 1,
                                                  const FloquetMap* map = nullptr);

}  // namespace dimer
