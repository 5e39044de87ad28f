#pragma once

// Lindblad propagation of the driven dimer and the one-period Floquet map.
//
// Vectorization convention everywhere: vec(X)[i + d*j] = X(i, j).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>

#include "dimer/model.hpp"

namespace dimer {

struct DensityMatrix {
    FockBasis basis;
    MatrixC matrix;

    double trace_real() const { return matrix.trace().real(); }
    double min_eigenvalue() const;
};

// (1/2) * sum of |eigenvalues| of the Hermitian part of a - b.
double trace_distance(const MatrixC& a, const MatrixC& b);

DensityMatrix pure_state(const FockBasis& basis, const VectorC& amplitudes);
DensityMatrix maximally_mixed(const FockBasis& basis);

struct StepControl {
    int steps_per_period = 2000;
    bool convergence_check = false;
    double convergence_tol = 1e-8;

    void validate() const;
    bool operator==(const StepControl&) const = default;
};

// Step-halving disagreement above StepControl::convergence_tol.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double defect)
        : std::runtime_error(what), defect_(defect) {}
    double defect() const { return defect_; }

private:
    double defect_;
};

// Everything a propagator needs; immutable once built.
struct PropagationContext {
    ModelParams params;
    OperatorSet ops;
    StepControl step;

    static PropagationContext make(const ModelParams& params, const StepControl& step = {});
};

// -i[H(t), rho] + gamma (2 G rho G^+ - {G^+ G, rho}); rho need not be Hermitian.
MatrixC apply_liouvillian(const MatrixC& rho, double t, const OperatorSet& ops,
                          const ModelParams& params);

using StepObserver = std::function<void(double t, const MatrixC& x)>;

// Evolves an arbitrary d x d matrix from t0 to t1 with the fixed-step scheme.
// The observer, if set, sees the state after every step.
MatrixC propagate_matrix(const MatrixC& x0, double t0, double t1, const PropagationContext& ctx,
                         const StepObserver& observer = {});

DensityMatrix propagate_state(const DensityMatrix& rho0, double t0, double t1,
                              const PropagationContext& ctx);

struct FloquetMap {
    FockBasis basis;
    MatrixC matrix;  // d^2 x d^2, acting on vec(rho)
    ModelParams params;
    StepControl step;
    std::uint64_t fingerprint = 0;

    Eigen::Index dim() const { return basis.dim(); }
};

std::uint64_t params_fingerprint(const ModelParams& params, const StepControl& step);

// Columns are propagated independently over [0, T]; `threads` only changes
// the schedule, never the result.
FloquetMap build_floquet_map(const PropagationContext& ctx, int threads = 1);

MatrixC apply_floquet(const FloquetMap& map, const MatrixC& x);

// max_k |(t P_F)_k - t_k| for the trace functional t.
double trace_preservation_defect(const FloquetMap& map);

// max |P_F(X^+) - P_F(X)^+| for the given X.
double hermiticity_preservation_defect(const FloquetMap& map, const MatrixC& x);

// Binary cache ("FLQM" format, little-endian).
class CacheMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void save_floquet_map(const std::filesystem::path& path, const FloquetMap& map);

// Reads a map and rejects it unless its stored parameters equal the expected ones.
FloquetMap load_floquet_map(const std::filesystem::path& path, const ModelParams& expected,
                            const StepControl& expected_step);

// Reads a map without checking what it was built for.
FloquetMap read_floquet_map(const std::filesystem::path& path);

}  // namespace dimer
