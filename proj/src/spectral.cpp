#include "dimer/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace dimer {

namespace {

std::vector<Eigen::Index> order_by_modulus(const VectorC& values) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double ma = std::abs(values(a));
        const double mb = std::abs(values(b));
        if (ma != mb) return ma > mb;
        if (values(a).real() != values(b).real()) return values(a).real() > values(b).real();
        return values(a).imag() > values(b).imag();
    });
    return idx;
}

}  // namespace

std::vector<cplx> sorted_eigenvalues(const MatrixC& a) {
    Eigen::ComplexEigenSolver<MatrixC> solver(a, false);
    if (solver.info() != Eigen::Success) {
        throw EigenSolverError("sorted_eigenvalues: eigensolver did not converge", -1);
    }
    const VectorC values = solver.eigenvalues();
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(values.size()));
    for (Eigen::Index i : order_by_modulus(values)) out.push_back(values(i));
    return out;
}

SpectrumResult eig_floquet(const FloquetMap& map, bool compute_vectors) {
    const MatrixC& P = map.matrix;
    Eigen::ComplexEigenSolver<MatrixC> solver(P, compute_vectors);
    if (solver.info() != Eigen::Success) {
        throw EigenSolverError("eig_floquet: complex Schur iteration did not converge", -1);
    }
    const VectorC values = solver.eigenvalues();
    const auto order = order_by_modulus(values);

    SpectrumResult out;
    out.map_norm = P.norm();
    out.rapidities.reserve(order.size());
    for (Eigen::Index i : order) out.rapidities.push_back(values(i));
    if (!compute_vectors) return out;

    const MatrixC& vecs = solver.eigenvectors();
    out.right_eigenvectors.resize(P.rows(), P.cols());
    out.residuals.reserve(order.size());
    const double bound = 1e-7 * out.map_norm;
    for (std::size_t j = 0; j < order.size(); ++j) {
        const Eigen::Index src = order[j];
        const VectorC v = vecs.col(src).normalized();
        out.right_eigenvectors.col(static_cast<Eigen::Index>(j)) = v;
        const double r = (P * v - values(src) * v).norm();
        out.residuals.push_back(r);
        if (!(r < bound)) {
            std::ostringstream msg;
            msg << "eig_floquet: eigenpair " << j << " residual " << r << " exceeds " << bound;
            throw EigenSolverError(msg.str(), static_cast<long>(j));
        }
    }
    return out;
}

SpectrumDiagnostics diagnose_spectrum(const SpectrumResult& spec, double unique_radius) {
    SpectrumDiagnostics diag;
    if (spec.rapidities.empty()) return diag;
    diag.leading_defect = std::abs(spec.rapidities.front() - 1.0);
    for (const cplx& l : spec.rapidities) {
        if (std::abs(l - 1.0) < unique_radius) ++diag.count_near_one;
        diag.max_modulus = std::max(diag.max_modulus, std::abs(l));
        double best = std::numeric_limits<double>::infinity();
        for (const cplx& m : spec.rapidities) best = std::min(best, std::abs(m - std::conj(l)));
        diag.conjugation_defect = std::max(diag.conjugation_defect, best);
    }
    for (double r : spec.residuals) diag.max_residual = std::max(diag.max_residual, r);
    return diag;
}

DensityMatrix steady_state(const SpectrumResult& spec, const FockBasis& basis) {
    if (spec.rapidities.empty() || !spec.has_vectors()) {
        throw std::invalid_argument("steady_state: spectrum has no eigenvectors");
    }
    const cplx lead = spec.rapidities.front();
    if (std::abs(lead - 1.0) > 1e-6) {
        std::ostringstream msg;
        msg << "steady_state: leading rapidity " << lead << " is not within 1e-6 of 1";
        throw std::runtime_error(msg.str());
    }
    const Eigen::Index d = basis.dim();
    if (spec.right_eigenvectors.rows() != d * d) {
        throw std::invalid_argument("steady_state: basis does not match the spectrum");
    }
    MatrixC x = spec.right_eigenvectors.col(0).reshaped(d, d);
    const cplx tr = x.trace();
    if (std::abs(tr) == 0.0) throw std::runtime_error("steady_state: leading eigenvector is traceless");
    // Strip the arbitrary eigenvector phase before Hermitizing; (X + X^+)/2 alone
    // would scale the state by cos(arg tr) and vanish for a purely imaginary trace.
    x *= std::conj(tr) / std::abs(tr);
    MatrixC rho = 0.5 * (x + x.adjoint());
    rho /= rho.trace().real();

    DensityMatrix out{basis, std::move(rho)};
    const double min_eig = out.min_eigenvalue();
    if (min_eig < -1e-6) {
        std::ostringstream msg;
        msg << "steady_state: eigenvalue " << min_eig << " below -1e-6 after Hermitization";
        throw std::runtime_error(msg.str());
    }
    return out;
}

SubdominantMode subdominant_mode(const SpectrumResult& spec) {
    if (spec.rapidities.size() < 2) {
        throw std::invalid_argument("subdominant_mode: fewer than two rapidities");
    }
    SubdominantMode mode;
    mode.lambda2 = spec.rapidities[1];
    mode.gap_to_minus_one = std::abs(mode.lambda2 + 1.0);
    return mode;
}

QuantumBifurcationSlice bifurcation_slice(const DensityMatrix& rho_s, const OperatorSet& ops,
                                          const ModelParams& params) {
    QuantumBifurcationSlice slice;
    slice.UN = params.UN();
    slice.sz_values = ops.sz_weights;
    const Eigen::Index d = rho_s.matrix.rows();
    slice.populations.resize(static_cast<std::size_t>(d));
    for (Eigen::Index n = 0; n < d; ++n) {
        slice.populations[static_cast<std::size_t>(n)] = rho_s.matrix(n, n).real();
    }
    return slice;
}

QuantumBifurcationSlice quantum_bifurcation_slice(const ModelParams& params, const StepControl& step,
                                                  int threads, const FloquetMap* map) {
    const auto ctx = PropagationContext::make(params, step);
    FloquetMap built;
    if (map == nullptr) {
        built = build_floquet_map(ctx, threads);
        map = &built;
    }
    const auto spec = eig_floquet(*map);
    const auto rho_s = steady_state(spec, ctx.ops.basis);
    return bifurcation_slice(rho_s, ctx.ops, params);
}

}  // namespace dimer
