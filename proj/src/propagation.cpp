#include "dimer/propagation.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dimer/parallel.hpp"

namespace dimer {

double DensityMatrix::min_eigenvalue() const {
    const MatrixC herm = 0.5 * (matrix + matrix.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixC> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double trace_distance(const MatrixC& a, const MatrixC& b) {
    const MatrixC diff = a - b;
    const MatrixC herm = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixC> es(herm, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

DensityMatrix pure_state(const FockBasis& basis, const VectorC& amplitudes) {
    if (amplitudes.size() != basis.dim()) {
        throw std::invalid_argument("pure_state: amplitude vector does not match basis");
    }
    const VectorC v = amplitudes / amplitudes.norm();
    return DensityMatrix{basis, v * v.adjoint()};
}

DensityMatrix maximally_mixed(const FockBasis& basis) {
    const Eigen::Index d = basis.dim();
    return DensityMatrix{basis, MatrixC::Identity(d, d) / static_cast<double>(d)};
}

void StepControl::validate() const {
    if (steps_per_period < 100) {
        throw std::invalid_argument("StepControl: steps_per_period must be >= 100");
    }
    if (!(convergence_tol > 0.0)) {
        throw std::invalid_argument("StepControl: convergence_tol must be > 0");
    }
}

PropagationContext PropagationContext::make(const ModelParams& params, const StepControl& step) {
    params.validate();
    step.validate();
    return PropagationContext{params, build_operators(params), step};
}

MatrixC apply_liouvillian(const MatrixC& rho, double t, const OperatorSet& ops,
                          const ModelParams& params) {
    const Eigen::Index d = ops.basis.dim();
    if (rho.rows() != d || rho.cols() != d) {
        throw std::invalid_argument("apply_liouvillian: rho must be " + std::to_string(d) + "x" +
                                    std::to_string(d));
    }
    if (ops.basis.N != params.N) {
        throw std::invalid_argument("apply_liouvillian: operator basis does not match params.N");
    }
    // L(rho) = K rho + rho K^+ + 2 gamma G rho G^+, K = -i H(t) - gamma G^+ G
    BandedMatrix<cplx> K(d, 2);
    K.add_scaled(ops.hop_band, cplx(0.0, -1.0));
    K.add_scaled(ops.GdG_band, cplx(-params.gamma, 0.0));
    const double eps = drive_eps(t, params);
    K.diag(0) += cplx(0.0, -1.0) * (ops.inter_diag + eps * ops.tilt_diag).cast<cplx>();

    MatrixC out = MatrixC::Zero(d, d);
    banded_left_multiply_add(K, rho, out);
    banded_right_multiply_add(rho, K.adjoint(), out);
    if (params.gamma != 0.0) {
        MatrixC g_rho = MatrixC::Zero(d, d);
        banded_left_multiply_add(ops.G_band, rho, g_rho);
        banded_right_multiply_add(g_rho, ops.G_band.adjoint(), out, cplx(2.0 * params.gamma, 0.0));
    }
    return out;
}

namespace {

// Fourth-order integrating-factor stepper. The diagonal part of H(t)
// (interaction + eps(t) tilt) is integrated exactly over each step; classical
// RK4 handles tunneling and dissipation in that rotating frame.
class LindbladStepper {
public:
    explicit LindbladStepper(const PropagationContext& ctx)
        : ctx_(ctx), d_(ctx.ops.basis.dim()), K_(d_, 2) {
        K_.add_scaled(ctx.ops.hop_band, cplx(0.0, -1.0));
        K_.add_scaled(ctx.ops.GdG_band, cplx(-ctx.params.gamma, 0.0));
        K_adj_ = K_.adjoint();
        G_adj_ = ctx.ops.G_band.adjoint();
        two_gamma_ = 2.0 * ctx.params.gamma;
        for (MatrixC* m : {&y_, &k_, &acc_, &x_, &gx_}) m->resize(d_, d_);
        half_.resize(d_);
        full_.resize(d_);
    }

    void step(MatrixC& rho, double t, double h) {
        phases(t, 0.5 * h, half_);
        phases(t, h, full_);

        acc_ = rho;
        rhs(nullptr, rho, k_);
        acc_ += (h / 6.0) * k_;
        y_ = rho + (0.5 * h) * k_;
        rhs(&half_, y_, k_);
        acc_ += (h / 3.0) * k_;
        y_ = rho + (0.5 * h) * k_;
        rhs(&half_, y_, k_);
        acc_ += (h / 3.0) * k_;
        y_ = rho + h * k_;
        rhs(&full_, y_, k_);
        acc_ += (h / 6.0) * k_;
        rho.noalias() = full_.asDiagonal() * acc_ * full_.conjugate().asDiagonal();
    }

private:
    // e_n = exp(-i phi_n), phi_n the diagonal phase accumulated over [t, t + dt].
    void phases(double t, double dt, VectorC& e) const {
        const auto& p = ctx_.params;
        // Theta(t + dt) - Theta(t) without cancellation at large t.
        const double dtheta =
            p.mu0 * dt + (2.0 * p.mu1 / p.omega) * std::sin(p.omega * (t + 0.5 * dt)) *
                             std::sin(0.5 * p.omega * dt);
        for (Eigen::Index n = 0; n < d_; ++n) {
            const double phi = ctx_.ops.inter_diag(n) * dt + dtheta * ctx_.ops.tilt_diag(n);
            e(n) = cplx(std::cos(phi), -std::sin(phi));
        }
    }

    // out = conj(P) o L_rest(P o y), P_ij = e_i conj(e_j); identity frame when e is null.
    void rhs(const VectorC* e, const MatrixC& y, MatrixC& out) {
        const MatrixC* x = &y;
        if (e != nullptr) {
            x_.noalias() = e->asDiagonal() * y * e->conjugate().asDiagonal();
            x = &x_;
        }
        out.setZero();
        banded_left_multiply_add(K_, *x, out);
        banded_right_multiply_add(*x, K_adj_, out);
        if (two_gamma_ != 0.0) {
            gx_.setZero();
            banded_left_multiply_add(ctx_.ops.G_band, *x, gx_);
            banded_right_multiply_add(gx_, G_adj_, out, cplx(two_gamma_, 0.0));
        }
        if (e != nullptr) {
            out = e->conjugate().asDiagonal() * out * e->asDiagonal();
        }
    }

    const PropagationContext& ctx_;
    Eigen::Index d_;
    BandedMatrix<cplx> K_;
    BandedMatrix<cplx> K_adj_;
    BandedMatrix<cplx> G_adj_;
    double two_gamma_ = 0.0;
    MatrixC y_, k_, acc_, x_, gx_;
    VectorC half_, full_;
};

long long step_count(double t0, double t1, const PropagationContext& ctx, int multiplier) {
    const double h_nominal = ctx.params.period() / (ctx.step.steps_per_period * multiplier);
    const double ratio = (t1 - t0) / h_nominal;
    return std::max(1LL, std::llround(std::ceil(ratio - 1e-9)));
}

MatrixC integrate(const MatrixC& x0, double t0, double t1, const PropagationContext& ctx,
                  int multiplier, const StepObserver& observer) {
    MatrixC x = x0;
    if (t1 == t0) return x;
    const long long n = step_count(t0, t1, ctx, multiplier);
    const double h = (t1 - t0) / static_cast<double>(n);
    LindbladStepper stepper(ctx);
    for (long long s = 0; s < n; ++s) {
        const double t = t0 + static_cast<double>(s) * h;
        stepper.step(x, t, h);
        if (observer) observer(t0 + static_cast<double>(s + 1) * h, x);
    }
    return x;
}

}  // namespace

MatrixC propagate_matrix(const MatrixC& x0, double t0, double t1, const PropagationContext& ctx,
                         const StepObserver& observer) {
    const Eigen::Index d = ctx.ops.basis.dim();
    if (x0.rows() != d || x0.cols() != d) {
        throw std::invalid_argument("propagate_matrix: dimension mismatch");
    }
    if (t1 < t0) throw std::invalid_argument("propagate_matrix: t1 must be >= t0");
    MatrixC x = integrate(x0, t0, t1, ctx, 1, observer);
    if (ctx.step.convergence_check && t1 > t0) {
        const MatrixC fine = integrate(x0, t0, t1, ctx, 2, {});
        const double defect = max_abs(fine - x);
        if (defect > ctx.step.convergence_tol) {
            std::ostringstream msg;
            msg << "propagate: step-halving defect " << defect << " exceeds tolerance "
                << ctx.step.convergence_tol;
            throw ConvergenceError(msg.str(), defect);
        }
    }
    return x;
}

DensityMatrix propagate_state(const DensityMatrix& rho0, double t0, double t1,
                              const PropagationContext& ctx) {
    if (!(rho0.basis == ctx.ops.basis)) {
        throw std::invalid_argument("propagate_state: basis mismatch");
    }
    return DensityMatrix{rho0.basis, propagate_matrix(rho0.matrix, t0, t1, ctx)};
}

std::uint64_t params_fingerprint(const ModelParams& params, const StepControl& step) {
    // FNV-1a over the exact bit patterns of the parameters.
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    const std::int64_t n = params.N;
    mix(&n, sizeof n);
    for (double v : {params.J, params.U, params.mu0, params.mu1, params.omega, params.gamma}) {
        mix(&v, sizeof v);
    }
    const std::int64_t steps = step.steps_per_period;
    mix(&steps, sizeof steps);
    return h;
}

FloquetMap build_floquet_map(const PropagationContext& ctx, int threads) {
    const Eigen::Index d = ctx.ops.basis.dim();
    const Eigen::Index d2 = d * d;
    const double T = ctx.params.period();

    auto build = [&](int multiplier) {
        MatrixC phi(d2, d2);
        parallel_for(static_cast<std::size_t>(d2), threads, [&](std::size_t k) {
            MatrixC unit = MatrixC::Zero(d, d);
            unit(static_cast<Eigen::Index>(k) % d, static_cast<Eigen::Index>(k) / d) = 1.0;
            const MatrixC out = integrate(unit, 0.0, T, ctx, multiplier, {});
            phi.col(static_cast<Eigen::Index>(k)) = out.reshaped();
        });
        return phi;
    };

    FloquetMap map;
    map.basis = ctx.ops.basis;
    map.params = ctx.params;
    map.step = ctx.step;
    map.fingerprint = params_fingerprint(ctx.params, ctx.step);
    map.matrix = build(1);
    if (ctx.step.convergence_check) {
        const double defect = max_abs(build(2) - map.matrix);
        if (defect > ctx.step.convergence_tol) {
            std::ostringstream msg;
            msg << "build_floquet_map: step-halving defect " << defect << " exceeds tolerance "
                << ctx.step.convergence_tol;
            throw ConvergenceError(msg.str(), defect);
        }
    }
    return map;
}

MatrixC apply_floquet(const FloquetMap& map, const MatrixC& x) {
    const Eigen::Index d = map.dim();
    if (x.rows() != d || x.cols() != d) {
        throw std::invalid_argument("apply_floquet: dimension mismatch");
    }
    const VectorC v = map.matrix * x.reshaped();
    return v.reshaped(d, d);
}

double trace_preservation_defect(const FloquetMap& map) {
    const Eigen::Index d = map.dim();
    Eigen::RowVectorXcd t = Eigen::RowVectorXcd::Zero(d * d);
    for (Eigen::Index i = 0; i < d; ++i) t(i + d * i) = 1.0;
    return max_abs(t * map.matrix - t);
}

double hermiticity_preservation_defect(const FloquetMap& map, const MatrixC& x) {
    const MatrixC a = apply_floquet(map, MatrixC(x.adjoint()));
    const MatrixC b = apply_floquet(map, x);
    return max_abs(a - b.adjoint());
}

// ---------------------------------------------------------------- cache file

namespace {

constexpr char kMagic[4] = {'F', 'L', 'Q', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    unsigned char bytes[sizeof(T)];
    is.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!is) throw std::runtime_error("floquet cache: truncated file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

std::array<double, 8> params_block(const ModelParams& p, const StepControl& s) {
    return {p.J, p.U, p.mu0, p.mu1, p.omega, p.gamma, static_cast<double>(s.steps_per_period), 0.0};
}

}  // namespace

void save_floquet_map(const std::filesystem::path& path, const FloquetMap& map) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("floquet cache: cannot write " + tmp.string());
        os.write(kMagic, 4);
        write_le<std::uint32_t>(os, kVersion);
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(map.params.N));
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(map.dim()));
        for (double v : params_block(map.params, map.step)) write_le<double>(os, v);
        const Eigen::Index n = map.matrix.rows();
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index c = 0; c < n; ++c) {
                write_le<double>(os, map.matrix(r, c).real());
                write_le<double>(os, map.matrix(r, c).imag());
            }
        }
        if (!os) throw std::runtime_error("floquet cache: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

FloquetMap read_floquet_map(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("floquet cache: cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("floquet cache: bad magic in " + path.string());
    }
    const auto version = read_le<std::uint32_t>(is);
    if (version != kVersion) {
        throw std::runtime_error("floquet cache: unsupported version " + std::to_string(version));
    }
    const auto N = read_le<std::uint32_t>(is);
    const auto d = read_le<std::uint32_t>(is);
    if (N < 1 || d != N + 1) throw std::runtime_error("floquet cache: inconsistent N and d");
    std::array<double, 8> block{};
    for (double& v : block) v = read_le<double>(is);

    FloquetMap map;
    map.params.N = static_cast<int>(N);
    map.params.J = block[0];
    map.params.U = block[1];
    map.params.mu0 = block[2];
    map.params.mu1 = block[3];
    map.params.omega = block[4];
    map.params.gamma = block[5];
    map.step.steps_per_period = static_cast<int>(block[6]);
    map.basis = build_basis(static_cast<int>(N));
    const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
    map.matrix.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            const double re = read_le<double>(is);
            const double im = read_le<double>(is);
            map.matrix(r, c) = cplx(re, im);
        }
    }
    map.fingerprint = params_fingerprint(map.params, map.step);
    return map;
}

FloquetMap load_floquet_map(const std::filesystem::path& path, const ModelParams& expected,
                            const StepControl& expected_step) {
    FloquetMap map = read_floquet_map(path);
    const auto want = params_block(expected, expected_step);
    const auto have = params_block(map.params, map.step);
    if (map.params.N != expected.N || std::memcmp(want.data(), have.data(), sizeof want) != 0) {
        throw CacheMismatchError("floquet cache: fingerprint mismatch in " + path.string());
    }
    map.step = expected_step;
    return map;
}

}  // namespace dimer
