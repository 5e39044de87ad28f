#include "dimer/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dimer/correlations.hpp"
#include "dimer/parallel.hpp"

namespace dimer {

namespace {

// Real amplitudes sqrt(C(N,n)) c^n s^{N-n}, evaluated in logs so that large N
// neither overflows the binomial nor underflows the powers prematurely.
VectorR binomial_profile(int N, double c, double s) {
    VectorR a(N + 1);
    const double log_nfact = std::lgamma(N + 1.0);
    for (int n = 0; n <= N; ++n) {
        const int k = N - n;
        if ((c == 0.0 && n > 0) || (s == 0.0 && k > 0)) {
            a(n) = 0.0;
            continue;
        }
        double log_mag = 0.5 * (log_nfact - std::lgamma(n + 1.0) - std::lgamma(k + 1.0));
        if (n > 0) log_mag += n * std::log(std::abs(c));
        if (k > 0) log_mag += k * std::log(std::abs(s));
        const bool negative = (c < 0.0 && n % 2 == 1) != (s < 0.0 && k % 2 == 1);
        a(n) = negative ? -std::exp(log_mag) : std::exp(log_mag);
    }
    return a;
}

}  // namespace

CoherentState coherent_state(double theta, double phi, int N) {
    if (N < 1) throw std::invalid_argument("coherent_state: N must be >= 1");
    if (!std::isfinite(theta) || !std::isfinite(phi)) {
        throw std::invalid_argument("coherent_state: angles must be finite");
    }
    const VectorR a = binomial_profile(N, std::cos(0.5 * theta), std::sin(0.5 * theta));
    CoherentState out{theta, phi, VectorC(N + 1)};
    for (int n = 0; n <= N; ++n) out.amplitudes(n) = a(n) * std::polar(1.0, phi * (N - n));
    out.amplitudes /= out.amplitudes.norm();
    return out;
}

DensityMatrix coherent_density(const CoherentState& state) {
    return pure_state(build_basis(state.N()), state.amplitudes);
}

double HusimiGrid::weight(Eigen::Index i, Eigen::Index j) const {
    (void)j;
    const auto nt = static_cast<Eigen::Index>(theta_axis.size());
    const double dtheta = kPi / static_cast<double>(nt - 1);
    const double dphi = kTwoPi / static_cast<double>(phi_axis.size());
    const double edge = (i == 0 || i == nt - 1) ? 0.5 : 1.0;
    return (N + 1.0) / (4.0 * kPi) * edge * dtheta * dphi * std::sin(theta_axis[static_cast<std::size_t>(i)]);
}

double HusimiGrid::normalization() const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        for (Eigen::Index j = 0; j < Q.cols(); ++j) total += weight(i, j) * Q(i, j);
    }
    return total;
}

HusimiGrid husimi(const DensityMatrix& rho, int n_theta, int n_phi, int threads) {
    if (n_theta < 2 || n_phi < 1) throw std::invalid_argument("husimi: grid needs n_theta >= 2, n_phi >= 1");
    const Eigen::Index d = rho.matrix.rows();
    if (rho.matrix.cols() != d || d != rho.basis.dim()) {
        throw std::invalid_argument("husimi: density matrix does not match its basis");
    }
    const int N = static_cast<int>(d) - 1;

    HusimiGrid grid;
    grid.N = N;
    for (int i = 0; i < n_theta; ++i) grid.theta_axis.push_back(kPi * i / (n_theta - 1));
    for (int j = 0; j < n_phi; ++j) grid.phi_axis.push_back(kTwoPi * j / n_phi);
    grid.Q.resize(n_theta, n_phi);

    // Q(theta, phi) = sum_k D_k(theta) e^{i k phi}, D_k = sum_{n-m=k} a_n a_m rho_nm.
    parallel_for(static_cast<std::size_t>(n_theta), threads, [&](std::size_t i) {
        const double th = grid.theta_axis[i];
        const VectorR a = binomial_profile(N, std::cos(0.5 * th), std::sin(0.5 * th));
        std::vector<cplx> D(2 * static_cast<std::size_t>(N) + 1, cplx(0.0));
        for (Eigen::Index n = 0; n < d; ++n) {
            for (Eigen::Index m = 0; m < d; ++m) {
                D[static_cast<std::size_t>(n - m + N)] += a(n) * a(m) * rho.matrix(n, m);
            }
        }
        for (int j = 0; j < n_phi; ++j) {
            const double ph = grid.phi_axis[static_cast<std::size_t>(j)];
            cplx q = 0.0;
            for (int k = -N; k <= N; ++k) q += D[static_cast<std::size_t>(k + N)] * std::polar(1.0, k * ph);
            grid.Q(static_cast<Eigen::Index>(i), j) = q.real();
        }
    });
    return grid;
}

double geodesic_distance(const ClassicalState& a, const ClassicalState& b) {
    const double c = std::cos(a.theta) * std::cos(b.theta) +
                     std::sin(a.theta) * std::sin(b.theta) * std::cos(a.phi - b.phi);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

double husimi_mass_within(const HusimiGrid& grid, const ClassicalState& center, double radius) {
    double inside = 0.0;
    double total = 0.0;
    for (Eigen::Index i = 0; i < grid.Q.rows(); ++i) {
        for (Eigen::Index j = 0; j < grid.Q.cols(); ++j) {
            const double w = grid.weight(i, j) * grid.Q(i, j);
            total += w;
            const ClassicalState node{grid.theta_axis[static_cast<std::size_t>(i)],
                                      grid.phi_axis[static_cast<std::size_t>(j)]};
            if (geodesic_distance(node, center) <= radius) inside += w;
        }
    }
    return total == 0.0 ? 0.0 : inside / total;
}

CoherentEvolution stroboscopic_coherent_evolution(const CoherentState& state0,
                                                  const ModelParams& params, int m_max,
                                                  const std::vector<int>& snapshot_times,
                                                  const StepControl& step,
                                                  const HusimiResolution& res, int threads) {
    if (m_max < 1) throw std::invalid_argument("stroboscopic_coherent_evolution: m_max must be >= 1");
    if (state0.N() != params.N) {
        throw std::invalid_argument("stroboscopic_coherent_evolution: state and params disagree on N");
    }
    for (int m : snapshot_times) {
        if (m < 0 || m > m_max) {
            throw std::invalid_argument("stroboscopic_coherent_evolution: snapshot time outside [0, m_max]");
        }
    }
    const auto ctx = PropagationContext::make(params, step);
    const double T = params.period();
    const MatrixC& sz = ctx.ops.Sz.matrix;

    CoherentEvolution out;
    out.snapshot_times = snapshot_times;
    out.snapshots.resize(snapshot_times.size());
    DensityMatrix rho = coherent_density(state0);
    for (int m = 0; m <= m_max; ++m) {
        if (m > 0) rho.matrix = propagate_matrix(rho.matrix, (m - 1) * T, m * T, ctx);
        out.sz.push_back((sz * rho.matrix).trace().real());
        for (std::size_t s = 0; s < snapshot_times.size(); ++s) {
            if (snapshot_times[s] == m) out.snapshots[s] = husimi(rho, res.n_theta, res.n_phi, threads);
        }
    }
    return out;
}

std::vector<SzSample> coherent_sz_trajectory(const CoherentState& state0, const ModelParams& params,
                                             int periods, int samples_per_period,
                                             const StepControl& step) {
    if (periods < 1 || samples_per_period < 1) {
        throw std::invalid_argument("coherent_sz_trajectory: periods and samples_per_period must be >= 1");
    }
    if (step.steps_per_period % samples_per_period != 0) {
        throw std::invalid_argument("coherent_sz_trajectory: samples_per_period must divide steps_per_period");
    }
    const auto ctx = PropagationContext::make(params, step);
    const double dt = params.period() / samples_per_period;
    const MatrixC& sz = ctx.ops.Sz.matrix;
    MatrixC rho = coherent_density(state0).matrix;
    std::vector<SzSample> out{{0.0, (sz * rho).trace().real()}};
    for (int k = 1; k <= periods * samples_per_period; ++k) {
        rho = propagate_matrix(rho, (k - 1) * dt, k * dt, ctx);
        out.push_back({k * dt, (sz * rho).trace().real()});
    }
    return out;
}

std::vector<SzSample> classical_sz_trajectory(const ClassicalState& s0, const ModelParams& params,
                                              int periods, int samples_per_period,
                                              int steps_per_period) {
    if (periods < 1 || samples_per_period < 1 || steps_per_period % samples_per_period != 0) {
        throw std::invalid_argument("classical_sz_trajectory: samples_per_period must divide steps_per_period");
    }
    const double T = params.period();
    const auto traj = integrate_mf(s0, 0.0, periods * T, params, T / steps_per_period,
                                   steps_per_period / samples_per_period);
    std::vector<SzSample> out;
    out.reserve(traj.size());
    for (const auto& p : traj) out.push_back({p.t, p.state.sz()});
    return out;
}

int stroboscopic_alternation(const std::vector<double>& sz) {
    if (sz.size() < 2) return 0;
    std::vector<double> diff(sz.size() - 1);
    for (std::size_t m = 0; m + 1 < sz.size(); ++m) diff[m] = sz[m + 1] - sz[m];
    return alternation_length(diff);
}

TimeCrystalReport time_crystal_checklist(const ClassicalState& seed,
                                         const std::vector<SeedOffset>& offsets,
                                         const std::vector<double>& UN_values,
                                         const ModelParams& params, int m_max,
                                         const StepControl& step, int threads) {
    if (m_max < 2) throw std::invalid_argument("time_crystal_checklist: m_max must be >= 2");
    std::vector<std::pair<ClassicalState, ModelParams>> jobs{{seed, params}};
    for (const auto& o : offsets) jobs.push_back({{seed.theta + o.dtheta, seed.phi + o.dphi}, params});
    for (double UN : UN_values) {
        ModelParams p = params;
        p.U = UN / p.N;
        jobs.push_back({seed, p});
    }

    TimeCrystalReport report;
    report.runs.resize(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t k) {
        const auto& [s, p] = jobs[k];
        ChecklistRun run;
        run.run_id = static_cast<int>(k);
        run.seed = s;
        run.UN = p.UN();
        run.sz = stroboscopic_coherent_evolution(coherent_state(s.theta, s.phi, p.N), p, m_max, {},
                                                 step)
                     .sz;
        run.alternation_length = stroboscopic_alternation(run.sz);
        report.runs[k] = std::move(run);
    });

    // In phase means the first step goes the same way as in run 0.
    const auto first_step = [](const ChecklistRun& r) { return r.sz[1] - r.sz[0]; };
    const double ref = first_step(report.runs.front());
    report.all_locked = true;
    report.min_alternation = report.runs.front().alternation_length;
    for (auto& r : report.runs) {
        const double s = first_step(r);
        r.locked = r.alternation_length >= 1 && ((s > 0.0 && ref > 0.0) || (s < 0.0 && ref < 0.0));
        report.all_locked = report.all_locked && r.locked;
        report.min_alternation = std::min(report.min_alternation, r.alternation_length);
    }
    return report;
}

}  // namespace dimer
