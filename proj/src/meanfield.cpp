#include "dimer/meanfield.hpp"

#include <algorithm>
#include <cmath>

#include "dimer/parallel.hpp"

namespace dimer {

double ClassicalState::sz() const { return 0.5 * std::cos(theta); }

ClassicalState canonicalize(ClassicalState s) {
    double th = std::remainder(s.theta, kTwoPi);  // (-pi, pi]
    double ph = s.phi;
    if (th < 0.0) {
        th = -th;
        ph += kPi;
    }
    ph = std::fmod(ph, kTwoPi);
    if (ph < 0.0) ph += kTwoPi;
    if (ph >= kTwoPi) ph = 0.0;
    return {th, ph};
}

Eigen::Vector3d to_cartesian(const ClassicalState& s) {
    const double st = std::sin(s.theta);
    return 0.5 * Eigen::Vector3d(std::cos(s.phi) * st, std::sin(s.phi) * st, std::cos(s.theta));
}

ClassicalState from_cartesian(const Eigen::Vector3d& v) {
    const double rxy = std::hypot(v.x(), v.y());
    return canonicalize({std::atan2(rxy, v.z()), std::atan2(v.y(), v.x())});
}

MfRates mf_rhs(const ClassicalState& s, double t, const ModelParams& params) {
    const double st = std::sin(s.theta);
    if (std::abs(st) < 1e-9) throw PoleError("mf_rhs: |sin theta| < 1e-9 (pole of the angle form)");
    const double ct = std::cos(s.theta);
    const double sp = std::sin(s.phi);
    const double cp = std::cos(s.phi);
    const double J = params.J;
    const double gN = params.gammaN();
    const double UN = params.UN();
    MfRates r;
    r.theta_dot = 2.0 * J * sp + 4.0 * gN * cp * ct;
    r.phi_dot = 2.0 * J * (ct / st) * cp - 2.0 * drive_eps(t, params) + UN * ct - 4.0 * gN * sp / st;
    return r;
}

Eigen::Vector3d mf_rhs_cartesian(const Eigen::Vector3d& s, double t, const ModelParams& params) {
    // Chain rule applied to the angle form with s = (1/2)(cos phi sin theta, sin phi sin theta, cos theta).
    const double J = params.J;
    const double gN = params.gammaN();
    const double UN = params.UN();
    const double eps = drive_eps(t, params);
    const double sx = s.x(), sy = s.y(), sz = s.z();
    return {2.0 * eps * sy - 2.0 * UN * sz * sy + 8.0 * gN * (sy * sy + sz * sz),
            2.0 * J * sz - 2.0 * eps * sx + 2.0 * UN * sz * sx - 8.0 * gN * sx * sy,
            -2.0 * J * sy - 8.0 * gN * sx * sz};
}

namespace {

Eigen::Vector2d angle_rhs(const Eigen::Vector2d& y, double t, const ModelParams& params) {
    const MfRates r = mf_rhs({y(0), y(1)}, t, params);
    return {r.theta_dot, r.phi_dot};
}

template <typename State, typename Rhs>
State rk4(const State& y, double t, double h, Rhs&& f) {
    const State k1 = f(y, t);
    const State k2 = f(State(y + 0.5 * h * k1), t + 0.5 * h);
    const State k3 = f(State(y + 0.5 * h * k2), t + 0.5 * h);
    const State k4 = f(State(y + h * k3), t + h);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Rotation of (sx, sy) by angle a about the z axis.
Eigen::Vector3d rotate_z(const Eigen::Vector3d& v, double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

// One RK4 step of the Cartesian form in the frame co-rotating with the drive:
// the eps(t) precession about z is integrated exactly (integrating factor).
Eigen::Vector3d cartesian_step(const Eigen::Vector3d& s, double t, double h, const ModelParams& params) {
    const double w = params.omega;
    const double cos0 = std::cos(w * t);
    // Precession angle 2 * integral_t^tau eps.
    const auto angle = [&](double tau) {
        return 2.0 * (params.mu0 * (tau - t) + params.mu1 / w * (cos0 - std::cos(w * tau)));
    };
    const auto f = [&](const Eigen::Vector3d& u, double tau) {
        const double a = angle(tau);
        const Eigen::Vector3d v = rotate_z(u, -a);
        const double eps = drive_eps(tau, params);
        const Eigen::Vector3d rest =
            mf_rhs_cartesian(v, tau, params) - Eigen::Vector3d(2.0 * eps * v.y(), -2.0 * eps * v.x(), 0.0);
        return Eigen::Vector3d(rotate_z(rest, a));
    };
    return rotate_z(rk4(s, t, h, f), -angle(t + h));
}

ClassicalState step_mf(const ClassicalState& s, double t, double h, const ModelParams& params,
                       const MfOptions& opts) {
    if (std::abs(std::sin(s.theta)) >= opts.pole_switch) {
        const auto f = [&](const Eigen::Vector2d& y, double tt) { return angle_rhs(y, tt, params); };
        const Eigen::Vector2d y = rk4(Eigen::Vector2d(s.theta, s.phi), t, h, f);
        return canonicalize({y(0), y(1)});
    }
    return from_cartesian(cartesian_step(to_cartesian(s), t, h, params));
}

long long mf_steps(double t0, double t1, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("integrate_mf: step must be > 0");
    if (t1 < t0) throw std::invalid_argument("integrate_mf: t1 must be >= t0");
    return std::max(1LL, static_cast<long long>(std::ceil((t1 - t0) / step - 1e-9)));
}

}  // namespace

std::vector<TrajectoryPoint> integrate_mf(const ClassicalState& s0, double t0, double t1,
                                          const ModelParams& params, double step, int stride,
                                          const MfOptions& opts) {
    const long long n = mf_steps(t0, t1, step);
    stride = std::max(1, stride);
    std::vector<TrajectoryPoint> out;
    ClassicalState s = canonicalize(s0);
    out.push_back({t0, s});
    if (t1 == t0) return out;
    const double h = (t1 - t0) / static_cast<double>(n);
    for (long long k = 0; k < n; ++k) {
        s = step_mf(s, t0 + static_cast<double>(k) * h, h, params, opts);
        if ((k + 1) % stride == 0 || k + 1 == n) {
            out.push_back({t0 + static_cast<double>(k + 1) * h, s});
        }
    }
    return out;
}

ClassicalState advance_mf(const ClassicalState& s0, double t0, double t1, const ModelParams& params,
                          double step, const MfOptions& opts) {
    const long long n = mf_steps(t0, t1, step);
    ClassicalState s = canonicalize(s0);
    if (t1 == t0) return s;
    const double h = (t1 - t0) / static_cast<double>(n);
    for (long long k = 0; k < n; ++k) s = step_mf(s, t0 + static_cast<double>(k) * h, h, params, opts);
    return s;
}

Eigen::Vector3d advance_mf_cartesian(const Eigen::Vector3d& s0, double t0, double t1,
                                     const ModelParams& params, double step) {
    const long long n = mf_steps(t0, t1, step);
    Eigen::Vector3d s = s0;
    if (t1 == t0) return s;
    const double h = (t1 - t0) / static_cast<double>(n);
    for (long long k = 0; k < n; ++k) s = cartesian_step(s, t0 + static_cast<double>(k) * h, h, params);
    return s;
}

StroboscopicRecord stroboscopic_map(const ClassicalState& s0, const ModelParams& params,
                                    const StroboscopicOptions& opts) {
    if (opts.m_transient < 1 || opts.m_record < 1) {
        throw std::invalid_argument("stroboscopic_map: m_transient and m_record must be >= 1");
    }
    if (opts.steps_per_period < 1) {
        throw std::invalid_argument("stroboscopic_map: steps_per_period must be >= 1");
    }
    params.validate();
    const double T = params.period();
    const double h = T / opts.steps_per_period;
    const MfOptions mf_opts;

    StroboscopicRecord rec;
    rec.UN = params.UN();
    rec.initial_condition = canonicalize(s0);
    rec.samples.reserve(static_cast<std::size_t>(opts.m_record));
    rec.states.reserve(static_cast<std::size_t>(opts.m_record));
    ClassicalState s = rec.initial_condition;
    const int total = opts.m_transient + opts.m_record;
    for (int m = 0; m < total; ++m) {
        if (m >= opts.m_transient) {
            rec.samples.push_back(s.sz());
            rec.states.push_back(s);
        }
        if (m + 1 == total) break;
        // absolute times keep every period boundary at exactly m*T
        for (int k = 0; k < opts.steps_per_period; ++k) {
            s = step_mf(s, m * T + k * h, h, params, mf_opts);
        }
    }
    return rec;
}

std::vector<ClassicalState> uniform_ic_grid(int n_theta, int n_phi) {
    if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("uniform_ic_grid: empty grid");
    std::vector<ClassicalState> out;
    out.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    for (int i = 0; i < n_theta; ++i) {
        const double th = -kPi + (i + 0.5) * kTwoPi / n_theta;
        for (int j = 0; j < n_phi; ++j) {
            const double ph = (j + 0.5) * kTwoPi / n_phi;
            out.push_back(canonicalize({th, ph}));
        }
    }
    return out;
}

std::vector<StroboscopicRecord> classical_bifurcation_scan(const std::vector<double>& UN_grid,
                                                           const std::vector<ClassicalState>& ics,
                                                           const ModelParams& params,
                                                           const StroboscopicOptions& opts,
                                                           int threads) {
    if (UN_grid.empty() || ics.empty()) {
        throw std::invalid_argument("classical_bifurcation_scan: empty grid");
    }
    std::vector<StroboscopicRecord> out(UN_grid.size() * ics.size());
    parallel_for(out.size(), threads, [&](std::size_t k) {
        ModelParams p = params;
        p.U = UN_grid[k / ics.size()] / p.N;
        out[k] = stroboscopic_map(ics[k % ics.size()], p, opts);
    });
    return out;
}

std::string to_string(AttractorKind kind) {
    switch (kind) {
        case AttractorKind::FixedPoint: return "fixed_point";
        case AttractorKind::Period2: return "period_2";
        case AttractorKind::PeriodN: return "period_n";
        case AttractorKind::Unclassified: return "unclassified";
    }
    return "unclassified";
}

ClusterReport classify_attractor(const StroboscopicRecord& record, double tol_diameter,
                                 double tol_separation) {
    const auto& x = record.samples;
    if (x.empty()) throw std::invalid_argument("classify_attractor: empty record");

    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> ranges;  // [lo, hi] per cluster
    ranges.emplace_back(sorted.front(), sorted.front());
    std::vector<double> sums{sorted.front()};
    std::vector<int> counts{1};
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i] - sorted[i - 1] > tol_separation) {
            ranges.emplace_back(sorted[i], sorted[i]);
            sums.push_back(0.0);
            counts.push_back(0);
        }
        ranges.back().second = sorted[i];
        sums.back() += sorted[i];
        ++counts.back();
    }

    ClusterReport rep;
    rep.n_clusters = static_cast<int>(ranges.size());
    for (std::size_t c = 0; c < ranges.size(); ++c) {
        rep.centers.push_back(sums[c] / counts[c]);
        rep.max_diameter = std::max(rep.max_diameter, ranges[c].second - ranges[c].first);
    }
    if (rep.n_clusters > 4 || rep.max_diameter >= tol_diameter) return rep;

    // Cluster label of every sample in time order; ranges are disjoint and sorted.
    std::vector<int> label(x.size());
    for (std::size_t m = 0; m < x.size(); ++m) {
        int c = 0;
        while (x[m] > ranges[static_cast<std::size_t>(c)].second) ++c;
        label[m] = c;
    }
    const std::size_t p = ranges.size();
    bool periodic = x.size() >= p;
    for (std::size_t m = 0; periodic && m < std::min(p, x.size()); ++m) {
        for (std::size_t q = 0; q < m; ++q) periodic = periodic && label[m] != label[q];
    }
    for (std::size_t m = p; periodic && m < x.size(); ++m) periodic = label[m] == label[m - p];
    rep.membership_periodic = periodic;

    if (rep.n_clusters == 1) {
        rep.kind = AttractorKind::FixedPoint;
    } else if (periodic) {
        rep.kind = rep.n_clusters == 2 ? AttractorKind::Period2 : AttractorKind::PeriodN;
    }
    return rep;
}

std::pair<ClassicalState, ClassicalState> period2_points(const StroboscopicRecord& record) {
    if (record.states.size() < 2) {
        throw std::invalid_argument("period2_points: record holds fewer than two states");
    }
    return {record.states[0], record.states[1]};
}

}  // namespace dimer
