#pragma once

// Classical mean-field dynamics on the Bloch sphere, stroboscopic maps and
// attractor classification.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dimer/model.hpp"

namespace dimer {

struct ClassicalState {
    double theta = 0.0;
    double phi = 0.0;

    double sz() const;  // (1/2) cos theta
    bool operator==(const ClassicalState&) const = default;
};

// theta into [0, pi], phi into [0, 2 pi); (-theta, phi) maps to (theta, phi + pi).
ClassicalState canonicalize(ClassicalState s);

// (sx, sy, sz) = (1/2)(cos phi sin theta, sin phi sin theta, cos theta)
Eigen::Vector3d to_cartesian(const ClassicalState& s);
ClassicalState from_cartesian(const Eigen::Vector3d& v);

// Raised when the angle form is evaluated on a pole.
class PoleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct MfRates {
    double theta_dot = 0.0;
    double phi_dot = 0.0;
};

// Angle form. Throws PoleError when |sin theta| < 1e-9.
MfRates mf_rhs(const ClassicalState& s, double t, const ModelParams& params);

// The same flow written for (sx, sy, sz); regular everywhere on the sphere.
Eigen::Vector3d mf_rhs_cartesian(const Eigen::Vector3d& s, double t, const ModelParams& params);

struct MfOptions {
    // Below this |sin theta| a step is taken in Cartesian form.
    double pole_switch = 0.1;
};

struct TrajectoryPoint {
    double t = 0.0;
    ClassicalState state;
};

// Fixed-step RK4 from t0 to t1. Records every `stride`-th step plus both ends.
std::vector<TrajectoryPoint> integrate_mf(const ClassicalState& s0, double t0, double t1,
                                          const ModelParams& params, double step,
                                          int stride = 1, const MfOptions& opts = {});

// Endpoint-only variant of integrate_mf.
ClassicalState advance_mf(const ClassicalState& s0, double t0, double t1, const ModelParams& params,
                          double step, const MfOptions& opts = {});

// Pure Cartesian integration, used to cross-check the angle form.
Eigen::Vector3d advance_mf_cartesian(const Eigen::Vector3d& s0, double t0, double t1,
                                     const ModelParams& params, double step);

struct StroboscopicOptions {
    int m_transient = 800;
    int m_record = 200;
    int steps_per_period = 2000;
};

struct StroboscopicRecord {
    double UN = 0.0;
    std::vector<double> samples;        // (1/2) cos theta at t = mT, m = m_transient, m_transient + 1, ...
    std::vector<ClassicalState> states; // canonical state at the same times
    ClassicalState initial_condition;
};

StroboscopicRecord stroboscopic_map(const ClassicalState& s0, const ModelParams& params,
                                    const StroboscopicOptions& opts = {});

// Uniform midpoint grid over theta in [-pi, pi] and phi in [0, 2 pi], canonicalized.
std::vector<ClassicalState> uniform_ic_grid(int n_theta, int n_phi);

// Records for every (UN, initial condition) pair, UN-major, in input order.
std::vector<StroboscopicRecord> classical_bifurcation_scan(const std::vector<double>& UN_grid,
                                                           const std::vector<ClassicalState>& ics,
                                                           const ModelParams& params,
                                                           const StroboscopicOptions& opts = {},
                                                           int threads = 1);

enum class AttractorKind { FixedPoint, Period2, PeriodN, Unclassified };

std::string to_string(AttractorKind kind);

struct ClusterReport {
    AttractorKind kind = AttractorKind::Unclassified;
    int n_clusters = 0;
    std::vector<double> centers;  // ascending
    double max_diameter = 0.0;
    bool membership_periodic = false;
};

ClusterReport classify_attractor(const StroboscopicRecord& record, double tol_diameter = 1e-3,
                                 double tol_separation = 1e-1);

// The two stroboscopic points of a period-2 record, ordered so that the first
// one is visited at even m (counting from the first recorded period).
std::pair<ClassicalState, ClassicalState> period2_points(const StroboscopicRecord& record);

}  // namespace dimer
