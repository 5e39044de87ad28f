#pragma once

// Spin coherent states, Husimi sections and stroboscopic evolution of
// coherent states, including the multi-seed time-crystal check.

#include <vector>

#include "dimer/meanfield.hpp"
#include "dimer/propagation.hpp"

namespace dimer {

struct CoherentState {
    double theta = 0.0;
    double phi = 0.0;
    VectorC amplitudes;  // f_n over |n, N-n>

    int N() const { return static_cast<int>(amplitudes.size()) - 1; }
};

// f_n = sqrt(C(N,n)) cos(theta/2)^n (sin(theta/2) e^{i phi})^{N-n}
CoherentState coherent_state(double theta, double phi, int N);

DensityMatrix coherent_density(const CoherentState& state);

struct HusimiGrid {
    std::vector<double> theta_axis;  // [0, pi], endpoints included
    std::vector<double> phi_axis;    // [0, 2 pi), periodic
    MatrixR Q;                       // Q(i, j) at (theta_axis[i], phi_axis[j])
    int N = 0;

    // Quadrature weight of node (i, j) including sin theta and (N+1)/(4 pi).
    double weight(Eigen::Index i, Eigen::Index j) const;
    // (N+1)/(4 pi) * integral of Q sin theta; equals tr rho up to quadrature error.
    double normalization() const;
};

HusimiGrid husimi(const DensityMatrix& rho, int n_theta = 181, int n_phi = 181, int threads = 1);

// Angle between two points of the sphere.
double geodesic_distance(const ClassicalState& a, const ClassicalState& b);

// Fraction of the total Husimi mass lying within `radius` of `center`.
double husimi_mass_within(const HusimiGrid& grid, const ClassicalState& center, double radius);

struct CoherentEvolution {
    std::vector<double> sz;  // <Sz> at t = mT, m = 0..m_max
    std::vector<int> snapshot_times;
    std::vector<HusimiGrid> snapshots;
};

struct HusimiResolution {
    int n_theta = 181;
    int n_phi = 181;
};

// Propagates |state0><state0| one period at a time (never builds the map).
CoherentEvolution stroboscopic_coherent_evolution(const CoherentState& state0,
                                                  const ModelParams& params, int m_max,
                                                  const std::vector<int>& snapshot_times,
                                                  const StepControl& step = {},
                                                  const HusimiResolution& res = {},
                                                  int threads = 1);

struct SzSample {
    double t = 0.0;
    double sz = 0.0;
};

// <Sz>(t) for a coherent initial state over [0, periods*T], sampled
// `samples_per_period` times per period (plus t = 0).
std::vector<SzSample> coherent_sz_trajectory(const CoherentState& state0, const ModelParams& params,
                                             int periods, int samples_per_period,
                                             const StepControl& step = {});

// Classical counterpart of coherent_sz_trajectory, same sample times.
std::vector<SzSample> classical_sz_trajectory(const ClassicalState& s0, const ModelParams& params,
                                              int periods, int samples_per_period,
                                              int steps_per_period = 2000);

// Alternation length of the successive differences sz[m+1] - sz[m].
int stroboscopic_alternation(const std::vector<double>& sz);

struct ChecklistRun {
    int run_id = 0;
    ClassicalState seed;
    double UN = 0.0;
    std::vector<double> sz;
    int alternation_length = 0;
    bool locked = false;  // same two-branch phase as run 0
};

struct TimeCrystalReport {
    std::vector<ChecklistRun> runs;
    bool all_locked = false;
    int min_alternation = 0;
};

struct SeedOffset {
    double dtheta = 0.0;
    double dphi = 0.0;
};

// Run 0 starts at `seed` with `params`; then one run per offset seed and one
// per UN value in `UN_values`, each starting at `seed`.
TimeCrystalReport time_crystal_checklist(const ClassicalState& seed,
                                         const std::vector<SeedOffset>& offsets,
                                         const std::vector<double>& UN_values,
                                         const ModelParams& params, int m_max,
                                         const StepControl& step = {}, int threads = 1);

}  // namespace dimer
