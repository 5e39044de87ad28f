#include "doctest.h"

#include <cmath>

#include "dimer/phase_space.hpp"
#include "../support/oracles.hpp"

using namespace dimer;

namespace {

double expect(const MatrixC& op, const VectorC& v) { return (v.adjoint() * op * v)(0).real(); }

}  // namespace

TEST_CASE("coherent states at the poles") {
    const int N = 7;
    const auto north = coherent_state(0.0, 1.3, N);
    for (int n = 0; n < N; ++n) CHECK(north.amplitudes(n) == cplx(0.0));
    CHECK(std::abs(north.amplitudes(N) - 1.0) < 1e-15);

    const double phi = 0.4;
    const auto south = coherent_state(kPi, phi, N);
    CHECK(std::abs(south.amplitudes(0) - std::polar(1.0, N * phi)) < 1e-12);
    for (int n = 1; n <= N; ++n) CHECK(std::abs(south.amplitudes(n)) < 1e-12);

    const auto ops = build_operators(ModelParams::from_composite(N, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0));
    CHECK(expect(ops.Sz.matrix, north.amplitudes) == doctest::Approx(0.5));
    CHECK(expect(ops.Sz.matrix, south.amplitudes) == doctest::Approx(-0.5));
    CHECK_THROWS_AS(coherent_state(1.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("coherent-state spin expectation follows the Bloch vector") {
    for (int N : {1, 4, 25, 100}) {
        const auto ops = build_operators(ModelParams::from_composite(N, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0));
        for (const auto [th, ph] : {std::pair{0.3, 0.1}, std::pair{2.0, -3.0}, std::pair{1.57, 4.0},
                                    std::pair{-0.8, 2.2}}) {
            CAPTURE(N);
            CAPTURE(th);
            const auto c = coherent_state(th, ph, N);
            CHECK(std::abs(c.amplitudes.norm() - 1.0) < 1e-12);
            CHECK(std::abs(expect(ops.Sx.matrix, c.amplitudes) - 0.5 * std::cos(ph) * std::sin(th)) < 1e-10);
            CHECK(std::abs(expect(ops.Sy.matrix, c.amplitudes) - 0.5 * std::sin(ph) * std::sin(th)) < 1e-10);
            CHECK(std::abs(expect(ops.Sz.matrix, c.amplitudes) - 0.5 * std::cos(th)) < 1e-10);
        }
    }
    // Binomial normalization holds before the final rescaling, up to N = 200.
    for (int N : {50, 120, 200}) {
        const double th = 1.1;
        double total = 0.0;
        for (int n = 0; n <= N; ++n) {
            total += oracle::binomial(N, n) * std::pow(std::cos(th / 2), 2 * n) * std::pow(std::sin(th / 2), 2 * (N - n));
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
        CHECK(std::abs(coherent_state(th, 0.0, N).amplitudes.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("Husimi function of a coherent state peaks at its centre") {
    const int N = 20;
    const int nt = 181, np = 181;
    const double th0 = kPi * 60 / (nt - 1), ph0 = kTwoPi * 45 / np;  // on grid nodes
    const auto g = husimi(coherent_density(coherent_state(th0, ph0, N)), nt, np);
    Eigen::Index i, j;
    const double peak = g.Q.maxCoeff(&i, &j);
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(i == 60);
    CHECK(j == 45);
    CHECK(g.normalization() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("Husimi normalization and positivity") {
    auto gen = oracle::rng(21);
    for (int N : {3, 10, 30}) {
        CAPTURE(N);
        const auto basis = build_basis(N);
        const auto mixed = husimi(maximally_mixed(basis));
        CHECK(std::abs(mixed.normalization() - 1.0) < 1e-4);
        const DensityMatrix rho{basis, oracle::random_density(N + 1, gen)};
        const auto g = husimi(rho, 61, 61, 2);
        CHECK(g.Q.minCoeff() >= -1e-10);
        CHECK(std::abs(husimi(rho).normalization() - 1.0) < 1e-4);
    }
    DensityMatrix wrong{build_basis(3), MatrixC::Identity(5, 5)};
    CHECK_THROWS_AS(husimi(wrong), std::invalid_argument);
}

TEST_CASE("Husimi grid geometry and mass") {
    const auto g = husimi(coherent_density(coherent_state(1.0, 2.0, 50)), 91, 120);
    CHECK(g.theta_axis.front() == 0.0);
    CHECK(g.theta_axis.back() == doctest::Approx(kPi));
    CHECK(g.phi_axis.size() == 120);
    CHECK(g.phi_axis.back() < kTwoPi);
    CHECK(husimi_mass_within(g, {1.0, 2.0}, 0.8) > 0.99);
    CHECK(husimi_mass_within(g, {kPi - 1.0, 2.0 + kPi}, 0.8) < 1e-6);
    CHECK(geodesic_distance({0.0, 0.0}, {kPi, 1.0}) == doctest::Approx(kPi));
    CHECK(geodesic_distance({1.0, 0.5}, {1.0, 0.5 + kTwoPi}) < 1e-7);
}

TEST_CASE("dissipation drives a pole state to the symmetric condensate") {
    const int N = 10;
    const auto p = ModelParams::from_composite(N, 1.0, 0.0, 0.0, 0.0, 1.0, 0.5);
    const auto ctx = PropagationContext::make(p, {.steps_per_period = 400});
    auto rho = coherent_density(coherent_state(0.0, 0.0, N));
    rho = propagate_state(rho, 0.0, 40 * p.period(), ctx);
    const auto g = husimi(rho);
    Eigen::Index i, j;
    g.Q.maxCoeff(&i, &j);
    CHECK(g.theta_axis[std::size_t(i)] == doctest::Approx(kPi / 2).epsilon(0.02));
    CHECK(std::abs(std::remainder(g.phi_axis[std::size_t(j)], kTwoPi)) < 0.05);
    // For |BEC+> the mass within radius r is 1 - cos(r/2)^(2(N+1)).
    CHECK(husimi_mass_within(g, {kPi / 2, 0.0}, 0.8) ==
          doctest::Approx(1.0 - std::pow(std::cos(0.4), 2 * (N + 1))).epsilon(1e-3));
}

TEST_CASE("frozen dynamics keep <Sz> constant") {
    ModelParams p;
    p.N = 6;
    p.J = 0.0;
    const auto ev = stroboscopic_coherent_evolution(coherent_state(1.2, 0.7, 6), p, 5, {0, 5}, {},
                                                    {31, 31});
    REQUIRE(ev.sz.size() == 6);
    for (double x : ev.sz) CHECK(x == doctest::Approx(0.5 * std::cos(1.2)).epsilon(1e-12));
    CHECK(ev.snapshots.size() == 2);
    CHECK(max_abs(ev.snapshots[0].Q - ev.snapshots[1].Q) < 1e-12);
    CHECK_THROWS_AS(stroboscopic_coherent_evolution(coherent_state(1.2, 0.7, 6), p, 0, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(stroboscopic_coherent_evolution(coherent_state(1.2, 0.7, 6), p, 3, {4}),
                    std::invalid_argument);
}

TEST_CASE("checklist with no offsets is a single stroboscopic run") {
    const auto p = ModelParams::from_composite(8, 1.0, 0.2, 1.0, 3.4, 1.0, 0.1);
    const ClassicalState seed{2.0, -3.0};
    const auto report = time_crystal_checklist(seed, {}, {}, p, 6);
    REQUIRE(report.runs.size() == 1);
    const auto ev = stroboscopic_coherent_evolution(coherent_state(2.0, -3.0, 8), p, 6, {});
    CHECK(report.runs[0].sz == ev.sz);
    CHECK(report.runs[0].alternation_length == stroboscopic_alternation(ev.sz));
    CHECK(report.runs[0].UN == doctest::Approx(0.2));

    const auto more = time_crystal_checklist(seed, {{0.05, 0.05}}, {0.21}, p, 6, {}, 2);
    REQUIRE(more.runs.size() == 3);
    CHECK(more.runs[0].sz == ev.sz);
    CHECK(more.runs[1].seed.theta == doctest::Approx(2.05));
    CHECK(more.runs[2].UN == doctest::Approx(0.21));
}

TEST_CASE("stroboscopic alternation of successive differences") {
    CHECK(stroboscopic_alternation({0.0, 1.0, 0.5, 1.2, 0.9, 1.0, 1.1}) == 4);
    CHECK(stroboscopic_alternation({0.0}) == 0);
}

TEST_CASE("quantum and classical <Sz> agree over short times at large N") {
    const auto p = ModelParams::from_composite(60, 1.0, 0.2, 1.0, 3.4, 1.0, 0.1);
    const auto q = coherent_sz_trajectory(coherent_state(2.0, -3.0, 60), p, 1, 50);
    const auto c = classical_sz_trajectory({2.0, -3.0}, p, 1, 50);
    REQUIRE(q.size() == 51);
    REQUIRE(c.size() == 51);
    for (std::size_t k = 0; k < q.size(); ++k) {
        CHECK(q[k].t == doctest::Approx(c[k].t));
        CHECK(std::abs(q[k].sz - c[k].sz) < 0.06);
    }
    CHECK_THROWS_AS(coherent_sz_trajectory(coherent_state(2.0, -3.0, 60), p, 1, 7), std::invalid_argument);
}
