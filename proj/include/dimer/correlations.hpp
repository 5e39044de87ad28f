#pragma once

// Steady-state two-time correlation <Sz(mT) Sz(0)>_s and its period-doubling
// diagnostics.

#include <span>
#include <vector>

#include "dimer/spectral.hpp"

namespace dimer {

struct CorrelationSeries {
    std::vector<int> m;
    std::vector<cplx> values;  // C(m) = tr(Sz P_F^m (Sz rho_s))
    double sz_mean = 0.0;      // tr(Sz rho_s)
    double asymptote = 0.0;    // sz_mean^2
    std::vector<double> trace_along;  // tr X_m, conserved by P_F

    std::vector<double> real_deviation() const;  // Re C(m) - asymptote
};

// Throws std::invalid_argument if rho_s is not a fixed point of `map` within 1e-6.
CorrelationSeries two_time_sz(const FloquetMap& map, const DensityMatrix& rho_s,
                              const OperatorSet& ops, int m_max);

// Same iteration from an arbitrary initial operator X_0.
std::vector<cplx> correlation_from(const FloquetMap& map, const MatrixC& x0, const MatrixC& probe,
                                   int m_max);

// Largest M such that x[m] and x[m-1] have opposite, nonzero signs for all 1 <= m <= M.
int alternation_length(std::span<const double> x);

// Fraction of the spectral power of x (zero-padded DFT on 2*len bins) that sits
// at the half-drive frequency, i.e. the (-1)^m component.
double halffreq_power(std::span<const double> x);

// True when the (-1)^m bin carries the largest power of that DFT.
bool halffreq_dominant(std::span<const double> x);

// exp(slope) of a least-squares fit of log|x[m]| over the lags from `first`
// up to the last lag above `floor_rel` * max|x|.
double fitted_envelope_rate(std::span<const double> x, int first, double floor_rel = 1e-9);

struct DoublingReport {
    int alternation_length = 0;
    double halffreq_power = 0.0;
    bool halffreq_dominant = false;
    double predicted_decay = 0.0;  // |lambda_2|
    double fitted_decay = 0.0;     // envelope rate of |C(m) - C(inf)|
};

// Throws std::invalid_argument when the series has fewer than 9 lags.
DoublingReport doubling_diagnostics(const CorrelationSeries& series, const SpectrumResult& spec);

}  // namespace dimer
