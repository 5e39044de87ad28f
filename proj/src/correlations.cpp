#include "dimer/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dimer {

std::vector<double> CorrelationSeries::real_deviation() const {
    std::vector<double> out;
    out.reserve(values.size());
    for (const cplx& c : values) out.push_back(c.real() - asymptote);
    return out;
}

std::vector<cplx> correlation_from(const FloquetMap& map, const MatrixC& x0, const MatrixC& probe,
                                   int m_max) {
    if (m_max < 0) throw std::invalid_argument("correlation_from: m_max must be >= 0");
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(m_max) + 1);
    MatrixC x = x0;
    for (int m = 0; m <= m_max; ++m) {
        out.push_back((probe * x).trace());
        if (m < m_max) x = apply_floquet(map, x);
    }
    return out;
}

CorrelationSeries two_time_sz(const FloquetMap& map, const DensityMatrix& rho_s,
                              const OperatorSet& ops, int m_max) {
    if (m_max < 0) throw std::invalid_argument("two_time_sz: m_max must be >= 0");
    if (rho_s.matrix.rows() != map.dim()) {
        throw std::invalid_argument("two_time_sz: rho_s does not match the map dimension");
    }
    const double fixed_point_defect = max_abs(apply_floquet(map, rho_s.matrix) - rho_s.matrix);
    if (fixed_point_defect > 1e-6) {
        std::ostringstream msg;
        msg << "two_time_sz: rho_s is not a fixed point of the map (defect " << fixed_point_defect
            << ")";
        throw std::invalid_argument(msg.str());
    }
    const MatrixC& sz = ops.Sz.matrix;

    CorrelationSeries series;
    series.sz_mean = (sz * rho_s.matrix).trace().real();
    series.asymptote = series.sz_mean * series.sz_mean;
    MatrixC x = sz * rho_s.matrix;
    for (int m = 0; m <= m_max; ++m) {
        series.m.push_back(m);
        series.values.push_back((sz * x).trace());
        series.trace_along.push_back(x.trace().real());
        if (m < m_max) x = apply_floquet(map, x);
    }
    return series;
}

int alternation_length(std::span<const double> x) {
    int len = 0;
    for (std::size_t m = 1; m < x.size(); ++m) {
        const bool flips = (x[m] > 0.0 && x[m - 1] < 0.0) || (x[m] < 0.0 && x[m - 1] > 0.0);
        if (!flips) break;
        len = static_cast<int>(m);
    }
    return len;
}

namespace {

// Power |X_k|^2 of the zero-padded DFT on 2*len bins.
std::vector<double> padded_power(std::span<const double> x) {
    const std::size_t n = x.size();
    const std::size_t bins = 2 * n;
    std::vector<double> power(bins, 0.0);
    for (std::size_t k = 0; k < bins; ++k) {
        cplx acc = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            // exact reduction of k*m mod bins keeps the phase accurate
            const double angle = -kTwoPi * static_cast<double>((k * m) % bins) / static_cast<double>(bins);
            acc += x[m] * cplx(std::cos(angle), std::sin(angle));
        }
        power[k] = std::norm(acc);
    }
    return power;
}

}  // namespace

double halffreq_power(std::span<const double> x) {
    if (x.empty()) return 0.0;
    const auto power = padded_power(x);
    double total = 0.0;
    for (double p : power) total += p;
    if (total == 0.0) return 0.0;
    return power[x.size()] / total;
}

bool halffreq_dominant(std::span<const double> x) {
    if (x.empty()) return false;
    const auto power = padded_power(x);
    const double half = power[x.size()];
    if (half == 0.0) return false;
    for (std::size_t k = 0; k < power.size(); ++k) {
        if (k != x.size() && power[k] > half) return false;
    }
    return true;
}

double fitted_envelope_rate(std::span<const double> x, int first, double floor_rel) {
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return 0.0;
    const double floor = floor_rel * peak;
    std::size_t last = 0;
    for (std::size_t m = 0; m < x.size(); ++m) {
        if (std::abs(x[m]) > floor) last = m;
    }
    const std::size_t lo = static_cast<std::size_t>(std::max(0, first));
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (std::size_t m = lo; m <= last && m < x.size(); ++m) {
        if (std::abs(x[m]) <= floor) continue;
        const double t = static_cast<double>(m);
        const double y = std::log(std::abs(x[m]));
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++count;
    }
    if (count < 2) return 0.0;
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    return std::exp(slope);
}

DoublingReport doubling_diagnostics(const CorrelationSeries& series, const SpectrumResult& spec) {
    if (series.values.size() < 9) {
        throw std::invalid_argument("doubling_diagnostics: series too short (m_max < 8)");
    }
    const auto dev = series.real_deviation();
    const int m_max = static_cast<int>(dev.size()) - 1;

    DoublingReport report;
    report.alternation_length = alternation_length(dev);
    report.halffreq_power = halffreq_power(dev);
    report.halffreq_dominant = halffreq_dominant(dev);
    report.predicted_decay = std::abs(subdominant_mode(spec).lambda2);
    // Skip the first tenth of the window, where faster modes still contribute.
    report.fitted_decay = fitted_envelope_rate(dev, std::max(1, m_max / 10));
    return report;
}

}  // namespace dimer
