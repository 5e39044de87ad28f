#include <algorithm>
#include <sstream>

#include "dimer/runner.hpp"

namespace dimer {

namespace {

OmegaClassification classify_omega(const RunConfig& cfg, double omega,
                                   const std::vector<ClassicalState>& seeds) {
    ModelParams p = cfg.model;
    p.omega = omega;
    OmegaClassification c;
    c.omega = omega;
    c.min_clusters = std::numeric_limits<int>::max();
    c.period2 = true;
    for (const auto& s : seeds) {
        const ClusterReport r = classify_attractor(stroboscopic_map(s, p, cfg.scan.strobe));
        c.kinds.push_back(r.kind);
        c.min_clusters = std::min(c.min_clusters, r.n_clusters);
        c.max_clusters = std::max(c.max_clusters, r.n_clusters);
        c.period2 = c.period2 && r.kind == AttractorKind::Period2;
    }
    return c;
}

}  // namespace

CalibrationResult calibrate_omega(const RunConfig& cfg, const std::vector<double>& omega_grid) {
    if (omega_grid.empty()) throw std::invalid_argument("calibrate_omega: empty omega grid");
    if (!std::is_sorted(omega_grid.begin(), omega_grid.end())) {
        throw std::invalid_argument("calibrate_omega: omega grid must be ascending");
    }
    const auto seeds = uniform_ic_grid(cfg.scan.cal_theta, cfg.scan.cal_phi);

    auto scan = scan_executor<OmegaClassification>(omega_grid.size(), cfg.parallelism, [&](std::size_t i) {
        return classify_omega(cfg, omega_grid[i], seeds);
    });
    if (!scan.failures.empty()) {
        const auto& f = scan.failures.front();
        throw std::runtime_error("calibrate_omega: omega = " + format_double(omega_grid[f.index]) +
                                 " failed: " + f.message);
    }

    CalibrationResult result;
    for (auto& r : scan.results) result.per_omega.push_back(std::move(*r));

    // Contiguous runs of period-2 grid points.
    for (std::size_t i = 0; i < result.per_omega.size();) {
        if (!result.per_omega[i].period2) {
            ++i;
            continue;
        }
        std::size_t k = i;
        while (k + 1 < result.per_omega.size() && result.per_omega[k + 1].period2) ++k;
        OmegaWindow w{result.per_omega[i].omega, result.per_omega[k].omega, false};
        const double mid = 0.5 * (w.low + w.high);
        w.midpoint_period2 = (k == i) || classify_omega(cfg, mid, seeds).period2;
        result.windows.push_back(w);
        i = k + 1;
    }

    const OmegaWindow* best = nullptr;
    for (const auto& w : result.windows) {
        if (w.midpoint_period2 && (!best || w.high - w.low > best->high - best->low)) best = &w;
    }
    if (best) result.omega_chosen = 0.5 * (best->low + best->high);

    if (!result.omega_chosen) {
        std::ostringstream msg;
        msg << "calibrate_omega: no period-2 window on the grid;";
        for (const auto& c : result.per_omega) {
            msg << " omega=" << format_double(c.omega) << ":" << c.min_clusters;
            if (c.max_clusters != c.min_clusters) msg << "-" << c.max_clusters;
            msg << " clusters";
        }
        throw CalibrationError(msg.str(), std::move(result));
    }
    return result;
}

}  // namespace dimer
