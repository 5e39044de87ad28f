#include <chrono>
#include <cstdlib>
#include <iostream>
#include <numeric>

#include "CLI11.hpp"

#include "dimer/correlations.hpp"
#include "dimer/runner.hpp"
#include "dimer/spectral.hpp"

namespace dimer {

namespace fs = std::filesystem;

namespace {

ModelParams with_N(const ModelParams& p, int N) {
    return ModelParams::from_composite(N, p.J, p.UN(), p.mu0, p.mu1, p.omega, p.gammaN());
}

ModelParams with_UN(const ModelParams& p, double UN) {
    return ModelParams::from_composite(p.N, p.J, UN, p.mu0, p.mu1, p.omega, p.gammaN());
}

// Workers go to the items when there are several, to the item otherwise.
int inner_threads(const RunConfig& cfg, std::size_t items) { return items > 1 ? 1 : cfg.parallelism; }

struct Session {
    const RunConfig& cfg;
    FloquetCache cache;
    Manifest manifest;

    fs::path out(const std::string& name) const { return cfg.output_dir / name; }
    void add(CsvWriter& w) { manifest.artifacts.push_back(w.close()); }
};

struct SteadyPieces {
    PropagationContext ctx;
    FloquetMap map;
    SpectrumResult spec;
    DensityMatrix rho_s;
};

SteadyPieces steady_pieces(Session& s, const ModelParams& params, int threads) {
    SteadyPieces p{PropagationContext::make(params, s.cfg.step), {}, {}, {}};
    p.map = s.cache.get(p.ctx, threads);
    p.spec = eig_floquet(p.map);
    p.rho_s = steady_state(p.spec, p.ctx.ops.basis);
    return p;
}

void cmd_spectrum(Session& s) {
    const auto Ns = s.cfg.n_values();
    const int threads = inner_threads(s.cfg, Ns.size());
    auto scan = scan_executor<SpectrumResult>(Ns.size(), s.cfg.parallelism, [&](std::size_t i) {
        const auto ctx = PropagationContext::make(with_N(s.cfg.model, Ns[i]), s.cfg.step);
        return eig_floquet(s.cache.get(ctx, threads), false);
    });
    s.manifest.failures = scan.failures;

    CsvWriter gap(s.out("gap.csv"), {"N", "lambda2_re", "lambda2_im", "abs_lambda2", "gap"});
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        if (!scan.results[i]) continue;
        const auto& spec = *scan.results[i];
        CsvWriter w(s.out("spectrum_N" + std::to_string(Ns[i]) + ".csv"), {"re", "im", "abs"});
        for (const cplx& l : spec.rapidities) {
            w.cell(l.real()).cell(l.imag()).cell(std::abs(l));
            w.end_row();
        }
        s.add(w);
        const auto mode = subdominant_mode(spec);
        gap.cell(Ns[i]).cell(mode.lambda2.real()).cell(mode.lambda2.imag());
        gap.cell(std::abs(mode.lambda2)).cell(mode.gap_to_minus_one);
        gap.end_row();
    }
    s.add(gap);
}

void cmd_steady_state(Session& s) {
    const auto p = steady_pieces(s, s.cfg.model, s.cfg.parallelism);
    CsvWriter pops(s.out("steady_state.csv"), {"n", "s_n", "population"});
    const Eigen::Index d = p.rho_s.matrix.rows();
    for (Eigen::Index n = 0; n < d; ++n) {
        pops.cell(static_cast<long long>(n)).cell(p.ctx.ops.sz_weights[static_cast<std::size_t>(n)]);
        pops.cell(p.rho_s.matrix(n, n).real());
        pops.end_row();
    }
    s.add(pops);
    CsvWriter mat(s.out("steady_state_matrix.csv"), {"i", "j", "re", "im"});
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            mat.cell(static_cast<long long>(i)).cell(static_cast<long long>(j));
            mat.cell(p.rho_s.matrix(i, j).real()).cell(p.rho_s.matrix(i, j).imag());
            mat.end_row();
        }
    }
    s.add(mat);
    s.manifest.summary = {{"min_eigenvalue", p.rho_s.min_eigenvalue()},
                          {"sz_mean", (p.ctx.ops.Sz.matrix * p.rho_s.matrix).trace().real()},
                          {"leading_defect", std::abs(p.spec.rapidities.front() - 1.0)}};
}

void cmd_correlate(Session& s) {
    const auto p = steady_pieces(s, s.cfg.model, s.cfg.parallelism);
    const auto series = two_time_sz(p.map, p.rho_s, p.ctx.ops, s.cfg.scan.m_max);
    CsvWriter w(s.out("correlation.csv"), {"m", "re", "im", "asymptote"});
    for (std::size_t k = 0; k < series.values.size(); ++k) {
        w.cell(series.m[k]).cell(series.values[k].real()).cell(series.values[k].imag());
        w.cell(series.asymptote);
        w.end_row();
    }
    s.add(w);
    const auto mode = subdominant_mode(p.spec);
    s.manifest.summary = {{"lambda2", {mode.lambda2.real(), mode.lambda2.imag()}},
                          {"gap_to_minus_one", mode.gap_to_minus_one}};
    if (series.values.size() >= 9) {
        const auto r = doubling_diagnostics(series, p.spec);
        s.manifest.summary["alternation_length"] = r.alternation_length;
        s.manifest.summary["halffreq_power"] = r.halffreq_power;
        s.manifest.summary["halffreq_dominant"] = r.halffreq_dominant;
        s.manifest.summary["fitted_decay"] = r.fitted_decay;
        s.manifest.summary["predicted_decay"] = r.predicted_decay;
    }
}

void cmd_bifurcation_classical(Session& s) {
    const auto& grid = s.cfg.scan.UN_grid;
    const auto ics = uniform_ic_grid(s.cfg.scan.ic_theta, s.cfg.scan.ic_phi);
    auto scan = scan_executor<StroboscopicRecord>(grid.size() * ics.size(), s.cfg.parallelism,
                                                  [&](std::size_t k) {
        return stroboscopic_map(ics[k % ics.size()], with_UN(s.cfg.model, grid[k / ics.size()]),
                                s.cfg.scan.strobe);
    });
    s.manifest.failures = scan.failures;

    CsvWriter samples(s.out("classical_bifurcation.csv"), {"U", "sample"});
    CsvWriter clusters(s.out("classical_clusters.csv"),
                       {"U", "n_clusters", "center_1", "center_2", "max_diameter"});
    for (std::size_t k = 0; k < scan.results.size(); ++k) {
        if (!scan.results[k]) continue;
        const auto& rec = *scan.results[k];
        const double UN = grid[k / ics.size()];
        for (double x : rec.samples) {
            samples.cell(UN).cell(x);
            samples.end_row();
        }
        const auto rep = classify_attractor(rec);
        clusters.cell(UN).cell(rep.n_clusters);
        for (std::size_t c = 0; c < 2; ++c) {
            if (c < rep.centers.size()) {
                clusters.cell(rep.centers[c]);
            } else {
                clusters.cell(std::string());
            }
        }
        clusters.cell(rep.max_diameter);
        clusters.end_row();
    }
    s.add(samples);
    s.add(clusters);
}

void cmd_bifurcation_quantum(Session& s) {
    const auto& grid = s.cfg.scan.UN_grid;
    const int threads = inner_threads(s.cfg, grid.size());
    auto scan = scan_executor<QuantumBifurcationSlice>(grid.size(), s.cfg.parallelism, [&](std::size_t i) {
        const ModelParams params = with_UN(s.cfg.model, grid[i]);
        const auto ctx = PropagationContext::make(params, s.cfg.step);
        const FloquetMap map = s.cache.get(ctx, threads);
        return quantum_bifurcation_slice(params, s.cfg.step, threads, &map);
    });
    s.manifest.failures = scan.failures;

    CsvWriter w(s.out("quantum_bifurcation.csv"), {"U", "s_n", "population"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!scan.results[i]) continue;
        const auto& slice = *scan.results[i];
        for (std::size_t n = 0; n < slice.populations.size(); ++n) {
            w.cell(grid[i]).cell(slice.sz_values[n]).cell(slice.populations[n]);
            w.end_row();
        }
    }
    s.add(w);
}

void write_husimi(Session& s, const HusimiGrid& g, const std::string& name) {
    CsvWriter w(s.out(name), {"theta", "phi", "Q"});
    for (Eigen::Index i = 0; i < g.Q.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.Q.cols(); ++j) {
            w.cell(g.theta_axis[static_cast<std::size_t>(i)]).cell(g.phi_axis[static_cast<std::size_t>(j)]);
            w.cell(g.Q(i, j));
            w.end_row();
        }
    }
    s.add(w);
}

void cmd_husimi(Session& s) {
    const auto p = steady_pieces(s, s.cfg.model, s.cfg.parallelism);
    const auto g = husimi(p.rho_s, s.cfg.scan.husimi.n_theta, s.cfg.scan.husimi.n_phi, s.cfg.parallelism);
    write_husimi(s, g, "husimi.csv");
    s.manifest.summary = {{"normalization", g.normalization()}};
}

void cmd_evolve_coherent(Session& s) {
    const auto& sc = s.cfg.scan;
    const auto state0 = coherent_state(sc.seed.theta, sc.seed.phi, s.cfg.model.N);
    const auto ev = stroboscopic_coherent_evolution(state0, s.cfg.model, sc.coherent_periods,
                                                    sc.snapshots, s.cfg.step, sc.husimi, s.cfg.parallelism);
    CsvWriter w(s.out("sz_series.csv"), {"m", "sz"});
    for (std::size_t m = 0; m < ev.sz.size(); ++m) {
        w.cell(static_cast<long long>(m)).cell(ev.sz[m]);
        w.end_row();
    }
    s.add(w);
    for (std::size_t k = 0; k < ev.snapshots.size(); ++k) {
        write_husimi(s, ev.snapshots[k], "husimi_m" + std::to_string(ev.snapshot_times[k]) + ".csv");
    }

    // Quantum and classical <Sz>(t) over the first two periods.
    const int samples = std::gcd(s.cfg.step.steps_per_period, std::gcd(sc.strobe.steps_per_period, 100));
    const auto q = coherent_sz_trajectory(state0, s.cfg.model, 2, samples, s.cfg.step);
    const auto c = classical_sz_trajectory(sc.seed, s.cfg.model, 2, samples, sc.strobe.steps_per_period);
    CsvWriter corr(s.out("correspondence.csv"), {"t", "sz_quantum", "sz_classical"});
    double worst = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        corr.cell(q[k].t).cell(q[k].sz).cell(c[k].sz);
        corr.end_row();
        worst = std::max(worst, std::abs(q[k].sz - c[k].sz));
    }
    s.add(corr);
    s.manifest.summary = {{"alternation_length", stroboscopic_alternation(ev.sz)},
                          {"max_quantum_classical_deviation", worst}};
}

void cmd_timecrystal(Session& s) {
    const auto& sc = s.cfg.scan;
    const auto report = time_crystal_checklist(sc.seed, sc.seed_offsets, sc.UN_perturbations,
                                               s.cfg.model, sc.coherent_periods, s.cfg.step,
                                               s.cfg.parallelism);
    CsvWriter w(s.out("timecrystal.csv"),
                {"run_id", "seed_theta", "seed_phi", "UN", "alternation_length", "locked"});
    CsvWriter series(s.out("timecrystal_sz.csv"), {"run_id", "m", "sz"});
    for (const auto& r : report.runs) {
        w.cell(r.run_id).cell(r.seed.theta).cell(r.seed.phi).cell(r.UN).cell(r.alternation_length);
        w.cell(r.locked ? 1 : 0);
        w.end_row();
        for (std::size_t m = 0; m < r.sz.size(); ++m) {
            series.cell(r.run_id).cell(static_cast<long long>(m)).cell(r.sz[m]);
            series.end_row();
        }
    }
    s.add(w);
    s.add(series);
    s.manifest.summary = {{"all_locked", report.all_locked}, {"min_alternation", report.min_alternation}};
}

void write_calibration(Session& s, const CalibrationResult& r) {
    CsvWriter w(s.out("calibration.csv"), {"omega", "period2", "min_clusters", "max_clusters", "kinds"});
    for (const auto& c : r.per_omega) {
        std::string kinds;
        for (std::size_t k = 0; k < c.kinds.size(); ++k) kinds += (k ? ";" : "") + to_string(c.kinds[k]);
        w.cell(c.omega).cell(c.period2 ? 1 : 0).cell(c.min_clusters).cell(c.max_clusters).cell(kinds);
        w.end_row();
    }
    s.add(w);
    CsvWriter win(s.out("calibration_windows.csv"), {"low", "high", "midpoint_period2"});
    for (const auto& x : r.windows) {
        win.cell(x.low).cell(x.high).cell(x.midpoint_period2 ? 1 : 0);
        win.end_row();
    }
    s.add(win);
    if (r.omega_chosen) s.manifest.summary = {{"omega_chosen", *r.omega_chosen}};
}

void cmd_calibrate_omega(Session& s) {
    try {
        write_calibration(s, calibrate_omega(s.cfg, s.cfg.scan.omega_grid));
    } catch (const CalibrationError& e) {
        write_calibration(s, e.result());
        throw;
    }
}

using Command = void (*)(Session&);

const std::vector<std::pair<std::string, Command>>& commands() {
    static const std::vector<std::pair<std::string, Command>> table{
        {"spectrum", cmd_spectrum},
        {"steady-state", cmd_steady_state},
        {"correlate", cmd_correlate},
        {"bifurcation-classical", cmd_bifurcation_classical},
        {"bifurcation-quantum", cmd_bifurcation_quantum},
        {"husimi", cmd_husimi},
        {"evolve-coherent", cmd_evolve_coherent},
        {"timecrystal", cmd_timecrystal},
        {"calibrate-omega", cmd_calibrate_omega},
    };
    return table;
}

}  // namespace

int run_command(int argc, const char* const* argv) {
    CLI::App app{"Driven dissipative boson dimer: Floquet spectra, correlations, phase space"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> sets;
    app.add_option("-c,--config", config_path, "JSON run configuration");
    app.add_option("--set", sets, "Override a config key, e.g. --set scan.m_max=400");

    // Shorthand flags for the most common keys.
    const std::vector<std::pair<std::string, std::string>> shorthands{
        {"--N", "model.N"},           {"--J", "model.J"},
        {"--UN", "model.UN"},         {"--mu0", "model.mu0"},
        {"--mu1", "model.mu1"},       {"--omega", "model.omega"},
        {"--gammaN", "model.gammaN"}, {"--steps", "step.steps_per_period"},
        {"--m-max", "scan.m_max"},    {"--output-dir", "output_dir"},
        {"--cache-dir", "cache_dir"}, {"--parallelism", "parallelism"},
    };
    std::vector<std::string> shorthand_values(shorthands.size());
    for (std::size_t i = 0; i < shorthands.size(); ++i) {
        app.add_option(shorthands[i].first, shorthand_values[i], "Sets " + shorthands[i].second);
    }

    std::string chosen;
    for (const auto& [name, fn] : commands()) {
        app.add_subcommand(name)->callback([&chosen, name = name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    RunConfig cfg;
    try {
        json j = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::invalid_argument("config: cannot open " + config_path);
            j = json::parse(in, nullptr, false);
            if (j.is_discarded()) throw std::invalid_argument("config: malformed JSON in " + config_path);
        }
        if (const char* env = std::getenv("DIMER_CACHE_DIR"); env && *env) j["cache_dir"] = env;
        for (std::size_t i = 0; i < shorthands.size(); ++i) {
            if (!shorthand_values[i].empty()) apply_override(j, shorthands[i].second + "=" + shorthand_values[i]);
        }
        for (const auto& a : sets) apply_override(j, a);
        cfg = config_from_json(j);
        fs::create_directories(cfg.output_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    Session session{cfg, FloquetCache(cfg.cache_dir), {}};
    session.manifest.command = chosen;
    session.manifest.config = config_to_json(cfg);
    const auto start = std::chrono::steady_clock::now();
    int status = 0;
    try {
        for (const auto& [name, fn] : commands()) {
            if (name == chosen) fn(session);
        }
        if (!session.manifest.failures.empty()) {
            for (const auto& f : session.manifest.failures) {
                std::cerr << "error: item " << f.index << ": " << f.message << '\n';
            }
            status = 3;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << chosen << ": " << e.what() << '\n';
        session.manifest.notes.push_back(std::string("error: ") + e.what());
        status = 2;
    }
    session.manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    session.manifest.cache_hits = session.cache.hits();
    session.manifest.cache_misses = session.cache.misses();
    for (const auto& n : session.cache.notes()) {
        std::cerr << "note: " << n << '\n';
        session.manifest.notes.push_back(n);
    }
    try {
        std::cout << session.manifest.write(cfg.output_dir).string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: manifest: " << e.what() << '\n';
        return 2;
    }
    return status;
}

}  // namespace dimer
