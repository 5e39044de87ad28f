#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dimer/runner.hpp"

namespace dimer {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw std::invalid_argument("config: unknown key " + where + "." + key);
    }
}

std::vector<double> read_grid(const json& j, const std::string& name) {
    if (j.is_array()) return j.get<std::vector<double>>();
    if (j.is_object()) {
        reject_unknown(j, {"start", "stop", "step"}, name);
        return expand_grid(j.at("start").get<double>(), j.at("stop").get<double>(),
                           j.at("step").get<double>());
    }
    throw std::invalid_argument("config: " + name + " must be an array or {start, stop, step}");
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::vector<double> expand_grid(double start, double stop, double step) {
    if (!(step > 0.0) || !(stop >= start)) {
        throw std::invalid_argument("grid: need step > 0 and stop >= start");
    }
    // Nodes are start + k*step so that they do not accumulate rounding drift.
    const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (long long k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
    return out;
}

void RunConfig::validate() const {
    model.validate();
    step.validate();
    if (parallelism < 1) throw std::invalid_argument("config: parallelism must be >= 1");
    if (scan.UN_grid.empty()) throw std::invalid_argument("config: scan.U_grid is empty");
    if (scan.omega_grid.empty()) throw std::invalid_argument("config: scan.omega_grid is empty");
    if (scan.m_max < 0) throw std::invalid_argument("config: scan.m_max must be >= 0");
    if (scan.ic_theta < 1 || scan.ic_phi < 1) throw std::invalid_argument("config: scan.ic_grid is empty");
    if (scan.cal_theta < 1 || scan.cal_phi < 1) {
        throw std::invalid_argument("config: scan.calibration_ic_grid is empty");
    }
    if (scan.coherent_periods < 1) throw std::invalid_argument("config: scan.coherent_periods must be >= 1");
    for (int n : scan.N_list) {
        if (n < 1) throw std::invalid_argument("config: scan.N_list entries must be >= 1");
    }
    if (output_dir.empty()) throw std::invalid_argument("config: output_dir is empty");
}

std::vector<int> RunConfig::n_values() const {
    return scan.N_list.empty() ? std::vector<int>{model.N} : scan.N_list;
}

RunConfig default_config() {
    RunConfig cfg;
    cfg.scan.UN_grid = expand_grid(0.0, 0.4, 0.02);
    cfg.scan.omega_grid = expand_grid(0.5, 5.0, 0.05);
    return cfg;
}

RunConfig config_from_json(const json& j) {
    reject_unknown(j, {"model", "step", "scan", "output_dir", "cache_dir", "parallelism"}, "root");
    RunConfig cfg = default_config();

    if (j.contains("model")) {
        const json& m = j.at("model");
        reject_unknown(m, {"N", "J", "UN", "mu0", "mu1", "omega", "gammaN"}, "model");
        int N = cfg.model.N;
        double J = cfg.model.J, UN = cfg.model.UN(), mu0 = cfg.model.mu0, mu1 = cfg.model.mu1;
        double omega = cfg.model.omega, gammaN = cfg.model.gammaN();
        read_if(m, "N", N);
        read_if(m, "J", J);
        read_if(m, "UN", UN);
        read_if(m, "mu0", mu0);
        read_if(m, "mu1", mu1);
        read_if(m, "omega", omega);
        read_if(m, "gammaN", gammaN);
        if (N < 1) throw std::invalid_argument("config: model.N must be >= 1");
        cfg.model = ModelParams::from_composite(N, J, UN, mu0, mu1, omega, gammaN);
    }
    if (j.contains("step")) {
        const json& s = j.at("step");
        reject_unknown(s, {"steps_per_period", "convergence_check", "convergence_tol"}, "step");
        read_if(s, "steps_per_period", cfg.step.steps_per_period);
        read_if(s, "convergence_check", cfg.step.convergence_check);
        read_if(s, "convergence_tol", cfg.step.convergence_tol);
    }
    if (j.contains("scan")) {
        const json& s = j.at("scan");
        reject_unknown(s,
                       {"U_grid", "N_list", "m_max", "ic_grid", "calibration_ic_grid", "m_transient", "m_record",
                        "mf_steps_per_period", "omega_grid", "husimi_grid", "coherent_periods",
                        "snapshots", "seed", "seed_offsets", "UN_perturbations"},
                       "scan");
        if (s.contains("U_grid")) cfg.scan.UN_grid = read_grid(s.at("U_grid"), "scan.U_grid");
        if (s.contains("omega_grid")) cfg.scan.omega_grid = read_grid(s.at("omega_grid"), "scan.omega_grid");
        read_if(s, "N_list", cfg.scan.N_list);
        read_if(s, "m_max", cfg.scan.m_max);
        if (s.contains("ic_grid")) {
            const auto g = s.at("ic_grid").get<std::vector<int>>();
            if (g.size() != 2) throw std::invalid_argument("config: scan.ic_grid must be [n_theta, n_phi]");
            cfg.scan.ic_theta = g[0];
            cfg.scan.ic_phi = g[1];
        }
        if (s.contains("calibration_ic_grid")) {
            const auto g = s.at("calibration_ic_grid").get<std::vector<int>>();
            if (g.size() != 2) {
                throw std::invalid_argument("config: scan.calibration_ic_grid must be [n_theta, n_phi]");
            }
            cfg.scan.cal_theta = g[0];
            cfg.scan.cal_phi = g[1];
        }
        read_if(s, "m_transient", cfg.scan.strobe.m_transient);
        read_if(s, "m_record", cfg.scan.strobe.m_record);
        read_if(s, "mf_steps_per_period", cfg.scan.strobe.steps_per_period);
        if (s.contains("husimi_grid")) {
            const auto g = s.at("husimi_grid").get<std::vector<int>>();
            if (g.size() != 2) throw std::invalid_argument("config: scan.husimi_grid must be [n_theta, n_phi]");
            cfg.scan.husimi = {g[0], g[1]};
        }
        read_if(s, "coherent_periods", cfg.scan.coherent_periods);
        read_if(s, "snapshots", cfg.scan.snapshots);
        if (s.contains("seed")) {
            const auto g = s.at("seed").get<std::vector<double>>();
            if (g.size() != 2) throw std::invalid_argument("config: scan.seed must be [theta, phi]");
            cfg.scan.seed = {g[0], g[1]};
        }
        if (s.contains("seed_offsets")) {
            cfg.scan.seed_offsets.clear();
            for (const auto& o : s.at("seed_offsets")) {
                const auto g = o.get<std::vector<double>>();
                if (g.size() != 2) throw std::invalid_argument("config: seed offsets are [dtheta, dphi]");
                cfg.scan.seed_offsets.push_back({g[0], g[1]});
            }
        }
        read_if(s, "UN_perturbations", cfg.scan.UN_perturbations);
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("cache_dir")) cfg.cache_dir = j.at("cache_dir").get<std::string>();
    read_if(j, "parallelism", cfg.parallelism);
    cfg.validate();
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    json offsets = json::array();
    for (const auto& o : cfg.scan.seed_offsets) offsets.push_back({o.dtheta, o.dphi});
    return {
        {"model",
         {{"N", cfg.model.N},
          {"J", cfg.model.J},
          {"UN", cfg.model.UN()},
          {"mu0", cfg.model.mu0},
          {"mu1", cfg.model.mu1},
          {"omega", cfg.model.omega},
          {"gammaN", cfg.model.gammaN()}}},
        {"step",
         {{"steps_per_period", cfg.step.steps_per_period},
          {"convergence_check", cfg.step.convergence_check},
          {"convergence_tol", cfg.step.convergence_tol}}},
        {"scan",
         {{"U_grid", cfg.scan.UN_grid},
          {"N_list", cfg.scan.N_list},
          {"m_max", cfg.scan.m_max},
          {"ic_grid", {cfg.scan.ic_theta, cfg.scan.ic_phi}},
          {"calibration_ic_grid", {cfg.scan.cal_theta, cfg.scan.cal_phi}},
          {"m_transient", cfg.scan.strobe.m_transient},
          {"m_record", cfg.scan.strobe.m_record},
          {"mf_steps_per_period", cfg.scan.strobe.steps_per_period},
          {"omega_grid", cfg.scan.omega_grid},
          {"husimi_grid", {cfg.scan.husimi.n_theta, cfg.scan.husimi.n_phi}},
          {"coherent_periods", cfg.scan.coherent_periods},
          {"snapshots", cfg.scan.snapshots},
          {"seed", {cfg.scan.seed.theta, cfg.scan.seed.phi}},
          {"seed_offsets", offsets},
          {"UN_perturbations", cfg.scan.UN_perturbations}}},
        {"output_dir", cfg.output_dir.string()},
        {"cache_dir", cfg.cache_dir.string()},
        {"parallelism", cfg.parallelism},
    };
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config: malformed JSON in " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("override must look like key.path=value: " + assignment);
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &j;
    std::istringstream parts(key);
    std::string part;
    std::vector<std::string> path;
    while (std::getline(parts, part, '.')) path.push_back(part);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!node->is_object()) *node = json::object();
        node = &(*node)[path[i]];
    }
    if (!node->is_object()) *node = json::object();
    (*node)[path.back()] = value;
}

}  // namespace dimer
