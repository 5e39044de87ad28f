#pragma once

// Configuration, parameter scans, Floquet-map cache, CSV/manifest output and
// the command-line front end.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dimer/meanfield.hpp"
#include "dimer/parallel.hpp"
#include "dimer/phase_space.hpp"
#include "dimer/propagation.hpp"

namespace dimer {

using json = nlohmann::json;

struct ScanConfig {
    std::vector<double> UN_grid;  // composite U*N values, in J
    std::vector<int> N_list;      // empty: use model.N
    int m_max = 200;              // correlation lags
    int ic_theta = 16;            // classical bifurcation seeds
    int ic_phi = 16;
    int cal_theta = 2;            // calibration seeds (one full scan per omega)
    int cal_phi = 4;
    StroboscopicOptions strobe;
    std::vector<double> omega_grid;
    HusimiResolution husimi;
    int coherent_periods = 40;
    std::vector<int> snapshots{0, 1, 2, 6, 7, 8};
    ClassicalState seed{2.0, -3.0};
    std::vector<SeedOffset> seed_offsets{{-0.05, -0.05}, {0.05, 0.05}};
    std::vector<double> UN_perturbations{0.19, 0.21};
};

struct RunConfig {
    ModelParams model = ModelParams::from_composite(10, 1.0, 0.2, 1.0, 3.4, 1.0, 0.1);
    StepControl step;
    ScanConfig scan;
    std::filesystem::path output_dir = "out";
    std::filesystem::path cache_dir;  // empty: no cache
    int parallelism = 1;

    // Throws std::invalid_argument on violated invariants.
    void validate() const;
    std::vector<int> n_values() const;
};

RunConfig default_config();

// Grids may be given as arrays or as {"start", "stop", "step"} (inclusive).
// Unknown keys are rejected so that typos do not silently fall back to defaults.
RunConfig config_from_json(const json& j);
json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);

// Applies "a.b.c=value" (value parsed as JSON, else taken as a string).
void apply_override(json& j, const std::string& assignment);

std::vector<double> expand_grid(double start, double stop, double step);

// ---------------------------------------------------------------- scans

struct ScanFailure {
    std::size_t index = 0;
    std::string message;
};

template <typename T>
struct ScanResult {
    std::vector<std::optional<T>> results;  // by item index
    std::vector<ScanFailure> failures;      // ascending index
};

// Evaluates fn(i) for every item on `parallelism` workers. Output order is
// the item order; a throwing item is recorded and does not stop the others.
template <typename T, typename Fn>
ScanResult<T> scan_executor(std::size_t count, int parallelism, Fn&& fn) {
    ScanResult<T> out;
    out.results.resize(count);
    std::vector<std::optional<std::string>> errors(count);
    parallel_for(count, parallelism, [&](std::size_t i) {
        try {
            out.results[i].emplace(fn(i));
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < count; ++i) {
        if (errors[i]) out.failures.push_back({i, *errors[i]});
    }
    return out;
}

// ---------------------------------------------------------------- calibration

struct OmegaClassification {
    double omega = 0.0;
    std::vector<AttractorKind> kinds;  // one per seed
    int min_clusters = 0;
    int max_clusters = 0;
    bool period2 = false;  // every seed lands on a period-2 attractor
};

struct OmegaWindow {
    double low = 0.0;
    double high = 0.0;
    bool midpoint_period2 = false;
};

struct CalibrationResult {
    std::vector<OmegaClassification> per_omega;
    std::vector<OmegaWindow> windows;
    std::optional<double> omega_chosen;  // midpoint of the widest verified window
};

class CalibrationError : public std::runtime_error {
public:
    CalibrationError(const std::string& what, CalibrationResult result)
        : std::runtime_error(what), result_(std::move(result)) {}
    const CalibrationResult& result() const { return result_; }

private:
    CalibrationResult result_;
};

// Reference parameters are taken from cfg.model with omega replaced by each
// grid value. Throws CalibrationError when no period-2 window exists.
CalibrationResult calibrate_omega(const RunConfig& cfg, const std::vector<double>& omega_grid);

// ---------------------------------------------------------------- cache

class FloquetCache {
public:
    explicit FloquetCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    // Loads the cached map for ctx or builds (and stores) it. A stored map whose
    // header disagrees with its fingerprint is reported in `notes` and rebuilt.
    // Safe to call concurrently for different parameter sets.
    FloquetMap get(const PropagationContext& ctx, int threads);

    std::filesystem::path path_for(const ModelParams& params, const StepControl& step) const;
    int hits() const { return hits_; }
    int misses() const { return misses_; }
    const std::vector<std::string>& notes() const { return notes_; }

private:
    void record(bool hit, std::string note = {});

    std::filesystem::path dir_;
    std::mutex mutex_;  // get() may be called from scan workers
    int hits_ = 0;
    int misses_ = 0;
    std::vector<std::string> notes_;
};

// ---------------------------------------------------------------- output

// Shortest round-trip text of a double ("%.17g").
std::string format_double(double v);

class CsvWriter {
public:
    CsvWriter(std::filesystem::path path, const std::vector<std::string>& header);
    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(const std::string& v);
    void end_row();
    // Writes the file; nothing appears on disk before this.
    std::filesystem::path close();

private:
    std::filesystem::path path_;
    std::string text_;
    bool row_open_ = false;
};

std::string sha256_file(const std::filesystem::path& path);

struct Manifest {
    std::string command;
    json config;
    double wall_seconds = 0.0;
    std::vector<std::filesystem::path> artifacts;
    int cache_hits = 0;
    int cache_misses = 0;
    std::vector<ScanFailure> failures;
    std::vector<std::string> notes;
    json summary = json::object();

    // Writes manifest.json into `dir`, checksumming every artifact.
    std::filesystem::path write(const std::filesystem::path& dir) const;
};

// ---------------------------------------------------------------- CLI

// Entry point of the command-line tool; returns the process exit status.
int run_command(int argc, const char* const* argv);

}  // namespace dimer
