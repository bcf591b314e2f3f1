#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "icqd/archive.hpp"
#include "icqd/backend.hpp"
#include "icqd/emitters.hpp"
#include "icqd/tasks.hpp"

namespace icqd {

enum class BackendKind { ScriptedOracle, RemoteCompletion };

struct BackendSettings {
    BackendKind kind = BackendKind::ScriptedOracle;
    int oracle_k = 3;
    RemoteConfig remote;
    CompletionSettings sampling;
};

struct TaskSettings {
    std::string name = "sphere";
    std::size_t dim = 5;
    double optimum_shift = 2.048;
};

struct RunConfig {
    TaskSettings task;
    EmitterConfig emitter;
    BackendSettings backend;
    int resolution = 20;  // per feature axis
    int generations = 1000;
    int init_random = 10;  // random evaluations before generation 1
    std::uint64_t seed = 1;
    int codec_levels = 1000;
    int threads = 1;  // <= 1 selects the serial reference paths
    std::string output_dir;  // empty: keep results in memory only
};

// One row per generation, plus row 0 for initialization. Wall-clock seconds
// are kept out of metrics.csv (it must be bit-reproducible) and written to
// timings.csv instead.
struct MetricsRow {
    int generation = 0;
    long long evaluations = 0;  // cumulative
    double qd_score = 0.0;
    double qd_score_raw = 0.0;
    long long coverage = 0;
    double max_fitness = 0.0;  // running best over the whole run
    int parse_failures = 0;
    int backend_errors = 0;
    double wall_seconds = 0.0;
};

struct RunResult {
    GridArchive archive;
    std::vector<MetricsRow> history;
};

// throws std::invalid_argument with the offending field named
void validate(const RunConfig& config);

std::unique_ptr<CompletionBackend> make_backend(const BackendSettings& settings);

RunResult run_experiment(const RunConfig& config);

// Sweep axes: an empty list leaves the base config's value untouched; a
// non-empty list becomes one cartesian dimension.
struct SweepAxes {
    std::vector<std::string> tasks;
    std::vector<TemplateKind> templates;
    std::vector<ContextStructure> structures;
    std::vector<int> context_sizes;
    std::vector<int> resolutions;
    std::vector<std::uint64_t> seeds;
};

struct SweepEntry {
    std::string dir;     // subdirectory under the sweep root
    std::string status;  // "ok" or "failed"
    std::string error;
    RunConfig config;
};

std::vector<SweepEntry> run_sweep(const RunConfig& base, const SweepAxes& axes,
                                  const std::string& sweep_dir);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);

std::string to_string(BackendKind k);
BackendKind backend_from_string(const std::string& s);

}  // namespace icqd
