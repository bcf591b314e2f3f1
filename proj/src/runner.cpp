#include "icqd/runner.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <system_error>

#include "icqd/config.hpp"

namespace icqd {

namespace {

namespace fs = std::filesystem;

// shortest round-trip decimal form, locale-independent
std::string fmt_double(double v) {
    char buf[40];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

struct RunLogs {
    std::ofstream metrics;
    std::ofstream timings;

    explicit RunLogs(const fs::path& dir) {
        metrics.open(dir / "metrics.csv");
        timings.open(dir / "timings.csv");
        if (!metrics || !timings)
            throw std::runtime_error("run_experiment: cannot open log files under " +
                                     dir.string());
        metrics << metrics_csv_header() << '\n';
        timings << "generation,wall_seconds\n";
    }

    // flushed per generation so an aborted run keeps everything before it
    void append(const MetricsRow& row) {
        metrics << metrics_csv_row(row) << '\n' << std::flush;
        timings << row.generation << ',' << fmt_double(row.wall_seconds) << '\n'
                << std::flush;
    }
};

}  // namespace

void validate(const RunConfig& config) {
    const auto bad = [](const std::string& what) {
        throw std::invalid_argument("invalid config: " + what);
    };
    if (config.task.dim == 0) bad("task.dim must be >= 1");
    if (config.task.name != "sphere" && config.task.name != "rastrigin" &&
        config.task.name != "arm")
        bad("task.name must be one of sphere|rastrigin|arm");
    if (config.resolution < 1) bad("archive.resolution must be >= 1");
    if (config.generations < 0) bad("run.generations must be >= 0");
    if (config.init_random < 1) bad("run.init_random must be >= 1");
    if (config.codec_levels < 2) bad("run.codec_levels must be >= 2");
    if (config.emitter.batch_size < 1) bad("emitter.batch_size must be >= 1");
    if (config.emitter.context_size < 1) bad("emitter.context_size must be >= 1");
    const long long cells =
        static_cast<long long>(config.resolution) * config.resolution;
    if (config.emitter.context_size > cells)
        bad("emitter.context_size exceeds the archive cell count");
    if (config.emitter.sigma_iso < 0.0 || config.emitter.sigma_line < 0.0)
        bad("emitter spreads must be non-negative");
    if (config.backend.kind == BackendKind::RemoteCompletion &&
        config.backend.remote.base_url.empty() &&
        config.emitter.kind == EmitterKind::InContext)
        bad("backend.base_url required for the remote backend");
    if (config.backend.oracle_k < 1) bad("backend.oracle_k must be >= 1");
    if (config.backend.sampling.max_new_tokens < 1)
        bad("backend.max_new_tokens must be >= 1");
    if (config.backend.sampling.temperature < 0.0)
        bad("backend.temperature must be non-negative");
}

std::unique_ptr<CompletionBackend> make_backend(const BackendSettings& settings) {
    if (settings.kind == BackendKind::ScriptedOracle)
        return std::make_unique<ScriptedOracle>(settings.oracle_k);
    return std::make_unique<RemoteCompletionClient>(settings.remote);
}

RunResult run_experiment(const RunConfig& config) {
    validate(config);
    const TaskSpec task =
        make_task(config.task.name, config.task.dim, config.task.optimum_shift);
    const SolutionCodecs codecs =
        make_codecs(task.param_bounds, task.feature_bounds, task.fitness_floor,
                    task.fitness_ceiling, config.codec_levels);

    std::unique_ptr<CompletionBackend> backend;
    if (config.emitter.kind == EmitterKind::InContext)
        backend = make_backend(config.backend);

    std::unique_ptr<RunLogs> logs;
    if (!config.output_dir.empty()) {
        fs::create_directories(config.output_dir);
        logs = std::make_unique<RunLogs>(config.output_dir);
        std::ofstream cfg(fs::path(config.output_dir) / "config.json");
        cfg << config_to_json_string(config) << '\n';
    }

    RunResult result{GridArchive(task.feature_bounds, config.resolution), {}};
    GridArchive& archive = result.archive;
    double running_max = -std::numeric_limits<double>::infinity();
    long long evaluations = 0;

    const auto run_generation = [&](std::uint64_t generation, const EmittedBatch& batch) {
        const std::vector<EvaluatedSolution> evaluated =
            evaluate_batch(task, batch.params, config.threads);
        for (const EvaluatedSolution& sol : evaluated) {
            archive.try_add(sol);
            if (sol.fitness > running_max) running_max = sol.fitness;
        }
        evaluations += static_cast<long long>(evaluated.size());

        const ArchiveMetrics m = archive.metrics(task.fitness_floor);
        MetricsRow row;
        row.generation = static_cast<int>(generation);
        row.evaluations = evaluations;
        row.qd_score = m.qd_score;
        row.qd_score_raw = m.qd_score_raw;
        row.coverage = m.coverage;
        row.max_fitness = running_max;
        row.parse_failures = batch.stats.parse_failures;
        row.backend_errors = batch.stats.backend_errors;
        return row;
    };

    // generation 0: random initialization
    auto tick = std::chrono::steady_clock::now();
    {
        const EmittedBatch init = emit_random(task.param_bounds, config.init_random,
                                              config.seed, 0);
        MetricsRow row = run_generation(0, init);
        row.wall_seconds = elapsed_seconds(tick);
        result.history.push_back(row);
        if (logs) logs->append(row);
    }

    for (int g = 1; g <= config.generations; ++g) {
        tick = std::chrono::steady_clock::now();
        const auto generation = static_cast<std::uint64_t>(g);
        EmittedBatch batch;
        if (archive.coverage() == 0) {
            // nothing to build on yet; keep seeding randomly
            batch = emit_random(task.param_bounds, config.emitter.batch_size, config.seed,
                                generation);
        } else {
            switch (config.emitter.kind) {
                case EmitterKind::InContext:
                    batch = emit_incontext(archive, config.emitter, *backend,
                                           config.backend.sampling, codecs, config.seed,
                                           generation, config.threads);
                    break;
                case EmitterKind::IsoLine:
                    batch = emit_isoline(archive, config.emitter, task.param_bounds,
                                         config.seed, generation, config.threads);
                    break;
                case EmitterKind::RandomSampling:
                    batch = emit_random(task.param_bounds, config.emitter.batch_size,
                                        config.seed, generation);
                    break;
            }
        }

        MetricsRow row = run_generation(generation, batch);
        row.wall_seconds = elapsed_seconds(tick);
        result.history.push_back(row);
        if (logs) logs->append(row);

        // a fully errored batch means the backend is down; everything up to
        // and including this generation is already on disk
        if (batch.stats.backend_errors == config.emitter.batch_size)
            throw BackendError("completion backend unavailable: every slot in generation " +
                               std::to_string(g) + " failed");
    }

    if (!config.output_dir.empty()) {
        std::ofstream dump(fs::path(config.output_dir) / "archive.jsonl");
        archive.dump(dump);
    }
    return result;
}

std::vector<SweepEntry> run_sweep(const RunConfig& base, const SweepAxes& axes,
                                  const std::string& sweep_dir) {
    fs::create_directories(sweep_dir);

    // an empty axis contributes the base value and no name fragment
    const auto one_or = [](auto axis, auto base_value) {
        using T = decltype(base_value);
        if (axis.empty()) return std::vector<std::pair<T, bool>>{{base_value, false}};
        std::vector<std::pair<T, bool>> out;
        for (const T& v : axis) out.emplace_back(v, true);
        return out;
    };

    std::vector<SweepEntry> entries;
    for (const auto& [task, task_named] : one_or(axes.tasks, base.task.name))
        for (const auto& [tmpl, tmpl_named] : one_or(axes.templates, base.emitter.template_kind))
            for (const auto& [structure, structure_named] :
                 one_or(axes.structures, base.emitter.structure))
                for (const auto& [ctx, ctx_named] :
                     one_or(axes.context_sizes, base.emitter.context_size))
                    for (const auto& [res, res_named] :
                         one_or(axes.resolutions, base.resolution))
                        for (const auto& [seed, seed_named] : one_or(axes.seeds, base.seed)) {
                            RunConfig config = base;
                            config.task.name = task;
                            config.emitter.template_kind = tmpl;
                            config.emitter.structure = structure;
                            config.emitter.context_size = ctx;
                            config.resolution = res;
                            config.seed = seed;

                            std::string name;
                            const auto add = [&name](const std::string& part) {
                                if (!name.empty()) name += '_';
                                name += part;
                            };
                            if (task_named) add("task-" + task);
                            if (tmpl_named) add("tmpl-" + to_string(tmpl));
                            if (structure_named) add("struct-" + to_string(structure));
                            if (ctx_named) add("ctx-" + std::to_string(ctx));
                            if (res_named) add("res-" + std::to_string(res));
                            if (seed_named) add("seed-" + std::to_string(seed));
                            if (name.empty()) name = "base";

                            config.output_dir = (fs::path(sweep_dir) / name).string();
                            SweepEntry entry{name, "ok", "", config};
                            std::cout << "[sweep] " << name << std::endl;
                            try {
                                run_experiment(config);
                            } catch (const std::exception& e) {
                                entry.status = "failed";
                                entry.error = e.what();
                            }
                            entries.push_back(std::move(entry));
                        }

    std::ofstream manifest(fs::path(sweep_dir) / "sweep_manifest.json");
    manifest << sweep_manifest_json(entries) << '\n';
    return entries;
}

std::string metrics_csv_header() {
    return "generation,evaluations,qd_score,qd_score_raw,coverage,max_fitness,"
           "parse_failures,backend_errors";
}

std::string metrics_csv_row(const MetricsRow& row) {
    std::string out = std::to_string(row.generation);
    out += ',' + std::to_string(row.evaluations);
    out += ',' + fmt_double(row.qd_score);
    out += ',' + fmt_double(row.qd_score_raw);
    out += ',' + std::to_string(row.coverage);
    out += ',' + fmt_double(row.max_fitness);
    out += ',' + std::to_string(row.parse_failures);
    out += ',' + std::to_string(row.backend_errors);
    return out;
}

std::string to_string(BackendKind k) {
    return k == BackendKind::ScriptedOracle ? "scripted" : "remote";
}

BackendKind backend_from_string(const std::string& s) {
    if (s == "scripted") return BackendKind::ScriptedOracle;
    if (s == "remote") return BackendKind::RemoteCompletion;
    throw std::invalid_argument("unknown backend '" + s + "' (scripted|remote)");
}

}  // namespace icqd
