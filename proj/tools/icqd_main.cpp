// Command-line front end: run experiments, sweep configurations, and inspect
// archives/prompts produced by them.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "icqd/config.hpp"
#include "icqd/emitters.hpp"
#include "icqd/runner.hpp"
#include "icqd/tasks.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::string task, algorithm, template_name, structure, query_strategy, backend;
    std::string output_dir, base_url, model;
    int dim = -1, generations = -1, resolution = -1, context_size = -1;
    int batch_size = -1, threads = -1;
    long long seed = -1;
};

// shared flag set for run/sweep: config file first, flags override
void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config_path, "config file (JSON; see README)");
    cmd->add_option("--task", o.task, "task name: sphere|rastrigin|arm");
    cmd->add_option("--dim", o.dim, "task parameter count");
    cmd->add_option("--algorithm", o.algorithm, "emitter: incontext|isoline|random");
    cmd->add_option("--seed", o.seed, "run seed");
    cmd->add_option("--generations", o.generations, "generation count");
    cmd->add_option("--resolution", o.resolution, "archive resolution per feature axis");
    cmd->add_option("--context-size", o.context_size, "elites per prompt context");
    cmd->add_option("--template", o.template_name, "prompt template: lmx|fitness|feature|qd");
    cmd->add_option("--structure", o.structure,
                    "context order: fitness|cell_distance|random");
    cmd->add_option("--query-strategy", o.query_strategy, "feature queries: empty|uniform");
    cmd->add_option("--backend", o.backend, "completion backend: scripted|remote");
    cmd->add_option("--base-url", o.base_url, "remote backend base URL");
    cmd->add_option("--model", o.model, "remote backend model name");
    cmd->add_option("--batch-size", o.batch_size, "candidates per generation");
    cmd->add_option("--threads", o.threads, "worker threads (1 = serial reference path)");
    cmd->add_option("-o,--output-dir", o.output_dir, "directory for metrics and dumps");
}

icqd::RunConfig resolve_config(const Overrides& o) {
    icqd::RunConfig config;
    if (!o.config_path.empty()) config = icqd::load_config(o.config_path);
    if (!o.task.empty()) config.task.name = o.task;
    if (o.dim >= 0) config.task.dim = static_cast<std::size_t>(o.dim);
    if (!o.algorithm.empty()) config.emitter.kind = icqd::emitter_from_string(o.algorithm);
    if (o.seed >= 0) config.seed = static_cast<std::uint64_t>(o.seed);
    if (o.generations >= 0) config.generations = o.generations;
    if (o.resolution >= 0) config.resolution = o.resolution;
    if (o.context_size >= 0) config.emitter.context_size = o.context_size;
    if (!o.template_name.empty())
        config.emitter.template_kind = icqd::template_from_string(o.template_name);
    if (!o.structure.empty())
        config.emitter.structure = icqd::structure_from_string(o.structure);
    if (!o.query_strategy.empty())
        config.emitter.query_strategy = icqd::strategy_from_string(o.query_strategy);
    if (!o.backend.empty()) config.backend.kind = icqd::backend_from_string(o.backend);
    if (!o.base_url.empty()) config.backend.remote.base_url = o.base_url;
    if (!o.model.empty()) config.backend.remote.model = o.model;
    if (o.batch_size >= 0) config.emitter.batch_size = o.batch_size;
    if (o.threads >= 0) config.threads = o.threads;
    if (!o.output_dir.empty()) config.output_dir = o.output_dir;
    return config;
}

icqd::GridArchive restore_archive(const icqd::RunConfig& config,
                                  const std::string& archive_path) {
    const icqd::TaskSpec task =
        icqd::make_task(config.task.name, config.task.dim, config.task.optimum_shift);
    std::ifstream in(archive_path);
    if (!in) throw std::runtime_error("cannot read archive dump: " + archive_path);
    return icqd::GridArchive::restore(
        in, task.feature_bounds, std::vector<int>(2, config.resolution));
}

int cmd_run(const Overrides& o) {
    const icqd::RunConfig config = resolve_config(o);
    const icqd::RunResult result = icqd::run_experiment(config);
    const icqd::MetricsRow& last = result.history.back();
    std::cout << "evaluations=" << last.evaluations << " coverage=" << last.coverage
              << " qd_score=" << last.qd_score << " max_fitness=" << last.max_fitness
              << '\n';
    if (!config.output_dir.empty())
        std::cout << "results written to " << config.output_dir << '\n';
    return 0;
}

int cmd_sweep(const Overrides& o, const std::string& axes_path,
              const std::string& sweep_dir) {
    icqd::RunConfig base = resolve_config(o);
    base.output_dir.clear();  // per-run dirs are assigned by the sweep
    const icqd::SweepAxes axes =
        icqd::load_axes(axes_path.empty() ? o.config_path : axes_path);
    const auto entries = icqd::run_sweep(base, axes, sweep_dir);
    int failed = 0;
    for (const auto& entry : entries)
        if (entry.status != "ok") ++failed;
    std::cout << entries.size() << " runs, " << failed << " failed; manifest in "
              << sweep_dir << "/sweep_manifest.json\n";
    return failed == 0 ? 0 : 1;
}

int cmd_dump_archive(const Overrides& o, const std::string& archive_path, bool summary) {
    const icqd::RunConfig config = resolve_config(o);
    const icqd::GridArchive archive = restore_archive(config, archive_path);
    if (summary) {
        const icqd::TaskSpec task =
            icqd::make_task(config.task.name, config.task.dim, config.task.optimum_shift);
        const icqd::ArchiveMetrics m = archive.metrics(task.fitness_floor);
        std::cout << "cells=" << archive.num_cells() << " coverage=" << m.coverage
                  << " qd_score=" << m.qd_score << " qd_score_raw=" << m.qd_score_raw
                  << " max_fitness=" << m.max_fitness << '\n';
    } else {
        archive.dump(std::cout);
    }
    return 0;
}

int cmd_render_prompt(const Overrides& o, const std::string& archive_path,
                      int generation, int slot) {
    const icqd::RunConfig config = resolve_config(o);
    if (slot < 0 || slot >= config.emitter.batch_size)
        throw std::invalid_argument("slot must be in [0, batch_size)");
    const icqd::GridArchive archive = restore_archive(config, archive_path);
    const icqd::TaskSpec task =
        icqd::make_task(config.task.name, config.task.dim, config.task.optimum_shift);
    const icqd::SolutionCodecs codecs =
        icqd::make_codecs(task.param_bounds, task.feature_bounds, task.fitness_floor,
                          task.fitness_ceiling, config.codec_levels);
    const icqd::FeatureQueries queries = icqd::generation_queries(
        archive, config.emitter, config.seed, static_cast<std::uint64_t>(generation));
    const icqd::SlotPrompt sp = icqd::build_slot_prompt(
        archive, config.emitter, codecs, queries.queries[slot], config.seed,
        static_cast<std::uint64_t>(generation), slot);
    // raw bytes only: output is diffed against golden files
    std::cout << sp.prompt << std::flush;
    return 0;
}

int cmd_validate(const Overrides& o) {
    const icqd::RunConfig config = resolve_config(o);
    icqd::validate(config);
    std::cout << "ok\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"In-context quality-diversity optimization harness"};
    app.require_subcommand(1);

    Overrides o;
    std::string archive_path, axes_path, sweep_dir;
    bool summary = false;
    int generation = 1, slot = 0;

    CLI::App* run = app.add_subcommand("run", "run one experiment");
    add_override_flags(run, o);

    CLI::App* sweep = app.add_subcommand("sweep", "run a cartesian configuration sweep");
    add_override_flags(sweep, o);
    sweep->add_option("--axes", axes_path,
                      "axes file (defaults to the config's \"sweep\" section)");
    sweep->add_option("--sweep-dir", sweep_dir, "directory for all sweep outputs")
        ->required();

    CLI::App* dump = app.add_subcommand("dump-archive", "re-serialize or summarize a dump");
    add_override_flags(dump, o);
    dump->add_option("--archive", archive_path, "archive dump (one record per line)")
        ->required();
    dump->add_flag("--summary", summary, "print metrics instead of records");

    CLI::App* render =
        app.add_subcommand("render-prompt", "print one slot's prompt, byte-exact");
    add_override_flags(render, o);
    render->add_option("--archive", archive_path, "archive dump to build the prompt from")
        ->required();
    render->add_option("--generation", generation, "generation number (default 1)");
    render->add_option("--slot", slot, "batch slot (default 0)");

    CLI::App* validate = app.add_subcommand("validate-config", "check a config and exit");
    add_override_flags(validate, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(o);
        if (sweep->parsed()) return cmd_sweep(o, axes_path, sweep_dir);
        if (dump->parsed()) return cmd_dump_archive(o, archive_path, summary);
        if (render->parsed()) return cmd_render_prompt(o, archive_path, generation, slot);
        if (validate->parsed()) return cmd_validate(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
