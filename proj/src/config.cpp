#include "icqd/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace icqd {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& what) {
    throw std::invalid_argument("config: " + what);
}

json section(const json& root, const std::string& name) {
    if (!root.contains(name)) return json::object();
    if (!root.at(name).is_object()) bad("'" + name + "' must be an object");
    return root.at(name);
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) { known = true; break; }
        if (!known) bad("unknown key '" + key + "' in '" + where + "'");
    }
}

template <class T>
T field(const json& obj, const std::string& where, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        bad("'" + where + "." + key + "' has the wrong type");
    }
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        bad(std::string("not valid JSON: ") + e.what());
    }
    if (!root.is_object()) bad("top level must be an object");
    reject_unknown_keys(root, "<top>",
                        {"task", "archive", "emitter", "backend", "run", "sweep"});

    RunConfig config;

    const json task = section(root, "task");
    reject_unknown_keys(task, "task", {"name", "dim", "optimum_shift"});
    config.task.name = field<std::string>(task, "task", "name", config.task.name);
    config.task.dim = field<std::size_t>(task, "task", "dim", config.task.dim);
    config.task.optimum_shift =
        field<double>(task, "task", "optimum_shift", config.task.optimum_shift);

    const json archive = section(root, "archive");
    reject_unknown_keys(archive, "archive", {"resolution"});
    config.resolution = field<int>(archive, "archive", "resolution", config.resolution);

    const json emitter = section(root, "emitter");
    reject_unknown_keys(emitter, "emitter",
                        {"kind", "batch_size", "context_size", "template", "structure",
                         "query_strategy", "sigma_iso", "sigma_line"});
    config.emitter.kind = emitter_from_string(
        field<std::string>(emitter, "emitter", "kind", to_string(config.emitter.kind)));
    config.emitter.batch_size =
        field<int>(emitter, "emitter", "batch_size", config.emitter.batch_size);
    config.emitter.context_size =
        field<int>(emitter, "emitter", "context_size", config.emitter.context_size);
    config.emitter.template_kind = template_from_string(field<std::string>(
        emitter, "emitter", "template", to_string(config.emitter.template_kind)));
    config.emitter.structure = structure_from_string(field<std::string>(
        emitter, "emitter", "structure", to_string(config.emitter.structure)));
    config.emitter.query_strategy = strategy_from_string(field<std::string>(
        emitter, "emitter", "query_strategy", to_string(config.emitter.query_strategy)));
    config.emitter.sigma_iso =
        field<double>(emitter, "emitter", "sigma_iso", config.emitter.sigma_iso);
    config.emitter.sigma_line =
        field<double>(emitter, "emitter", "sigma_line", config.emitter.sigma_line);

    const json backend = section(root, "backend");
    reject_unknown_keys(backend, "backend",
                        {"kind", "oracle_k", "base_url", "model", "auth_env",
                         "timeout_seconds", "retries", "backoff_seconds",
                         "max_concurrency", "max_new_tokens", "temperature", "stop"});
    config.backend.kind = backend_from_string(
        field<std::string>(backend, "backend", "kind", to_string(config.backend.kind)));
    config.backend.oracle_k =
        field<int>(backend, "backend", "oracle_k", config.backend.oracle_k);
    config.backend.remote.base_url =
        field<std::string>(backend, "backend", "base_url", config.backend.remote.base_url);
    config.backend.remote.model =
        field<std::string>(backend, "backend", "model", config.backend.remote.model);
    config.backend.remote.auth_env =
        field<std::string>(backend, "backend", "auth_env", config.backend.remote.auth_env);
    config.backend.remote.timeout_seconds = field<double>(
        backend, "backend", "timeout_seconds", config.backend.remote.timeout_seconds);
    config.backend.remote.retries =
        field<int>(backend, "backend", "retries", config.backend.remote.retries);
    config.backend.remote.backoff_seconds = field<double>(
        backend, "backend", "backoff_seconds", config.backend.remote.backoff_seconds);
    config.backend.remote.max_concurrency = field<int>(
        backend, "backend", "max_concurrency", config.backend.remote.max_concurrency);
    config.backend.sampling.max_new_tokens = field<int>(
        backend, "backend", "max_new_tokens", config.backend.sampling.max_new_tokens);
    config.backend.sampling.temperature = field<double>(
        backend, "backend", "temperature", config.backend.sampling.temperature);
    config.backend.sampling.stop = field<std::vector<std::string>>(
        backend, "backend", "stop", config.backend.sampling.stop);

    const json run = section(root, "run");
    reject_unknown_keys(run, "run",
                        {"generations", "init_random", "seed", "codec_levels", "threads",
                         "output_dir"});
    config.generations = field<int>(run, "run", "generations", config.generations);
    config.init_random = field<int>(run, "run", "init_random", config.init_random);
    config.seed = field<std::uint64_t>(run, "run", "seed", config.seed);
    config.codec_levels = field<int>(run, "run", "codec_levels", config.codec_levels);
    config.threads = field<int>(run, "run", "threads", config.threads);
    config.output_dir = field<std::string>(run, "run", "output_dir", config.output_dir);

    // "sweep" is validated by parse_axes when the sweep subcommand uses it
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json_string(const RunConfig& config) {
    ordered_json root;
    root["task"] = {{"name", config.task.name},
                    {"dim", config.task.dim},
                    {"optimum_shift", config.task.optimum_shift}};
    root["archive"] = {{"resolution", config.resolution}};
    root["emitter"] = {{"kind", to_string(config.emitter.kind)},
                       {"batch_size", config.emitter.batch_size},
                       {"context_size", config.emitter.context_size},
                       {"template", to_string(config.emitter.template_kind)},
                       {"structure", to_string(config.emitter.structure)},
                       {"query_strategy", to_string(config.emitter.query_strategy)},
                       {"sigma_iso", config.emitter.sigma_iso},
                       {"sigma_line", config.emitter.sigma_line}};
    root["backend"] = {{"kind", to_string(config.backend.kind)},
                       {"oracle_k", config.backend.oracle_k},
                       {"base_url", config.backend.remote.base_url},
                       {"model", config.backend.remote.model},
                       {"auth_env", config.backend.remote.auth_env},
                       {"timeout_seconds", config.backend.remote.timeout_seconds},
                       {"retries", config.backend.remote.retries},
                       {"backoff_seconds", config.backend.remote.backoff_seconds},
                       {"max_concurrency", config.backend.remote.max_concurrency},
                       {"max_new_tokens", config.backend.sampling.max_new_tokens},
                       {"temperature", config.backend.sampling.temperature},
                       {"stop", config.backend.sampling.stop}};
    root["run"] = {{"generations", config.generations},
                   {"init_random", config.init_random},
                   {"seed", config.seed},
                   {"codec_levels", config.codec_levels},
                   {"threads", config.threads},
                   {"output_dir", config.output_dir}};
    return root.dump(2);
}

SweepAxes parse_axes(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        bad(std::string("not valid JSON: ") + e.what());
    }
    if (!root.is_object()) bad("top level must be an object");
    // axes may live at the top level or under a "sweep" key of a run config
    const json axes = root.contains("sweep") ? section(root, "sweep") : root;
    if (!root.contains("sweep"))
        reject_unknown_keys(axes, "<axes>",
                            {"tasks", "templates", "structures", "context_sizes",
                             "resolutions", "seeds"});
    else
        reject_unknown_keys(axes, "sweep",
                            {"tasks", "templates", "structures", "context_sizes",
                             "resolutions", "seeds"});

    SweepAxes out;
    out.tasks = field<std::vector<std::string>>(axes, "sweep", "tasks", {});
    for (const std::string& name :
         field<std::vector<std::string>>(axes, "sweep", "templates", {}))
        out.templates.push_back(template_from_string(name));
    for (const std::string& name :
         field<std::vector<std::string>>(axes, "sweep", "structures", {}))
        out.structures.push_back(structure_from_string(name));
    out.context_sizes = field<std::vector<int>>(axes, "sweep", "context_sizes", {});
    out.resolutions = field<std::vector<int>>(axes, "sweep", "resolutions", {});
    out.seeds = field<std::vector<std::uint64_t>>(axes, "sweep", "seeds", {});
    return out;
}

SweepAxes load_axes(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_axes(buf.str());
}

std::string sweep_manifest_json(const std::vector<SweepEntry>& entries) {
    ordered_json manifest = ordered_json::array();
    for (const SweepEntry& entry : entries) {
        ordered_json rec;
        rec["dir"] = entry.dir;
        rec["status"] = entry.status;
        if (!entry.error.empty()) rec["error"] = entry.error;
        rec["config"] = ordered_json::parse(config_to_json_string(entry.config));
        manifest.push_back(std::move(rec));
    }
    return manifest.dump(2);
}

}  // namespace icqd
