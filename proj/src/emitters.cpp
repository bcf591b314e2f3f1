#include "icqd/emitters.hpp"

#include <stdexcept>

namespace icqd {

namespace {

enum class SlotOutcome { Ok, ParseFailure, BackendFailure };

struct SlotResult {
    SlotOutcome outcome = SlotOutcome::BackendFailure;
    std::vector<double> params;
};

// one in-context slot: sample context, build prompt, complete, parse, decode
SlotResult run_incontext_slot(const GridArchive& archive, const EmitterConfig& config,
                              CompletionBackend& backend, const CompletionSettings& sampling,
                              const SolutionCodecs& codecs,
                              const std::vector<double>& query_features,
                              std::uint64_t run_seed, std::uint64_t generation, int slot) {
    const SlotPrompt sp = build_slot_prompt(archive, config, codecs, query_features,
                                            run_seed, generation, slot);
    CompletionRequest request;
    request.prompt = sp.prompt;
    request.max_new_tokens = sampling.max_new_tokens;
    request.temperature = sampling.temperature;
    request.stop = sampling.stop;
    request.seed = derive_seed(run_seed, generation, static_cast<std::uint64_t>(slot));

    SlotResult result;
    std::string completion;
    try {
        completion = backend.complete(request);
    } catch (const BackendError&) {
        result.outcome = SlotOutcome::BackendFailure;
        return result;
    }
    const auto values =
        parse_completion(completion, codecs.params.size(), codecs.levels());
    if (!values) {
        result.outcome = SlotOutcome::ParseFailure;
        return result;
    }
    result.outcome = SlotOutcome::Ok;
    result.params = decode_params(*values, codecs);
    return result;
}

EmittedBatch collect(std::vector<SlotResult> slots, bool query_fallback) {
    EmittedBatch batch;
    batch.stats.backend_calls = static_cast<int>(slots.size());
    batch.stats.query_fallback = query_fallback;
    for (SlotResult& slot : slots) {
        switch (slot.outcome) {
            case SlotOutcome::Ok:
                batch.params.push_back(std::move(slot.params));
                break;
            case SlotOutcome::ParseFailure:
                ++batch.stats.parse_failures;
                break;
            case SlotOutcome::BackendFailure:
                ++batch.stats.backend_errors;
                break;
        }
    }
    return batch;
}

std::vector<double> isoline_child(const GridArchive& archive, const EmitterConfig& config,
                                  const Box& bounds, Rng& rng) {
    const EvaluatedSolution& p1 = archive.sample_one(rng);
    const EvaluatedSolution& p2 = archive.sample_one(rng);
    const double u = rng.normal();
    std::vector<double> child(p1.params.size());
    for (std::size_t d = 0; d < child.size(); ++d) {
        const double v = p1.params[d] + config.sigma_iso * rng.normal() * bounds.span(d) +
                         config.sigma_line * u * (p2.params[d] - p1.params[d]);
        child[d] = bounds.clip(d, v);
    }
    return child;
}

}  // namespace

FeatureQueries generation_queries(const GridArchive& archive, const EmitterConfig& config,
                                  std::uint64_t run_seed, std::uint64_t generation) {
    Rng rng(derive_seed(run_seed, generation, kGenerationStream));
    return feature_query(config.query_strategy, archive,
                         static_cast<std::size_t>(config.batch_size), rng);
}

SlotPrompt build_slot_prompt(const GridArchive& archive, const EmitterConfig& config,
                             const SolutionCodecs& codecs,
                             const std::vector<double>& query_features,
                             std::uint64_t run_seed, std::uint64_t generation, int slot) {
    Rng rng(derive_seed(run_seed, generation, static_cast<std::uint64_t>(slot)));
    std::vector<EvaluatedSolution> elites =
        archive.sample_elites(static_cast<std::size_t>(config.context_size), rng);
    elites = build_context(std::move(elites), config.structure, query_features,
                           archive.feature_bounds(), rng);

    SlotPrompt sp;
    sp.query_features = query_features;
    sp.spec.template_kind = config.template_kind;
    sp.spec.context.reserve(elites.size());
    for (const EvaluatedSolution& e : elites)
        sp.spec.context.push_back(encode_solution(e, codecs));
    if (template_has_fitness(config.template_kind))
        sp.spec.query_fitness = fitness_query(sp.spec.context, codecs.levels());
    if (template_has_features(config.template_kind))
        sp.spec.query_features = encode_features(query_features, codecs);
    sp.prompt = assemble_prompt(sp.spec);
    return sp;
}

EmittedBatch emit_incontext_serial(const GridArchive& archive, const EmitterConfig& config,
                                   CompletionBackend& backend,
                                   const CompletionSettings& sampling,
                                   const SolutionCodecs& codecs, std::uint64_t run_seed,
                                   std::uint64_t generation) {
    const FeatureQueries queries = generation_queries(archive, config, run_seed, generation);
    std::vector<SlotResult> slots(config.batch_size);
    for (int s = 0; s < config.batch_size; ++s)
        slots[s] = run_incontext_slot(archive, config, backend, sampling, codecs,
                                      queries.queries[s], run_seed, generation, s);
    return collect(std::move(slots), queries.fell_back);
}

EmittedBatch emit_incontext(const GridArchive& archive, const EmitterConfig& config,
                            CompletionBackend& backend, const CompletionSettings& sampling,
                            const SolutionCodecs& codecs, std::uint64_t run_seed,
                            std::uint64_t generation, int threads) {
    if (threads <= 1)
        return emit_incontext_serial(archive, config, backend, sampling, codecs, run_seed,
                                     generation);
    const FeatureQueries queries = generation_queries(archive, config, run_seed, generation);
    std::vector<SlotResult> slots(config.batch_size);
#ifdef _OPENMP
    // dynamic schedule: remote completion latency varies per slot
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (int s = 0; s < config.batch_size; ++s)
        slots[s] = run_incontext_slot(archive, config, backend, sampling, codecs,
                                      queries.queries[s], run_seed, generation, s);
    return collect(std::move(slots), queries.fell_back);
}

EmittedBatch emit_isoline_serial(const GridArchive& archive, const EmitterConfig& config,
                                 const Box& param_bounds, std::uint64_t run_seed,
                                 std::uint64_t generation) {
    EmittedBatch batch;
    batch.params.resize(config.batch_size);
    for (int s = 0; s < config.batch_size; ++s) {
        Rng rng(derive_seed(run_seed, generation, static_cast<std::uint64_t>(s)));
        batch.params[s] = isoline_child(archive, config, param_bounds, rng);
    }
    return batch;
}

EmittedBatch emit_isoline(const GridArchive& archive, const EmitterConfig& config,
                          const Box& param_bounds, std::uint64_t run_seed,
                          std::uint64_t generation, int threads) {
    if (threads <= 1)
        return emit_isoline_serial(archive, config, param_bounds, run_seed, generation);
    EmittedBatch batch;
    batch.params.resize(config.batch_size);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
    for (int s = 0; s < config.batch_size; ++s) {
        Rng rng(derive_seed(run_seed, generation, static_cast<std::uint64_t>(s)));
        batch.params[s] = isoline_child(archive, config, param_bounds, rng);
    }
    return batch;
}

EmittedBatch emit_random(const Box& param_bounds, int batch_size, std::uint64_t run_seed,
                         std::uint64_t generation) {
    EmittedBatch batch;
    batch.params.resize(batch_size);
    for (int s = 0; s < batch_size; ++s) {
        Rng rng(derive_seed(run_seed, generation, static_cast<std::uint64_t>(s)));
        std::vector<double> x(param_bounds.dims());
        for (std::size_t d = 0; d < x.size(); ++d)
            x[d] = rng.uniform(param_bounds.lo[d], param_bounds.hi[d]);
        batch.params[s] = std::move(x);
    }
    return batch;
}

std::string to_string(EmitterKind k) {
    switch (k) {
        case EmitterKind::InContext: return "incontext";
        case EmitterKind::IsoLine: return "isoline";
        case EmitterKind::RandomSampling: return "random";
    }
    return "incontext";
}

EmitterKind emitter_from_string(const std::string& s) {
    if (s == "incontext") return EmitterKind::InContext;
    if (s == "isoline") return EmitterKind::IsoLine;
    if (s == "random") return EmitterKind::RandomSampling;
    throw std::invalid_argument("unknown emitter '" + s + "' (incontext|isoline|random)");
}

}  // namespace icqd
