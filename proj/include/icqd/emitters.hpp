#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icqd/archive.hpp"
#include "icqd/backend.hpp"
#include "icqd/codec.hpp"
#include "icqd/promptgen.hpp"
#include "icqd/types.hpp"

namespace icqd {

enum class EmitterKind { InContext, IsoLine, RandomSampling };

struct EmitterConfig {
    EmitterKind kind = EmitterKind::InContext;
    int batch_size = 10;
    // in-context generator
    int context_size = 20;
    TemplateKind template_kind = TemplateKind::QD;
    ContextStructure structure = ContextStructure::SortCellDistance;
    FeatureQueryStrategy query_strategy = FeatureQueryStrategy::Empty;
    // iso-line spreads, as fractions of the per-dimension parameter range
    double sigma_iso = 0.01;
    double sigma_line = 0.2;
};

struct EmitStats {
    int backend_calls = 0;
    int parse_failures = 0;
    int backend_errors = 0;
    // Empty query strategy ran short of empty cells this generation
    bool query_fallback = false;
};

struct EmittedBatch {
    // surviving candidates in batch-slot order; failed slots drop out
    std::vector<std::vector<double>> params;
    EmitStats stats;
};

// Every random decision is drawn from a stream derived from
// (run_seed, generation, slot), so batches are reproducible regardless of
// thread count or completion arrival order. Generation-scoped draws (the
// feature-query batch) use a slot tag no batch index can collide with.
inline constexpr std::uint64_t kGenerationStream = 0xFFFFFFFFull;

// the feature-query batch one generation of the in-context emitter targets
FeatureQueries generation_queries(const GridArchive& archive, const EmitterConfig& config,
                                  std::uint64_t run_seed, std::uint64_t generation);

// One slot's prompt exactly as the emitter sends it; also drives the
// prompt-rendering debug subcommand.
struct SlotPrompt {
    PromptSpec spec;
    std::string prompt;
    std::vector<double> query_features;  // sampled for every slot; sorting may use it
};

SlotPrompt build_slot_prompt(const GridArchive& archive, const EmitterConfig& config,
                             const SolutionCodecs& codecs,
                             const std::vector<double>& query_features,
                             std::uint64_t run_seed, std::uint64_t generation, int slot);

EmittedBatch emit_incontext(const GridArchive& archive, const EmitterConfig& config,
                            CompletionBackend& backend, const CompletionSettings& sampling,
                            const SolutionCodecs& codecs, std::uint64_t run_seed,
                            std::uint64_t generation, int threads = 1);

EmittedBatch emit_incontext_serial(const GridArchive& archive, const EmitterConfig& config,
                                   CompletionBackend& backend,
                                   const CompletionSettings& sampling,
                                   const SolutionCodecs& codecs, std::uint64_t run_seed,
                                   std::uint64_t generation);

EmittedBatch emit_isoline(const GridArchive& archive, const EmitterConfig& config,
                          const Box& param_bounds, std::uint64_t run_seed,
                          std::uint64_t generation, int threads = 1);

EmittedBatch emit_isoline_serial(const GridArchive& archive, const EmitterConfig& config,
                                 const Box& param_bounds, std::uint64_t run_seed,
                                 std::uint64_t generation);

EmittedBatch emit_random(const Box& param_bounds, int batch_size, std::uint64_t run_seed,
                         std::uint64_t generation);

std::string to_string(EmitterKind k);
EmitterKind emitter_from_string(const std::string& s);

}  // namespace icqd
