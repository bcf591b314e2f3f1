#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icqd/archive.hpp"
#include "icqd/codec.hpp"
#include "icqd/rng.hpp"
#include "icqd/types.hpp"

namespace icqd {

// Prompt line layouts: parameters only; fitness-prefixed; feature-prefixed;
// fitness and features.
enum class TemplateKind { LMX, Fitness, Feature, QD };

// Ordering of the context lines relative to the query.
enum class ContextStructure { SortFitness, SortCellDistance, Random };

// How per-slot feature queries are chosen from the grid.
enum class FeatureQueryStrategy { Empty, Uniform };

constexpr bool template_has_fitness(TemplateKind t) {
    return t == TemplateKind::Fitness || t == TemplateKind::QD;
}
constexpr bool template_has_features(TemplateKind t) {
    return t == TemplateKind::Feature || t == TemplateKind::QD;
}

// A fully determined prompt: ordered encoded context plus the query values
// the chosen template actually references (and only those).
struct PromptSpec {
    TemplateKind template_kind = TemplateKind::QD;
    std::vector<EncodedSolution> context;
    std::optional<int> query_fitness;
    std::optional<std::vector<int>> query_features;
};

// one solution as a prompt line, e.g. QD: "85: 3, 7: 12, 400"
std::string render_line(TemplateKind t, const EncodedSolution& sol);

// Orders sampled elites for the context. SortCellDistance ranks furthest to
// closest from the query (per-axis normalized Euclidean), so the most similar
// solution sits directly above the query line; SortFitness ascends so the
// best sits there; Random shuffles.
std::vector<EvaluatedSolution> build_context(
    std::vector<EvaluatedSolution> elites, ContextStructure structure,
    const std::optional<std::vector<double>>& query_features,
    const Box& feature_bounds, Rng& rng);

// about 20% above the best context fitness, strictly larger, clipped to the
// top encodable level
int fitness_query(std::span<const EncodedSolution> context, int levels);

struct FeatureQueries {
    std::vector<std::vector<double>> queries;  // cell centroids, feature units
    // Empty strategy found fewer empty cells than the batch needs and fell
    // back to uniform sampling over all cells
    bool fell_back = false;
};

FeatureQueries feature_query(FeatureQueryStrategy strategy, const GridArchive& archive,
                             std::size_t batch_size, Rng& rng);

// context lines joined by "\n", then the query line cut off exactly where
// parameters would start (LMX: no query, prompt ends with "\n")
std::string assemble_prompt(const PromptSpec& spec);

// First line of a completion -> exactly dim integers, clipped to the codec
// range. Returns nullopt on malformed input; *error gets the reason plus the
// raw text.
std::optional<std::vector<int>> parse_completion(std::string_view completion,
                                                 std::size_t dim, int levels,
                                                 std::string* error = nullptr);

std::string to_string(TemplateKind t);
std::string to_string(ContextStructure s);
std::string to_string(FeatureQueryStrategy s);
TemplateKind template_from_string(const std::string& s);
ContextStructure structure_from_string(const std::string& s);
FeatureQueryStrategy strategy_from_string(const std::string& s);

}  // namespace icqd
