#include "icqd/promptgen.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace icqd {

namespace {

void append_joined(std::string& out, std::span<const int> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ", ";
        out += std::to_string(values[i]);
    }
}

void validate(const PromptSpec& spec) {
    if (spec.context.empty())
        throw std::invalid_argument("PromptSpec: context must not be empty");
    if (template_has_fitness(spec.template_kind) != spec.query_fitness.has_value())
        throw std::invalid_argument(
            "PromptSpec: query_fitness must be present exactly for fitness-bearing templates");
    if (template_has_features(spec.template_kind) != spec.query_features.has_value())
        throw std::invalid_argument(
            "PromptSpec: query_features must be present exactly for feature-bearing templates");
}

}  // namespace

std::string render_line(TemplateKind t, const EncodedSolution& sol) {
    std::string line;
    if (template_has_fitness(t)) {
        line += std::to_string(sol.fitness);
        line += ": ";
    }
    if (template_has_features(t)) {
        append_joined(line, sol.features);
        line += ": ";
    }
    append_joined(line, sol.params);
    return line;
}

std::vector<EvaluatedSolution> build_context(
    std::vector<EvaluatedSolution> elites, ContextStructure structure,
    const std::optional<std::vector<double>>& query_features,
    const Box& feature_bounds, Rng& rng) {
    switch (structure) {
        case ContextStructure::SortFitness:
            std::stable_sort(elites.begin(), elites.end(),
                             [](const EvaluatedSolution& a, const EvaluatedSolution& b) {
                                 return a.fitness < b.fitness;
                             });
            break;
        case ContextStructure::SortCellDistance: {
            if (!query_features)
                throw std::invalid_argument(
                    "build_context: SortCellDistance needs query features");
            const std::vector<double>& q = *query_features;
            auto dist2 = [&](const EvaluatedSolution& e) {
                double d2 = 0.0;
                for (std::size_t a = 0; a < q.size(); ++a) {
                    const double d = (e.features[a] - q[a]) / feature_bounds.span(a);
                    d2 += d * d;
                }
                return d2;
            };
            // furthest first, so the closest solution ends up next to the query
            std::stable_sort(elites.begin(), elites.end(),
                             [&](const EvaluatedSolution& a, const EvaluatedSolution& b) {
                                 return dist2(a) > dist2(b);
                             });
            break;
        }
        case ContextStructure::Random:
            rng.shuffle(elites);
            break;
    }
    return elites;
}

int fitness_query(std::span<const EncodedSolution> context, int levels) {
    if (context.empty())
        throw std::invalid_argument("fitness_query: context must not be empty");
    int best = context[0].fitness;
    for (const EncodedSolution& sol : context)
        best = std::max(best, sol.fitness);
    // exact integer ceil(1.2 * best): floating 1.2*best rounds the wrong way
    // for some inputs (e.g. 100), so stay in integers
    const int bumped = std::max(best + 1, (6 * best + 4) / 5);
    return std::min(levels - 1, bumped);
}

FeatureQueries feature_query(FeatureQueryStrategy strategy, const GridArchive& archive,
                             std::size_t batch_size, Rng& rng) {
    FeatureQueries out;
    out.queries.reserve(batch_size);
    if (strategy == FeatureQueryStrategy::Empty) {
        const std::vector<std::vector<double>> empties = archive.empty_cell_centroids();
        if (empties.size() >= batch_size) {
            for (std::size_t i : rng.pick(empties.size(), batch_size))
                out.queries.push_back(empties[i]);
            return out;
        }
        out.fell_back = true;  // not enough holes left; use the uniform rule
    }
    for (std::size_t i = 0; i < batch_size; ++i)
        out.queries.push_back(archive.centroid(rng.index(archive.num_cells())));
    return out;
}

std::string assemble_prompt(const PromptSpec& spec) {
    validate(spec);
    std::string prompt;
    for (const EncodedSolution& sol : spec.context) {
        prompt += render_line(spec.template_kind, sol);
        prompt += '\n';
    }
    if (template_has_fitness(spec.template_kind)) {
        prompt += std::to_string(*spec.query_fitness);
        prompt += ": ";
    }
    if (template_has_features(spec.template_kind)) {
        append_joined(prompt, *spec.query_features);
        prompt += ": ";
    }
    return prompt;
}

std::optional<std::vector<int>> parse_completion(std::string_view completion,
                                                 std::size_t dim, int levels,
                                                 std::string* error) {
    auto fail = [&](const std::string& why) -> std::optional<std::vector<int>> {
        if (error) *error = why + "; raw completion: \"" + std::string(completion) + "\"";
        return std::nullopt;
    };

    std::string_view line = completion.substr(0, completion.find('\n'));
    std::vector<int> values;
    values.reserve(dim);
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        std::string_view token = line.substr(pos, comma == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : comma - pos);
        while (!token.empty() && std::isspace(static_cast<unsigned char>(token.front())))
            token.remove_prefix(1);
        while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back())))
            token.remove_suffix(1);
        if (token.empty()) return fail("empty token");
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc{} || ptr != token.data() + token.size())
            return fail("token is not a base-10 integer");
        values.push_back(static_cast<int>(std::clamp<long long>(v, 0, levels - 1)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (values.size() != dim)
        return fail("expected " + std::to_string(dim) + " values, got " +
                    std::to_string(values.size()));
    return values;
}

std::string to_string(TemplateKind t) {
    switch (t) {
        case TemplateKind::LMX: return "lmx";
        case TemplateKind::Fitness: return "fitness";
        case TemplateKind::Feature: return "feature";
        case TemplateKind::QD: return "qd";
    }
    return "qd";
}

std::string to_string(ContextStructure s) {
    switch (s) {
        case ContextStructure::SortFitness: return "fitness";
        case ContextStructure::SortCellDistance: return "cell_distance";
        case ContextStructure::Random: return "random";
    }
    return "cell_distance";
}

std::string to_string(FeatureQueryStrategy s) {
    return s == FeatureQueryStrategy::Empty ? "empty" : "uniform";
}

TemplateKind template_from_string(const std::string& s) {
    if (s == "lmx") return TemplateKind::LMX;
    if (s == "fitness") return TemplateKind::Fitness;
    if (s == "feature") return TemplateKind::Feature;
    if (s == "qd") return TemplateKind::QD;
    throw std::invalid_argument("unknown template '" + s + "' (lmx|fitness|feature|qd)");
}

ContextStructure structure_from_string(const std::string& s) {
    if (s == "fitness") return ContextStructure::SortFitness;
    if (s == "cell_distance") return ContextStructure::SortCellDistance;
    if (s == "random") return ContextStructure::Random;
    throw std::invalid_argument("unknown context structure '" + s +
                                "' (fitness|cell_distance|random)");
}

FeatureQueryStrategy strategy_from_string(const std::string& s) {
    if (s == "empty") return FeatureQueryStrategy::Empty;
    if (s == "uniform") return FeatureQueryStrategy::Uniform;
    throw std::invalid_argument("unknown query strategy '" + s + "' (empty|uniform)");
}

}  // namespace icqd
