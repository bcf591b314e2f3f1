#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "icqd/promptgen.hpp"

using icqd::Box;
using icqd::ContextStructure;
using icqd::EncodedSolution;
using icqd::EvaluatedSolution;
using icqd::FeatureQueryStrategy;
using icqd::GridArchive;
using icqd::PromptSpec;
using icqd::TemplateKind;

namespace {

EncodedSolution enc(int fitness, std::vector<int> features, std::vector<int> params) {
    EncodedSolution sol;
    sol.fitness = fitness;
    sol.features = std::move(features);
    sol.params = std::move(params);
    return sol;
}

EvaluatedSolution at(std::vector<double> features, double fitness = 0.0) {
    EvaluatedSolution sol;
    sol.features = std::move(features);
    sol.fitness = fitness;
    sol.params = {fitness};
    return sol;
}

}  // namespace

TEST_CASE("line rendering matches each template byte for byte") {
    const auto sol = enc(85, {3, 7}, {12, 400});
    CHECK(icqd::render_line(TemplateKind::QD, sol) == "85: 3, 7: 12, 400");
    CHECK(icqd::render_line(TemplateKind::Fitness, enc(999, {}, {1, 2})) == "999: 1, 2");
    CHECK(icqd::render_line(TemplateKind::Feature, sol) == "3, 7: 12, 400");
    CHECK(icqd::render_line(TemplateKind::LMX, enc(0, {}, {0, 0, 0})) == "0, 0, 0");
}

TEST_CASE("assembled prompts end exactly where parameters would start") {
    PromptSpec spec;
    spec.template_kind = TemplateKind::QD;
    spec.context = {enc(85, {3, 7}, {12, 400})};
    spec.query_fitness = 102;
    spec.query_features = std::vector<int>{5, 5};
    CHECK(icqd::assemble_prompt(spec) == "85: 3, 7: 12, 400\n102: 5, 5: ");

    PromptSpec fit;
    fit.template_kind = TemplateKind::Fitness;
    fit.context = {enc(10, {}, {0, 1})};
    fit.query_fitness = 999;
    CHECK(icqd::assemble_prompt(fit) == "10: 0, 1\n999: ");

    PromptSpec feat;
    feat.template_kind = TemplateKind::Feature;
    feat.context = {enc(0, {1, 2}, {3})};
    feat.query_features = std::vector<int>{9, 8};
    CHECK(icqd::assemble_prompt(feat) == "1, 2: 3\n9, 8: ");

    // LMX has no query line at all; the prompt just ends after the last line
    PromptSpec lmx;
    lmx.template_kind = TemplateKind::LMX;
    lmx.context = {enc(0, {}, {1, 2}), enc(0, {}, {3, 4})};
    CHECK(icqd::assemble_prompt(lmx) == "1, 2\n3, 4\n");
}

TEST_CASE("prompt specs demand query fields exactly when the template uses them") {
    PromptSpec spec;
    spec.context = {enc(1, {1, 1}, {1})};

    spec.template_kind = TemplateKind::QD;
    spec.query_fitness = 5;
    spec.query_features.reset();
    CHECK_THROWS_AS(icqd::assemble_prompt(spec), std::invalid_argument);

    spec.template_kind = TemplateKind::LMX;
    spec.query_fitness = 5;  // stray field must be rejected too
    CHECK_THROWS_AS(icqd::assemble_prompt(spec), std::invalid_argument);

    spec.template_kind = TemplateKind::Fitness;
    spec.query_fitness = 5;
    spec.query_features = std::vector<int>{1, 2};
    CHECK_THROWS_AS(icqd::assemble_prompt(spec), std::invalid_argument);

    PromptSpec empty;
    empty.template_kind = TemplateKind::LMX;
    CHECK_THROWS_AS(icqd::assemble_prompt(empty), std::invalid_argument);
}

TEST_CASE("fitness sorting ascends so the best sits next to the query") {
    icqd::Rng rng(1);
    std::vector<EvaluatedSolution> elites{at({0.1, 0.1}, 3), at({0.2, 0.2}, 1),
                                          at({0.3, 0.3}, 2)};
    const auto ordered = icqd::build_context(elites, ContextStructure::SortFitness,
                                             std::nullopt, Box::cube(2, 0, 1), rng);
    CHECK(ordered[0].fitness == 1);
    CHECK(ordered[1].fitness == 2);
    CHECK(ordered[2].fitness == 3);
}

TEST_CASE("cell-distance sorting runs furthest to closest") {
    icqd::Rng rng(1);
    const std::vector<double> query{0.0, 0.0};
    std::vector<EvaluatedSolution> elites{at({0.1, 0.0}, 1), at({0.9, 0.0}, 2)};
    const auto ordered = icqd::build_context(elites, ContextStructure::SortCellDistance,
                                             query, Box::cube(2, 0, 1), rng);
    CHECK(ordered[0].fitness == 2);  // the 0.9-away elite leads
    CHECK(ordered[1].fitness == 1);  // the closest one ends next to the query
}

TEST_CASE("cell distance normalizes per axis before comparing") {
    icqd::Rng rng(1);
    const Box bounds({0.0, 0.0}, {1.0, 10.0});
    const std::vector<double> query{0.0, 0.0};
    // raw distances: A = 0.9, B = 5.0; normalized: A = 0.9, B = 0.5
    std::vector<EvaluatedSolution> elites{at({0.0, 5.0}, 2), at({0.9, 0.0}, 1)};
    const auto ordered = icqd::build_context(elites, ContextStructure::SortCellDistance,
                                             query, bounds, rng);
    CHECK(ordered[0].fitness == 1);
    CHECK(ordered[1].fitness == 2);
}

TEST_CASE("equidistant elites keep their original order") {
    icqd::Rng rng(1);
    const std::vector<double> query{0.5, 0.5};
    std::vector<EvaluatedSolution> elites{at({0.4, 0.5}, 1), at({0.6, 0.5}, 2),
                                          at({0.5, 0.4}, 3)};
    const auto ordered = icqd::build_context(elites, ContextStructure::SortCellDistance,
                                             query, Box::cube(2, 0, 1), rng);
    CHECK(ordered[0].fitness == 1);
    CHECK(ordered[1].fitness == 2);
    CHECK(ordered[2].fitness == 3);
    // ties in fitness behave the same way
    std::vector<EvaluatedSolution> same{at({0.1, 0.1}, 7), at({0.2, 0.2}, 7)};
    same[0].params = {1.0};
    same[1].params = {2.0};
    const auto byfit = icqd::build_context(same, ContextStructure::SortFitness,
                                           std::nullopt, Box::cube(2, 0, 1), rng);
    CHECK(byfit[0].params == std::vector<double>{1.0});
}

TEST_CASE("distance sort agrees with a brute-force ranking") {
    icqd::Rng rng(202);
    const Box bounds({0.0, -2.0}, {4.0, 2.0});
    const std::vector<double> query{1.0, 0.5};
    std::vector<EvaluatedSolution> elites;
    for (int i = 0; i < 50; ++i)
        elites.push_back(at({rng.uniform(0.0, 4.0), rng.uniform(-2.0, 2.0)}, i));
    auto dist = [&](const EvaluatedSolution& e) {
        const double dx = (e.features[0] - query[0]) / 4.0;
        const double dy = (e.features[1] - query[1]) / 4.0;
        return std::sqrt(dx * dx + dy * dy);
    };
    const auto ordered = icqd::build_context(elites, ContextStructure::SortCellDistance,
                                             query, bounds, rng);
    for (std::size_t i = 1; i < ordered.size(); ++i)
        CHECK(dist(ordered[i - 1]) >= dist(ordered[i]) - 1e-15);
}

TEST_CASE("random structure shuffles deterministically per seed") {
    std::vector<EvaluatedSolution> elites;
    for (int i = 0; i < 20; ++i) elites.push_back(at({0.0, 0.0}, i));
    icqd::Rng a(7), b(7);
    const auto sa = icqd::build_context(elites, ContextStructure::Random, std::nullopt,
                                        Box::cube(2, 0, 1), a);
    const auto sb = icqd::build_context(elites, ContextStructure::Random, std::nullopt,
                                        Box::cube(2, 0, 1), b);
    std::vector<double> fa, fb;
    for (std::size_t i = 0; i < 20; ++i) {
        fa.push_back(sa[i].fitness);
        fb.push_back(sb[i].fitness);
    }
    CHECK(fa == fb);
    std::sort(fa.begin(), fa.end());
    for (int i = 0; i < 20; ++i) CHECK(fa[i] == i);  // still a permutation
}

TEST_CASE("distance sorting without a query is a configuration error") {
    icqd::Rng rng(1);
    std::vector<EvaluatedSolution> elites{at({0.1, 0.1}, 1)};
    CHECK_THROWS_AS(icqd::build_context(elites, ContextStructure::SortCellDistance,
                                        std::nullopt, Box::cube(2, 0, 1), rng),
                    std::invalid_argument);
}

TEST_CASE("a single elite survives every structure unchanged") {
    icqd::Rng rng(1);
    std::vector<EvaluatedSolution> one{at({0.3, 0.3}, 42)};
    for (auto s : {ContextStructure::SortFitness, ContextStructure::SortCellDistance,
                   ContextStructure::Random}) {
        const std::optional<std::vector<double>> q =
            s == ContextStructure::SortCellDistance
                ? std::optional<std::vector<double>>({0.0, 0.0})
                : std::nullopt;
        const auto out = icqd::build_context(one, s, q, Box::cube(2, 0, 1), rng);
        REQUIRE(out.size() == 1);
        CHECK(out[0].fitness == 42);
    }
}

TEST_CASE("fitness queries run about 20% hot and clip at the top level") {
    std::vector<EncodedSolution> ctx{enc(100, {}, {})};
    CHECK(icqd::fitness_query(ctx, 1000) == 120);
    ctx[0].fitness = 0;
    CHECK(icqd::fitness_query(ctx, 1000) == 1);  // strictly larger even at zero
    ctx[0].fitness = 950;
    CHECK(icqd::fitness_query(ctx, 1000) == 999);
    ctx[0].fitness = 999;
    CHECK(icqd::fitness_query(ctx, 1000) == 999);
    // the max over the context counts, not the last line
    std::vector<EncodedSolution> several{enc(500, {}, {}), enc(100, {}, {})};
    CHECK(icqd::fitness_query(several, 1000) == 600);
    CHECK_THROWS_AS(icqd::fitness_query(std::vector<EncodedSolution>{}, 1000),
                    std::invalid_argument);
}

TEST_CASE("fitness query stays integer-exact across every level") {
    // reference: smallest q > best with q >= 1.2 * best, capped at L-1
    for (int best = 0; best < 1000; ++best) {
        int expected = best + 1;
        while (expected < 1199 && 5 * expected < 6 * best) ++expected;
        expected = std::min(expected, 999);
        std::vector<EncodedSolution> ctx{enc(best, {}, {})};
        CHECK(icqd::fitness_query(ctx, 1000) == expected);
    }
}

TEST_CASE("empty-first queries target holes in the archive") {
    GridArchive archive(Box::cube(2, 0.0, 1.0), 20);
    icqd::Rng fill(3);
    for (int i = 0; i < 60; ++i)
        archive.try_add(at({fill.uniform01(), fill.uniform01()}, fill.uniform01()));
    icqd::Rng rng(11);
    const auto q = icqd::feature_query(FeatureQueryStrategy::Empty, archive, 16, rng);
    CHECK_FALSE(q.fell_back);
    REQUIRE(q.queries.size() == 16);
    std::set<std::size_t> cells;
    for (const auto& c : q.queries) {
        const std::size_t flat = archive.flat_index(archive.cell_index(c));
        CHECK_FALSE(archive.cell(flat).has_value());
        cells.insert(flat);
    }
    CHECK(cells.size() == 16);  // drawn without replacement
}

TEST_CASE("empty-first falls back to uniform when holes run out") {
    GridArchive archive(Box::cube(2, 0.0, 1.0), 3);  // 9 cells
    icqd::Rng fill(5);
    while (archive.num_cells() - archive.coverage() > 4)
        archive.try_add(at({fill.uniform01(), fill.uniform01()}, fill.uniform01()));
    icqd::Rng rng(13);
    const auto q = icqd::feature_query(FeatureQueryStrategy::Empty, archive, 5, rng);
    CHECK(q.fell_back);
    CHECK(q.queries.size() == 5);
    // exactly at the boundary no fallback happens
    icqd::Rng rng2(13);
    const auto q2 = icqd::feature_query(FeatureQueryStrategy::Empty, archive, 4, rng2);
    CHECK_FALSE(q2.fell_back);
}

TEST_CASE("uniform queries cover occupied and empty cells alike") {
    GridArchive archive(Box::cube(2, 0.0, 1.0), 2);  // 4 cells
    archive.try_add(at({0.1, 0.1}, 1.0));
    icqd::Rng rng(17);
    const auto q = icqd::feature_query(FeatureQueryStrategy::Uniform, archive, 400, rng);
    CHECK_FALSE(q.fell_back);
    std::set<std::size_t> cells;
    for (const auto& c : q.queries) cells.insert(archive.flat_index(archive.cell_index(c)));
    CHECK(cells.size() == 4);  // with replacement over all cells, so all show up
}

TEST_CASE("a one-cell archive always answers with its center") {
    GridArchive archive(Box::cube(2, 0.0, 1.0), 1);
    icqd::Rng rng(19);
    for (auto strategy : {FeatureQueryStrategy::Empty, FeatureQueryStrategy::Uniform}) {
        const auto q = icqd::feature_query(strategy, archive, 3, rng);
        REQUIRE(q.queries.size() == 3);
        for (const auto& c : q.queries) {
            CHECK(c[0] == doctest::Approx(0.5));
            CHECK(c[1] == doctest::Approx(0.5));
        }
    }
}

TEST_CASE("completions parse from the first line only") {
    const auto v = icqd::parse_completion("12, 400, 7, 0, 999", 5, 1000);
    REQUIRE(v.has_value());
    CHECK(*v == std::vector<int>{12, 400, 7, 0, 999});

    const auto first = icqd::parse_completion("12, 400\nextra garbage", 2, 1000);
    REQUIRE(first.has_value());
    CHECK(*first == std::vector<int>{12, 400});
}

TEST_CASE("parsed values clip into the codec range") {
    const auto v = icqd::parse_completion("-5, 2000, 500", 3, 1000);
    REQUIRE(v.has_value());
    CHECK(*v == std::vector<int>{0, 999, 500});
}

TEST_CASE("whitespace around tokens is tolerated") {
    const auto v = icqd::parse_completion("  12 ,\t400  ", 2, 1000);
    REQUIRE(v.has_value());
    CHECK(*v == std::vector<int>{12, 400});
}

TEST_CASE("malformed completions return an error with the raw text") {
    std::string error;
    CHECK_FALSE(icqd::parse_completion("12, foo, 7", 3, 1000, &error).has_value());
    CHECK(error.find("12, foo, 7") != std::string::npos);

    CHECK_FALSE(icqd::parse_completion("12, 400", 3, 1000, &error).has_value());
    CHECK(error.find("expected 3") != std::string::npos);

    CHECK_FALSE(icqd::parse_completion("", 1, 1000, &error).has_value());
    CHECK_FALSE(icqd::parse_completion("12, 400, 7, 0", 3, 1000).has_value());
    CHECK_FALSE(icqd::parse_completion("12,, 7", 3, 1000).has_value());
    CHECK_FALSE(icqd::parse_completion("1.5, 2", 2, 1000).has_value());
    // a huge token must not wrap around into range
    const auto huge = icqd::parse_completion("99999999999999999999, 1", 2, 1000);
    CHECK_FALSE(huge.has_value());
}

TEST_CASE("rendered lines parse back to the same parameters") {
    const auto sol = enc(85, {3, 7}, {12, 400, 0, 999});
    for (auto t : {TemplateKind::LMX, TemplateKind::Fitness, TemplateKind::Feature,
                   TemplateKind::QD}) {
        const std::string line = icqd::render_line(t, sol);
        // the params are everything after the last ": "
        const std::size_t cut = line.rfind(": ");
        const std::string tail =
            cut == std::string::npos ? line : line.substr(cut + 2);
        const auto parsed = icqd::parse_completion(tail, 4, 1000);
        REQUIRE(parsed.has_value());
        CHECK(*parsed == sol.params);
    }
}

TEST_CASE("enum names round-trip through their config spellings") {
    for (auto t : {TemplateKind::LMX, TemplateKind::Fitness, TemplateKind::Feature,
                   TemplateKind::QD})
        CHECK(icqd::template_from_string(icqd::to_string(t)) == t);
    for (auto s : {ContextStructure::SortFitness, ContextStructure::SortCellDistance,
                   ContextStructure::Random})
        CHECK(icqd::structure_from_string(icqd::to_string(s)) == s);
    for (auto s : {FeatureQueryStrategy::Empty, FeatureQueryStrategy::Uniform})
        CHECK(icqd::strategy_from_string(icqd::to_string(s)) == s);
    CHECK_THROWS_AS(icqd::template_from_string("chat"), std::invalid_argument);
    CHECK_THROWS_AS(icqd::structure_from_string("sorted"), std::invalid_argument);
    CHECK_THROWS_AS(icqd::strategy_from_string("holes"), std::invalid_argument);
}
