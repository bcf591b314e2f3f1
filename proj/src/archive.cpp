#include "icqd/archive.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace icqd {

namespace {

std::size_t checked_num_cells(const Box& bounds, const std::vector<int>& resolution) {
    if (resolution.size() != bounds.dims())
        throw std::invalid_argument("GridArchive: resolution/bounds dimension mismatch");
    for (std::size_t a = 0; a < bounds.dims(); ++a)
        if (!(bounds.span(a) > 0.0))
            throw std::invalid_argument("GridArchive: feature bounds need positive span on every axis");
    std::size_t n = 1;
    for (int r : resolution) {
        if (r < 1) throw std::invalid_argument("GridArchive: resolution must be >= 1");
        n *= static_cast<std::size_t>(r);
    }
    return n;
}

}  // namespace

GridArchive::GridArchive(Box feature_bounds, std::vector<int> resolution)
    : bounds_(std::move(feature_bounds)), resolution_(std::move(resolution)) {
    cells_.resize(checked_num_cells(bounds_, resolution_));
}

GridArchive::GridArchive(Box feature_bounds, int resolution_per_axis)
    : bounds_(std::move(feature_bounds)),
      resolution_(bounds_.dims(), resolution_per_axis) {
    cells_.resize(checked_num_cells(bounds_, resolution_));
}

std::vector<int> GridArchive::cell_index(std::span<const double> features) const {
    if (features.size() != bounds_.dims())
        throw std::invalid_argument("cell_index: feature dimension mismatch");
    std::vector<int> idx(features.size());
    for (std::size_t a = 0; a < features.size(); ++a) {
        if (!std::isfinite(features[a]))
            throw std::invalid_argument("cell_index: non-finite feature");
        const double d = bounds_.clip(a, features[a]);
        const double t = (d - bounds_.lo[a]) / bounds_.span(a) * resolution_[a];
        idx[a] = std::min(static_cast<int>(std::floor(t)), resolution_[a] - 1);
    }
    return idx;
}

std::size_t GridArchive::flat_index(std::span<const int> cell) const {
    // row-major: first axis slowest
    std::size_t flat = 0;
    for (std::size_t a = 0; a < cell.size(); ++a)
        flat = flat * static_cast<std::size_t>(resolution_[a]) + static_cast<std::size_t>(cell[a]);
    return flat;
}

std::vector<int> GridArchive::unflatten(std::size_t flat) const {
    std::vector<int> cell(resolution_.size());
    for (std::size_t a = resolution_.size(); a-- > 0;) {
        const auto r = static_cast<std::size_t>(resolution_[a]);
        cell[a] = static_cast<int>(flat % r);
        flat /= r;
    }
    return cell;
}

std::vector<double> GridArchive::centroid(std::size_t flat) const {
    const std::vector<int> cell = unflatten(flat);
    std::vector<double> c(cell.size());
    for (std::size_t a = 0; a < cell.size(); ++a)
        c[a] = bounds_.lo[a] + (cell[a] + 0.5) * bounds_.span(a) / resolution_[a];
    return c;
}

AddResult GridArchive::try_add(const EvaluatedSolution& candidate) {
    const std::size_t flat = flat_index(cell_index(candidate.features));
    std::optional<EvaluatedSolution>& slot = cells_[flat];
    if (!slot) {
        slot = candidate;
        ++occupied_;
        return AddResult::NewCell;
    }
    if (candidate.fitness > slot->fitness) {
        slot = candidate;
        return AddResult::Improved;
    }
    return AddResult::Rejected;
}

std::vector<std::size_t> GridArchive::occupied_cells() const {
    std::vector<std::size_t> out;
    out.reserve(occupied_);
    for (std::size_t i = 0; i < cells_.size(); ++i)
        if (cells_[i]) out.push_back(i);
    return out;
}

std::vector<std::vector<double>> GridArchive::empty_cell_centroids() const {
    std::vector<std::vector<double>> out;
    out.reserve(cells_.size() - occupied_);
    for (std::size_t i = 0; i < cells_.size(); ++i)
        if (!cells_[i]) out.push_back(centroid(i));
    return out;
}

std::vector<EvaluatedSolution> GridArchive::sample_elites(std::size_t n, Rng& rng) const {
    if (occupied_ == 0)
        throw std::runtime_error("sample_elites: archive is empty; seed it with random solutions first");
    const std::vector<std::size_t> occ = occupied_cells();
    std::vector<EvaluatedSolution> out;
    out.reserve(n);
    const std::size_t distinct = std::min(n, occ.size());
    for (std::size_t i : rng.pick(occ.size(), distinct))
        out.push_back(*cells_[occ[i]]);
    for (std::size_t i = distinct; i < n; ++i)
        out.push_back(*cells_[occ[rng.index(occ.size())]]);
    return out;
}

const EvaluatedSolution& GridArchive::sample_one(Rng& rng) const {
    if (occupied_ == 0)
        throw std::runtime_error("sample_one: archive is empty; seed it with random solutions first");
    const std::vector<std::size_t> occ = occupied_cells();
    return *cells_[occ[rng.index(occ.size())]];
}

ArchiveMetrics GridArchive::metrics(double fitness_floor) const {
    ArchiveMetrics m;
    m.coverage = static_cast<long long>(occupied_);
    for (const auto& slot : cells_) {
        if (!slot) continue;
        m.qd_score += slot->fitness - fitness_floor;
        m.qd_score_raw += slot->fitness;
        if (slot->fitness > m.max_fitness) m.max_fitness = slot->fitness;
    }
    return m;
}

void GridArchive::dump(std::ostream& out) const {
    for (std::size_t flat : occupied_cells()) {
        const EvaluatedSolution& sol = *cells_[flat];
        nlohmann::ordered_json rec;
        rec["cell_index"] = unflatten(flat);
        rec["centroid"] = centroid(flat);
        rec["fitness"] = sol.fitness;
        rec["features"] = sol.features;
        rec["params"] = sol.params;
        out << rec.dump() << '\n';
    }
}

GridArchive GridArchive::restore(std::istream& in, Box feature_bounds,
                                 std::vector<int> resolution) {
    GridArchive archive(std::move(feature_bounds), std::move(resolution));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("archive restore: bad record on line " +
                                     std::to_string(lineno) + ": " + e.what());
        }
        EvaluatedSolution sol;
        sol.fitness = rec.at("fitness").get<double>();
        sol.features = rec.at("features").get<std::vector<double>>();
        sol.params = rec.at("params").get<std::vector<double>>();
        const auto cell = rec.at("cell_index").get<std::vector<int>>();
        const std::size_t flat = archive.flat_index(cell);
        if (archive.cell_index(sol.features) != cell)
            throw std::runtime_error("archive restore: features on line " +
                                     std::to_string(lineno) +
                                     " do not bin into the recorded cell_index");
        if (!archive.cells_[flat]) ++archive.occupied_;
        archive.cells_[flat] = std::move(sol);
    }
    return archive;
}

}  // namespace icqd
