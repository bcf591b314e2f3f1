#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "icqd/rng.hpp"
#include "icqd/types.hpp"

namespace icqd {

enum class AddResult { NewCell, Improved, Rejected };

struct ArchiveMetrics {
    double qd_score = 0.0;      // sum of (fitness - floor) over elites
    double qd_score_raw = 0.0;  // plain fitness sum, no offset
    long long coverage = 0;
    // best elite currently in the archive; -inf sentinel when empty
    double max_fitness = -std::numeric_limits<double>::infinity();
};

// Regular grid over the feature box. One solution per cell, replacement only
// on strictly better fitness. Features are clipped to the box before binning,
// so every finite feature vector lands in exactly one cell.
class GridArchive {
public:
    GridArchive(Box feature_bounds, std::vector<int> resolution);
    GridArchive(Box feature_bounds, int resolution_per_axis);

    std::size_t num_cells() const { return cells_.size(); }
    std::size_t coverage() const { return occupied_; }
    const Box& feature_bounds() const { return bounds_; }
    const std::vector<int>& resolution() const { return resolution_; }

    std::vector<int> cell_index(std::span<const double> features) const;
    std::size_t flat_index(std::span<const int> cell) const;
    std::vector<int> unflatten(std::size_t flat) const;
    std::vector<double> centroid(std::size_t flat) const;

    AddResult try_add(const EvaluatedSolution& candidate);

    const std::optional<EvaluatedSolution>& cell(std::size_t flat) const { return cells_[flat]; }
    // ascending flat order
    std::vector<std::size_t> occupied_cells() const;
    std::vector<std::vector<double>> empty_cell_centroids() const;

    // n uniform draws over occupied cells: distinct while n <= coverage, the
    // remainder with replacement
    std::vector<EvaluatedSolution> sample_elites(std::size_t n, Rng& rng) const;
    const EvaluatedSolution& sample_one(Rng& rng) const;

    ArchiveMetrics metrics(double fitness_floor) const;

    // one structured record per occupied cell, ascending cell order
    void dump(std::ostream& out) const;
    static GridArchive restore(std::istream& in, Box feature_bounds,
                               std::vector<int> resolution);

private:
    Box bounds_;
    std::vector<int> resolution_;
    std::vector<std::optional<EvaluatedSolution>> cells_;
    std::size_t occupied_ = 0;
};

}  // namespace icqd
