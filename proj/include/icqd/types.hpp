#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace icqd {

// Axis-aligned box used for parameter and feature bounds.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    Box() = default;
    Box(std::vector<double> lower, std::vector<double> upper);

    // D copies of the same [lower, upper] interval
    static Box cube(std::size_t dims, double lower, double upper);

    std::size_t dims() const { return lo.size(); }
    double span(std::size_t axis) const { return hi[axis] - lo[axis]; }

    double clip(std::size_t axis, double x) const;
    std::vector<double> clip(std::span<const double> x) const;
    bool contains(std::span<const double> x) const;
};

// A candidate after task evaluation: clipped parameters plus the
// fitness/feature values the archive keys on.
struct EvaluatedSolution {
    std::vector<double> params;
    double fitness = 0.0;
    std::vector<double> features;
};

}  // namespace icqd
