#pragma once

#include <span>
#include <vector>

#include "icqd/types.hpp"

namespace icqd {

// Maps a real interval onto the integer levels 0..levels-1 used in prompts.
// Encoding clips to the interval and rounds half-up; decoding returns the
// level's representative value, so decode(encode(x)) == x whenever x is a
// representative.
class IntegerCodec {
public:
    IntegerCodec(double lo, double hi, int levels = 1000);

    int encode(double x) const;
    double decode(int level) const;

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int levels() const { return levels_; }
    double step() const { return (hi_ - lo_) / (levels_ - 1); }

private:
    double lo_;
    double hi_;
    int levels_;
};

// One run's worth of codecs: fitness, each feature axis, each parameter axis.
struct SolutionCodecs {
    IntegerCodec fitness;
    std::vector<IntegerCodec> features;
    std::vector<IntegerCodec> params;

    int levels() const { return fitness.levels(); }
};

SolutionCodecs make_codecs(const Box& param_bounds, const Box& feature_bounds,
                           double fitness_floor, double fitness_ceiling,
                           int levels = 1000);

// Integer view of a solution, the only representation prompts ever see.
struct EncodedSolution {
    int fitness = 0;
    std::vector<int> features;
    std::vector<int> params;
};

EncodedSolution encode_solution(const EvaluatedSolution& sol, const SolutionCodecs& codecs);
std::vector<double> decode_params(std::span<const int> levels, const SolutionCodecs& codecs);
std::vector<int> encode_features(std::span<const double> features, const SolutionCodecs& codecs);

}  // namespace icqd
