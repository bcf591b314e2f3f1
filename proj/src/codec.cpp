#include "icqd/codec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace icqd {

IntegerCodec::IntegerCodec(double lo, double hi, int levels)
    : lo_(lo), hi_(hi), levels_(levels) {
    if (!(lo < hi))
        throw std::invalid_argument("IntegerCodec: lo must be strictly below hi");
    if (levels < 2)
        throw std::invalid_argument("IntegerCodec: need at least two levels");
}

int IntegerCodec::encode(double x) const {
    if (!std::isfinite(x))
        throw std::invalid_argument("IntegerCodec: non-finite value");
    const double clipped = std::clamp(x, lo_, hi_);
    const double t = (clipped - lo_) / (hi_ - lo_) * (levels_ - 1);
    // round half-up, then clamp against the odd case where t + 0.5 lands
    // exactly on levels_ after floating roundoff
    const int k = static_cast<int>(std::floor(t + 0.5));
    return std::clamp(k, 0, levels_ - 1);
}

double IntegerCodec::decode(int level) const {
    const int k = std::clamp(level, 0, levels_ - 1);
    return lo_ + static_cast<double>(k) / (levels_ - 1) * (hi_ - lo_);
}

SolutionCodecs make_codecs(const Box& param_bounds, const Box& feature_bounds,
                           double fitness_floor, double fitness_ceiling, int levels) {
    SolutionCodecs out{IntegerCodec(fitness_floor, fitness_ceiling, levels), {}, {}};
    out.features.reserve(feature_bounds.dims());
    for (std::size_t i = 0; i < feature_bounds.dims(); ++i)
        out.features.emplace_back(feature_bounds.lo[i], feature_bounds.hi[i], levels);
    out.params.reserve(param_bounds.dims());
    for (std::size_t i = 0; i < param_bounds.dims(); ++i)
        out.params.emplace_back(param_bounds.lo[i], param_bounds.hi[i], levels);
    return out;
}

EncodedSolution encode_solution(const EvaluatedSolution& sol, const SolutionCodecs& codecs) {
    if (sol.features.size() != codecs.features.size())
        throw std::invalid_argument("encode_solution: feature dimension mismatch");
    if (sol.params.size() != codecs.params.size())
        throw std::invalid_argument("encode_solution: parameter dimension mismatch");
    EncodedSolution enc;
    enc.fitness = codecs.fitness.encode(sol.fitness);
    enc.features.reserve(sol.features.size());
    for (std::size_t i = 0; i < sol.features.size(); ++i)
        enc.features.push_back(codecs.features[i].encode(sol.features[i]));
    enc.params.reserve(sol.params.size());
    for (std::size_t i = 0; i < sol.params.size(); ++i)
        enc.params.push_back(codecs.params[i].encode(sol.params[i]));
    return enc;
}

std::vector<double> decode_params(std::span<const int> levels, const SolutionCodecs& codecs) {
    if (levels.size() != codecs.params.size())
        throw std::invalid_argument("decode_params: parameter dimension mismatch");
    std::vector<double> out;
    out.reserve(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i)
        out.push_back(codecs.params[i].decode(levels[i]));
    return out;
}

std::vector<int> encode_features(std::span<const double> features, const SolutionCodecs& codecs) {
    if (features.size() != codecs.features.size())
        throw std::invalid_argument("encode_features: feature dimension mismatch");
    std::vector<int> out;
    out.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i)
        out.push_back(codecs.features[i].encode(features[i]));
    return out;
}

}  // namespace icqd
