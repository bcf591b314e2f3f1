#include "icqd/types.hpp"

#include <algorithm>
#include <stdexcept>

namespace icqd {

Box::Box(std::vector<double> lower, std::vector<double> upper)
    : lo(std::move(lower)), hi(std::move(upper)) {
    if (lo.size() != hi.size())
        throw std::invalid_argument("Box: lo/hi dimension mismatch");
    if (lo.empty())
        throw std::invalid_argument("Box: zero-dimensional bounds");
    // Degenerate (lo == hi) axes are allowed: a box is just a product of
    // closed intervals. Anything that needs positive span (archives, codecs)
    // checks for it at its own construction.
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] <= hi[i]))
            throw std::invalid_argument("Box: lo must not exceed hi on any axis");
}

Box Box::cube(std::size_t dims, double lower, double upper) {
    return Box(std::vector<double>(dims, lower), std::vector<double>(dims, upper));
}

double Box::clip(std::size_t axis, double x) const {
    return std::clamp(x, lo[axis], hi[axis]);
}

std::vector<double> Box::clip(std::span<const double> x) const {
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = clip(i, out[i]);
    return out;
}

bool Box::contains(std::span<const double> x) const {
    if (x.size() != dims()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

}  // namespace icqd
