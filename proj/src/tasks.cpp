#include "icqd/tasks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace icqd {

namespace {

// First ⌈D/2⌉ parameters sum -> feature 0, the rest -> feature 1, each
// normalized to [0,1] by the sum's attainable range. A half with no
// parameters (D=1) pins its feature to the center.
std::vector<double> half_sum_features(std::span<const double> x, const Box& bounds) {
    const std::size_t d = x.size();
    const std::size_t h = (d + 1) / 2;
    std::vector<double> features(2, 0.5);
    for (int half = 0; half < 2; ++half) {
        const std::size_t begin = half == 0 ? 0 : h;
        const std::size_t end = half == 0 ? h : d;
        if (begin == end) continue;
        double sum = 0.0, lo = 0.0, hi = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            sum += x[i];
            lo += bounds.lo[i];
            hi += bounds.hi[i];
        }
        features[half] = (sum - lo) / (hi - lo);
    }
    return features;
}

}  // namespace

TaskSpec make_sphere(std::size_t dim, double optimum_shift) {
    if (dim == 0) throw std::invalid_argument("make_sphere: dim must be positive");
    TaskSpec task;
    task.name = "sphere";
    task.dim = dim;
    task.param_bounds = Box::cube(dim, -5.12, 5.12);
    task.feature_bounds = Box::cube(2, 0.0, 1.0);
    const double worst = 5.12 + std::abs(optimum_shift);
    task.fitness_floor = -static_cast<double>(dim) * worst * worst;
    task.fitness_ceiling = 0.0;
    task.evaluate = [bounds = task.param_bounds, optimum_shift](std::span<const double> raw) {
        EvaluatedSolution sol;
        sol.params = bounds.clip(raw);
        double f = 0.0;
        for (double x : sol.params) {
            const double d = x - optimum_shift;
            f -= d * d;
        }
        sol.fitness = f;
        sol.features = half_sum_features(sol.params, bounds);
        return sol;
    };
    return task;
}

TaskSpec make_rastrigin(std::size_t dim, double optimum_shift) {
    if (dim == 0) throw std::invalid_argument("make_rastrigin: dim must be positive");
    TaskSpec task;
    task.name = "rastrigin";
    task.dim = dim;
    task.param_bounds = Box::cube(dim, -5.12, 5.12);
    task.feature_bounds = Box::cube(2, 0.0, 1.0);
    const double worst = 5.12 + std::abs(optimum_shift);
    // per-dimension bound: (x - x*)^2 + 10 - 10 cos(...) <= worst^2 + 20
    task.fitness_floor = -static_cast<double>(dim) * (worst * worst + 20.0);
    task.fitness_ceiling = 0.0;
    task.evaluate = [bounds = task.param_bounds, optimum_shift](std::span<const double> raw) {
        EvaluatedSolution sol;
        sol.params = bounds.clip(raw);
        double f = 10.0 * static_cast<double>(sol.params.size());
        for (double x : sol.params) {
            const double d = x - optimum_shift;
            f += d * d - 10.0 * std::cos(2.0 * std::numbers::pi * d);
        }
        sol.fitness = -f;
        sol.features = half_sum_features(sol.params, bounds);
        return sol;
    };
    return task;
}

TaskSpec make_arm(std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("make_arm: dim must be positive");
    TaskSpec task;
    task.name = "arm";
    task.dim = dim;
    task.param_bounds = Box::cube(dim, -std::numbers::pi, std::numbers::pi);
    task.feature_bounds = Box::cube(2, 0.0, 1.0);
    // population stddev of angles in [-pi, pi] cannot exceed pi
    task.fitness_floor = -std::numbers::pi;
    task.fitness_ceiling = 0.0;
    task.evaluate = [bounds = task.param_bounds, dim](std::span<const double> raw) {
        EvaluatedSolution sol;
        sol.params = bounds.clip(raw);
        double mean = 0.0;
        for (double a : sol.params) mean += a;
        mean /= static_cast<double>(dim);
        double var = 0.0;
        for (double a : sol.params) var += (a - mean) * (a - mean);
        var /= static_cast<double>(dim);
        sol.fitness = -std::sqrt(var);
        // planar forward kinematics, equal link lengths summing to 1
        const double link = 1.0 / static_cast<double>(dim);
        double theta = 0.0, x = 0.0, y = 0.0;
        for (double a : sol.params) {
            theta += a;
            x += link * std::cos(theta);
            y += link * std::sin(theta);
        }
        sol.features = {(x + 1.0) / 2.0, (y + 1.0) / 2.0};
        return sol;
    };
    return task;
}

TaskSpec make_task(const std::string& name, std::size_t dim, double optimum_shift) {
    if (name == "sphere") return make_sphere(dim, optimum_shift);
    if (name == "rastrigin") return make_rastrigin(dim, optimum_shift);
    if (name == "arm") return make_arm(dim);
    throw std::invalid_argument("make_task: unknown task '" + name + "'");
}

std::vector<EvaluatedSolution> evaluate_batch_serial(
    const TaskSpec& task, const std::vector<std::vector<double>>& params) {
    std::vector<EvaluatedSolution> out(params.size());
    for (std::size_t i = 0; i < params.size(); ++i)
        out[i] = task.evaluate(params[i]);
    return out;
}

std::vector<EvaluatedSolution> evaluate_batch_parallel(
    const TaskSpec& task, const std::vector<std::vector<double>>& params, int threads) {
    std::vector<EvaluatedSolution> out(params.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(params.size()); ++i)
        out[i] = task.evaluate(params[i]);
#else
    (void)threads;
    for (std::size_t i = 0; i < params.size(); ++i)
        out[i] = task.evaluate(params[i]);
#endif
    return out;
}

std::vector<EvaluatedSolution> evaluate_batch(
    const TaskSpec& task, const std::vector<std::vector<double>>& params, int threads) {
    if (threads <= 1) return evaluate_batch_serial(task, params);
    return evaluate_batch_parallel(task, params, threads);
}

}  // namespace icqd
