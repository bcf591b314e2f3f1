#pragma once

#include <functional>
#include <string>
#include <vector>

#include "icqd/types.hpp"

namespace icqd {

// A benchmark task: bounded parameter space, 2-d feature space, deterministic
// evaluate. fitness_floor/ceiling bound every in-bounds fitness and feed the
// fitness codec and the QD-score offset.
struct TaskSpec {
    std::string name;
    std::size_t dim = 0;
    Box param_bounds;
    Box feature_bounds;
    double fitness_floor = 0.0;
    double fitness_ceiling = 0.0;
    std::function<EvaluatedSolution(std::span<const double>)> evaluate;
};

TaskSpec make_sphere(std::size_t dim, double optimum_shift = 2.048);
TaskSpec make_rastrigin(std::size_t dim, double optimum_shift = 2.048);
TaskSpec make_arm(std::size_t dim);

// by config name: "sphere" | "rastrigin" | "arm"
TaskSpec make_task(const std::string& name, std::size_t dim, double optimum_shift = 2.048);

std::vector<EvaluatedSolution> evaluate_batch_serial(
    const TaskSpec& task, const std::vector<std::vector<double>>& params);

std::vector<EvaluatedSolution> evaluate_batch_parallel(
    const TaskSpec& task, const std::vector<std::vector<double>>& params, int threads);

// dispatch: threads <= 1 runs the serial reference path
std::vector<EvaluatedSolution> evaluate_batch(
    const TaskSpec& task, const std::vector<std::vector<double>>& params, int threads = 1);

}  // namespace icqd
