#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "icqd/rng.hpp"
#include "icqd/tasks.hpp"

namespace {

// straight-line reference for the half-sum features
std::vector<double> reference_features(const std::vector<double>& x, const icqd::Box& b) {
    const std::size_t d = x.size();
    const std::size_t h = (d + 1) / 2;
    auto one = [&](std::size_t begin, std::size_t end) {
        if (begin == end) return 0.5;
        double sum = 0, lo = 0, hi = 0;
        for (std::size_t i = begin; i < end; ++i) {
            sum += x[i];
            lo += b.lo[i];
            hi += b.hi[i];
        }
        return (sum - lo) / (hi - lo);
    };
    return {one(0, h), one(h, d)};
}

}  // namespace

TEST_CASE("sphere peaks at the shifted optimum with fitness zero") {
    const auto task = icqd::make_sphere(5);
    const std::vector<double> best(5, 2.048);
    const auto sol = task.evaluate(best);
    CHECK(sol.fitness == doctest::Approx(0.0).epsilon(1e-12));
    // any step away strictly hurts
    std::vector<double> off = best;
    off[2] += 0.5;
    CHECK(task.evaluate(off).fitness == doctest::Approx(-0.25));
}

TEST_CASE("sphere floor bounds the worst in-bounds point") {
    const auto task = icqd::make_sphere(4);
    CHECK(task.fitness_floor == doctest::Approx(-4 * (5.12 + 2.048) * (5.12 + 2.048)));
    const std::vector<double> worst(4, -5.12);
    CHECK(task.evaluate(worst).fitness == doctest::Approx(task.fitness_floor));
    CHECK(task.fitness_ceiling == 0.0);
}

TEST_CASE("rastrigin is zero at the optimum and respects its floor") {
    const auto task = icqd::make_rastrigin(6, 2.048);
    const std::vector<double> best(6, 2.048);
    CHECK(task.evaluate(best).fitness == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(task.fitness_floor == doctest::Approx(-6 * ((5.12 + 2.048) * (5.12 + 2.048) + 20.0)));

    icqd::Rng rng(17);
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> x(6);
        for (auto& v : x) v = rng.uniform(-5.12, 5.12);
        const auto sol = task.evaluate(x);
        CHECK(sol.fitness <= 1e-12);
        CHECK(sol.fitness >= task.fitness_floor);
    }
}

TEST_CASE("rastrigin honours a custom optimum shift") {
    const auto task = icqd::make_rastrigin(3, -1.5);
    const std::vector<double> best(3, -1.5);
    CHECK(task.evaluate(best).fitness == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(task.fitness_floor == doctest::Approx(-3 * ((5.12 + 1.5) * (5.12 + 1.5) + 20.0)));
}

TEST_CASE("half-sum features match the reference and stay in [0,1]") {
    for (std::size_t dim : {1u, 2u, 5u, 8u}) {
        const auto task = icqd::make_sphere(dim);
        icqd::Rng rng(100 + dim);
        for (int i = 0; i < 500; ++i) {
            std::vector<double> x(dim);
            for (auto& v : x) v = rng.uniform(-5.12, 5.12);
            const auto sol = task.evaluate(x);
            REQUIRE(sol.features.size() == 2);
            const auto ref = reference_features(sol.params, task.param_bounds);
            CHECK(sol.features[0] == doctest::Approx(ref[0]).epsilon(1e-12));
            CHECK(sol.features[1] == doctest::Approx(ref[1]).epsilon(1e-12));
            CHECK(sol.features[0] >= 0.0);
            CHECK(sol.features[0] <= 1.0);
            CHECK(sol.features[1] >= 0.0);
            CHECK(sol.features[1] <= 1.0);
        }
    }
}

TEST_CASE("one-dimensional tasks pin the second feature to the center") {
    const auto task = icqd::make_sphere(1);
    const auto sol = task.evaluate(std::vector<double>{1.0});
    CHECK(sol.features[1] == doctest::Approx(0.5));
    CHECK(sol.features[0] == doctest::Approx((1.0 + 5.12) / 10.24));
}

TEST_CASE("evaluation clips out-of-bounds parameters and stores the clipped values") {
    const auto task = icqd::make_sphere(3);
    const std::vector<double> wild{-100.0, 0.0, 100.0};
    const auto sol = task.evaluate(wild);
    CHECK(sol.params == std::vector<double>{-5.12, 0.0, 5.12});
    const auto clipped = task.evaluate(sol.params);
    CHECK(sol.fitness == doctest::Approx(clipped.fitness));
}

TEST_CASE("arm rewards straight lines of equal angles") {
    const auto task = icqd::make_arm(6);
    const std::vector<double> equal(6, 0.7);
    CHECK(task.evaluate(equal).fitness == doctest::Approx(0.0).epsilon(1e-12));

    // all-zero angles stretch the arm to (1, 0): features (1, 0.5)
    const std::vector<double> straight(6, 0.0);
    const auto sol = task.evaluate(straight);
    CHECK(sol.features[0] == doctest::Approx(1.0));
    CHECK(sol.features[1] == doctest::Approx(0.5));
}

TEST_CASE("arm features follow the forward kinematics") {
    // two links of length 1/2: first at pi/2, second relative -pi/2 ends at (1/2, 1/2)
    const auto task = icqd::make_arm(2);
    const double halfpi = std::numbers::pi / 2;
    const auto sol = task.evaluate(std::vector<double>{halfpi, -halfpi});
    CHECK(sol.features[0] == doctest::Approx((0.5 + 1.0) / 2.0));
    CHECK(sol.features[1] == doctest::Approx((0.5 + 1.0) / 2.0));
    // population stddev of {pi/2, -pi/2} is pi/2
    CHECK(sol.fitness == doctest::Approx(-halfpi));
}

TEST_CASE("arm fitness never drops below the floor on random angles") {
    const auto task = icqd::make_arm(8);
    icqd::Rng rng(23);
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> x(8);
        for (auto& v : x) v = rng.uniform(-std::numbers::pi, std::numbers::pi);
        const auto sol = task.evaluate(x);
        CHECK(sol.fitness <= 0.0);
        CHECK(sol.fitness >= task.fitness_floor);
        CHECK(sol.features[0] >= 0.0);
        CHECK(sol.features[0] <= 1.0);
        CHECK(sol.features[1] >= 0.0);
        CHECK(sol.features[1] <= 1.0);
    }
}

TEST_CASE("make_task resolves names and rejects unknown ones") {
    CHECK(icqd::make_task("sphere", 4).name == "sphere");
    CHECK(icqd::make_task("rastrigin", 4).name == "rastrigin");
    CHECK(icqd::make_task("arm", 4).name == "arm");
    CHECK_THROWS_AS(icqd::make_task("knapsack", 4), std::invalid_argument);
    CHECK_THROWS_AS(icqd::make_task("sphere", 0), std::invalid_argument);
}

TEST_CASE("parallel batch evaluation matches the serial reference") {
    const auto task = icqd::make_rastrigin(7);
    icqd::Rng rng(55);
    std::vector<std::vector<double>> batch(257);
    for (auto& x : batch) {
        x.resize(7);
        for (auto& v : x) v = rng.uniform(-6.0, 6.0);
    }
    const auto serial = icqd::evaluate_batch_serial(task, batch);
    const auto parallel = icqd::evaluate_batch_parallel(task, batch, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].fitness == parallel[i].fitness);
        CHECK(serial[i].features == parallel[i].features);
        CHECK(serial[i].params == parallel[i].params);
    }
    // dispatch picks serial for threads <= 1
    const auto dispatched = icqd::evaluate_batch(task, batch, 1);
    CHECK(dispatched[100].fitness == serial[100].fitness);
}
