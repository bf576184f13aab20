#include <doctest.h>

#include <cmath>

#include "dmi/optimize.hpp"
#include "dmi/types.hpp"

namespace dmi
{

namespace
{
double rosenbrock(const std::vector<double>& x)
{
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
}
} // namespace

TEST_CASE("one-dimensional quadratic")
{
    const Box box{{-10.0}, {10.0}};
    const auto r = nelder_mead([](const std::vector<double>& x) { return (x[0] - 2.0) * (x[0] - 2.0); }, {0.0}, box);
    CHECK(std::abs(r.theta_star[0] - 2.0) < 1e-6);
    CHECK(r.termination == Termination::tolerance);
    CHECK(r.n_evals > 0);
}

TEST_CASE("Rosenbrock from the classic start")
{
    const Box box{{-5.0, -5.0}, {5.0, 5.0}};
    NelderMeadOptions opts;
    opts.max_iter = 5000;
    opts.f_tol = 1e-20;
    opts.x_tol = 1e-10;
    opts.initial_step = 0.05;
    const auto r = nelder_mead(rosenbrock, {-1.2, 1.0}, box, opts);
    CHECK(std::abs(r.theta_star[0] - 1.0) < 1e-4);
    CHECK(std::abs(r.theta_star[1] - 1.0) < 1e-4);
}

TEST_CASE("NaN values are treated as worse than any finite value")
{
    const Box box{{-4.0}, {4.0}};
    const auto f = [](const std::vector<double>& x) {
        const double d = x[0] - 1.0;
        return x[0] < 0.5 ? NAN : d * d * (1.0 + 0.3 * d);
    };
    const auto r = nelder_mead(f, {3.0}, box);
    CHECK(std::abs(r.theta_star[0] - 1.0) < 1e-5);
    CHECK(std::isfinite(r.loss_star));
}

TEST_CASE("best value never increases and matches the trace")
{
    const Box box{{-3.0, -3.0}, {3.0, 3.0}};
    NelderMeadOptions opts;
    opts.max_iter = 300;
    const auto r = nelder_mead(rosenbrock, {-1.0, 2.0}, box, opts);
    REQUIRE(!r.best_history.empty());
    for (std::size_t i = 1; i < r.best_history.size(); ++i) {
        REQUIRE(r.best_history[i] <= r.best_history[i - 1]);
    }
    double best = INFINITY;
    for (const auto& e : r.trace) {
        best = std::min(best, e.loss);
        CHECK(box.contains(e.theta));
    }
    CHECK(r.loss_star == best);
    CHECK(r.best_history.back() == r.loss_star);
}

TEST_CASE("box projection keeps iterates feasible")
{
    const Box box{{0.0, 0.0}, {1.0, 1.0}};
    // unconstrained minimum at (3, -2); constrained at (1, 0)
    const auto f = [](const std::vector<double>& x) {
        return (x[0] - 3.0) * (x[0] - 3.0) + (x[1] + 2.0) * (x[1] + 2.0);
    };
    const auto r = nelder_mead(f, {0.5, 0.5}, box);
    CHECK(r.theta_star[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.theta_star[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("fixed coordinates do not move")
{
    const Box box{{-5.0, 0.7}, {5.0, 0.7}};
    std::size_t bad = 0;
    const auto f = [&bad](const std::vector<double>& x) {
        if (x[1] != 0.7) {
            ++bad;
        }
        return (x[0] + 1.0) * (x[0] + 1.0) + x[1];
    };
    const auto r = nelder_mead(f, {2.0, 0.7}, box);
    CHECK(bad == 0);
    CHECK(std::abs(r.theta_star[0] + 1.0) < 1e-6);
    CHECK(r.theta_star[1] == 0.7);
}

TEST_CASE("seeded simplex orientation")
{
    const Box box{{-5.0, -5.0}, {5.0, 5.0}};
    NelderMeadOptions opts;
    opts.seed = 3;
    const auto a = nelder_mead(rosenbrock, {-1.2, 1.0}, box, opts);
    const auto b = nelder_mead(rosenbrock, {-1.2, 1.0}, box, opts);
    CHECK(a.theta_star == b.theta_star);
    CHECK(a.n_evals == b.n_evals);
}

TEST_CASE("stall and iteration limits")
{
    const Box box{{-5.0, -5.0}, {5.0, 5.0}};
    NelderMeadOptions opts;
    opts.max_iter = 3;
    CHECK(nelder_mead(rosenbrock, {-1.2, 1.0}, box, opts).termination == Termination::max_iter);

    opts.max_iter = 1000;
    opts.max_stall = 2;
    const auto flat = nelder_mead([](const std::vector<double>&) { return 1.0; }, {0.0, 0.0}, box, opts);
    CHECK(flat.termination != Termination::max_iter);
}

TEST_CASE("argument checks")
{
    const auto f = [](const std::vector<double>& x) { return x[0]; };
    CHECK_THROWS_AS(nelder_mead(f, {0.0}, Box{{1.0}, {0.0}}), ParameterError);
    CHECK_THROWS_AS(nelder_mead(f, {0.0, 1.0}, Box{{-1.0}, {1.0}}), ParameterError);
    CHECK_THROWS_AS(nelder_mead(f, {2.0}, Box{{-1.0}, {1.0}}), DomainError);
}

TEST_CASE("projected gradient descent")
{
    const Box box{{-10.0, -10.0}, {10.0, 10.0}};
    GradientDescentOptions opts;
    opts.learning_rate = 0.1;
    opts.max_iter = 500;
    const auto f = [](const std::vector<double>& x) {
        return (x[0] - 1.0) * (x[0] - 1.0) + 2.0 * (x[1] + 0.5) * (x[1] + 0.5);
    };
    const auto r = gradient_descent(f, {4.0, 4.0}, box, opts);
    CHECK(std::abs(r.theta_star[0] - 1.0) < 1e-5);
    CHECK(std::abs(r.theta_star[1] + 0.5) < 1e-5);
}

} // namespace dmi
