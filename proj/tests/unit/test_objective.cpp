#include <doctest.h>

#include <cmath>

#include "dmi/objective.hpp"

namespace dmi
{

namespace
{

const double alpha0 = std::sqrt(2.0) - 1.0;
const double beta0 = std::sqrt(3.0) - 1.0;

TimeSeries torus_states(std::size_t n)
{
    const TorusRotation T(alpha0, beta0);
    return TimeSeries(simulate(T, State{0.1, 0.7}, n - 1), 1.0);
}

ObjectiveSpec torus_alg1(std::size_t n)
{
    ObjectiveSpec s;
    s.kind = ObjectiveKind::alg1;
    s.family = torus_family();
    s.box = Box{{0.0, 0.0}, {1.0, 1.0}};
    s.delay = {2, 1};
    s.observables = {Observable::coordinate(0)};
    s.data = observe(torus_states(n).values, s.observables.front());
    s.initial_state = {0.1, 0.7};
    return s;
}

ObjectiveSpec torus_alg2(ObjectiveKind kind, std::size_t n = 3000, std::size_t samples = 400)
{
    ObjectiveSpec s;
    s.kind = kind;
    s.family = torus_family();
    s.box = Box{{0.0, 0.0}, {1.0, 1.0}};
    s.delay = {3, 1};
    s.observables = {Observable::coordinate(0), Observable::coordinate(1)};
    s.data = torus_states(n);
    s.n_samples = samples;
    s.seed = 4;
    return s;
}

TimeSeries lorenz_states(std::size_t n, double dt = 0.01)
{
    const auto model = make_lorenz63({}, dt, 1, Integrator::euler);
    const auto traj = simulate(*model, State{1.0, 1.0, 1.0}, n + 999);
    return TimeSeries(traj.slice(1000, n), dt);
}

ObjectiveSpec lorenz_alg2(ObjectiveKind kind)
{
    ObjectiveSpec s;
    s.kind = kind;
    s.family = lorenz_family(0.01, 0.01, Integrator::euler);
    s.box = Box{{1.0, 1.0, 0.5, 1e-6}, {40.0, 60.0, 5.0, 2.0}};
    s.delay = {3, 20};
    s.observables = {Observable::coordinate(0)};
    s.data = lorenz_states(4000);
    s.n_samples = 300;
    s.seed = 9;
    return s;
}

const std::vector<double> lorenz_truth{10.0, 28.0, 8.0 / 3.0, 1.0};

} // namespace

TEST_CASE("alg1 vanishes at the true parameters without noise")
{
    const auto spec = torus_alg1(2000);
    CHECK(objective_alg1({alpha0, beta0}, spec) == 0.0);
    // beta does not enter the first coordinate
    CHECK(objective_alg1({alpha0, 0.3}, spec) == 0.0);
    CHECK(objective_alg1({alpha0 + 0.05, beta0}, spec) > 0.01);
    CHECK_THROWS_AS(objective_alg1({alpha0, beta0}, torus_alg2(ObjectiveKind::alg2)), ParameterError);
}

TEST_CASE("alg1 simulated measure has the data shape")
{
    const DelayMeasureObjective obj(torus_alg1(500));
    const auto sim = obj.simulated_measure({0.2, 0.3});
    CHECK(sim.size() == obj.data_measure().size());
    CHECK(sim.dim() == 2);
}

TEST_CASE("theta outside the box is a domain error")
{
    const DelayMeasureObjective obj(torus_alg1(200));
    CHECK_THROWS_AS(obj({1.5, 0.5}), DomainError);
    CHECK_THROWS_AS(obj({0.5}), DomainError);
    CHECK_THROWS_AS(pointwise_objective({-0.1, 0.5}, torus_alg1(200)), DomainError);
}

TEST_CASE("divergent simulations become a finite penalty")
{
    ObjectiveSpec s;
    s.kind = ObjectiveKind::alg1;
    s.family = lorenz_family(0.01, 0.01, Integrator::euler, 30.0);
    s.box = Box{{1.0, 1.0, 0.5, 0.5}, {40.0, 60.0, 5.0, 2.0}};
    s.delay = {2, 1};
    s.observables = {Observable::coordinate(0)};
    s.data = observe(lorenz_states(500).values, s.observables.front());
    s.initial_state = {1.0, 1.0, 1.0};
    const DelayMeasureObjective obj(s);
    const auto t = obj.terms(lorenz_truth);
    CHECK(t.diverged);
    CHECK(std::isfinite(t.total));
    CHECK(t.total > 1e6);

    s.divergence_penalty = 5.0;
    const auto u = DelayMeasureObjective(s).terms(lorenz_truth);
    CHECK(u.total < 1e6);
    CHECK(u.total > 5.0);
}

TEST_CASE("unbiased alg2 vanishes at the truth for a matching integrator")
{
    const DelayMeasureObjective obj(lorenz_alg2(ObjectiveKind::alg2_unbiased));
    const auto t = obj.terms(lorenz_truth);
    CHECK_FALSE(t.diverged);
    CHECK(t.total < 1e-12);

    std::vector<double> off = lorenz_truth;
    off[1] = 35.0;
    CHECK(obj(off) > 0.1);
}

TEST_CASE("alg2 terms at the truth sit near the sampling floor")
{
    const auto spec = lorenz_alg2(ObjectiveKind::alg2);
    const DelayMeasureObjective obj(spec);
    const auto t = obj.terms(lorenz_truth);
    REQUIRE(t.delay_terms.size() == 1);
    CHECK(t.total == doctest::Approx(t.state_term + t.delay_terms[0]));
    const auto states = EmpiricalMeasure(spec.data.values);
    double floor = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        floor += self_distance_floor(states, spec.n_samples, spec.metric, seed) / 5.0;
    }
    CHECK(t.state_term < 3.0 * floor);
    CHECK(t.state_term > 0.2 * floor);
}

TEST_CASE("state measure alone prefers a near-identity flow")
{
    const auto spec = lorenz_alg2(ObjectiveKind::alg2);
    std::vector<double> frozen = lorenz_truth;
    frozen[3] = 1e-6;
    CHECK(state_measure_objective(frozen, spec) < state_measure_objective(lorenz_truth, spec));
    CHECK(objective_alg2(frozen, spec) > objective_alg2(lorenz_truth, spec));
}

TEST_CASE("initial-window term")
{
    auto spec = lorenz_alg2(ObjectiveKind::alg2_with_init);
    const auto t = DelayMeasureObjective(spec).terms(lorenz_truth);
    CHECK(t.init_term == 0.0);
    CHECK(t.total < 1e-12);

    std::vector<double> off = lorenz_truth;
    off[0] = 12.0;
    CHECK(DelayMeasureObjective(spec).terms(off).init_term > 0.0);

    spec.init_window = 5000;
    CHECK_THROWS_AS(DelayMeasureObjective{spec}, ParameterError);
}

TEST_CASE("torus delay objective separates rotations the state term cannot")
{
    const DelayMeasureObjective obj(torus_alg2(ObjectiveKind::alg2_with_init));
    const double truth = obj({alpha0, beta0});
    for (const auto& other : std::vector<std::vector<double>>{
             {alpha0 + 0.05, beta0}, {alpha0, beta0 - 0.05}, {0.5 - alpha0, beta0}, {alpha0, 1.0 - beta0}}) {
        const auto t = obj.terms(other);
        CAPTURE(other[0]);
        CAPTURE(other[1]);
        CHECK(t.total > truth + 0.01);
        CHECK(t.state_term < 0.1);
    }
}

TEST_CASE("objective evaluation is deterministic")
{
    const auto spec = torus_alg2(ObjectiveKind::alg2);
    const DelayMeasureObjective a(spec);
    const DelayMeasureObjective b(spec);
    CHECK(a.sample_indices() == b.sample_indices());
    CHECK(a({0.3, 0.4}) == b({0.3, 0.4}));
    CHECK(a({0.3, 0.4}) == a({0.3, 0.4}));

    auto other = spec;
    other.seed = 5;
    CHECK(DelayMeasureObjective(other).sample_indices() != a.sample_indices());
}

TEST_CASE("scan on a single point equals a direct call")
{
    const auto spec = torus_alg2(ObjectiveKind::alg2_unbiased);
    const auto scan = scan_landscape(spec, {{0.25, 0.5}});
    REQUIRE(scan.size() == 1);
    CHECK(scan[0].loss == DelayMeasureObjective(spec)({0.25, 0.5}));

    const auto many = scan_landscape(spec, {{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}});
    CHECK(many[1].theta == std::vector<double>{0.2, 0.2});
    CHECK(many[2].loss == DelayMeasureObjective(spec)({0.3, 0.3}));
    CHECK_THROWS_AS(scan_landscape(spec, {}), ParameterError);
}

TEST_CASE("pointwise mean squared error")
{
    const auto spec = torus_alg1(300);
    CHECK(pointwise_objective({alpha0, beta0}, spec) == 0.0);
    CHECK(pointwise_objective({alpha0 + 0.1, beta0}, spec) > 0.0);

    auto one = spec;
    one.data = observe(torus_states(1).values, spec.observables.front());
    CHECK_THROWS_WITH_AS(pointwise_objective({alpha0, beta0}, one), doctest::Contains("zero-length horizon"),
                         ParameterError);
}

TEST_CASE("sampling floor shrinks with the sample size")
{
    const auto states = EmpiricalMeasure(lorenz_states(6000).values);
    const MetricSpec metric;
    double f250 = 0.0;
    double f500 = 0.0;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        f250 += self_distance_floor(states, 250, metric, seed);
        f500 += self_distance_floor(states, 500, metric, seed);
    }
    CHECK(f500 < f250);
    CHECK_THROWS_AS(self_distance_floor(states, 3001, metric, 1), ParameterError);
}

TEST_CASE("specification checks")
{
    auto s = torus_alg2(ObjectiveKind::alg2, 300, 100);
    s.n_samples = 299;
    CHECK_THROWS_AS(DelayMeasureObjective{s}, ParameterError);
    s = torus_alg2(ObjectiveKind::alg2, 300, 100);
    s.observables.clear();
    CHECK_THROWS_AS(DelayMeasureObjective{s}, ParameterError);
    s = torus_alg2(ObjectiveKind::alg2, 300, 100);
    s.box = Box{{0.0}, {1.0}};
    CHECK_THROWS_AS(DelayMeasureObjective{s}, ParameterError);
    auto a = torus_alg1(100);
    a.initial_state.clear();
    CHECK_THROWS_AS(DelayMeasureObjective{a}, ParameterError);
    CHECK_THROWS_AS(parse_objective_kind("alg3"), ParameterError);
    CHECK(parse_objective_kind(to_string(ObjectiveKind::alg2_with_init)) == ObjectiveKind::alg2_with_init);
}

} // namespace dmi
