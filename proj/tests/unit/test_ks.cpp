#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dmi/ks.hpp"

namespace dmi
{

namespace
{
double l2(const State& a)
{
    double s = 0.0;
    for (double v : a) {
        s += v * v;
    }
    return std::sqrt(s);
}
} // namespace

TEST_CASE("zero field is a fixed point")
{
    const KSModel model(KSConfig{});
    const State zero(200, 0.0);
    CHECK(ks_step(model, zero) == zero);
}

TEST_CASE("small-amplitude first mode grows by exp(L(k1) dt)")
{
    for (double theta : {0.5, 1.0, 1.5}) {
        KSConfig cfg;
        cfg.theta = theta;
        const KSModel model(cfg);
        const auto x = model.grid();
        const double eps = 1e-8;
        const double k1 = 2.0 * std::numbers::pi / cfg.domain_length;
        State u(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            u[j] = eps * std::sin(k1 * x[j]);
        }
        const auto v = ks_step(model, u);
        // project onto sin(k1 x) to read off the amplitude
        double amp = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            amp += v[j] * std::sin(k1 * x[j]);
        }
        amp *= 2.0 / static_cast<double>(x.size());
        const double growth = std::exp(theta * (k1 * k1 - k1 * k1 * k1 * k1) * cfg.dt);
        CAPTURE(theta);
        CHECK(std::abs(amp / eps - growth) / growth < 1e-6);
    }
}

TEST_CASE("ten steps at dt=0.1 agree with a dt=1e-3 run")
{
    KSConfig coarse_cfg;
    KSConfig fine_cfg;
    fine_cfg.dt = 1e-3;
    fine_cfg.dt_samp = 1e-3;
    const KSModel coarse(coarse_cfg);
    const KSModel fine(fine_cfg);
    State a = ks_default_initial(coarse);
    State b = a;
    for (int i = 0; i < 10; ++i) {
        a = ks_step(coarse, a);
    }
    for (int i = 0; i < 1000; ++i) {
        b = ks_step(fine, b);
    }
    State diff(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        diff[j] = a[j] - b[j];
    }
    CHECK(l2(diff) / l2(b) < 1e-4);
}

TEST_CASE("solution stays real over a long run")
{
    KSConfig cfg;
    const KSModel model(cfg);
    State u = ks_default_initial(model);
    for (int i = 0; i < 1000; ++i) {
        u = ks_step(model, u);
    }
    CHECK(model.max_imag_residue() < 1e-10);
    CHECK(all_finite(u));
}

TEST_CASE("sampling interval composes ETD substeps")
{
    KSConfig cfg;
    cfg.dt_samp = 0.5;
    const KSModel model(cfg);
    CHECK(model.substeps() == 5);
    KSConfig single;
    const KSModel one(single);
    const State u0 = ks_default_initial(model);
    State u = u0;
    for (int i = 0; i < 5; ++i) {
        u = ks_step(one, u);
    }
    const State w = model.step(u0);
    State diff(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        diff[j] = u[j] - w[j];
    }
    // substeps stay in spectral space, so only rounding separates the two
    CHECK(l2(diff) < 1e-12 * l2(u));
}

TEST_CASE("configuration errors")
{
    KSConfig cfg;
    cfg.dt_samp = 0.25;
    CHECK_THROWS_AS(KSModel{cfg}, ParameterError);
    cfg = KSConfig{};
    cfg.dt = -1.0;
    CHECK_THROWS_AS(KSModel{cfg}, ParameterError);
    const KSModel model(KSConfig{});
    CHECK_THROWS_AS(ks_step(model, State(10, 0.0)), ParameterError);
}

TEST_CASE("runs are deterministic")
{
    KSConfig cfg;
    cfg.dt_samp = 3.0;
    const KSModel a(cfg);
    const KSModel b(cfg);
    const auto u0 = ks_default_initial(a);
    CHECK(simulate(a, u0, 20) == simulate(b, u0, 20));
}

} // namespace dmi
