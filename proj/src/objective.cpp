#include "dmi/objective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dmi/parallel.hpp"
#include "dmi/rng.hpp"

namespace dmi
{

namespace
{

void expect_params(const std::vector<double>& theta, std::size_t n, const char* family)
{
    if (theta.size() != n) {
        std::ostringstream os;
        os << family << " family expects " << n << " parameters, got " << theta.size();
        throw ParameterError(os.str());
    }
}

std::size_t checked_ratio(double num, double den, const char* what)
{
    const double r = num / den;
    const double k = std::round(r);
    if (!(k >= 1.0) || std::abs(r - k) > 1e-9 * std::max(1.0, r)) {
        throw ParameterError(std::string(what) + " must be a positive integer multiple of the integration step");
    }
    return static_cast<std::size_t>(k);
}

// Stream ids for the seeded draws made by one objective.
constexpr std::uint64_t stream_states = 0;
constexpr std::uint64_t stream_delay_base = 100;

} // namespace

ModelFamily torus_family()
{
    ModelFamily fam;
    fam.name = "torus";
    fam.param_names = {"alpha", "beta"};
    fam.make = [](const std::vector<double>& theta, std::size_t intervals) -> std::unique_ptr<DynamicalModel> {
        expect_params(theta, 2, "torus");
        if (intervals <= 1) {
            return std::make_unique<TorusRotation>(theta[0], theta[1]);
        }
        return std::make_unique<IteratedMap>(std::make_shared<TorusRotation>(theta[0], theta[1]), intervals);
    };
    return fam;
}

ModelFamily lorenz_family(double dt_samp, double dt_int, Integrator method, double overflow_guard)
{
    const std::size_t per_interval = checked_ratio(dt_samp, dt_int, "lorenz dt_samp");
    ModelFamily fam;
    fam.name = "lorenz";
    fam.param_names = {"sigma", "rho", "beta", "time_scale"};
    fam.make = [=](const std::vector<double>& theta, std::size_t intervals) -> std::unique_ptr<DynamicalModel> {
        if (theta.size() != 3) {
            expect_params(theta, 4, "lorenz");
        }
        Lorenz63Field field{theta[0], theta[1], theta[2], theta.size() == 4 ? theta[3] : 1.0};
        return make_lorenz63(field, dt_int, per_interval * std::max<std::size_t>(1, intervals), method,
                             overflow_guard);
    };
    return fam;
}

ModelFamily ks_family(const KSConfig& base)
{
    ModelFamily fam;
    fam.name = "ks";
    fam.param_names = {"theta"};
    fam.make = [base](const std::vector<double>& theta, std::size_t intervals) -> std::unique_ptr<DynamicalModel> {
        expect_params(theta, 1, "ks");
        KSConfig cfg = base;
        cfg.theta = theta[0];
        cfg.dt_samp = base.dt_samp * static_cast<double>(std::max<std::size_t>(1, intervals));
        return std::make_unique<KSModel>(cfg);
    };
    return fam;
}

ObjectiveKind parse_objective_kind(const std::string& s)
{
    if (s == "alg1") {
        return ObjectiveKind::alg1;
    }
    if (s == "alg2") {
        return ObjectiveKind::alg2;
    }
    if (s == "alg2_unbiased") {
        return ObjectiveKind::alg2_unbiased;
    }
    if (s == "alg2_with_init") {
        return ObjectiveKind::alg2_with_init;
    }
    throw ParameterError("unknown objective kind '" + s + "'");
}

std::string to_string(ObjectiveKind k)
{
    switch (k) {
    case ObjectiveKind::alg1:
        return "alg1";
    case ObjectiveKind::alg2:
        return "alg2";
    case ObjectiveKind::alg2_unbiased:
        return "alg2_unbiased";
    case ObjectiveKind::alg2_with_init:
        return "alg2_with_init";
    }
    return "?";
}

void ObjectiveSpec::validate() const
{
    if (!family.make) {
        throw ParameterError("objective: model family is not set");
    }
    box.validate();
    if (box.size() != family.param_names.size() && !(family.name == "lorenz" && box.size() == 3)) {
        throw ParameterError("objective: box dimension does not match the " + family.name + " family");
    }
    if (observables.empty()) {
        throw ParameterError("objective: at least one observable is required");
    }
    if (delay.m < 1 || delay.tau_bar < 1) {
        throw ParameterError("objective: need m >= 1 and tau_bar >= 1");
    }
    metric.validate();
    if (data.size() < 1) {
        throw ParameterError("objective: empty data series");
    }
    if (!(divergence_penalty >= 0.0) || !std::isfinite(divergence_penalty)) {
        throw ParameterError("objective: divergence_penalty must be finite and nonnegative");
    }
    if (kind == ObjectiveKind::alg1) {
        if (data.dim() != 1) {
            throw ParameterError("alg1: data must be a scalar series");
        }
        if (initial_state.empty()) {
            throw ParameterError("alg1: initial_state is required");
        }
        if (!(sim_noise_sigma >= 0.0)) {
            throw ParameterError("alg1: sim_noise_sigma must be nonnegative");
        }
        if (delay.count(data.size()) == 0) {
            throw ParameterError("alg1: data too short for the delay parameters");
        }
        return;
    }
    if (n_samples < 1) {
        throw ParameterError("alg2: n_samples must be at least 1");
    }
    if (kind == ObjectiveKind::alg2_with_init) {
        const std::size_t w = init_window ? init_window : delay.m;
        if ((w - 1) * delay.tau_bar >= data.size()) {
            throw ParameterError("alg2_with_init: init_window exceeds the data length");
        }
    }
}

DelayMeasureObjective::DelayMeasureObjective(ObjectiveSpec spec) : spec_(std::move(spec))
{
    spec_.validate();
    const auto order = DelayOrder::ascending;
    if (spec_.kind == ObjectiveKind::alg1) {
        data_measure_ = delay_embed(spec_.data, spec_.delay, order);
        return;
    }

    const std::size_t n = spec_.data.size();
    const std::size_t tau = spec_.delay.tau_bar;
    const std::size_t reach = std::max<std::size_t>(spec_.delay.m - 1, 1) * tau;
    if (spec_.burn_in + reach >= n) {
        throw ParameterError("alg2: burn_in plus delay span leaves no usable states");
    }
    const std::size_t usable = n - spec_.burn_in - reach;
    if (spec_.n_samples > usable) {
        std::ostringstream os;
        os << "alg2: n_samples=" << spec_.n_samples << " exceeds the " << usable << " usable states";
        throw ParameterError(os.str());
    }

    indices_ = sample_without_replacement(usable, spec_.n_samples, spec_.seed, stream_states);
    for (auto& i : indices_) {
        i += spec_.burn_in;
    }

    const auto& X = spec_.data.values;
    PointSet states(0, X.cols());
    states.reserve(indices_.size());
    for (std::size_t i : indices_) {
        states.push_back(X.row(i));
    }
    data_measure_ = EmpiricalMeasure(std::move(states));

    const bool unbiased = spec_.kind == ObjectiveKind::alg2_unbiased ||
                          (spec_.kind == ObjectiveKind::alg2_with_init && spec_.init_unbiased);
    const std::size_t m = spec_.delay.m;
    if (unbiased) {
        // T # mu and Psi_(y, T) # mu read off the data trajectory itself.
        PointSet shifted(0, X.cols());
        shifted.reserve(indices_.size());
        for (std::size_t i : indices_) {
            shifted.push_back(X.row(i + tau));
        }
        state_target_ = EmpiricalMeasure(std::move(shifted));
        for (const auto& obs : spec_.observables) {
            PointSet pts(indices_.size(), m);
            for (std::size_t s = 0; s < indices_.size(); ++s) {
                for (std::size_t j = 0; j < m; ++j) {
                    pts(s, j) = obs(X.row(indices_[s] + j * tau));
                }
            }
            delay_targets_.emplace_back(std::move(pts));
        }
    } else {
        state_target_ = data_measure_;
        const TimeSeries kept = spec_.data.slice(spec_.burn_in, n - spec_.burn_in);
        for (std::size_t j = 0; j < spec_.observables.size(); ++j) {
            const auto full = delay_embed(observe(kept.values, spec_.observables[j], kept.dt_samp), spec_.delay,
                                          order);
            const std::size_t take = std::min(spec_.n_samples, full.size());
            delay_targets_.push_back(subsample(full, take, CounterRng::mix64(spec_.seed + stream_delay_base + j)));
        }
    }
}

double DelayMeasureObjective::penalty(double magnitude) const
{
    if (!std::isfinite(magnitude)) {
        magnitude = default_overflow_guard;
    }
    return spec_.divergence_penalty + magnitude;
}

ObjectiveTerms DelayMeasureObjective::terms(const std::vector<double>& theta) const
{
    if (!spec_.box.contains(theta)) {
        throw DomainError("objective: theta outside the parameter box");
    }
    try {
        return spec_.kind == ObjectiveKind::alg1 ? alg1_terms(theta) : alg2_terms(theta);
    } catch (const DivergenceError& e) {
        ObjectiveTerms t;
        t.diverged = true;
        t.total = penalty(e.magnitude());
        return t;
    } catch (const InstabilityError&) {
        ObjectiveTerms t;
        t.diverged = true;
        t.total = penalty(default_overflow_guard);
        return t;
    }
}

EmpiricalMeasure DelayMeasureObjective::simulated_measure(const std::vector<double>& theta) const
{
    const auto model = spec_.family.make(theta, 1);
    const std::size_t steps = spec_.sim_length ? spec_.sim_length : spec_.data.size() - 1;
    if (spec_.burn_in > steps) {
        throw ParameterError("alg1: burn_in exceeds the simulated length");
    }
    PointSet values(steps + 1 - spec_.burn_in, 1);
    State x = spec_.initial_state;
    const auto& obs = spec_.observables.front();
    for (std::size_t i = 0; i <= steps; ++i) {
        if (i > 0) {
            try {
                x = model->step(x);
            } catch (const DivergenceError& e) {
                throw DivergenceError(i - 1, e.magnitude(), "alg1 simulation");
            }
        }
        if (i >= spec_.burn_in) {
            values(i - spec_.burn_in, 0) = obs(x);
        }
    }
    TimeSeries series(std::move(values), spec_.data.dt_samp);
    series = add_noise(series, spec_.sim_noise_sigma, spec_.sim_noise_seed);
    return delay_embed(series, spec_.delay, DelayOrder::ascending);
}

ObjectiveTerms DelayMeasureObjective::alg1_terms(const std::vector<double>& theta) const
{
    ObjectiveTerms t;
    const auto sim = simulated_measure(theta);
    t.delay_terms.push_back(distance(sim, data_measure_, spec_.metric));
    t.total = t.delay_terms.front();
    return t;
}

ObjectiveTerms DelayMeasureObjective::alg2_terms(const std::vector<double>& theta) const
{
    const auto model = spec_.family.make(theta, spec_.delay.tau_bar);
    const std::size_t m = spec_.delay.m;
    const std::size_t iterates = std::max<std::size_t>(m - 1, 1);
    const std::size_t ns = indices_.size();
    const std::size_t nobs = spec_.observables.size();
    const auto& X = spec_.data.values;

    PointSet pushed(ns, X.cols());
    std::vector<PointSet> delay_pts(nobs, PointSet(ns, m));
    parallel_for(ns, [&](std::size_t s) {
        State x(X.row(indices_[s]).begin(), X.row(indices_[s]).end());
        for (std::size_t o = 0; o < nobs; ++o) {
            delay_pts[o](s, 0) = spec_.observables[o](x);
        }
        for (std::size_t k = 1; k <= iterates; ++k) {
            try {
                x = model->step(x);
            } catch (const DivergenceError& e) {
                throw DivergenceError(s, e.magnitude(), "alg2 pushforward");
            }
            if (k == 1) {
                std::copy(x.begin(), x.end(), pushed.row(s).begin());
            }
            if (k < m) {
                for (std::size_t o = 0; o < nobs; ++o) {
                    delay_pts[o](s, k) = spec_.observables[o](x);
                }
            }
        }
    });

    ObjectiveTerms t;
    t.state_term = distance(EmpiricalMeasure(std::move(pushed)), state_target_, spec_.metric);
    t.total = t.state_term;
    for (std::size_t o = 0; o < nobs; ++o) {
        const double d = distance(EmpiricalMeasure(std::move(delay_pts[o])), delay_targets_[o], spec_.metric);
        t.delay_terms.push_back(d);
        t.total += d;
    }

    if (spec_.kind == ObjectiveKind::alg2_with_init) {
        const std::size_t w = spec_.init_window ? spec_.init_window : m;
        State x(X.row(0).begin(), X.row(0).end());
        double sq = 0.0;
        for (std::size_t k = 0; k < w; ++k) {
            if (k > 0) {
                x = model->step(x);
            }
            const auto target = X.row(k * spec_.delay.tau_bar);
            for (const auto& obs : spec_.observables) {
                const double diff = obs(x) - obs(target);
                sq += diff * diff;
            }
        }
        t.init_term = sq / static_cast<double>(nobs * w);
        t.total += t.init_term;
    }
    return t;
}

double objective_alg1(const std::vector<double>& theta, const ObjectiveSpec& spec)
{
    if (spec.kind != ObjectiveKind::alg1) {
        throw ParameterError("objective_alg1: spec.kind must be alg1");
    }
    return DelayMeasureObjective(spec)(theta);
}

double objective_alg2(const std::vector<double>& theta, const ObjectiveSpec& spec)
{
    if (spec.kind == ObjectiveKind::alg1) {
        throw ParameterError("objective_alg2: spec.kind must be one of the alg2 variants");
    }
    return DelayMeasureObjective(spec)(theta);
}

double state_measure_objective(const std::vector<double>& theta, const ObjectiveSpec& spec)
{
    if (spec.kind == ObjectiveKind::alg1) {
        throw ParameterError("state_measure_objective: needs full-state data (an alg2 variant)");
    }
    const auto t = DelayMeasureObjective(spec).terms(theta);
    return t.diverged ? t.total : t.state_term;
}

double pointwise_objective(const std::vector<double>& theta, const ObjectiveSpec& spec)
{
    if (spec.observables.size() != 1) {
        throw ParameterError("pointwise_objective: exactly one observable is required");
    }
    if (spec.data.dim() != 1) {
        throw ParameterError("pointwise_objective: data must be a scalar series");
    }
    if (!spec.box.contains(theta)) {
        throw DomainError("pointwise_objective: theta outside the parameter box");
    }
    const std::size_t horizon = std::min(spec.sim_length ? spec.sim_length : spec.data.size() - 1,
                                         spec.data.size() - 1);
    if (horizon == 0) {
        throw ParameterError("pointwise_objective: zero-length horizon");
    }
    const auto model = spec.family.make(theta, 1);
    State x = spec.initial_state;
    std::vector<double> sq(horizon);
    try {
        for (std::size_t i = 1; i <= horizon; ++i) {
            x = model->step(x);
            const double d = spec.observables.front()(x) - spec.data.values(i, 0);
            sq[i - 1] = d * d;
        }
    } catch (const DivergenceError& e) {
        return spec.divergence_penalty + (std::isfinite(e.magnitude()) ? e.magnitude() : default_overflow_guard);
    } catch (const InstabilityError&) {
        return spec.divergence_penalty + default_overflow_guard;
    }
    return pairwise_sum(sq.data(), sq.size()) / static_cast<double>(horizon);
}

std::vector<LandscapePoint> scan_landscape(const Objective& f, const std::vector<std::vector<double>>& grid)
{
    if (grid.empty()) {
        throw ParameterError("scan_landscape: empty grid");
    }
    std::vector<LandscapePoint> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { out[i] = {grid[i], f(grid[i])}; });
    return out;
}

std::vector<LandscapePoint> scan_landscape(const ObjectiveSpec& spec, const std::vector<std::vector<double>>& grid)
{
    const DelayMeasureObjective obj(spec);
    return scan_landscape([&obj](const std::vector<double>& th) { return obj(th); }, grid);
}

double self_distance_floor(const EmpiricalMeasure& mu, std::size_t n, const MetricSpec& metric, std::uint64_t seed)
{
    if (n < 1 || 2 * n > mu.size()) {
        throw ParameterError("self_distance_floor: need 1 <= n and 2n <= K");
    }
    const auto idx = sample_without_replacement(mu.size(), 2 * n, seed);
    PointSet a(0, mu.dim());
    PointSet b(0, mu.dim());
    for (std::size_t i = 0; i < n; ++i) {
        a.push_back(mu.points().row(idx[i]));
        b.push_back(mu.points().row(idx[n + i]));
    }
    return distance(EmpiricalMeasure(std::move(a)), EmpiricalMeasure(std::move(b)), metric);
}

} // namespace dmi
