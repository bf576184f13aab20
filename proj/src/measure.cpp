#include "dmi/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dmi/parallel.hpp"
#include "dmi/rng.hpp"

namespace dmi
{

TimeSeries::TimeSeries(PointSet v, double dt, double start) : values(std::move(v)), dt_samp(dt), t0(start)
{
    if (values.rows() < 1 || values.cols() < 1) {
        throw ParameterError("TimeSeries: need at least one sample of dimension >= 1");
    }
    if (!(dt_samp > 0.0) || !std::isfinite(dt_samp)) {
        throw ParameterError("TimeSeries: dt_samp must be positive");
    }
    if (!all_finite(values.data())) {
        throw ParameterError("TimeSeries: non-finite sample");
    }
}

TimeSeries TimeSeries::component(std::size_t j) const
{
    if (j >= dim()) {
        throw ParameterError("TimeSeries: component index out of range");
    }
    PointSet v(size(), 1);
    for (std::size_t i = 0; i < size(); ++i) {
        v(i, 0) = values(i, j);
    }
    return {std::move(v), dt_samp, t0};
}

TimeSeries TimeSeries::slice(std::size_t first, std::size_t count) const
{
    return {values.slice(first, count), dt_samp, time(first)};
}

Observable Observable::coordinate(std::size_t j)
{
    return {"x[" + std::to_string(j) + "]", [j](std::span<const double> x) {
                if (j >= x.size()) {
                    throw ParameterError("coordinate observable: index out of range");
                }
                return x[j];
            }};
}

Observable Observable::linear(std::vector<double> w, double offset)
{
    std::ostringstream os;
    os.precision(17);
    os << "linear(";
    for (std::size_t i = 0; i < w.size(); ++i) {
        os << (i ? "," : "") << w[i];
    }
    os << ";" << offset << ")";
    return {os.str(), [w = std::move(w), offset](std::span<const double> x) {
                if (x.size() != w.size()) {
                    throw ParameterError("linear observable: dimension mismatch");
                }
                double s = offset;
                for (std::size_t i = 0; i < w.size(); ++i) {
                    s += w[i] * x[i];
                }
                return s;
            }};
}

Observable Observable::constant(double c)
{
    std::ostringstream os;
    os.precision(17);
    os << "constant(" << c << ")";
    return {os.str(), [c](std::span<const double>) { return c; }};
}

Observable Observable::polynomial(std::vector<Monomial> terms)
{
    std::ostringstream os;
    os.precision(17);
    os << "polynomial(";
    for (std::size_t t = 0; t < terms.size(); ++t) {
        os << (t ? "+" : "") << terms[t].coef;
        for (std::size_t i = 0; i < terms[t].exponents.size(); ++i) {
            if (terms[t].exponents[i] > 0) {
                os << "*x" << i << "^" << terms[t].exponents[i];
            }
        }
    }
    os << ")";
    return {os.str(), [terms = std::move(terms)](std::span<const double> x) {
                double s = 0.0;
                for (const auto& t : terms) {
                    if (t.exponents.size() > x.size()) {
                        throw ParameterError("polynomial observable: dimension mismatch");
                    }
                    double p = t.coef;
                    for (std::size_t i = 0; i < t.exponents.size(); ++i) {
                        for (unsigned e = 0; e < t.exponents[i]; ++e) {
                            p *= x[i];
                        }
                    }
                    s += p;
                }
                return s;
            }};
}

std::size_t DelayParams::count(std::size_t n) const
{
    const std::size_t span = (m - 1) * tau_bar;
    return n > span ? n - span : 0;
}

EmpiricalMeasure::EmpiricalMeasure(PointSet points) : points_(std::move(points))
{
    if (points_.rows() < 1) {
        throw ParameterError("EmpiricalMeasure: need at least one point");
    }
    if (!all_finite(points_.data())) {
        throw ParameterError("EmpiricalMeasure: non-finite point");
    }
    weights_.assign(points_.rows(), 1.0 / static_cast<double>(points_.rows()));
}

EmpiricalMeasure::EmpiricalMeasure(PointSet points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)), uniform_(false)
{
    if (points_.rows() < 1) {
        throw ParameterError("EmpiricalMeasure: need at least one point");
    }
    if (weights_.size() != points_.rows()) {
        throw ParameterError("EmpiricalMeasure: weight count does not match point count");
    }
    if (!all_finite(points_.data())) {
        throw ParameterError("EmpiricalMeasure: non-finite point");
    }
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ParameterError("EmpiricalMeasure: weights must be finite and nonnegative");
        }
    }
    const double total = pairwise_sum(weights_.data(), weights_.size());
    if (std::abs(total - 1.0) > 1e-12) {
        throw ParameterError("EmpiricalMeasure: weights must sum to 1");
    }
    const double w0 = weights_.front();
    uniform_ = std::all_of(weights_.begin(), weights_.end(), [w0](double w) { return w == w0; });
}

EmpiricalMeasure EmpiricalMeasure::reversed_coordinates() const
{
    PointSet p(points_.rows(), points_.cols());
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < p.cols(); ++j) {
            p(i, j) = points_(i, p.cols() - 1 - j);
        }
    }
    if (uniform_) {
        return EmpiricalMeasure(std::move(p));
    }
    return {std::move(p), weights_};
}

TimeSeries observe(const Trajectory& trajectory, const Observable& obs, double dt_samp, double t0)
{
    if (trajectory.empty()) {
        throw ParameterError("observe: empty trajectory");
    }
    PointSet v(trajectory.rows(), 1);
    for (std::size_t i = 0; i < trajectory.rows(); ++i) {
        v(i, 0) = obs(trajectory.row(i));
    }
    return {std::move(v), dt_samp, t0};
}

TimeSeries add_noise(const TimeSeries& series, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0.0)) {
        throw ParameterError("add_noise: sigma must be nonnegative");
    }
    TimeSeries out = series;
    if (sigma == 0.0) {
        return out;
    }
    CounterRng rng(seed);
    for (double& v : out.values.data()) {
        v += sigma * rng.normal();
    }
    return out;
}

EmpiricalMeasure delay_embed(const TimeSeries& series, const DelayParams& params, DelayOrder order)
{
    if (series.dim() != 1) {
        throw ParameterError("delay_embed: series must be scalar");
    }
    if (params.m < 1 || params.tau_bar < 1) {
        throw ParameterError("delay_embed: need m >= 1 and tau_bar >= 1");
    }
    const std::size_t n = series.size();
    const std::size_t k = params.count(n);
    if (k == 0) {
        std::ostringstream os;
        os << "delay_embed: K = N - (m-1)*tau_bar <= 0 for N=" << n << ", m=" << params.m
           << ", tau_bar=" << params.tau_bar;
        throw ParameterError(os.str());
    }
    const std::size_t m = params.m;
    PointSet pts(k, m);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double v = series.values(i + j * params.tau_bar, 0);
            if (order == DelayOrder::ascending) {
                pts(i, j) = v;
            } else {
                pts(i, m - 1 - j) = v;
            }
        }
    }
    return EmpiricalMeasure(std::move(pts));
}

std::vector<double> delay_map_apply(const DynamicalModel& model, const Observable& obs, std::size_t m,
                                    std::span<const double> x)
{
    if (m < 1) {
        throw ParameterError("delay_map_apply: m must be at least 1");
    }
    std::vector<double> out(m);
    State s(x.begin(), x.end());
    out[0] = obs(s);
    for (std::size_t j = 1; j < m; ++j) {
        try {
            s = model.step(s);
        } catch (const DivergenceError& e) {
            throw DivergenceError(j - 1, e.magnitude(), "delay_map_apply iterate");
        }
        out[j] = obs(s);
    }
    return out;
}

EmpiricalMeasure pushforward(const EmpiricalMeasure& mu, const PointMap& f)
{
    const std::size_t k = mu.size();
    std::vector<std::vector<double>> mapped(k);
    parallel_for(k, [&](std::size_t i) {
        try {
            mapped[i] = f(mu.points().row(i));
        } catch (const DivergenceError& e) {
            throw DivergenceError(i, e.magnitude(), "pushforward point");
        }
    });
    PointSet pts(0, mapped.front().size());
    pts.reserve(k);
    for (const auto& r : mapped) {
        pts.push_back(r);
    }
    if (mu.uniform()) {
        return EmpiricalMeasure(std::move(pts));
    }
    return {std::move(pts), mu.weights()};
}

EmpiricalMeasure state_measure(const Trajectory& trajectory, std::size_t burn_in)
{
    if (burn_in >= trajectory.rows()) {
        throw ParameterError("state_measure: burn_in leaves no states");
    }
    return EmpiricalMeasure(trajectory.slice(burn_in, trajectory.rows() - burn_in));
}

EmpiricalMeasure subsample(const EmpiricalMeasure& mu, std::size_t n, std::uint64_t seed)
{
    if (n < 1 || n > mu.size()) {
        throw ParameterError("subsample: need 1 <= n <= K");
    }
    const auto idx = sample_without_replacement(mu.size(), n, seed);
    PointSet pts(0, mu.dim());
    pts.reserve(n);
    for (std::size_t i : idx) {
        pts.push_back(mu.points().row(i));
    }
    return EmpiricalMeasure(std::move(pts));
}

} // namespace dmi
