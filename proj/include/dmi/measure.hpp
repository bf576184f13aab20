#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dmi/dynamics.hpp"
#include "dmi/types.hpp"

namespace dmi
{

/// Evenly sampled observations. values is N x d with N >= 1.
struct TimeSeries
{
    PointSet values;
    double dt_samp = 1.0;
    double t0 = 0.0;

    TimeSeries() = default;
    TimeSeries(PointSet v, double dt, double start = 0.0);

    std::size_t size() const { return values.rows(); }
    std::size_t dim() const { return values.cols(); }
    double time(std::size_t i) const { return t0 + dt_samp * static_cast<double>(i); }

    /// Component j as a scalar series.
    TimeSeries component(std::size_t j) const;
    /// Samples [first, first + count), with t0 shifted accordingly.
    TimeSeries slice(std::size_t first, std::size_t count) const;
};

/// Scalar function of the state. Keeps a textual description so it can be
/// echoed into run metadata.
class Observable
{
public:
    using Fn = std::function<double(std::span<const double>)>;

    Observable(std::string description, Fn fn) : desc_(std::move(description)), fn_(std::move(fn)) {}

    /// y(x) = x_j
    static Observable coordinate(std::size_t j);
    /// y(x) = w . x + offset
    static Observable linear(std::vector<double> w, double offset = 0.0);
    static Observable constant(double c);
    /// y(x) = sum_t coef_t * prod_i x_i^{exponents_t[i]}
    struct Monomial
    {
        double coef;
        std::vector<unsigned> exponents;
    };
    static Observable polynomial(std::vector<Monomial> terms);

    double operator()(std::span<const double> x) const { return fn_(x); }
    const std::string& description() const { return desc_; }

private:
    std::string desc_;
    Fn fn_;
};

/// Embedding dimension m and discrete delay tau_bar (tau = tau_bar * dt_samp).
struct DelayParams
{
    std::size_t m = 1;
    std::size_t tau_bar = 1;

    /// Number of delay vectors available from n samples, or 0 if none.
    std::size_t count(std::size_t n) const;
    double tau(double dt_samp) const { return static_cast<double>(tau_bar) * dt_samp; }
};

/// Coordinate order inside a delay vector.
///   descending: (y(t_{i+(m-1)tau}), ..., y(t_{i+tau}), y(t_i))
///   ascending:  (y(t_i), y(t_{i+tau}), ..., y(t_{i+(m-1)tau}))
/// Ascending matches delay_map_apply, which lists y(x), y(T x), ...
enum class DelayOrder
{
    descending,
    ascending
};

/// Weighted point cloud in R^d. Weights are nonnegative and sum to 1.
class EmpiricalMeasure
{
public:
    EmpiricalMeasure() = default;
    /// Uniform weights 1/K.
    explicit EmpiricalMeasure(PointSet points);
    EmpiricalMeasure(PointSet points, std::vector<double> weights);

    std::size_t size() const { return points_.rows(); }
    std::size_t dim() const { return points_.cols(); }
    const PointSet& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    bool uniform() const { return uniform_; }

    /// Same points with coordinates listed in reverse order.
    EmpiricalMeasure reversed_coordinates() const;

private:
    PointSet points_;
    std::vector<double> weights_;
    bool uniform_ = true;
};

TimeSeries observe(const Trajectory& trajectory, const Observable& obs, double dt_samp = 1.0, double t0 = 0.0);

/// values + N(0, sigma^2) noise drawn from CounterRng(seed).
TimeSeries add_noise(const TimeSeries& series, double sigma, std::uint64_t seed);

/// K = N - (m-1) tau_bar delay vectors of a scalar series, uniform weights.
EmpiricalMeasure delay_embed(const TimeSeries& series, const DelayParams& params,
                             DelayOrder order = DelayOrder::descending);

/// (y(x), y(T x), ..., y(T^{m-1} x)).
std::vector<double> delay_map_apply(const DynamicalModel& model, const Observable& obs, std::size_t m,
                                    std::span<const double> x);

using PointMap = std::function<std::vector<double>(std::span<const double>)>;

/// f # mu: each point mapped, weights kept. A DivergenceError from point i is
/// rethrown with index i.
EmpiricalMeasure pushforward(const EmpiricalMeasure& mu, const PointMap& f);

/// Uniform measure over trajectory rows [burn_in, N).
EmpiricalMeasure state_measure(const Trajectory& trajectory, std::size_t burn_in);

/// n points drawn without replacement, uniform weights 1/n.
EmpiricalMeasure subsample(const EmpiricalMeasure& mu, std::size_t n, std::uint64_t seed);

} // namespace dmi
