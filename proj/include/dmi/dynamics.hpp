#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dmi/types.hpp"

namespace dmi
{

inline constexpr double default_overflow_guard = 1e8;

/// Parameterized evolution rule advancing a state by one sampling interval.
///
/// Implementations are immutable after construction and step() is
/// deterministic: identical inputs give bit-identical outputs.
class DynamicalModel
{
public:
    virtual ~DynamicalModel() = default;

    virtual std::size_t state_dim() const = 0;
    virtual std::vector<double> params() const = 0;
    virtual std::string name() const = 0;

    /// Advance one interval. Rejects wrong dimensions and non-finite input.
    State step(std::span<const double> x) const;

protected:
    virtual void advance(std::span<const double> x, std::span<double> out) const = 0;
};

State step_map(const DynamicalModel& model, std::span<const double> x);

/// n_steps + 1 states starting at x0. A DivergenceError raised at step i is
/// rethrown with index i.
Trajectory simulate(const DynamicalModel& model, std::span<const double> x0, std::size_t n_steps);

/// T(z1, z2) = (z1 + alpha, z2 + beta) mod 1.
class TorusRotation final : public DynamicalModel
{
public:
    TorusRotation(double alpha, double beta);

    std::size_t state_dim() const override { return 2; }
    std::vector<double> params() const override { return {alpha_, beta_}; }
    std::string name() const override { return "torus"; }

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

protected:
    void advance(std::span<const double> x, std::span<double> out) const override;

private:
    double alpha_;
    double beta_;
};

// Reduction to [0, 1). Values that round up to 1 are mapped to 0.
double wrap_unit(double v);

enum class Integrator
{
    euler,
    rk4
};

Integrator parse_integrator(const std::string& s);
std::string to_string(Integrator m);

using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

/// n_sub explicit steps of size dt_int. Throws DivergenceError naming the
/// substep index once the state norm exceeds overflow_guard or goes
/// non-finite.
State integrate_flow(const VectorField& field, std::span<const double> x0, double dt_int, std::size_t n_sub,
                     Integrator method, double overflow_guard = default_overflow_guard);

/// Lorenz-63 vector field scaled by time_scale. time_scale = 1 is the
/// classical system; time_scale -> 0 approaches the identity flow map.
struct Lorenz63Field
{
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    double time_scale = 1.0;

    void operator()(std::span<const double> x, std::span<double> dx) const;
};

/// Time-(dt_int * n_sub) flow map of a vector field.
class FlowMap final : public DynamicalModel
{
public:
    FlowMap(std::string name, std::size_t dim, VectorField field, std::vector<double> params, double dt_int,
            std::size_t n_sub, Integrator method, double overflow_guard = default_overflow_guard);

    std::size_t state_dim() const override { return dim_; }
    std::vector<double> params() const override { return params_; }
    std::string name() const override { return name_; }

    double interval() const { return dt_int_ * static_cast<double>(n_sub_); }
    Integrator method() const { return method_; }

protected:
    void advance(std::span<const double> x, std::span<double> out) const override;

private:
    std::string name_;
    std::size_t dim_;
    VectorField field_;
    std::vector<double> params_;
    double dt_int_;
    std::size_t n_sub_;
    Integrator method_;
    double guard_;
};

std::unique_ptr<FlowMap> make_lorenz63(const Lorenz63Field& field, double dt_int, std::size_t n_sub,
                                       Integrator method, double overflow_guard = default_overflow_guard);

/// base applied `count` times per step.
class IteratedMap final : public DynamicalModel
{
public:
    IteratedMap(std::shared_ptr<const DynamicalModel> base, std::size_t count);

    std::size_t state_dim() const override { return base_->state_dim(); }
    std::vector<double> params() const override { return base_->params(); }
    std::string name() const override { return base_->name(); }

protected:
    void advance(std::span<const double> x, std::span<double> out) const override;

private:
    std::shared_ptr<const DynamicalModel> base_;
    std::size_t count_;
};

} // namespace dmi
