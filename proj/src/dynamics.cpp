#include "dmi/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace dmi
{

State DynamicalModel::step(std::span<const double> x) const
{
    if (x.size() != state_dim()) {
        std::ostringstream os;
        os << name() << ": state has dimension " << x.size() << ", expected " << state_dim();
        throw ParameterError(os.str());
    }
    if (!all_finite(x)) {
        throw ParameterError(name() + ": non-finite input state");
    }
    State out(x.size());
    advance(x, out);
    return out;
}

State step_map(const DynamicalModel& model, std::span<const double> x)
{
    return model.step(x);
}

Trajectory simulate(const DynamicalModel& model, std::span<const double> x0, std::size_t n_steps)
{
    if (x0.size() != model.state_dim()) {
        throw ParameterError(model.name() + ": initial state dimension mismatch");
    }
    Trajectory traj(0, model.state_dim());
    traj.reserve(n_steps + 1);
    traj.push_back(x0);
    State x(x0.begin(), x0.end());
    for (std::size_t i = 0; i < n_steps; ++i) {
        try {
            x = model.step(x);
        } catch (const DivergenceError& e) {
            throw DivergenceError(i, e.magnitude(), model.name() + " trajectory");
        }
        traj.push_back(x);
    }
    return traj;
}

double wrap_unit(double v)
{
    double r = v - std::floor(v);
    if (r >= 1.0) {
        r = 0.0;
    }
    return r;
}

TorusRotation::TorusRotation(double alpha, double beta) : alpha_(alpha), beta_(beta)
{
    if (!std::isfinite(alpha) || !std::isfinite(beta)) {
        throw ParameterError("TorusRotation: non-finite rotation parameters");
    }
}

void TorusRotation::advance(std::span<const double> x, std::span<double> out) const
{
    out[0] = wrap_unit(x[0] + alpha_);
    out[1] = wrap_unit(x[1] + beta_);
}

Integrator parse_integrator(const std::string& s)
{
    if (s == "euler") {
        return Integrator::euler;
    }
    if (s == "rk4") {
        return Integrator::rk4;
    }
    throw ParameterError("unknown integrator '" + s + "' (expected euler or rk4)");
}

std::string to_string(Integrator m)
{
    return m == Integrator::euler ? "euler" : "rk4";
}

State integrate_flow(const VectorField& field, std::span<const double> x0, double dt_int, std::size_t n_sub,
                     Integrator method, double overflow_guard)
{
    if (!(dt_int > 0.0)) {
        throw ParameterError("integrate_flow: dt_int must be positive");
    }
    if (n_sub < 1) {
        throw ParameterError("integrate_flow: n_sub must be at least 1");
    }
    const std::size_t n = x0.size();
    State x(x0.begin(), x0.end());
    State k1(n), k2(n), k3(n), k4(n), tmp(n);

    for (std::size_t s = 0; s < n_sub; ++s) {
        if (method == Integrator::euler) {
            field(x, k1);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += dt_int * k1[i];
            }
        } else {
            const double h = dt_int;
            field(x, k1);
            for (std::size_t i = 0; i < n; ++i) {
                tmp[i] = x[i] + 0.5 * h * k1[i];
            }
            field(tmp, k2);
            for (std::size_t i = 0; i < n; ++i) {
                tmp[i] = x[i] + 0.5 * h * k2[i];
            }
            field(tmp, k3);
            for (std::size_t i = 0; i < n; ++i) {
                tmp[i] = x[i] + h * k3[i];
            }
            field(tmp, k4);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        const double mag = norm2(x);
        if (!std::isfinite(mag) || mag > overflow_guard) {
            throw DivergenceError(s, mag, "integrate_flow");
        }
    }
    return x;
}

void Lorenz63Field::operator()(std::span<const double> x, std::span<double> dx) const
{
    dx[0] = time_scale * (sigma * (x[1] - x[0]));
    dx[1] = time_scale * (x[0] * (rho - x[2]) - x[1]);
    dx[2] = time_scale * (x[0] * x[1] - beta * x[2]);
}

FlowMap::FlowMap(std::string name, std::size_t dim, VectorField field, std::vector<double> params, double dt_int,
                 std::size_t n_sub, Integrator method, double overflow_guard)
    : name_(std::move(name)), dim_(dim), field_(std::move(field)), params_(std::move(params)), dt_int_(dt_int),
      n_sub_(n_sub), method_(method), guard_(overflow_guard)
{
    if (dim_ == 0) {
        throw ParameterError("FlowMap: state dimension must be positive");
    }
    if (!(dt_int_ > 0.0) || n_sub_ < 1) {
        throw ParameterError("FlowMap: need dt_int > 0 and n_sub >= 1");
    }
}

void FlowMap::advance(std::span<const double> x, std::span<double> out) const
{
    const State y = integrate_flow(field_, x, dt_int_, n_sub_, method_, guard_);
    std::copy(y.begin(), y.end(), out.begin());
}

std::unique_ptr<FlowMap> make_lorenz63(const Lorenz63Field& field, double dt_int, std::size_t n_sub,
                                       Integrator method, double overflow_guard)
{
    return std::make_unique<FlowMap>("lorenz63", 3, field,
                                     std::vector<double>{field.sigma, field.rho, field.beta, field.time_scale},
                                     dt_int, n_sub, method, overflow_guard);
}

IteratedMap::IteratedMap(std::shared_ptr<const DynamicalModel> base, std::size_t count)
    : base_(std::move(base)), count_(count)
{
    if (!base_ || count_ < 1) {
        throw ParameterError("IteratedMap: need a base model and count >= 1");
    }
}

void IteratedMap::advance(std::span<const double> x, std::span<double> out) const
{
    State y(x.begin(), x.end());
    for (std::size_t i = 0; i < count_; ++i) {
        y = base_->step(y);
    }
    std::copy(y.begin(), y.end(), out.begin());
}

} // namespace dmi
