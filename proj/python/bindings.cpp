// Python bindings for the delay-measure core.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "dmi/dynamics.hpp"
#include "dmi/experiment.hpp"
#include "dmi/io.hpp"
#include "dmi/ks.hpp"
#include "dmi/metrics.hpp"
#include "dmi/objective.hpp"
#include "dmi/optimize.hpp"

namespace py = pybind11;
using namespace dmi;

namespace
{

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointSet to_points(const Array& a)
{
    if (a.ndim() == 1) {
        return PointSet(static_cast<std::size_t>(a.shape(0)), 1,
                        std::vector<double>(a.data(), a.data() + a.size()));
    }
    if (a.ndim() != 2) {
        throw py::value_error("expected a 1-D or 2-D array");
    }
    return PointSet(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                    std::vector<double>(a.data(), a.data() + a.size()));
}

EmpiricalMeasure to_measure(const Array& a, const std::optional<Array>& w)
{
    auto pts = to_points(a);
    if (!w) {
        return EmpiricalMeasure(std::move(pts));
    }
    return EmpiricalMeasure(std::move(pts), std::vector<double>(w->data(), w->data() + w->size()));
}

Array to_array(const PointSet& p)
{
    Array out({p.rows(), p.cols()});
    std::copy(p.data().begin(), p.data().end(), out.mutable_data());
    return out;
}

py::dict opt_dict(const OptResult& r)
{
    py::list trace;
    for (const auto& e : r.trace) {
        trace.append(py::dict(py::arg("iter") = e.iter, py::arg("theta") = e.theta, py::arg("loss") = e.loss));
    }
    return py::dict(py::arg("theta_star") = r.theta_star, py::arg("loss_star") = r.loss_star,
                    py::arg("n_evals") = r.n_evals, py::arg("termination") = to_string(r.termination),
                    py::arg("trace") = trace);
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Delay-measure system identification core";

    static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    static py::exception<DivergenceError> divergence_error(m, "DivergenceError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const ConfigError& e) {
            py::set_error(config_error, e.what());
        } catch (const DivergenceError& e) {
            py::set_error(divergence_error, e.what());
        } catch (const ParameterError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const DomainError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def(
        "energy_mmd",
        [](const Array& x, const Array& y, std::optional<Array> wx, std::optional<Array> wy) {
            return energy_mmd(to_measure(x, wx), to_measure(y, wy));
        },
        py::arg("x"), py::arg("y"), py::arg("wx") = py::none(), py::arg("wy") = py::none(),
        "Energy-distance MMD between two point clouds (rows are points).");

    m.def(
        "wasserstein_1d",
        [](const Array& x, const Array& y, int p) { return wasserstein_1d(to_measure(x, {}), to_measure(y, {}), p); },
        py::arg("x"), py::arg("y"), py::arg("p") = 2);

    m.def(
        "sliced_wasserstein",
        [](const Array& x, const Array& y, std::size_t n_projections, std::uint64_t seed, int p) {
            MetricSpec s;
            s.kind = MetricKind::sliced_wasserstein;
            s.n_projections = n_projections;
            s.seed = seed;
            s.p = p;
            return sliced_wasserstein(to_measure(x, {}), to_measure(y, {}), s);
        },
        py::arg("x"), py::arg("y"), py::arg("n_projections") = 100, py::arg("seed") = 0, py::arg("p") = 2);

    m.def(
        "delay_embed",
        [](const Array& series, std::size_t m_, std::size_t tau_bar, bool ascending) {
            const TimeSeries ts(to_points(series), 1.0);
            return to_array(
                delay_embed(ts, {m_, tau_bar}, ascending ? DelayOrder::ascending : DelayOrder::descending).points());
        },
        py::arg("series"), py::arg("m"), py::arg("tau_bar"), py::arg("ascending") = false,
        "Delay vectors of a scalar series, newest sample first unless ascending.");

    m.def(
        "simulate_torus",
        [](double alpha, double beta, std::vector<double> x0, std::size_t n_steps) {
            return to_array(simulate(TorusRotation(alpha, beta), x0, n_steps));
        },
        py::arg("alpha"), py::arg("beta"), py::arg("x0"), py::arg("n_steps"));

    m.def(
        "simulate_lorenz",
        [](std::vector<double> params, std::vector<double> x0, std::size_t n_steps, double dt, std::size_t n_sub,
           const std::string& integrator) {
            if (params.size() != 3 && params.size() != 4) {
                throw py::value_error("params are (sigma, rho, beta[, time_scale])");
            }
            const Lorenz63Field f{params[0], params[1], params[2], params.size() == 4 ? params[3] : 1.0};
            return to_array(simulate(*make_lorenz63(f, dt, n_sub, parse_integrator(integrator)), x0, n_steps));
        },
        py::arg("params"), py::arg("x0"), py::arg("n_steps"), py::arg("dt") = 0.01, py::arg("n_sub") = 1,
        py::arg("integrator") = "rk4");

    m.def(
        "simulate_ks",
        [](double theta, std::size_t n_steps, double domain_length, std::size_t grid_points, double dt,
           double dt_samp, std::optional<std::vector<double>> u0) {
            KSConfig cfg{theta, domain_length, grid_points, dt, dt_samp};
            const KSModel model(cfg);
            const State init = u0 ? *u0 : ks_default_initial(model);
            return to_array(simulate(model, init, n_steps));
        },
        py::arg("theta"), py::arg("n_steps"), py::arg("domain_length") = 100.0, py::arg("grid_points") = 200,
        py::arg("dt") = 0.1, py::arg("dt_samp") = 0.1, py::arg("u0") = py::none());

    m.def(
        "nelder_mead",
        [](const Objective& f, std::vector<double> theta0, std::vector<double> lower, std::vector<double> upper,
           std::size_t max_iter, double x_tol, double f_tol, double initial_step, std::uint64_t seed) {
            NelderMeadOptions o;
            o.max_iter = max_iter;
            o.x_tol = x_tol;
            o.f_tol = f_tol;
            o.initial_step = initial_step;
            o.seed = seed;
            return opt_dict(nelder_mead(f, theta0, Box{lower, upper}, o));
        },
        py::arg("f"), py::arg("theta0"), py::arg("lower"), py::arg("upper"), py::arg("max_iter") = 200,
        py::arg("x_tol") = 1e-8, py::arg("f_tol") = 1e-10, py::arg("initial_step") = 0.1, py::arg("seed") = 0);

    m.def(
        "canonical_config",
        [](const std::string& text) { return config_to_json(parse_run_config(text)); }, py::arg("config_json"),
        "Validates a run configuration and returns it with every default filled in.");

    m.def(
        "objective",
        [](const std::string& text, std::vector<double> theta) {
            const auto data = prepare_experiment(parse_run_config(text));
            const DelayMeasureObjective obj(data.spec);
            const auto t = obj.terms(theta);
            return py::dict(py::arg("total") = t.total, py::arg("state_term") = t.state_term,
                            py::arg("delay_terms") = t.delay_terms, py::arg("init_term") = t.init_term,
                            py::arg("diverged") = t.diverged);
        },
        py::arg("config_json"), py::arg("theta"), "Objective terms at theta for the data built from a config.");

    m.def(
        "run_experiment",
        [](const std::string& text, const std::string& out_dir) {
            const auto cfg = parse_run_config(text);
            py::gil_scoped_release release;
            return run_experiment(cfg, out_dir);
        },
        py::arg("config_json"), py::arg("out_dir"), "Runs an experiment, writes artifacts, returns report JSON.");

    m.def(
        "emit_plot_data",
        [](const std::string& run_dir) {
            std::vector<std::string> out;
            for (const auto& p : emit_plot_data(run_dir)) {
                out.push_back(p.string());
            }
            return out;
        },
        py::arg("run_dir"));

    m.attr("__version__") = library_version();
}
