#include "dmi/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dmi/io.hpp"
#include "dmi/parallel.hpp"
#include "dmi/rng.hpp"

#ifndef DMI_VERSION
#define DMI_VERSION "0.0.0"
#endif
#ifndef DMI_BUILD_TYPE
#define DMI_BUILD_TYPE "unknown"
#endif

namespace dmi
{

namespace
{

using nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Stream ids for seeds derived from the run seed.
enum : std::uint64_t
{
    stream_data_noise = 1,
    stream_sim_noise = 2,
    stream_objective = 3,
    stream_metric = 4,
    stream_theta0 = 5,
    stream_nm = 6,
    stream_floor = 7,
};

std::uint64_t derive(std::uint64_t seed, std::uint64_t stream)
{
    return CounterRng(seed, stream).at(0);
}

const std::set<std::string> experiments{"torus", "lorenz", "ks", "custom"};

// Object reader that tracks the full key path and rejects unknown keys.
class Node
{
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) {
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected a JSON object");
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& raw(const std::string& key)
    {
        if (!has(key)) {
            throw ConfigError(field(key), "required");
        }
        used_.insert(key);
        return j_.at(key);
    }

    Node child(const std::string& key)
    {
        if (!has(key)) {
            return Node(empty_object(), field(key));
        }
        return Node(raw(key), field(key));
    }

    double number(const std::string& key, std::optional<double> def = std::nullopt)
    {
        if (!has(key)) {
            return require_default(key, def);
        }
        const auto& v = raw(key);
        if (!v.is_number()) {
            throw ConfigError(field(key), "expected a number");
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            throw ConfigError(field(key), "must be finite");
        }
        return d;
    }

    std::size_t count(const std::string& key, std::optional<std::size_t> def = std::nullopt)
    {
        if (!has(key)) {
            return require_default(key, def);
        }
        const auto& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw ConfigError(field(key), "expected a nonnegative integer");
        }
        return v.get<std::size_t>();
    }

    std::uint64_t u64(const std::string& key, std::uint64_t def)
    {
        if (!has(key)) {
            return def;
        }
        const auto& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            throw ConfigError(field(key), "expected a nonnegative integer");
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool def)
    {
        if (!has(key)) {
            return def;
        }
        const auto& v = raw(key);
        if (!v.is_boolean()) {
            throw ConfigError(field(key), "expected true or false");
        }
        return v.get<bool>();
    }

    std::string text(const std::string& key, std::optional<std::string> def = std::nullopt)
    {
        if (!has(key)) {
            return require_default(key, def);
        }
        const auto& v = raw(key);
        if (!v.is_string()) {
            throw ConfigError(field(key), "expected a string");
        }
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def = std::nullopt)
    {
        if (!has(key)) {
            return require_default(key, def);
        }
        return to_numbers(raw(key), field(key));
    }

    static std::vector<double> to_numbers(const json& v, const std::string& where)
    {
        if (!v.is_array()) {
            throw ConfigError(where, "expected an array of numbers");
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
                throw ConfigError(where + "[" + std::to_string(i) + "]", "expected a finite number");
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) {
                throw ConfigError(field(it.key()), "unknown key");
            }
        }
    }

    const std::string& path() const { return path_; }

private:
    static const json& empty_object()
    {
        static const json e = json::object();
        return e;
    }

    template <class T>
    T require_default(const std::string& key, const std::optional<T>& def) const
    {
        if (!def) {
            throw ConfigError(field(key), "required");
        }
        return *def;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

std::size_t state_dim(const RunConfig& c)
{
    if (c.experiment == "torus") {
        return 2;
    }
    if (c.experiment == "lorenz") {
        return 3;
    }
    if (c.experiment == "ks") {
        return c.model.grid_points;
    }
    return c.model.field.size();
}

void parse_model(Node n, RunConfig& c)
{
    auto& m = c.model;
    if (c.experiment == "torus") {
        m.param_names = {"alpha", "beta"};
        m.truth = {n.number("alpha", std::sqrt(2.0) - 1.0), n.number("beta", std::sqrt(3.0) - 1.0)};
        if (n.has("compare")) {
            const auto& arr = n.raw("compare");
            if (!arr.is_array()) {
                throw ConfigError(n.field("compare"), "expected an array of [alpha, beta] pairs");
            }
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string where = n.field("compare") + "[" + std::to_string(i) + "]";
                auto p = Node::to_numbers(arr[i], where);
                if (p.size() != 2) {
                    throw ConfigError(where, "expected [alpha, beta]");
                }
                m.compare.push_back(std::move(p));
            }
        }
    } else if (c.experiment == "lorenz") {
        m.param_names = {"sigma", "rho", "beta", "time_scale"};
        m.truth = {n.number("sigma", 10.0), n.number("rho", 28.0), n.number("beta", 8.0 / 3.0),
                   n.number("time_scale", 1.0)};
    } else if (c.experiment == "ks") {
        m.param_names = {"theta"};
        m.truth = {n.number("theta", 1.0)};
        m.domain_length = n.number("domain_length", 100.0);
        m.grid_points = n.count("grid_points", 200);
        if (!(m.truth[0] > 0.0)) {
            throw ConfigError(n.field("theta"), "must be positive");
        }
        if (!(m.domain_length > 0.0)) {
            throw ConfigError(n.field("domain_length"), "must be positive");
        }
        if (m.grid_points < 4 || m.grid_points % 2) {
            throw ConfigError(n.field("grid_points"), "must be an even number >= 4");
        }
    } else {
        const auto& names = n.raw("param_names");
        if (!names.is_array()) {
            throw ConfigError(n.field("param_names"), "expected an array of strings");
        }
        for (const auto& s : names) {
            if (!s.is_string()) {
                throw ConfigError(n.field("param_names"), "expected an array of strings");
            }
            m.param_names.push_back(s.get<std::string>());
        }
        m.truth = n.numbers("truth");
        if (m.truth.size() != m.param_names.size()) {
            throw ConfigError(n.field("truth"), "needs one value per name in param_names");
        }
        const auto& field = n.raw("field");
        if (!field.is_array() || field.empty()) {
            throw ConfigError(n.field("field"), "expected one array of terms per state component");
        }
        const std::size_t dim = field.size();
        for (std::size_t i = 0; i < dim; ++i) {
            const std::string where = n.field("field") + "[" + std::to_string(i) + "]";
            if (!field[i].is_array()) {
                throw ConfigError(where, "expected an array of terms");
            }
            std::vector<PolynomialTerm> comp;
            for (std::size_t t = 0; t < field[i].size(); ++t) {
                Node tn(field[i][t], where + "[" + std::to_string(t) + "]");
                PolynomialTerm term;
                term.coef = tn.number("coef", 1.0);
                if (tn.has("param")) {
                    const auto name = tn.text("param");
                    const auto it = std::find(m.param_names.begin(), m.param_names.end(), name);
                    if (it == m.param_names.end()) {
                        throw ConfigError(tn.field("param"), "unknown parameter '" + name + "'");
                    }
                    term.param = static_cast<int>(it - m.param_names.begin());
                }
                for (double e : tn.numbers("exponents")) {
                    if (e < 0 || e != std::floor(e)) {
                        throw ConfigError(tn.field("exponents"), "exponents must be nonnegative integers");
                    }
                    term.exponents.push_back(static_cast<int>(e));
                }
                if (term.exponents.size() != dim) {
                    throw ConfigError(tn.field("exponents"), "needs one exponent per state component");
                }
                tn.finish();
                comp.push_back(std::move(term));
            }
            m.field.push_back(std::move(comp));
        }
    }
    n.finish();
}

void parse_data(Node n, RunConfig& c)
{
    auto& d = c.data;
    const bool ks = c.experiment == "ks";
    const bool torus = c.experiment == "torus";
    d.integrator = Integrator::rk4;
    if (!torus && !ks) {
        try {
            d.integrator = parse_integrator(n.text("integrator", std::string("rk4")));
        } catch (const ParameterError&) {
            throw ConfigError(n.field("integrator"), "expected \"euler\" or \"rk4\"");
        }
    }
    d.dt = n.number("dt", torus ? 1.0 : (ks ? 0.1 : 0.01));
    d.dt_samp = n.number("dt_samp", torus ? 1.0 : (ks ? 3.0 : d.dt));
    if (!(d.dt > 0.0)) {
        throw ConfigError(n.field("dt"), "must be positive");
    }
    if (!(d.dt_samp > 0.0)) {
        throw ConfigError(n.field("dt_samp"), "must be positive");
    }
    const double ratio = d.dt_samp / d.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || std::round(ratio) < 1.0) {
        throw ConfigError(n.field("dt_samp"), "must be a positive integer multiple of dt");
    }
    if (n.has("samples") && n.has("horizon")) {
        throw ConfigError(n.field("horizon"), "give either samples or horizon, not both");
    }
    if (n.has("horizon")) {
        const double h = n.number("horizon");
        if (!(h > 0.0)) {
            throw ConfigError(n.field("horizon"), "must be positive");
        }
        d.samples = static_cast<std::size_t>(std::floor(h / d.dt_samp + 1e-9)) + 1;
    } else {
        const std::size_t def = torus ? 10000 : (ks ? 3334 : (c.experiment == "lorenz" ? 20000 : 0));
        d.samples = n.count("samples", def ? std::optional<std::size_t>(def) : std::nullopt);
    }
    if (d.samples < 2) {
        throw ConfigError(n.field("samples"), "need at least 2 samples");
    }
    d.burn_in = n.count("burn_in", c.experiment == "lorenz" ? 1000 : 0);
    d.noise_sigma = n.number("noise_sigma", 0.0);
    if (d.noise_sigma < 0.0) {
        throw ConfigError(n.field("noise_sigma"), "must be nonnegative");
    }

    const std::size_t dim = state_dim(c);
    if (n.has("initial_state")) {
        d.initial_state = n.numbers("initial_state");
    } else if (torus) {
        d.initial_state = {0.0, 0.0};
    } else if (c.experiment == "lorenz") {
        d.initial_state = {1.0, 1.0, 1.0};
    } else if (ks) {
        d.initial_state.resize(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            const double x = c.model.domain_length * static_cast<double>(j) / static_cast<double>(dim);
            d.initial_state[j] = std::sin(2.0 * std::numbers::pi * x / c.model.domain_length);
        }
    } else {
        throw ConfigError(n.field("initial_state"), "required");
    }
    if (d.initial_state.size() != dim) {
        throw ConfigError(n.field("initial_state"), "expected " + std::to_string(dim) + " components");
    }

    if (n.has("observables")) {
        const auto& arr = n.raw("observables");
        if (!arr.is_array() || arr.empty()) {
            throw ConfigError(n.field("observables"), "expected a nonempty array");
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Node on(arr[i], n.field("observables") + "[" + std::to_string(i) + "]");
            ObservableSpec o;
            o.type = on.text("type", std::string("coordinate"));
            if (o.type == "coordinate") {
                o.index = on.count("index", 0);
                if (o.index >= dim) {
                    throw ConfigError(on.field("index"), "out of range for state dimension " + std::to_string(dim));
                }
            } else if (o.type == "linear") {
                o.weights = on.numbers("weights");
                o.offset = on.number("offset", 0.0);
                if (o.weights.size() != dim) {
                    throw ConfigError(on.field("weights"), "expected " + std::to_string(dim) + " weights");
                }
            } else {
                throw ConfigError(on.field("type"), "expected \"coordinate\" or \"linear\"");
            }
            on.finish();
            d.observables.push_back(std::move(o));
        }
    } else {
        d.observables = {ObservableSpec{}};
    }
    n.finish();
}

void parse_objective(Node n, RunConfig& c)
{
    auto& o = c.objective;
    const bool full_state = c.experiment == "lorenz" || c.experiment == "custom";
    try {
        o.kind = parse_objective_kind(n.text("kind", std::string(full_state ? "alg2_with_init" : "alg1")));
    } catch (const ParameterError&) {
        throw ConfigError(n.field("kind"), "expected alg1, alg2, alg2_unbiased or alg2_with_init");
    }
    o.n_samples = n.count("n_samples", 500);
    o.init_window = n.count("init_window", 0);
    o.init_unbiased = n.boolean("init_unbiased", true);
    o.sim_noise_sigma = n.number("sim_noise_sigma", c.data.noise_sigma);
    o.burn_in = n.count("burn_in", 0);
    o.sim_length = n.count("sim_length", 0);
    o.divergence_penalty = n.number("divergence_penalty", 1e6);
    o.baseline = n.boolean("baseline", false);
    n.finish();

    if (o.sim_noise_sigma < 0.0) {
        throw ConfigError(n.field("sim_noise_sigma"), "must be nonnegative");
    }
    if (o.divergence_penalty < 0.0) {
        throw ConfigError(n.field("divergence_penalty"), "must be nonnegative");
    }
    const std::size_t N = c.data.samples;
    if (c.delay.m < 1) {
        throw ConfigError("delay.m", "must be at least 1");
    }
    if (c.delay.tau_bar < 1) {
        throw ConfigError("delay.tau_bar", "must be at least 1");
    }
    if ((c.delay.m - 1) * c.delay.tau_bar >= N) {
        throw ConfigError("delay.m", "(m-1)*tau_bar must be below the number of samples");
    }
    if (o.kind == ObjectiveKind::alg1) {
        if (c.data.observables.size() != 1) {
            throw ConfigError("data.observables", "alg1 uses exactly one observable");
        }
        if (o.burn_in >= N) {
            throw ConfigError(n.field("burn_in"), "must be below the number of samples");
        }
        if ((c.delay.m - 1) * c.delay.tau_bar >= N - o.burn_in) {
            throw ConfigError(n.field("burn_in"), "leaves too few samples for the delay parameters");
        }
        if (o.sim_length != 0 && (c.delay.m - 1) * c.delay.tau_bar + o.burn_in >= o.sim_length) {
            throw ConfigError(n.field("sim_length"), "too short for burn_in and the delay parameters");
        }
        if (c.metric.kind == MetricKind::wasserstein_1d && c.delay.m != 1) {
            throw ConfigError("metric.kind", "wasserstein_1d needs delay.m = 1");
        }
    } else {
        if (c.metric.kind == MetricKind::wasserstein_1d) {
            throw ConfigError("metric.kind", "wasserstein_1d cannot compare multi-dimensional state measures");
        }
        if (o.baseline) {
            throw ConfigError(n.field("baseline"), "the pointwise baseline needs an alg1 objective");
        }
        if (o.sim_length != 0) {
            throw ConfigError(n.field("sim_length"), "only used by alg1");
        }
        const std::size_t reach = std::max<std::size_t>(c.delay.m - 1, 1) * c.delay.tau_bar;
        if (o.burn_in + reach >= N) {
            throw ConfigError(n.field("burn_in"), "leaves no usable states");
        }
        const std::size_t usable = N - o.burn_in - reach;
        if (o.n_samples < 1 || o.n_samples > usable) {
            throw ConfigError(n.field("n_samples"), "must be between 1 and " + std::to_string(usable));
        }
        const std::size_t w = o.init_window ? o.init_window : c.delay.m;
        if ((w - 1) * c.delay.tau_bar >= N) {
            throw ConfigError(n.field("init_window"), "exceeds the data length");
        }
        if (2 * o.n_samples > N - o.burn_in) {
            throw ConfigError(n.field("n_samples"), "the sampling floor needs 2*n_samples states after burn_in");
        }
    }
    if (o.baseline && c.data.observables.size() != 1) {
        throw ConfigError(n.field("baseline"), "needs exactly one observable");
    }
}

void parse_optimizer(Node n, RunConfig& c)
{
    auto& o = c.optimizer;
    const std::size_t np = c.model.param_names.size();
    o.kind = n.text("kind", std::string("nelder_mead"));
    if (o.kind != "nelder_mead" && o.kind != "gradient_descent" && o.kind != "none") {
        throw ConfigError(n.field("kind"), "expected nelder_mead, gradient_descent or none");
    }
    o.lower = n.numbers("lower", o.kind == "none" ? std::optional<std::vector<double>>(c.model.truth) : std::nullopt);
    o.upper = n.numbers("upper", o.kind == "none" ? std::optional<std::vector<double>>(c.model.truth) : std::nullopt);
    if (o.lower.size() != np) {
        throw ConfigError(n.field("lower"), "expected " + std::to_string(np) + " values");
    }
    if (o.upper.size() != np) {
        throw ConfigError(n.field("upper"), "expected " + std::to_string(np) + " values");
    }
    for (std::size_t i = 0; i < np; ++i) {
        if (o.lower[i] > o.upper[i]) {
            throw ConfigError(n.field("lower"), "lower exceeds upper for " + c.model.param_names[i]);
        }
    }
    o.restarts = n.count("restarts", 1);
    if (o.restarts < 1) {
        throw ConfigError(n.field("restarts"), "must be at least 1");
    }
    if (n.has("theta0")) {
        o.theta0 = n.numbers("theta0");
        if (o.theta0->size() != np || !Box{o.lower, o.upper}.contains(*o.theta0)) {
            throw ConfigError(n.field("theta0"), "must have " + std::to_string(np) + " values inside the box");
        }
    }
    o.nm.max_iter = n.count("max_iter", 200);
    o.nm.f_tol = n.number("f_tol", 1e-10);
    o.nm.x_tol = n.number("x_tol", 1e-8);
    o.nm.initial_step = n.number("initial_step", 0.1);
    o.nm.max_stall = n.count("max_stall", 0);
    o.gd.max_iter = o.nm.max_iter;
    o.gd.learning_rate = n.number("learning_rate", 1e-2);
    o.gd.fd_step = n.number("fd_step", 1e-4);
    o.gd.g_tol = n.number("g_tol", 1e-8);
    n.finish();
    const std::pair<const char*, double> positive[] = {
        {"f_tol", o.nm.f_tol},           {"x_tol", o.nm.x_tol},     {"initial_step", o.nm.initial_step},
        {"learning_rate", o.gd.learning_rate}, {"fd_step", o.gd.fd_step}, {"g_tol", o.gd.g_tol}};
    for (const auto& [key, v] : positive) {
        if (!(v > 0.0)) {
            throw ConfigError(n.field(key), "must be positive");
        }
    }
}

void check_box(const RunConfig& c, const std::string& where)
{
    const Box box{c.optimizer.lower, c.optimizer.upper};
    if (!box.contains(c.model.truth)) {
        throw ConfigError(where, "the true parameters must lie inside optimizer.lower/upper");
    }
}

LandscapeBlock parse_landscape(Node n, const RunConfig& c)
{
    LandscapeBlock l;
    const auto name = n.text("param", c.model.param_names.front());
    const auto it = std::find(c.model.param_names.begin(), c.model.param_names.end(), name);
    if (it == c.model.param_names.end()) {
        throw ConfigError(n.field("param"), "unknown parameter '" + name + "'");
    }
    l.param = static_cast<std::size_t>(it - c.model.param_names.begin());
    try {
        l.grid = parse_grid(n.text("grid"));
    } catch (const ParameterError& e) {
        throw ConfigError(n.field("grid"), e.what());
    }
    if (l.grid.lo < c.optimizer.lower[l.param] || l.grid.hi > c.optimizer.upper[l.param]) {
        throw ConfigError(n.field("grid"), "must lie inside optimizer.lower/upper for " + name);
    }
    n.finish();
    return l;
}

Observable make_observable(const ObservableSpec& o)
{
    if (o.type == "linear") {
        return Observable::linear(o.weights, o.offset);
    }
    return Observable::coordinate(o.index);
}

ModelFamily polynomial_family(const RunConfig& c)
{
    const auto terms = c.model.field;
    const std::size_t np = c.model.param_names.size();
    const auto names = c.model.param_names;
    const double dt = c.data.dt;
    const std::size_t per = static_cast<std::size_t>(std::llround(c.data.dt_samp / dt));
    const Integrator method = c.data.integrator;
    ModelFamily fam;
    fam.name = "custom";
    fam.param_names = names;
    fam.make = [=](const std::vector<double>& theta, std::size_t intervals) -> std::unique_ptr<DynamicalModel> {
        if (theta.size() != np) {
            throw ParameterError("custom family expects " + std::to_string(np) + " parameters");
        }
        VectorField f = [terms, theta](std::span<const double> x, std::span<double> dx) {
            for (std::size_t i = 0; i < terms.size(); ++i) {
                double s = 0.0;
                for (const auto& t : terms[i]) {
                    double v = t.coef * (t.param >= 0 ? theta[static_cast<std::size_t>(t.param)] : 1.0);
                    for (std::size_t k = 0; k < t.exponents.size(); ++k) {
                        for (int e = 0; e < t.exponents[k]; ++e) {
                            v *= x[k];
                        }
                    }
                    s += v;
                }
                dx[i] = s;
            }
        };
        return std::make_unique<FlowMap>("custom", terms.size(), std::move(f), theta, dt,
                                         per * std::max<std::size_t>(1, intervals), method);
    };
    return fam;
}

ModelFamily family_for(const RunConfig& c)
{
    if (c.experiment == "torus") {
        return torus_family();
    }
    if (c.experiment == "lorenz") {
        return lorenz_family(c.data.dt_samp, c.data.dt, c.data.integrator);
    }
    if (c.experiment == "ks") {
        KSConfig k;
        k.domain_length = c.model.domain_length;
        k.grid_points = c.model.grid_points;
        k.dt = c.data.dt;
        k.dt_samp = c.data.dt_samp;
        return ks_family(k);
    }
    return polynomial_family(c);
}

ojson numbers_json(const std::vector<double>& v)
{
    ojson a = ojson::array();
    for (double x : v) {
        a.push_back(std::isfinite(x) ? ojson(x) : ojson(nullptr));
    }
    return a;
}

ojson number_json(double x)
{
    return std::isfinite(x) ? ojson(x) : ojson(nullptr);
}

std::vector<std::vector<double>> restart_points(const RunConfig& c)
{
    const auto& o = c.optimizer;
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < o.restarts; ++r) {
        if (r == 0 && o.theta0) {
            out.push_back(*o.theta0);
            continue;
        }
        CounterRng rng(derive(c.seed, stream_theta0), r);
        std::vector<double> th(o.lower.size());
        for (std::size_t i = 0; i < th.size(); ++i) {
            th[i] = o.lower[i] + (o.upper[i] - o.lower[i]) * rng.uniform();
        }
        out.push_back(std::move(th));
    }
    return out;
}

std::vector<OptResult> run_restarts(const RunConfig& c, const Objective& f)
{
    const auto starts = restart_points(c);
    const Box box{c.optimizer.lower, c.optimizer.upper};
    std::vector<OptResult> results(starts.size());
    parallel_for(starts.size(), [&](std::size_t r) {
        if (c.optimizer.kind == "gradient_descent") {
            results[r] = gradient_descent(f, starts[r], box, c.optimizer.gd);
        } else {
            auto opts = c.optimizer.nm;
            opts.seed = derive(c.seed, stream_nm) + r;
            results[r] = nelder_mead(f, starts[r], box, opts);
        }
    });
    return results;
}

std::size_t best_index(const std::vector<OptResult>& results)
{
    std::size_t best = 0;
    for (std::size_t r = 1; r < results.size(); ++r) {
        if (results[r].loss_star < results[best].loss_star) {
            best = r;
        }
    }
    return best;
}

ojson summarize_restarts(const RunConfig& c, const std::vector<OptResult>& results,
                         const std::vector<std::vector<double>>& starts)
{
    const std::size_t np = c.model.truth.size();
    ojson runs = ojson::array();
    std::vector<double> mean(np, 0.0);
    std::vector<double> sq(np, 0.0);
    for (std::size_t r = 0; r < results.size(); ++r) {
        std::vector<double> err(np);
        for (std::size_t i = 0; i < np; ++i) {
            err[i] = std::abs(results[r].theta_star[i] - c.model.truth[i]);
            mean[i] += err[i];
            sq[i] += err[i] * err[i];
        }
        ojson e;
        e["theta0"] = numbers_json(starts[r]);
        e["theta_star"] = numbers_json(results[r].theta_star);
        e["loss_star"] = number_json(results[r].loss_star);
        e["abs_error"] = numbers_json(err);
        e["n_evals"] = results[r].n_evals;
        e["termination"] = to_string(results[r].termination);
        runs.push_back(std::move(e));
    }
    const double R = static_cast<double>(results.size());
    std::vector<double> sd(np);
    for (std::size_t i = 0; i < np; ++i) {
        mean[i] /= R;
        sd[i] = std::sqrt(std::max(0.0, sq[i] / R - mean[i] * mean[i]));
    }
    const std::size_t b = best_index(results);
    ojson s;
    s["best_restart"] = b;
    s["theta_star"] = numbers_json(results[b].theta_star);
    s["loss_star"] = number_json(results[b].loss_star);
    s["mean_abs_error"] = numbers_json(mean);
    s["std_abs_error"] = numbers_json(sd);
    s["runs"] = std::move(runs);
    return s;
}

PointSet trajectory_for(const RunConfig& c, const std::vector<double>& theta)
{
    const auto model = family_for(c).make(theta, 1);
    const std::size_t total = c.data.burn_in + c.data.samples - 1;
    const auto traj = simulate(*model, c.data.initial_state, total);
    return traj.slice(c.data.burn_in, c.data.samples);
}

ojson torus_report(const RunConfig& c)
{
    std::vector<std::vector<double>> pairs{c.model.truth};
    pairs.insert(pairs.end(), c.model.compare.begin(), c.model.compare.end());
    const std::size_t P = pairs.size();
    std::vector<EmpiricalMeasure> states(P);
    std::vector<EmpiricalMeasure> delays(P);
    const Observable y = make_observable(c.data.observables.front());
    for (std::size_t i = 0; i < P; ++i) {
        const auto traj = trajectory_for(c, pairs[i]);
        states[i] = EmpiricalMeasure(traj);
        delays[i] = delay_embed(observe(traj, y, c.data.dt_samp), c.delay, DelayOrder::ascending);
    }
    std::vector<std::vector<double>> sm(P, std::vector<double>(P, 0.0));
    std::vector<std::vector<double>> dm(P, std::vector<double>(P, 0.0));
    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t i = 0; i < P; ++i) {
        for (std::size_t j = i + 1; j < P; ++j) {
            jobs.emplace_back(i, j);
        }
    }
    for (const auto& [i, j] : jobs) {
        sm[i][j] = sm[j][i] = energy_mmd(states[i], states[j]);
        dm[i][j] = dm[j][i] = energy_mmd(delays[i], delays[j]);
    }
    ojson r;
    ojson pj = ojson::array();
    ojson smj = ojson::array();
    ojson dmj = ojson::array();
    for (std::size_t i = 0; i < P; ++i) {
        pj.push_back(numbers_json(pairs[i]));
        smj.push_back(numbers_json(sm[i]));
        dmj.push_back(numbers_json(dm[i]));
    }
    r["pairs"] = std::move(pj);
    r["metric"] = "energy_mmd";
    r["state_mmd"] = std::move(smj);
    r["delay_mmd"] = std::move(dmj);
    return r;
}

double sampling_floor(const RunConfig& c, const TimeSeries& states, const MetricSpec& metric)
{
    const auto mu = state_measure(states.values, c.objective.burn_in);
    double s = 0.0;
    for (std::size_t k = 0; k < c.analysis.floor_seeds; ++k) {
        s += self_distance_floor(mu, c.objective.n_samples, metric, derive(c.seed, stream_floor) + k);
    }
    return s / static_cast<double>(c.analysis.floor_seeds);
}

ojson invariance_report(const RunConfig& c, const ExperimentData& d, const std::vector<double>& theta_hat)
{
    ObjectiveSpec biased = d.spec;
    biased.kind = ObjectiveKind::alg2;
    const DelayMeasureObjective obj(biased);
    const double floor = sampling_floor(c, biased.data, biased.metric);
    ojson r;
    r["n_samples"] = c.objective.n_samples;
    r["floor"] = floor;
    const auto at_hat = obj.terms(theta_hat);
    r["theta"] = numbers_json(theta_hat);
    r["state_term"] = number_json(at_hat.diverged ? at_hat.total : at_hat.state_term);
    r["state_term_over_floor"] = number_json((at_hat.diverged ? at_hat.total : at_hat.state_term) / floor);
    r["full_objective"] = number_json(at_hat.total);

    if (c.experiment == "lorenz") {
        std::vector<double> id = c.model.truth;
        id[3] = c.analysis.identity_time_scale;
        // the near-identity model may sit outside the optimizer box
        ObjectiveSpec wide = biased;
        for (std::size_t i = 0; i < id.size(); ++i) {
            wide.box.lower[i] = std::min(wide.box.lower[i], id[i]);
            wide.box.upper[i] = std::max(wide.box.upper[i], id[i]);
        }
        const auto t = DelayMeasureObjective(wide).terms(id);
        const double state_only = t.diverged ? t.total : t.state_term;
        ojson idj;
        idj["theta"] = numbers_json(id);
        idj["state_only"] = number_json(state_only);
        idj["full_objective"] = number_json(t.total);
        idj["state_only_over_floor"] = number_json(state_only / floor);
        idj["full_over_floor"] = number_json(t.total / floor);
        r["near_identity"] = std::move(idj);
    }
    return r;
}

ojson config_json(const RunConfig& c)
{
    ojson j;
    j["experiment"] = c.experiment;
    j["seed"] = c.seed;
    ojson m;
    if (c.experiment == "torus") {
        m["alpha"] = c.model.truth[0];
        m["beta"] = c.model.truth[1];
        ojson cmp = ojson::array();
        for (const auto& p : c.model.compare) {
            cmp.push_back(numbers_json(p));
        }
        m["compare"] = std::move(cmp);
    } else if (c.experiment == "lorenz") {
        for (std::size_t i = 0; i < 4; ++i) {
            m[c.model.param_names[i]] = c.model.truth[i];
        }
    } else if (c.experiment == "ks") {
        m["theta"] = c.model.truth[0];
        m["domain_length"] = c.model.domain_length;
        m["grid_points"] = c.model.grid_points;
    } else {
        m["param_names"] = c.model.param_names;
        m["truth"] = numbers_json(c.model.truth);
        ojson field = ojson::array();
        for (const auto& comp : c.model.field) {
            ojson terms = ojson::array();
            for (const auto& t : comp) {
                ojson tj;
                tj["coef"] = t.coef;
                if (t.param >= 0) {
                    tj["param"] = c.model.param_names[static_cast<std::size_t>(t.param)];
                }
                tj["exponents"] = t.exponents;
                terms.push_back(std::move(tj));
            }
            field.push_back(std::move(terms));
        }
        m["field"] = std::move(field);
    }
    j["model"] = std::move(m);

    ojson d;
    if (c.experiment == "lorenz" || c.experiment == "custom") {
        d["integrator"] = to_string(c.data.integrator);
    }
    d["dt"] = c.data.dt;
    d["dt_samp"] = c.data.dt_samp;
    d["samples"] = c.data.samples;
    d["burn_in"] = c.data.burn_in;
    d["noise_sigma"] = c.data.noise_sigma;
    d["initial_state"] = numbers_json(c.data.initial_state);
    ojson obs = ojson::array();
    for (const auto& o : c.data.observables) {
        ojson oj;
        oj["type"] = o.type;
        if (o.type == "coordinate") {
            oj["index"] = o.index;
        } else {
            oj["weights"] = numbers_json(o.weights);
            oj["offset"] = o.offset;
        }
        obs.push_back(std::move(oj));
    }
    d["observables"] = std::move(obs);
    j["data"] = std::move(d);

    j["delay"] = {{"m", c.delay.m}, {"tau_bar", c.delay.tau_bar}};
    ojson mt;
    mt["kind"] = to_string(c.metric.kind);
    mt["n_projections"] = c.metric.n_projections;
    mt["p"] = c.metric.p;
    mt["seed"] = c.metric.seed;
    j["metric"] = std::move(mt);

    ojson ob;
    ob["kind"] = to_string(c.objective.kind);
    ob["n_samples"] = c.objective.n_samples;
    ob["init_window"] = c.objective.init_window;
    ob["init_unbiased"] = c.objective.init_unbiased;
    ob["sim_noise_sigma"] = c.objective.sim_noise_sigma;
    ob["burn_in"] = c.objective.burn_in;
    ob["sim_length"] = c.objective.sim_length;
    ob["divergence_penalty"] = c.objective.divergence_penalty;
    ob["baseline"] = c.objective.baseline;
    j["objective"] = std::move(ob);

    ojson op;
    op["kind"] = c.optimizer.kind;
    op["lower"] = numbers_json(c.optimizer.lower);
    op["upper"] = numbers_json(c.optimizer.upper);
    op["restarts"] = c.optimizer.restarts;
    if (c.optimizer.theta0) {
        op["theta0"] = numbers_json(*c.optimizer.theta0);
    }
    op["max_iter"] = c.optimizer.nm.max_iter;
    op["f_tol"] = c.optimizer.nm.f_tol;
    op["x_tol"] = c.optimizer.nm.x_tol;
    op["initial_step"] = c.optimizer.nm.initial_step;
    op["max_stall"] = c.optimizer.nm.max_stall;
    op["learning_rate"] = c.optimizer.gd.learning_rate;
    op["fd_step"] = c.optimizer.gd.fd_step;
    op["g_tol"] = c.optimizer.gd.g_tol;
    j["optimizer"] = std::move(op);

    if (c.landscape) {
        std::ostringstream g;
        g << format_double(c.landscape->grid.lo) << ":" << format_double(c.landscape->grid.hi) << ":"
          << format_double(c.landscape->grid.step);
        j["landscape"] = {{"param", c.model.param_names[c.landscape->param]}, {"grid", g.str()}};
    }
    j["analysis"] = {{"floor_seeds", c.analysis.floor_seeds},
                     {"identity_time_scale", c.analysis.identity_time_scale}};
    j["output"] = c.output;
    return j;
}

void write_landscape(const fs::path& path, const RunConfig& c, const std::vector<LandscapePoint>& pts,
                     std::size_t param)
{
    CsvTable t;
    t.header = {c.model.param_names[param], "loss"};
    for (const auto& p : pts) {
        t.rows.push_back({p.theta[param], p.loss});
    }
    write_csv(path, t);
}

} // namespace

std::vector<double> GridSpec::values() const
{
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = std::min(hi, lo + static_cast<double>(i) * step);
    }
    return v;
}

GridSpec parse_grid(const std::string& text)
{
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(':', start);
        const std::string tok = text.substr(start, pos - start);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (tok.empty() || used != tok.size() || !std::isfinite(v)) {
            throw ParameterError("grid '" + text + "' must look like a:b:step");
        }
        parts.push_back(v);
        if (pos == std::string::npos) {
            break;
        }
        start = pos + 1;
    }
    if (parts.size() != 3) {
        throw ParameterError("grid '" + text + "' must look like a:b:step");
    }
    GridSpec g{parts[0], parts[1], parts[2]};
    if (!(g.step > 0.0) || g.hi < g.lo) {
        throw ParameterError("grid '" + text + "' needs a <= b and step > 0");
    }
    if ((g.hi - g.lo) / g.step > 1e6) {
        throw ParameterError("grid '" + text + "' has more than a million points");
    }
    return g;
}

RunConfig parse_run_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
    }
    Node root(j, "");
    RunConfig c;
    c.experiment = root.text("experiment");
    if (!experiments.count(c.experiment)) {
        throw ConfigError("experiment", "expected torus, lorenz, ks or custom");
    }
    c.seed = root.u64("seed", 0);
    parse_model(root.child("model"), c);
    parse_data(root.child("data"), c);

    {
        Node d = root.child("delay");
        c.delay.m = d.count("m", c.experiment == "ks" ? 5 : (c.experiment == "torus" ? 2 : 5));
        c.delay.tau_bar = d.count("tau_bar", 1);
        d.finish();
    }
    {
        Node m = root.child("metric");
        try {
            c.metric.kind =
                parse_metric_kind(m.text("kind", std::string(c.experiment == "ks" ? "sliced_wasserstein" : "energy_mmd")));
        } catch (const ParameterError&) {
            throw ConfigError(m.field("kind"), "expected energy_mmd, sliced_wasserstein or wasserstein_1d");
        }
        c.metric.n_projections = m.count("n_projections", 100);
        const std::size_t p = m.count("p", 2);
        if (p != 1 && p != 2) {
            throw ConfigError(m.field("p"), "must be 1 or 2");
        }
        c.metric.p = static_cast<int>(p);
        c.metric.seed = m.u64("seed", derive(c.seed, stream_metric));
        if (c.metric.n_projections < 1) {
            throw ConfigError(m.field("n_projections"), "must be at least 1");
        }
        m.finish();
    }
    parse_optimizer(root.child("optimizer"), c);
    check_box(c, "optimizer");
    parse_objective(root.child("objective"), c);
    if (root.has("landscape")) {
        c.landscape = parse_landscape(root.child("landscape"), c);
    }
    {
        Node a = root.child("analysis");
        c.analysis.floor_seeds = a.count("floor_seeds", 5);
        c.analysis.identity_time_scale = a.number("identity_time_scale", 1e-3);
        if (c.analysis.floor_seeds < 1) {
            throw ConfigError(a.field("floor_seeds"), "must be at least 1");
        }
        if (!(c.analysis.identity_time_scale >= 0.0)) {
            throw ConfigError(a.field("identity_time_scale"), "must be nonnegative");
        }
        a.finish();
    }
    c.output = root.text("output", "runs/" + c.experiment);
    if (c.output.empty()) {
        throw ConfigError("output", "must not be empty");
    }
    root.finish();
    return c;
}

RunConfig load_run_config(const fs::path& path, std::optional<std::uint64_t> seed_override)
{
    std::string text;
    try {
        text = read_text(path);
    } catch (const IoError&) {
        throw ConfigError(path.string(), "cannot read config file");
    }
    if (seed_override) {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
        }
        if (j.is_object()) {
            j["seed"] = *seed_override;
            text = j.dump();
        }
    }
    return parse_run_config(text);
}

std::string config_to_json(const RunConfig& cfg)
{
    return config_json(cfg).dump(2) + "\n";
}

ExperimentData prepare_experiment(const RunConfig& c)
{
    ExperimentData d;
    const auto traj = trajectory_for(c, c.model.truth);
    d.states = TimeSeries(traj, c.data.dt_samp);

    std::vector<Observable> obs;
    for (const auto& o : c.data.observables) {
        obs.push_back(make_observable(o));
    }
    const std::uint64_t noise_seed = derive(c.seed, stream_data_noise);
    d.observed = add_noise(observe(traj, obs.front(), c.data.dt_samp), c.data.noise_sigma, noise_seed);

    auto& s = d.spec;
    s.kind = c.objective.kind;
    s.family = family_for(c);
    s.box = Box{c.optimizer.lower, c.optimizer.upper};
    s.metric = c.metric;
    s.delay = c.delay;
    s.observables = obs;
    s.burn_in = c.objective.burn_in;
    s.sim_length = c.objective.sim_length;
    s.n_samples = c.objective.n_samples;
    s.init_window = c.objective.init_window;
    s.init_unbiased = c.objective.init_unbiased;
    s.divergence_penalty = c.objective.divergence_penalty;
    s.seed = derive(c.seed, stream_objective);
    if (s.kind == ObjectiveKind::alg1) {
        s.data = d.observed;
        s.initial_state.assign(traj.row(0).begin(), traj.row(0).end());
        s.sim_noise_sigma = c.objective.sim_noise_sigma;
        s.sim_noise_seed = derive(c.seed, stream_sim_noise);
    } else {
        s.data = add_noise(d.states, c.data.noise_sigma, noise_seed);
    }
    return d;
}

std::vector<LandscapePoint> run_scan(const RunConfig& cfg, const LandscapeBlock& scan, const fs::path& out_dir)
{
    const auto data = prepare_experiment(cfg);
    const DelayMeasureObjective obj(data.spec);
    std::vector<std::vector<double>> grid;
    for (double v : scan.grid.values()) {
        auto th = cfg.model.truth;
        th[scan.param] = v;
        grid.push_back(std::move(th));
    }
    const auto pts = scan_landscape([&obj](const std::vector<double>& th) { return obj(th); }, grid);
    fs::create_directories(out_dir);
    write_landscape(out_dir / "landscape.csv", cfg, pts, scan.param);
    return pts;
}

std::string run_experiment(const RunConfig& c, const fs::path& out_dir)
{
    const auto start = std::chrono::steady_clock::now();
    const auto data = prepare_experiment(c);
    const DelayMeasureObjective obj(data.spec);

    ojson report;
    report["experiment"] = c.experiment;
    report["objective"] = to_string(c.objective.kind);
    report["param_names"] = c.model.param_names;
    report["truth"] = numbers_json(c.model.truth);
    report["loss_at_truth"] = number_json(obj(c.model.truth));

    std::vector<std::string> artifacts;
    std::optional<std::vector<LandscapePoint>> landscape;
    if (c.landscape) {
        std::vector<std::vector<double>> grid;
        for (double v : c.landscape->grid.values()) {
            auto th = c.model.truth;
            th[c.landscape->param] = v;
            grid.push_back(std::move(th));
        }
        landscape = scan_landscape([&obj](const std::vector<double>& th) { return obj(th); }, grid);
    }

    std::optional<OptResult> best;
    ojson restarts_json;
    if (c.optimizer.kind != "none") {
        const auto starts = restart_points(c);
        const auto results = run_restarts(c, [&obj](const std::vector<double>& th) { return obj(th); });
        const auto summary = summarize_restarts(c, results, starts);
        best = results[best_index(results)];
        report["estimate"] = summary;
        restarts_json["objective"] = summary;

        if (c.objective.baseline) {
            const auto& spec = data.spec;
            const auto base = run_restarts(c, [&spec](const std::vector<double>& th) {
                return pointwise_objective(th, spec);
            });
            const auto bsum = summarize_restarts(c, base, starts);
            report["baseline"] = bsum;
            restarts_json["baseline"] = bsum;
            std::vector<double> ratio;
            for (std::size_t i = 0; i < c.model.truth.size(); ++i) {
                const double a = summary["mean_abs_error"][i].is_null() ? INFINITY
                                                                         : summary["mean_abs_error"][i].get<double>();
                const double b = bsum["mean_abs_error"][i].is_null() ? INFINITY
                                                                      : bsum["mean_abs_error"][i].get<double>();
                ratio.push_back(b / a);
            }
            report["baseline_error_ratio"] = numbers_json(ratio);
        }
    }

    if (c.experiment == "torus") {
        report["distinguishability"] = torus_report(c);
    }
    if (c.objective.kind != ObjectiveKind::alg1) {
        report["invariance"] = invariance_report(c, data, best ? best->theta_star : c.model.truth);
    }

    fs::create_directories(out_dir);
    write_timeseries_csv(out_dir / "data.csv", data.spec.data);
    artifacts.push_back("data.csv");
    const auto delay_mu = c.objective.kind == ObjectiveKind::alg1
                              ? obj.data_measure()
                              : delay_embed(data.observed, c.delay, DelayOrder::ascending);
    write_measure_csv(out_dir / "delay_measure.csv", delay_mu);
    artifacts.push_back("delay_measure.csv");
    if (data.states.dim() <= 3) {
        write_measure_csv(out_dir / "state_measure.csv", state_measure(data.states.values, 0));
        artifacts.push_back("state_measure.csv");
    }
    if (landscape) {
        write_landscape(out_dir / "landscape.csv", c, *landscape, c.landscape->param);
        artifacts.push_back("landscape.csv");
    }
    if (best) {
        write_text(out_dir / "opt_result.json", opt_result_json(*best));
        write_text(out_dir / "restarts.json", restarts_json.dump(2) + "\n");
        artifacts.push_back("opt_result.json");
        artifacts.push_back("restarts.json");
    }
    const std::string report_text = report.dump(2) + "\n";
    write_text(out_dir / "report.json", report_text);
    artifacts.push_back("report.json");

    ojson meta;
    meta["version"] = library_version();
    meta["build"] = {{"type", DMI_BUILD_TYPE}, {"compiler", __VERSION__}};
    meta["seed"] = c.seed;
    meta["config"] = config_json(c);
    artifacts.push_back("run_metadata.json");
    meta["artifacts"] = artifacts;
    write_text(out_dir / "run_metadata.json", meta.dump(2) + "\n");

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ojson timing;
    timing["wall_seconds"] = wall;
    timing["threads"] = thread_count();
    write_text(out_dir / "timing.json", timing.dump(2) + "\n");
    return report_text;
}

std::vector<fs::path> emit_plot_data(const fs::path& run_dir)
{
    auto need = [&run_dir](const char* name) {
        const auto p = run_dir / name;
        if (!fs::exists(p)) {
            throw IoError("missing artifact: " + p.string());
        }
        return p;
    };
    const auto series = read_timeseries_csv(need("data.csv"));
    const auto delay = read_measure_csv(need("delay_measure.csv"));

    const fs::path out = run_dir / "plots";
    fs::create_directories(out);
    std::vector<fs::path> written;

    CsvTable s;
    s.header = {"t", "component", "value"};
    for (std::size_t i = 0; i < series.size(); ++i) {
        for (std::size_t j = 0; j < series.dim(); ++j) {
            s.rows.push_back({series.time(i), static_cast<double>(j + 1), series.values(i, j)});
        }
    }
    write_csv(out / "series.csv", s);
    written.push_back(out / "series.csv");

    if (fs::exists(run_dir / "landscape.csv")) {
        const auto l = read_csv(run_dir / "landscape.csv");
        CsvTable t;
        t.header = {"theta", "loss"};
        for (const auto& r : l.rows) {
            t.rows.push_back({r[0], r[1]});
        }
        write_csv(out / "landscape.csv", t);
        written.push_back(out / "landscape.csv");
    }

    if (fs::exists(run_dir / "opt_result.json")) {
        const auto r = parse_opt_result_json(read_text(run_dir / "opt_result.json"));
        CsvTable t;
        t.header = {"eval", "iter", "loss", "best_loss"};
        const std::size_t np = r.theta_star.size();
        for (std::size_t i = 0; i < np; ++i) {
            t.header.push_back("theta" + std::to_string(i + 1));
        }
        double best = INFINITY;
        for (std::size_t k = 0; k < r.trace.size(); ++k) {
            const auto& e = r.trace[k];
            best = std::min(best, e.loss);
            std::vector<double> row{static_cast<double>(k), static_cast<double>(e.iter), e.loss, best};
            row.insert(row.end(), e.theta.begin(), e.theta.end());
            t.rows.push_back(std::move(row));
        }
        write_csv(out / "trace.csv", t);
        written.push_back(out / "trace.csv");
    }

    {
        const std::size_t a = 0;
        const std::size_t b = delay.dim() > 1 ? 1 : 0;
        CsvTable t;
        t.header = {"x", "y", "w"};
        for (std::size_t i = 0; i < delay.size(); ++i) {
            t.rows.push_back({delay.points()(i, a), delay.points()(i, b), delay.weights()[i]});
        }
        write_csv(out / "projection.csv", t);
        written.push_back(out / "projection.csv");
    }

    {
        const bool have_state = fs::exists(run_dir / "state_measure.csv");
        const auto mu = have_state ? read_measure_csv(run_dir / "state_measure.csv") : delay;
        const std::size_t bins = 50;
        const std::size_t a = 0;
        const std::size_t b = mu.dim() > 1 ? 1 : 0;
        double lo[2] = {INFINITY, INFINITY};
        double hi[2] = {-INFINITY, -INFINITY};
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const double v[2] = {mu.points()(i, a), mu.points()(i, b)};
            for (int k = 0; k < 2; ++k) {
                lo[k] = std::min(lo[k], v[k]);
                hi[k] = std::max(hi[k], v[k]);
            }
        }
        if (have_state && mu.dim() == 2 && lo[0] >= 0.0 && hi[0] < 1.0 && lo[1] >= 0.0 && hi[1] < 1.0) {
            lo[0] = lo[1] = 0.0;
            hi[0] = hi[1] = 1.0;
        }
        auto bin_of = [&](double v, int k) {
            if (!(hi[k] > lo[k])) {
                return std::size_t{0};
            }
            const auto idx = static_cast<long>(std::floor((v - lo[k]) / (hi[k] - lo[k]) * static_cast<double>(bins)));
            return static_cast<std::size_t>(std::clamp<long>(idx, 0, static_cast<long>(bins) - 1));
        };
        std::vector<double> mass(bins * bins, 0.0);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            mass[bin_of(mu.points()(i, a), 0) * bins + bin_of(mu.points()(i, b), 1)] += mu.weights()[i];
        }
        CsvTable t;
        t.header = {"ix", "iy", "x", "y", "mass"};
        for (std::size_t ix = 0; ix < bins; ++ix) {
            for (std::size_t iy = 0; iy < bins; ++iy) {
                const double wx = (hi[0] - lo[0]) / static_cast<double>(bins);
                const double wy = (hi[1] - lo[1]) / static_cast<double>(bins);
                t.rows.push_back({static_cast<double>(ix), static_cast<double>(iy),
                                  lo[0] + (static_cast<double>(ix) + 0.5) * wx,
                                  lo[1] + (static_cast<double>(iy) + 0.5) * wy, mass[ix * bins + iy]});
            }
        }
        write_csv(out / "heatmap.csv", t);
        written.push_back(out / "heatmap.csv");
    }
    return written;
}

std::string library_version()
{
    return DMI_VERSION;
}

} // namespace dmi
