#include "dmi/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dmi/rng.hpp"
#include "dmi/types.hpp"

namespace dmi
{

bool Box::contains(const std::vector<double>& x) const
{
    if (x.size() != lower.size()) {
        return false;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lower[i] && x[i] <= upper[i])) {
            return false;
        }
    }
    return true;
}

std::vector<double> Box::project(std::vector<double> x) const
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::clamp(x[i], lower[i], upper[i]);
    }
    return x;
}

void Box::validate() const
{
    if (lower.size() != upper.size() || lower.empty()) {
        throw ParameterError("Box: lower and upper must be nonempty and of equal length");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || lower[i] > upper[i]) {
            throw ParameterError("Box: need finite lower <= upper in every coordinate");
        }
    }
}

std::string to_string(Termination t)
{
    switch (t) {
    case Termination::tolerance:
        return "tolerance";
    case Termination::max_iter:
        return "max_iter";
    case Termination::stalled:
        return "stalled";
    }
    return "?";
}

namespace
{

struct Vertex
{
    std::vector<double> x;
    double f;
};

double sanitize(double v)
{
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

} // namespace

OptResult nelder_mead(const Objective& f, const std::vector<double>& theta0, const Box& box,
                      const NelderMeadOptions& opts)
{
    box.validate();
    if (theta0.size() != box.size()) {
        throw ParameterError("nelder_mead: theta0 dimension does not match the box");
    }
    if (!box.contains(theta0)) {
        throw DomainError("nelder_mead: theta0 lies outside the box");
    }

    constexpr double reflect = 1.0;
    constexpr double expand = 2.0;
    constexpr double contract = 0.5;
    constexpr double shrink = 0.5;

    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < box.size(); ++i) {
        if (box.upper[i] > box.lower[i]) {
            free.push_back(i);
        }
    }

    OptResult res;
    std::size_t iter = 0;
    auto eval = [&](std::vector<double> x) {
        x = box.project(std::move(x));
        const double v = sanitize(f(x));
        ++res.n_evals;
        return Vertex{std::move(x), v};
    };
    auto record = [&](const Vertex& v) { res.trace.push_back({iter, v.x, v.f}); };

    std::vector<Vertex> simplex;
    simplex.push_back(eval(theta0));
    record(simplex.back());
    CounterRng rng(opts.seed);
    for (std::size_t i : free) {
        const double width = box.upper[i] - box.lower[i];
        double step = opts.initial_step * width;
        if (opts.seed != 0 && rng.uniform() < 0.5) {
            step = -step;
        }
        std::vector<double> x = theta0;
        if (x[i] + step > box.upper[i] || x[i] + step < box.lower[i]) {
            step = -step;
        }
        x[i] += step;
        simplex.push_back(eval(std::move(x)));
        record(simplex.back());
    }

    auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    res.best_history.push_back(simplex.front().f);

    const std::size_t n = free.size();
    res.termination = Termination::max_iter;
    std::size_t stall = 0;

    auto combine = [&](const std::vector<double>& c, const std::vector<double>& x, double t) {
        // c + t (x - c) on free coordinates
        std::vector<double> y = c;
        for (std::size_t i : free) {
            y[i] = c[i] + t * (x[i] - c[i]);
        }
        return y;
    };

    while (n > 0) {
        double diam = 0.0;
        for (std::size_t v = 1; v <= n; ++v) {
            for (std::size_t i : free) {
                diam = std::max(diam, std::abs(simplex[v].x[i] - simplex[0].x[i]));
            }
        }
        const double spread = simplex[n].f - simplex[0].f;
        if (diam < opts.x_tol || spread < opts.f_tol) {
            res.termination = Termination::tolerance;
            break;
        }
        if (iter >= opts.max_iter) {
            res.termination = Termination::max_iter;
            break;
        }
        if (opts.max_stall > 0 && stall >= opts.max_stall) {
            res.termination = Termination::stalled;
            break;
        }
        ++iter;

        std::vector<double> centroid = simplex[0].x;
        for (std::size_t i : free) {
            double s = 0.0;
            for (std::size_t v = 0; v < n; ++v) {
                s += simplex[v].x[i];
            }
            centroid[i] = s / static_cast<double>(n);
        }

        const Vertex& worst = simplex[n];
        Vertex r = eval(combine(centroid, worst.x, -reflect));
        bool do_shrink = false;
        Vertex accepted;
        if (r.f < simplex[0].f) {
            Vertex e = eval(combine(centroid, r.x, expand));
            accepted = e.f < r.f ? std::move(e) : std::move(r);
        } else if (r.f < simplex[n - 1].f) {
            accepted = std::move(r);
        } else if (r.f < worst.f) {
            Vertex c = eval(combine(centroid, r.x, contract));
            if (c.f <= r.f) {
                accepted = std::move(c);
            } else {
                do_shrink = true;
            }
        } else {
            Vertex c = eval(combine(centroid, worst.x, contract));
            if (c.f < worst.f) {
                accepted = std::move(c);
            } else {
                do_shrink = true;
            }
        }

        const double prev_best = simplex[0].f;
        if (do_shrink) {
            for (std::size_t v = 1; v <= n; ++v) {
                simplex[v] = eval(combine(simplex[0].x, simplex[v].x, shrink));
                record(simplex[v]);
            }
        } else {
            record(accepted);
            simplex[n] = std::move(accepted);
        }
        std::stable_sort(simplex.begin(), simplex.end(), by_value);
        res.best_history.push_back(simplex[0].f);
        stall = simplex[0].f < prev_best ? 0 : stall + 1;
    }
    if (n == 0) {
        res.termination = Termination::tolerance;
    }

    res.theta_star = simplex[0].x;
    res.loss_star = simplex[0].f;
    return res;
}

OptResult gradient_descent(const Objective& f, const std::vector<double>& theta0, const Box& box,
                           const GradientDescentOptions& opts)
{
    box.validate();
    if (!box.contains(theta0)) {
        throw DomainError("gradient_descent: theta0 lies outside the box");
    }
    OptResult res;
    std::vector<double> x = theta0;
    double fx = sanitize(f(x));
    ++res.n_evals;
    res.trace.push_back({0, x, fx});
    res.best_history.push_back(fx);
    res.theta_star = x;
    res.loss_star = fx;
    res.termination = Termination::max_iter;

    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        std::vector<double> g(x.size(), 0.0);
        double gnorm = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double width = box.upper[i] - box.lower[i];
            if (width <= 0.0) {
                continue;
            }
            const double h = opts.fd_step * width;
            auto xp = x;
            auto xm = x;
            xp[i] = std::min(x[i] + h, box.upper[i]);
            xm[i] = std::max(x[i] - h, box.lower[i]);
            const double fp = sanitize(f(xp));
            const double fm = sanitize(f(xm));
            res.n_evals += 2;
            g[i] = (fp - fm) / (xp[i] - xm[i]);
            gnorm += g[i] * g[i];
        }
        gnorm = std::sqrt(gnorm);
        if (!std::isfinite(gnorm) || gnorm < opts.g_tol) {
            res.termination = Termination::tolerance;
            break;
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] -= opts.learning_rate * g[i];
        }
        x = box.project(std::move(x));
        fx = sanitize(f(x));
        ++res.n_evals;
        res.trace.push_back({it, x, fx});
        if (fx < res.loss_star) {
            res.loss_star = fx;
            res.theta_star = x;
        }
        res.best_history.push_back(res.loss_star);
    }
    return res;
}

} // namespace dmi
