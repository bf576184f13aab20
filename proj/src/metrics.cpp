#include "dmi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dmi/parallel.hpp"
#include "dmi/rng.hpp"

namespace dmi
{

MetricKind parse_metric_kind(const std::string& s)
{
    if (s == "energy_mmd") {
        return MetricKind::energy_mmd;
    }
    if (s == "sliced_wasserstein") {
        return MetricKind::sliced_wasserstein;
    }
    if (s == "wasserstein_1d") {
        return MetricKind::wasserstein_1d;
    }
    throw ParameterError("unknown metric kind '" + s + "'");
}

std::string to_string(MetricKind k)
{
    switch (k) {
    case MetricKind::energy_mmd:
        return "energy_mmd";
    case MetricKind::sliced_wasserstein:
        return "sliced_wasserstein";
    case MetricKind::wasserstein_1d:
        return "wasserstein_1d";
    }
    return "?";
}

void MetricSpec::validate() const
{
    if (n_projections < 1) {
        throw ParameterError("MetricSpec: n_projections must be at least 1");
    }
    if (p != 1 && p != 2) {
        throw ParameterError("MetricSpec: p must be 1 or 2");
    }
}

namespace
{

void check_dims(const EmpiricalMeasure& P, const EmpiricalMeasure& Q, const char* who)
{
    if (P.dim() != Q.dim()) {
        throw ParameterError(std::string(who) + ": dimension mismatch (" + std::to_string(P.dim()) + " vs " +
                             std::to_string(Q.dim()) + ")");
    }
}

double dist(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// sum_i a_i sum_j b_j |x_i - y_j|, rows in parallel, tree reduction.
double weighted_cross(const EmpiricalMeasure& A, const EmpiricalMeasure& B)
{
    const std::size_t na = A.size();
    const std::size_t nb = B.size();
    std::vector<double> rows(na);
    parallel_for(na, [&](std::size_t i) {
        std::vector<double> terms(nb);
        const auto x = A.points().row(i);
        for (std::size_t j = 0; j < nb; ++j) {
            terms[j] = B.weights()[j] * dist(x, B.points().row(j));
        }
        rows[i] = A.weights()[i] * pairwise_sum(terms.data(), nb);
    });
    return pairwise_sum(rows.data(), na);
}

double pow_abs(double v, int p)
{
    const double a = std::abs(v);
    return p == 1 ? a : a * a;
}

double wasserstein_sorted(std::vector<std::pair<double, double>> a, std::vector<std::pair<double, double>> b,
                          int p)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<double> terms;
    terms.reserve(a.size() + b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double wa = a[0].second;
    double wb = b[0].second;
    while (i < a.size() && j < b.size()) {
        const double m = std::min(wa, wb);
        terms.push_back(m * pow_abs(a[i].first - b[j].first, p));
        wa -= m;
        wb -= m;
        // m equals one of the remaining masses, so that side hits exactly 0.
        if (wa <= 0.0 && ++i < a.size()) {
            wa = a[i].second;
        }
        if (wb <= 0.0 && ++j < b.size()) {
            wb = b[j].second;
        }
    }
    const double cost = std::max(0.0, pairwise_sum(terms.data(), terms.size()));
    return p == 1 ? cost : std::sqrt(cost);
}

double wasserstein_uniform_equal(std::vector<double> x, std::vector<double> y, int p)
{
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::vector<double> terms(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        terms[i] = pow_abs(x[i] - y[i], p);
    }
    const double cost = pairwise_sum(terms.data(), terms.size()) / static_cast<double>(x.size());
    return p == 1 ? cost : std::sqrt(cost);
}

} // namespace

double energy_mmd(const EmpiricalMeasure& P, const EmpiricalMeasure& Q)
{
    check_dims(P, Q, "energy_mmd");
    const double xy = weighted_cross(P, Q);
    const double xx = weighted_cross(P, P);
    const double yy = weighted_cross(Q, Q);
    return std::sqrt(std::max(0.0, 2.0 * xy - xx - yy));
}

double wasserstein_1d(std::vector<double> x, std::vector<double> y, int p)
{
    if (x.empty() || y.empty()) {
        throw ParameterError("wasserstein_1d: empty sample");
    }
    if (p != 1 && p != 2) {
        throw ParameterError("wasserstein_1d: p must be 1 or 2");
    }
    if (x.size() == y.size()) {
        return wasserstein_uniform_equal(std::move(x), std::move(y), p);
    }
    std::vector<std::pair<double, double>> a(x.size());
    std::vector<std::pair<double, double>> b(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        a[i] = {x[i], 1.0 / static_cast<double>(x.size())};
    }
    for (std::size_t j = 0; j < y.size(); ++j) {
        b[j] = {y[j], 1.0 / static_cast<double>(y.size())};
    }
    return wasserstein_sorted(std::move(a), std::move(b), p);
}

double wasserstein_1d(const EmpiricalMeasure& P, const EmpiricalMeasure& Q, int p)
{
    if (P.dim() != 1 || Q.dim() != 1) {
        throw ParameterError("wasserstein_1d: both measures must be one-dimensional");
    }
    if (P.uniform() && Q.uniform()) {
        return wasserstein_1d(P.points().data(), Q.points().data(), p);
    }
    if (p != 1 && p != 2) {
        throw ParameterError("wasserstein_1d: p must be 1 or 2");
    }
    std::vector<std::pair<double, double>> a(P.size());
    std::vector<std::pair<double, double>> b(Q.size());
    for (std::size_t i = 0; i < P.size(); ++i) {
        a[i] = {P.points()(i, 0), P.weights()[i]};
    }
    for (std::size_t j = 0; j < Q.size(); ++j) {
        b[j] = {Q.points()(j, 0), Q.weights()[j]};
    }
    return wasserstein_sorted(std::move(a), std::move(b), p);
}

double sliced_wasserstein(const EmpiricalMeasure& P, const EmpiricalMeasure& Q, const MetricSpec& spec)
{
    check_dims(P, Q, "sliced_wasserstein");
    spec.validate();
    const std::size_t d = P.dim();
    const std::size_t np = spec.n_projections;

    std::vector<double> dirs(np * d);
    CounterRng rng(spec.seed);
    for (std::size_t k = 0; k < np; ++k) {
        double nrm = 0.0;
        do {
            nrm = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                dirs[k * d + c] = rng.normal();
                nrm += dirs[k * d + c] * dirs[k * d + c];
            }
        } while (nrm == 0.0);
        nrm = std::sqrt(nrm);
        for (std::size_t c = 0; c < d; ++c) {
            dirs[k * d + c] /= nrm;
        }
    }

    auto project = [d](const EmpiricalMeasure& M, const double* u) {
        std::vector<double> out(M.size());
        for (std::size_t i = 0; i < M.size(); ++i) {
            const auto x = M.points().row(i);
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                s += u[c] * x[c];
            }
            out[i] = s;
        }
        return out;
    };

    const bool weighted = !(P.uniform() && Q.uniform());
    std::vector<double> costs(np);
    parallel_for(np, [&](std::size_t k) {
        const double* u = dirs.data() + k * d;
        double w = 0.0;
        if (weighted) {
            PointSet a(P.size(), 1, project(P, u));
            PointSet b(Q.size(), 1, project(Q, u));
            w = wasserstein_1d(EmpiricalMeasure(std::move(a), P.weights()),
                               EmpiricalMeasure(std::move(b), Q.weights()), spec.p);
        } else {
            w = wasserstein_1d(project(P, u), project(Q, u), spec.p);
        }
        costs[k] = spec.p == 1 ? w : w * w;
    });
    const double mean = pairwise_sum(costs.data(), np) / static_cast<double>(np);
    return spec.p == 1 ? mean : std::sqrt(mean);
}

double distance(const EmpiricalMeasure& P, const EmpiricalMeasure& Q, const MetricSpec& spec)
{
    switch (spec.kind) {
    case MetricKind::energy_mmd:
        return energy_mmd(P, Q);
    case MetricKind::sliced_wasserstein:
        return sliced_wasserstein(P, Q, spec);
    case MetricKind::wasserstein_1d:
        spec.validate();
        return wasserstein_1d(P, Q, spec.p);
    }
    throw ParameterError("distance: unknown metric kind");
}

} // namespace dmi
