#pragma once

#include <cstdint>
#include <string>

#include "dmi/measure.hpp"

namespace dmi
{

enum class MetricKind
{
    energy_mmd,
    sliced_wasserstein,
    wasserstein_1d
};

MetricKind parse_metric_kind(const std::string& s);
std::string to_string(MetricKind k);

struct MetricSpec
{
    MetricKind kind = MetricKind::energy_mmd;
    std::size_t n_projections = 100; // sliced only
    int p = 2;                       // sliced and 1-D
    std::uint64_t seed = 0;          // sliced only

    void validate() const;
};

/// Energy-distance MMD as a weighted V-statistic:
///     D^2 = 2 E|X - Y| - E|X - X'| - E|Y - Y'|
/// with all expectations taken as full double sums (diagonal included), so
/// D(P, P) is exactly 0. Returns sqrt(max(0, D^2)).
double energy_mmd(const EmpiricalMeasure& P, const EmpiricalMeasure& Q);

/// p-Wasserstein distance between 1-D measures by quantile coupling.
double wasserstein_1d(const EmpiricalMeasure& P, const EmpiricalMeasure& Q, int p = 2);

/// Same, on raw samples with uniform weights.
double wasserstein_1d(std::vector<double> x, std::vector<double> y, int p = 2);

/// (mean_u W_p(u.P, u.Q)^p)^(1/p) over spec.n_projections unit directions
/// u drawn as normalized Gaussian vectors from CounterRng(spec.seed).
double sliced_wasserstein(const EmpiricalMeasure& P, const EmpiricalMeasure& Q, const MetricSpec& spec);

/// Dispatch on spec.kind.
double distance(const EmpiricalMeasure& P, const EmpiricalMeasure& Q, const MetricSpec& spec);

} // namespace dmi
