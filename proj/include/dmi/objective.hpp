#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dmi/dynamics.hpp"
#include "dmi/ks.hpp"
#include "dmi/measure.hpp"
#include "dmi/metrics.hpp"
#include "dmi/optimize.hpp"

namespace dmi
{

/// theta -> model advancing by `intervals` sampling intervals per step.
struct ModelFamily
{
    std::string name;
    std::vector<std::string> param_names;
    std::function<std::unique_ptr<DynamicalModel>(const std::vector<double>& theta, std::size_t intervals)> make;
};

/// theta = (alpha, beta).
ModelFamily torus_family();

/// theta = (sigma, rho, beta, time_scale); one sampling interval is
/// dt_samp / dt_int substeps of the chosen integrator.
ModelFamily lorenz_family(double dt_samp, double dt_int, Integrator method,
                          double overflow_guard = default_overflow_guard);

/// theta = (theta); base supplies domain, grid, dt and dt_samp.
ModelFamily ks_family(const KSConfig& base);

enum class ObjectiveKind
{
    alg1,
    alg2,
    alg2_unbiased,
    alg2_with_init
};

ObjectiveKind parse_objective_kind(const std::string& s);
std::string to_string(ObjectiveKind k);

struct ObjectiveSpec
{
    ObjectiveKind kind = ObjectiveKind::alg1;
    ModelFamily family;
    Box box;
    MetricSpec metric;
    DelayParams delay;
    std::vector<Observable> observables;

    /// alg1: the observed scalar series. alg2*: full-state observations.
    TimeSeries data;

    /// alg1 and pointwise: simulation start.
    State initial_state;
    /// alg1: sampling intervals simulated (0 = data length - 1).
    std::size_t sim_length = 0;
    /// alg1: simulated samples dropped. alg2*: data samples dropped.
    std::size_t burn_in = 0;
    /// alg1: observation noise added to the simulated series.
    double sim_noise_sigma = 0.0;
    std::uint64_t sim_noise_seed = 0;

    /// alg2*: sampled states per evaluation.
    std::size_t n_samples = 500;
    /// alg2_with_init: samples in the initial-window term (0 = m).
    std::size_t init_window = 0;
    /// alg2_with_init: compare against data-derived pushforwards instead of
    /// the plain data measures.
    bool init_unbiased = true;

    double divergence_penalty = 1e6;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ObjectiveTerms
{
    /// D(T_theta # mu, target). Zero for alg1.
    double state_term = 0.0;
    /// One entry per observable.
    std::vector<double> delay_terms;
    double init_term = 0.0;
    double total = 0.0;
    bool diverged = false;
};

/// Precomputed targets for repeated evaluation of one objective.
class DelayMeasureObjective
{
public:
    explicit DelayMeasureObjective(ObjectiveSpec spec);

    const ObjectiveSpec& spec() const { return spec_; }

    ObjectiveTerms terms(const std::vector<double>& theta) const;
    double operator()(const std::vector<double>& theta) const { return terms(theta).total; }

    /// alg1: the data delay measure. alg2*: the sampled data states.
    const EmpiricalMeasure& data_measure() const { return data_measure_; }
    /// Indices of the sampled data states (alg2*).
    const std::vector<std::size_t>& sample_indices() const { return indices_; }

    /// Delay embedding of the simulated series at theta (alg1).
    EmpiricalMeasure simulated_measure(const std::vector<double>& theta) const;

private:
    ObjectiveTerms alg1_terms(const std::vector<double>& theta) const;
    ObjectiveTerms alg2_terms(const std::vector<double>& theta) const;
    double penalty(double magnitude) const;

    ObjectiveSpec spec_;
    EmpiricalMeasure data_measure_;
    std::vector<std::size_t> indices_;
    EmpiricalMeasure state_target_;
    std::vector<EmpiricalMeasure> delay_targets_;
};

double objective_alg1(const std::vector<double>& theta, const ObjectiveSpec& spec);
double objective_alg2(const std::vector<double>& theta, const ObjectiveSpec& spec);

/// D(T_theta # mu, mu) alone, the state-coordinate objective that cannot
/// tell measure-preserving maps apart.
double state_measure_objective(const std::vector<double>& theta, const ObjectiveSpec& spec);

/// Mean squared mismatch between the simulated and observed scalar series
/// over samples 1..H, H = sim_length (or data length - 1).
double pointwise_objective(const std::vector<double>& theta, const ObjectiveSpec& spec);

struct LandscapePoint
{
    std::vector<double> theta;
    double loss;
};

/// Evaluates f on every grid point, in grid order.
std::vector<LandscapePoint> scan_landscape(const Objective& f, const std::vector<std::vector<double>>& grid);
std::vector<LandscapePoint> scan_landscape(const ObjectiveSpec& spec, const std::vector<std::vector<double>>& grid);

/// Distance between two disjoint size-n subsamples of mu.
double self_distance_floor(const EmpiricalMeasure& mu, std::size_t n, const MetricSpec& metric,
                           std::uint64_t seed);

} // namespace dmi
