#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmi/objective.hpp"

namespace dmi
{

/// Invalid run configuration. The message starts with the offending field.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(const std::string& field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(field)
    {
    }

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct PolynomialTerm
{
    double coef = 1.0;
    /// Index into the parameter vector, or -1 for a constant coefficient.
    int param = -1;
    std::vector<int> exponents;
};

struct ModelBlock
{
    std::vector<std::string> param_names;
    std::vector<double> truth;

    /// torus: further (alpha, beta) pairs compared against the truth.
    std::vector<std::vector<double>> compare;

    /// ks
    double domain_length = 100.0;
    std::size_t grid_points = 200;

    /// custom: one list of terms per state component.
    std::vector<std::vector<PolynomialTerm>> field;
};

struct ObservableSpec
{
    std::string type = "coordinate";
    std::size_t index = 0;
    std::vector<double> weights;
    double offset = 0.0;
};

struct DataBlock
{
    Integrator integrator = Integrator::rk4;
    double dt = 0.01;
    double dt_samp = 0.01;
    std::size_t samples = 0;
    std::size_t burn_in = 0;
    double noise_sigma = 0.0;
    State initial_state;
    std::vector<ObservableSpec> observables;
};

struct ObjectiveBlock
{
    ObjectiveKind kind = ObjectiveKind::alg1;
    std::size_t n_samples = 500;
    std::size_t init_window = 0;
    bool init_unbiased = true;
    /// alg1: noise on the simulated series (defaults to data.noise_sigma).
    double sim_noise_sigma = 0.0;
    std::size_t burn_in = 0;
    /// alg1: simulated steps per candidate (0 = data length - 1).
    std::size_t sim_length = 0;
    double divergence_penalty = 1e6;
    /// Also fit the pointwise mean-squared-error objective.
    bool baseline = false;
};

struct OptimizerBlock
{
    std::string kind = "nelder_mead";
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t restarts = 1;
    std::optional<std::vector<double>> theta0;
    NelderMeadOptions nm;
    GradientDescentOptions gd;
};

struct GridSpec
{
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;

    std::vector<double> values() const;
};

/// Parses "a:b:step".
GridSpec parse_grid(const std::string& text);

struct LandscapeBlock
{
    std::size_t param = 0;
    GridSpec grid;
};

struct AnalysisBlock
{
    /// Seeds averaged for the two-subsample self-distance floor.
    std::size_t floor_seeds = 5;
    /// lorenz: time_scale of the near-identity comparison model.
    double identity_time_scale = 1e-3;
};

struct RunConfig
{
    std::string experiment;
    std::uint64_t seed = 0;
    ModelBlock model;
    DataBlock data;
    DelayParams delay{2, 1};
    MetricSpec metric;
    ObjectiveBlock objective;
    OptimizerBlock optimizer;
    std::optional<LandscapeBlock> landscape;
    AnalysisBlock analysis;
    std::string output;
};

/// Parses and validates a JSON document. Throws ConfigError.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed_override = std::nullopt);

/// Canonical JSON for the config with every default filled in; parsing it
/// again gives the same run.
std::string config_to_json(const RunConfig& cfg);

/// Full-state data trajectory, observed series and objective inputs built
/// from a config.
struct ExperimentData
{
    TimeSeries states;
    TimeSeries observed;
    ObjectiveSpec spec;
};

ExperimentData prepare_experiment(const RunConfig& cfg);

/// Writes all run artifacts into out_dir (created if missing) and returns
/// the report as JSON text.
std::string run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Evaluates the objective over the grid for one parameter, the others held
/// at the truth, and writes landscape.csv into out_dir.
std::vector<LandscapePoint> run_scan(const RunConfig& cfg, const LandscapeBlock& scan,
                                     const std::filesystem::path& out_dir);

/// Reads a run directory and writes tidy tables into run_dir/plots.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& run_dir);

/// Version string embedded in run metadata.
std::string library_version();

} // namespace dmi
