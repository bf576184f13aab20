#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dmi
{

using Objective = std::function<double(const std::vector<double>&)>;

/// Axis-aligned box. A coordinate with lower == upper is held fixed.
struct Box
{
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t size() const { return lower.size(); }
    bool contains(const std::vector<double>& x) const;
    std::vector<double> project(std::vector<double> x) const;
    void validate() const;
};

enum class Termination
{
    tolerance,
    max_iter,
    stalled
};

std::string to_string(Termination t);

struct TraceEntry
{
    std::size_t iter;
    std::vector<double> theta;
    double loss;
};

struct OptResult
{
    std::vector<double> theta_star;
    double loss_star = 0.0;
    std::vector<TraceEntry> trace;
    std::size_t n_evals = 0;
    Termination termination = Termination::max_iter;
    /// Best simplex value after each iteration (index 0 = initial simplex).
    std::vector<double> best_history;
};

struct NelderMeadOptions
{
    std::size_t max_iter = 200;
    double f_tol = 1e-10;
    double x_tol = 1e-8;
    /// Initial simplex edge as a fraction of each box width.
    double initial_step = 0.1;
    /// Stop after this many iterations without a new best (0 disables).
    std::size_t max_stall = 0;
    /// Nonzero seeds randomize the sign of each initial simplex edge.
    std::uint64_t seed = 0;
};

/// Nelder-Mead with reflection 1, expansion 2, contraction 0.5, shrink 0.5.
/// Trial points are projected onto the box; NaN objective values are
/// treated as +infinity. Stops when the simplex diameter (max distance from
/// the best vertex) is below x_tol, the spread of values is below f_tol, or
/// max_iter is reached. The trace lists every vertex that entered the
/// simplex.
OptResult nelder_mead(const Objective& f, const std::vector<double>& theta0, const Box& box,
                      const NelderMeadOptions& opts = {});

struct GradientDescentOptions
{
    std::size_t max_iter = 100;
    double learning_rate = 1e-2;
    /// Central-difference step as a fraction of each box width.
    double fd_step = 1e-4;
    double g_tol = 1e-8;
};

/// Projected gradient descent with central finite-difference gradients.
OptResult gradient_descent(const Objective& f, const std::vector<double>& theta0, const Box& box,
                           const GradientDescentOptions& opts = {});

} // namespace dmi
