#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmi
{

using State = std::vector<double>;

// Row-major table of equally sized real vectors. Used for trajectories,
// time-series samples and point clouds.
class PointSet
{
public:
    PointSet() = default;
    PointSet(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    PointSet(std::size_t rows, std::size_t cols, std::vector<double> data);

    static PointSet from_rows(const std::vector<State>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    void push_back(std::span<const double> r);
    void reserve(std::size_t rows) { data_.reserve(rows * cols_); }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    // Rows [first, first + count).
    PointSet slice(std::size_t first, std::size_t count) const;

    bool operator==(const PointSet&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using Trajectory = PointSet;

/// Invalid input parameters (dimensions, counts, ranges).
class ParameterError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Parameter vector outside the declared box.
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// A simulated state left the overflow guard or became non-finite.
class DivergenceError : public std::runtime_error
{
public:
    DivergenceError(std::size_t index, double magnitude, const std::string& context = {});

    std::size_t index() const { return index_; }
    double magnitude() const { return magnitude_; }

private:
    std::size_t index_;
    double magnitude_;
};

/// The KS spectral solver produced NaN.
class InstabilityError : public std::runtime_error
{
public:
    InstabilityError(double theta, double dt);

    double theta() const { return theta_; }
    double dt() const { return dt_; }

private:
    double theta_;
    double dt_;
};

bool all_finite(std::span<const double> v);
double norm2(std::span<const double> v);

} // namespace dmi
