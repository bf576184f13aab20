#include "dmi/types.hpp"

#include <cmath>
#include <sstream>

namespace dmi
{

PointSet::PointSet(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data))
{
    if (data_.size() != rows_ * cols_) {
        throw ParameterError("PointSet: data size does not match rows*cols");
    }
}

PointSet PointSet::from_rows(const std::vector<State>& rows)
{
    if (rows.empty()) {
        return {};
    }
    PointSet out(0, rows.front().size());
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r);
    }
    return out;
}

void PointSet::push_back(std::span<const double> r)
{
    if (rows_ == 0 && cols_ == 0) {
        cols_ = r.size();
    }
    if (r.size() != cols_) {
        throw ParameterError("PointSet: row dimension mismatch");
    }
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
}

PointSet PointSet::slice(std::size_t first, std::size_t count) const
{
    if (first + count > rows_) {
        throw ParameterError("PointSet: slice out of range");
    }
    std::vector<double> d(data_.begin() + static_cast<std::ptrdiff_t>(first * cols_),
                          data_.begin() + static_cast<std::ptrdiff_t>((first + count) * cols_));
    return {count, cols_, std::move(d)};
}

namespace
{
std::string divergence_message(std::size_t index, double magnitude, const std::string& context)
{
    std::ostringstream os;
    os << "divergence at step " << index << " (state norm " << magnitude << ")";
    if (!context.empty()) {
        os << ": " << context;
    }
    return os.str();
}

std::string instability_message(double theta, double dt)
{
    std::ostringstream os;
    os << "KS solver instability: NaN in transform output (theta=" << theta << ", dt=" << dt << ")";
    return os.str();
}
} // namespace

DivergenceError::DivergenceError(std::size_t index, double magnitude, const std::string& context)
    : std::runtime_error(divergence_message(index, magnitude, context)), index_(index), magnitude_(magnitude)
{
}

InstabilityError::InstabilityError(double theta, double dt)
    : std::runtime_error(instability_message(theta, dt)), theta_(theta), dt_(dt)
{
}

bool all_finite(std::span<const double> v)
{
    for (double x : v) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

double norm2(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

} // namespace dmi
