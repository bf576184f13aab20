#pragma once

#include "dmi/measure.hpp"
#include "oracles.hpp"

namespace testing_support
{

inline dmi::EmpiricalMeasure to_measure(const oracle::Cloud& c)
{
    return dmi::EmpiricalMeasure(dmi::PointSet::from_rows(c));
}

inline oracle::Cloud to_cloud(const dmi::PointSet& p)
{
    oracle::Cloud c(p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i) {
        c[i].assign(p.row(i).begin(), p.row(i).end());
    }
    return c;
}

inline dmi::TimeSeries scalar_series(const std::vector<double>& v, double dt = 1.0)
{
    return {dmi::PointSet(v.size(), 1, v), dt};
}

} // namespace testing_support
