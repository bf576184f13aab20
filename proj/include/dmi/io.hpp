#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmi/measure.hpp"
#include "dmi/optimize.hpp"

namespace dmi
{

/// A file could not be read, written or parsed.
class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// 17 significant digits, independent of the C locale.
std::string format_double(double v);

struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Header t,v1[,v2,...].
void write_timeseries_csv(const std::filesystem::path& path, const TimeSeries& series);
TimeSeries read_timeseries_csv(const std::filesystem::path& path);

/// Header w,x1,...,xd.
void write_measure_csv(const std::filesystem::path& path, const EmpiricalMeasure& mu);
EmpiricalMeasure read_measure_csv(const std::filesystem::path& path);

/// {theta_star, loss_star, n_evals, termination, trace:[{iter, theta, loss}]}
std::string opt_result_json(const OptResult& r);
OptResult parse_opt_result_json(const std::string& text);

/// Writes bytes as given (LF line endings preserved).
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

} // namespace dmi
