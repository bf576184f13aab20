#include "dmi/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dmi
{

namespace
{

using nlohmann::json;

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line_no)
{
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        if (s == "nan" || s == "inf" || s == "-inf") {
            return s == "nan" ? NAN : (s == "inf" ? INFINITY : -INFINITY);
        }
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + s + "'");
    }
    return v;
}

json number(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

double from_number(const json& j)
{
    return j.is_null() ? INFINITY : j.get<double>();
}

} // namespace

std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

std::size_t CsvTable::column(const std::string& name) const
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw IoError("CSV has no column '" + name + "'");
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

CsvTable read_csv(const std::filesystem::path& path)
{
    std::istringstream in(read_text(path));
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto fields = split(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        std::vector<double> row(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            row[i] = parse_double(fields[i], path, line_no);
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) {
        throw IoError(path.string() + ": missing header row");
    }
    return t;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table)
{
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        out += i ? "," : "";
        out += table.header[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += i ? "," : "";
            out += format_double(row[i]);
        }
        out += '\n';
    }
    write_text(path, out);
}

void write_timeseries_csv(const std::filesystem::path& path, const TimeSeries& series)
{
    CsvTable t;
    t.header.push_back("t");
    for (std::size_t j = 0; j < series.dim(); ++j) {
        t.header.push_back("v" + std::to_string(j + 1));
    }
    t.rows.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::vector<double> row{series.time(i)};
        const auto r = series.values.row(i);
        row.insert(row.end(), r.begin(), r.end());
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t);
}

TimeSeries read_timeseries_csv(const std::filesystem::path& path)
{
    const auto t = read_csv(path);
    if (t.header.size() < 2 || t.header[0] != "t") {
        throw IoError(path.string() + ": expected header t,v1[,v2,...]");
    }
    if (t.rows.empty()) {
        throw IoError(path.string() + ": no samples");
    }
    PointSet values(t.rows.size(), t.header.size() - 1);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        std::copy(t.rows[i].begin() + 1, t.rows[i].end(), values.row(i).begin());
    }
    const double t0 = t.rows.front()[0];
    const double dt = t.rows.size() > 1 ? (t.rows.back()[0] - t0) / static_cast<double>(t.rows.size() - 1) : 1.0;
    return TimeSeries(std::move(values), dt, t0);
}

void write_measure_csv(const std::filesystem::path& path, const EmpiricalMeasure& mu)
{
    CsvTable t;
    t.header.push_back("w");
    for (std::size_t j = 0; j < mu.dim(); ++j) {
        t.header.push_back("x" + std::to_string(j + 1));
    }
    t.rows.reserve(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        std::vector<double> row{mu.weights()[i]};
        const auto r = mu.points().row(i);
        row.insert(row.end(), r.begin(), r.end());
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t);
}

EmpiricalMeasure read_measure_csv(const std::filesystem::path& path)
{
    const auto t = read_csv(path);
    if (t.header.size() < 2 || t.header[0] != "w") {
        throw IoError(path.string() + ": expected header w,x1,...,xd");
    }
    PointSet pts(t.rows.size(), t.header.size() - 1);
    std::vector<double> w(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        w[i] = t.rows[i][0];
        std::copy(t.rows[i].begin() + 1, t.rows[i].end(), pts.row(i).begin());
    }
    return EmpiricalMeasure(std::move(pts), std::move(w));
}

std::string opt_result_json(const OptResult& r)
{
    json trace = json::array();
    for (const auto& e : r.trace) {
        json th = json::array();
        for (double v : e.theta) {
            th.push_back(number(v));
        }
        trace.push_back({{"iter", e.iter}, {"theta", th}, {"loss", number(e.loss)}});
    }
    json th = json::array();
    for (double v : r.theta_star) {
        th.push_back(number(v));
    }
    const json j{{"theta_star", th},
                 {"loss_star", number(r.loss_star)},
                 {"n_evals", r.n_evals},
                 {"termination", to_string(r.termination)},
                 {"trace", trace}};
    return j.dump(2) + "\n";
}

OptResult parse_opt_result_json(const std::string& text)
{
    try {
        const auto j = json::parse(text);
        OptResult r;
        for (const auto& v : j.at("theta_star")) {
            r.theta_star.push_back(from_number(v));
        }
        r.loss_star = from_number(j.at("loss_star"));
        r.n_evals = j.at("n_evals").get<std::size_t>();
        const auto term = j.at("termination").get<std::string>();
        r.termination = term == "tolerance" ? Termination::tolerance
                        : term == "stalled" ? Termination::stalled
                                            : Termination::max_iter;
        for (const auto& e : j.at("trace")) {
            TraceEntry t{e.at("iter").get<std::size_t>(), {}, from_number(e.at("loss"))};
            for (const auto& v : e.at("theta")) {
                t.theta.push_back(from_number(v));
            }
            r.trace.push_back(std::move(t));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("OptResult JSON: ") + e.what());
    }
}

} // namespace dmi
