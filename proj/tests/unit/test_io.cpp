#include <doctest.h>

#include <clocale>
#include <cmath>
#include <filesystem>

#include "dmi/io.hpp"

namespace dmi
{

namespace fs = std::filesystem;

namespace
{
struct TempDir
{
    fs::path path;

    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("dmi_test_io_" + name))
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};
} // namespace

TEST_CASE("format_double round-trips with 17 significant digits")
{
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    CHECK(format_double(1e21) == "1e+21");
    CHECK(format_double(NAN) == "nan");
    CHECK(format_double(-INFINITY) == "-inf");
    for (double v : {M_PI, 1.0 / 3.0, 6.02214076e23, -1e-17, 0.0}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("number formatting ignores the C locale")
{
    const std::string old = std::setlocale(LC_NUMERIC, nullptr);
    if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") != nullptr) {
        CHECK(format_double(0.5) == "0.5");
        std::setlocale(LC_NUMERIC, old.c_str());
    }
}

TEST_CASE("time series CSV layout and round trip")
{
    TempDir dir("ts");
    const TimeSeries ts(PointSet::from_rows({{1.0, -2.0}, {0.1, 3.5}, {4.0, 5.0}}), 0.5);
    write_timeseries_csv(dir.path / "ts.csv", ts);
    const auto text = read_text(dir.path / "ts.csv");
    CHECK(text == "t,v1,v2\n0,1,-2\n0.5,0.10000000000000001,3.5\n1,4,5\n");
    CHECK(text.find('\r') == std::string::npos);

    const auto back = read_timeseries_csv(dir.path / "ts.csv");
    CHECK(back.values == ts.values);
    CHECK(back.dt_samp == 0.5);
}

TEST_CASE("measure CSV layout and round trip")
{
    TempDir dir("mu");
    const EmpiricalMeasure mu(PointSet::from_rows({{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}}), {0.25, 0.75});
    write_measure_csv(dir.path / "mu.csv", mu);
    CHECK(read_text(dir.path / "mu.csv") == "w,x1,x2,x3\n0.25,1,2,3\n0.75,4,5,6\n");
    const auto back = read_measure_csv(dir.path / "mu.csv");
    CHECK(back.points() == mu.points());
    CHECK(back.weights() == mu.weights());
}

TEST_CASE("CSV read errors")
{
    TempDir dir("bad");
    write_text(dir.path / "ragged.csv", "a,b\n1,2\n3\n");
    CHECK_THROWS_WITH_AS(read_csv(dir.path / "ragged.csv"), doctest::Contains(":3:"), IoError);
    write_text(dir.path / "word.csv", "a\nfoo\n");
    CHECK_THROWS_WITH_AS(read_csv(dir.path / "word.csv"), doctest::Contains("not a number"), IoError);
    write_text(dir.path / "empty.csv", "");
    CHECK_THROWS_AS(read_csv(dir.path / "empty.csv"), IoError);
    CHECK_THROWS_AS(read_csv(dir.path / "missing.csv"), IoError);
    write_text(dir.path / "mu.csv", "x1,w\n1,1\n");
    CHECK_THROWS_AS(read_measure_csv(dir.path / "mu.csv"), IoError);

    write_text(dir.path / "crlf.csv", "t,v1\r\n0,1\r\n1,2\r\n");
    CHECK(read_timeseries_csv(dir.path / "crlf.csv").size() == 2);
    CHECK_THROWS_AS(read_csv(dir.path / "crlf.csv").column("v2"), IoError);
}

TEST_CASE("OptResult JSON round trip")
{
    OptResult r;
    r.theta_star = {0.1, 2.0};
    r.loss_star = 1e-9;
    r.n_evals = 7;
    r.termination = Termination::stalled;
    r.trace = {{0, {0.0, 1.0}, 3.0}, {1, {0.1, 2.0}, INFINITY}};
    const auto text = opt_result_json(r);
    CHECK(text.find("\"loss\": null") != std::string::npos);
    CHECK(text.find("\"termination\": \"stalled\"") != std::string::npos);

    const auto back = parse_opt_result_json(text);
    CHECK(back.theta_star == r.theta_star);
    CHECK(back.loss_star == r.loss_star);
    CHECK(back.n_evals == 7);
    CHECK(back.termination == Termination::stalled);
    REQUIRE(back.trace.size() == 2);
    CHECK(back.trace[1].iter == 1);
    CHECK(std::isinf(back.trace[1].loss));
    CHECK(opt_result_json(back) == text);

    CHECK_THROWS_AS(parse_opt_result_json("{\"theta_star\": []}"), IoError);
    CHECK_THROWS_AS(parse_opt_result_json("not json"), IoError);
}

} // namespace dmi
