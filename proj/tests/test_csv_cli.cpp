#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "collapse/csv.hpp"

using namespace collapse;

TEST_CASE("csv writer: stable header, 9 significant digits, LF endings") {
    CsvWriter w;
    ResultRow row;
    row.experiment = "hutter-scaling";
    row.metric = "error";
    row.beta = 1.5;
    row.support = 1e6;
    row.x_kind = "T";
    row.x = 12345.0;
    row.error_mean = 0.123456789123;
    row.error_stderr = 0.00012345;
    row.trials = 10;
    row.master_seed = 42;
    w.add(row);
    std::string text = w.to_string();
    CHECK(text.find("experiment,metric,beta,") == 0);
    CHECK(text.find("0.123456789") != std::string::npos);
    CHECK(text.find("\r\n") == std::string::npos);
    CHECK(text.back() == '\n');
}

TEST_CASE("csv writer writes atomically and round-trips through the reader") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "collapse_csv_test";
    fs::create_directories(dir);
    fs::path file = dir / "out.csv";

    CsvWriter w;
    for (int i = 0; i < 3; ++i) {
        ResultRow row;
        row.experiment = "demo";
        row.metric = "error";
        row.x_kind = "T";
        row.x = 100.0 * (i + 1);
        row.error_mean = 1.0 / (i + 1);
        row.trials = 5;
        row.master_seed = 7;
        w.add(row);
    }
    w.write(file.string());
    CHECK(fs::exists(file));
    CHECK_FALSE(fs::exists(file.string() + ".tmp"));

    auto rows = read_csv(file.string());
    REQUIRE(rows.size() == 3);
    CHECK(rows[0]["experiment"] == "demo");
    CHECK(rows[1]["x"] == "200");
    CHECK(rows[2]["error_mean"] == format_g9(1.0 / 3.0));
    fs::remove_all(dir);
}

TEST_CASE("format_g9 keeps nine significant digits") {
    CHECK(format_g9(1.0 / 3.0) == "0.333333333");
    CHECK(format_g9(123456789.0) == "123456789");
    CHECK(format_g9(0.5) == "0.5");
}
