#ifndef COLLAPSE_CSV_HPP
#define COLLAPSE_CSV_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace collapse {

// One measurement row. The header is stable across experiments; fields a
// given experiment does not use stay empty.
struct ResultRow {
    std::string experiment;
    std::string metric; // error | tv | perplexity | asymptote:*
    std::optional<double> beta, beta_prime, k, pi, n_start, t0, t_ai;
    std::optional<double> support, vocab, n_ctx, m, d;
    std::string rule;
    std::optional<int> generation;
    std::string x_kind; // T | d | k | generation | pi
    double x = 0.0;
    double error_mean = 0.0;
    std::optional<double> error_stderr;
    int trials = 0;
    uint64_t master_seed = 0;
    int64_t wall_time_ms = 0;
};

// Collects rows and writes the file atomically (write to a temp path in
// the same directory, then rename). Numbers use 9 significant digits.
class CsvWriter {
public:
    void add(const ResultRow& row);
    const std::vector<ResultRow>& rows() const { return rows_; }
    void write(const std::string& path) const;
    std::string to_string() const;
    static const char* header();

private:
    std::vector<ResultRow> rows_;
};

// minimal reader for the fit subcommand: returns column -> values per row
std::vector<std::map<std::string, std::string>> read_csv(const std::string& path);

std::string format_g9(double v);

} // namespace collapse

#endif
