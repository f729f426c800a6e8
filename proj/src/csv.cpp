#include "collapse/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace collapse {

std::string format_g9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

namespace {
std::string opt_str(const std::optional<double>& v) { return v ? format_g9(*v) : ""; }
} // namespace

const char* CsvWriter::header() {
    return "experiment,metric,beta,beta_prime,k,pi,n_start,t0,t_ai,support,vocab,n_ctx,m,d,rule,"
           "generation,x_kind,x,error_mean,error_stderr,trials,master_seed,wall_time_ms";
}

void CsvWriter::add(const ResultRow& row) { rows_.push_back(row); }

std::string CsvWriter::to_string() const {
    std::ostringstream out;
    out << header() << "\n";
    for (const auto& r : rows_) {
        out << r.experiment << ',' << r.metric << ',' << opt_str(r.beta) << ','
            << opt_str(r.beta_prime) << ',' << opt_str(r.k) << ',' << opt_str(r.pi) << ','
            << opt_str(r.n_start) << ',' << opt_str(r.t0) << ',' << opt_str(r.t_ai) << ','
            << opt_str(r.support) << ',' << opt_str(r.vocab) << ',' << opt_str(r.n_ctx) << ','
            << opt_str(r.m) << ',' << opt_str(r.d) << ',' << r.rule << ','
            << (r.generation ? std::to_string(*r.generation) : "") << ',' << r.x_kind << ','
            << format_g9(r.x) << ',' << format_g9(r.error_mean) << ','
            << (r.error_stderr ? format_g9(*r.error_stderr) : "") << ',' << r.trials << ','
            << r.master_seed << ',' << r.wall_time_ms << "\n";
    }
    return out.str();
}

void CsvWriter::write(const std::string& path) const {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("CsvWriter: cannot open " + tmp.string());
        out << to_string();
        if (!out) throw std::runtime_error("CsvWriter: write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::vector<std::map<std::string, std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path);
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == ',') {
                out.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur.push_back(c);
            }
        }
        out.push_back(cur);
        return out;
    };
    std::vector<std::string> cols = split(line);
    std::vector<std::map<std::string, std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> vals = split(line);
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < cols.size() && i < vals.size(); ++i) row[cols[i]] = vals[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace collapse
