#pragma once

// Result records and text/CSV artifacts shared by the command line runner
// and the acceptance suite. Everything written here is deterministic for a
// fixed input: no timestamps, no locale, 17-significant-digit decimals that
// round-trip to the same bits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "aflab/errors.hpp"

namespace aflab {

/// Shortest decimal that still round-trips an IEEE double.
inline std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct CheckResult {
    std::string name;
    bool pass = false;
    double worst = 0.0; // signed worst defect; negative values are margin
    std::string detail; // one free-form line, may be empty
};

struct SuiteReport {
    std::string name;
    std::vector<CheckResult> checks;

    void add(std::string check, bool pass, double worst, std::string detail = "") {
        checks.push_back(CheckResult{std::move(check), pass, worst, std::move(detail)});
    }

    std::size_t failed() const {
        std::size_t n = 0;
        for (const auto& c : checks)
            if (!c.pass)
                ++n;
        return n;
    }

    bool pass() const { return failed() == 0; }
};

inline std::string render_check(const CheckResult& c) {
    std::string line = c.pass ? "PASS " : "FAIL ";
    line += c.name;
    line += " worst=";
    line += g17(c.worst);
    if (!c.detail.empty()) {
        line += "  ";
        line += c.detail;
    }
    return line;
}

/// Writes <dir>/<name>-result.txt with one line per check plus a tail line
/// "<PASS|FAIL> <name> <failed>/<total>".
inline void write_suite_file(const SuiteReport& rep, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / (rep.name + "-result.txt"));
    if (!out)
        throw IoError("cannot write suite report for " + rep.name);
    for (const auto& c : rep.checks)
        out << render_check(c) << '\n';
    out << (rep.pass() ? "PASS " : "FAIL ") << rep.name << ' ' << rep.failed() << '/'
        << rep.checks.size() << '\n';
}

/// Minimal CSV emitter. Columns are fixed at construction; rows are doubles
/// rendered with g17. The header row and column count are part of the file
/// contract, so mismatched rows throw instead of writing a ragged file.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
        : cols_(columns.size()), out_(path) {
        if (!out_)
            throw IoError("cannot open csv file " + path.string());
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << (i ? "," : "") << columns[i];
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        if (values.size() != cols_)
            throw IoError("csv row width mismatch");
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << g17(values[i]);
        out_ << '\n';
    }

  private:
    std::size_t cols_;
    std::ofstream out_;
};

} // namespace aflab
