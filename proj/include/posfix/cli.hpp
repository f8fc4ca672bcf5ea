#pragma once

// Command-line front end: INI configuration, CSV parameter tables, report
// serialization and the four commands (certify, solve, counterfactual, report).

#include "posfix/certify.hpp"
#include "posfix/solve.hpp"
#include "posfix/trade.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace posfix::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
    kExitOk = 0,
    kExitInput = 2,     // I/O, parse or parameter errors
    kExitCertify = 3,   // a structural condition fails
    kExitSolve = 4,     // budget exhausted or evaluation failure
};

struct RunConfig {
    fs::path path;       // the configuration file itself
    trade::ModelKind model = trade::ModelKind::one_sector;
    /// Parameter file paths keyed by field (A, tau, gamma, L, alpha, gamma_labor, gamma_io),
    /// resolved relative to the configuration file.
    std::map<std::string, fs::path> files;
    std::vector<double> theta;  // one entry for one-sector
    std::vector<double> sigma;
    SolveOptions solve;
    int print_digits = 17;
    CertifyOptions certify;
    fs::path out_dir = "out";
};

/// Throws ParseError (line-numbered) or InvalidInputError for bad option values.
RunConfig load_config(const fs::path& path);

/// Reads and validates every parameter file. Connectivity of the trade graph
/// is enforced only when require_connected is set.
trade::TradeModel load_parameters(const RunConfig& cfg, bool require_connected = true);

// --- tables ---------------------------------------------------------------

/// CSV with one header row; the first column holds row labels.
struct Table {
    std::string corner;
    std::vector<std::string> columns;
    std::vector<std::string> rows;
    Matrix values;
};

/// 17 significant digits (or fewer when requested); infinity as "inf".
std::string format_number(double v, int digits = 17);
Table read_table(const fs::path& path);
Table parse_table(std::istream& is, const std::string& source);
void write_table(std::ostream& os, const Table& t, int digits = 17);

/// Writes config.ini plus parameter tables into dir; load_parameters on the
/// result reproduces the model exactly.
fs::path write_parameters(const trade::TradeModel& m, const fs::path& dir, const SolveOptions& solve = {},
                          const CertifyOptions& certify = {});

// --- shocks ---------------------------------------------------------------

/// Lines such as "A[*] *= 2", "tau[1][2][1] = 1.5", "theta = 5"; indices are
/// 1-based and "*" is a wildcard. '#' starts a comment.
trade::Shock parse_shock(std::istream& is, const std::string& source);
trade::Shock read_shock(const fs::path& path);

// --- reports --------------------------------------------------------------

using ReportEntries = std::vector<std::pair<std::string, std::string>>;

ReportEntries report_entries(const CertificationReport& r, int digits = 17);
std::string serialize_report(const CertificationReport& r, int digits = 17);
/// Parses "key: value" lines; throws ParseError on malformed lines.
ReportEntries parse_report(std::istream& is, const std::string& source);
/// Human-readable grouping by the leading key segment.
std::string pretty_report(const ReportEntries& entries);

/// 0 when all four conditions hold (pass or evidence-only), 3 otherwise.
int certify_exit_code(const CertificationReport& r) noexcept;

// --- commands -------------------------------------------------------------

struct GlobalOptions {
    fs::path config;
    std::optional<fs::path> out;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    unsigned threads = 1;
    fs::path shock;   // counterfactual
    fs::path report;  // report
};

int run_certify(const GlobalOptions& g, std::ostream& out, std::ostream& err);
int run_solve(const GlobalOptions& g, std::ostream& out, std::ostream& err);
int run_counterfactual(const GlobalOptions& g, std::ostream& out, std::ostream& err);
int run_report(const GlobalOptions& g, std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace posfix::cli
