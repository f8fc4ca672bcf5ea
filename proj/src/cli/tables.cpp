#include "posfix/cli.hpp"
#include "posfix/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <regex>
#include <sstream>

namespace posfix::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> to_number(const std::string& tok) {
    if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
    if (tok == "-inf") return -std::numeric_limits<double>::infinity();
    if (tok.empty()) return std::nullopt;
    const char* first = tok.data();
    if (*first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

std::string format_number(double v, int digits) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // no "-0"
    return fmt::format("{:.{}g}", v, digits);
}

Table parse_table(std::istream& is, const std::string& source) {
    Table t;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv(line);
        if (!have_header) {
            if (cells.size() < 2) throw ParseError(fmt::format("{}:{}: header needs a corner cell and at least one column label", source, line_no));
            t.corner = cells[0];
            t.columns.assign(cells.begin() + 1, cells.end());
            for (std::size_t c = 0; c < t.columns.size(); ++c) {
                if (t.columns[c].empty()) throw ParseError(fmt::format("{}:{}: column {} has an empty label", source, line_no, c + 2));
            }
            have_header = true;
            continue;
        }
        if (cells.size() != t.columns.size() + 1) {
            throw ParseError(fmt::format("{}:{}: expected {} cells, found {}", source, line_no, t.columns.size() + 1, cells.size()));
        }
        if (cells[0].empty()) throw ParseError(fmt::format("{}:{}: column 1: empty row label", source, line_no));
        t.rows.push_back(cells[0]);
        std::vector<double> vals;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            auto v = to_number(cells[c]);
            if (!v) throw ParseError(fmt::format("{}:{}: column {}: invalid number '{}'", source, line_no, c + 1, cells[c]));
            vals.push_back(*v);
        }
        rows.push_back(std::move(vals));
    }
    if (!have_header) throw ParseError(fmt::format("{}: empty table", source));
    if (rows.empty()) throw ParseError(fmt::format("{}: no data rows", source));
    t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.columns.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return t;
}

Table read_table(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("{}: cannot open file", path.string()));
    return parse_table(in, path.string());
}

void write_table(std::ostream& os, const Table& t, int digits) {
    os << t.corner;
    for (const auto& c : t.columns) os << ',' << c;
    os << '\n';
    for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
        os << t.rows[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < t.values.cols(); ++c) os << ',' << format_number(t.values(r, c), digits);
        os << '\n';
    }
}

trade::Shock parse_shock(std::istream& is, const std::string& source) {
    static const std::regex line_re(R"(^\s*([A-Za-z_][A-Za-z_0-9]*)((?:\s*\[[^\]]*\])*)\s*(\*=|=)\s*(\S+)\s*$)");
    static const std::regex index_re(R"(\[\s*([^\]]*?)\s*\])");
    trade::Shock shock;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        std::smatch m;
        if (!std::regex_match(line, m, line_re)) {
            throw ParseError(fmt::format("{}:{}: expected '<field>[i]... = <value>' or '*= <factor>'", source, line_no));
        }
        trade::ParamEdit e;
        e.field = m[1];
        const std::string idx = m[2];
        for (auto it = std::sregex_iterator(idx.begin(), idx.end(), index_re); it != std::sregex_iterator(); ++it) {
            const std::string tok = (*it)[1];
            if (tok == "*") {
                e.index.push_back(std::nullopt);
                continue;
            }
            Eigen::Index k = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), k);
            if (ec != std::errc() || ptr != tok.data() + tok.size() || k < 1) {
                throw ParseError(fmt::format("{}:{}: index '{}' must be a positive integer or '*'", source, line_no, tok));
            }
            e.index.push_back(k - 1);
        }
        e.op = m[3] == "*=" ? trade::ParamEdit::Op::scale : trade::ParamEdit::Op::set;
        auto v = to_number(m[4]);
        if (!v) throw ParseError(fmt::format("{}:{}: invalid number '{}'", source, line_no, std::string(m[4])));
        e.value = *v;
        shock.edits.push_back(std::move(e));
    }
    return shock;
}

trade::Shock read_shock(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("{}: cannot open file", path.string()));
    return parse_shock(in, path.string());
}

}  // namespace posfix::cli
