#include "posfix/cli.hpp"
#include "posfix/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace posfix::cli {

namespace {

namespace pt = boost::property_tree;

using Section = std::map<std::string, std::string>;

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"model", {"type", "theta", "sigma", "theta.s", "sigma.s", "A", "tau", "gamma", "L", "alpha", "gamma_labor", "gamma_io"}},
    {"solve", {"tol", "max_iter", "numeraire", "damping", "digits"}},
    {"certify", {"samples", "seed"}},
};

std::string where(const RunConfig& cfg, const std::string& section, const std::string& key) {
    return fmt::format("{}: [{}] {}", cfg.path.string(), section, key);
}

double as_double(const RunConfig& cfg, const Section& s, const std::string& sec, const std::string& key) {
    const std::string& text = s.at(key);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw InvalidInputError(fmt::format("{}: invalid number '{}'", where(cfg, sec, key), text));
    }
    return v;
}

template <class Int>
Int as_int(const RunConfig& cfg, const Section& s, const std::string& sec, const std::string& key) {
    const std::string& text = s.at(key);
    Int v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw InvalidInputError(fmt::format("{}: invalid integer '{}'", where(cfg, sec, key), text));
    }
    return v;
}

std::vector<double> as_list(const RunConfig& cfg, const Section& s, const std::string& sec, const std::string& key) {
    std::vector<double> out;
    const std::string& text = s.at(key);
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        std::string tok = text.substr(start, end - start);
        tok.erase(0, tok.find_first_not_of(" \t"));
        tok.erase(tok.find_last_not_of(" \t") + 1);
        Section tmp{{key, tok}};
        out.push_back(as_double(cfg, tmp, sec, key));
        start = end + 1;
    }
    return out;
}

void require_key(const RunConfig& cfg, const Section& s, const std::string& sec, const std::string& key) {
    if (!s.count(key)) throw InvalidInputError(fmt::format("{}: missing required key", where(cfg, sec, key)));
}

// Prefixes a parameter error with the file holding the named field.
[[noreturn]] void rethrow_with_file(const RunConfig& cfg, const ParameterError& e) {
    std::string msg = e.what();
    const auto stop = msg.find_first_of("[ :");
    std::string field = msg.substr(0, stop);
    std::string sector;
    if (auto dot = field.find(".s"); dot != std::string::npos) {
        sector = field.substr(dot);
        field.erase(dot);
    }
    if (auto it = cfg.files.find(field); it != cfg.files.end()) {
        throw ParameterError(fmt::format("{}{}: {}", it->second.string(), sector, msg));
    }
    throw ParameterError(fmt::format("{}: {}", cfg.path.string(), msg));
}

void expect_labels(const Table& t, const std::vector<std::string>& want, const std::vector<std::string>& got,
                   const fs::path& file, const char* what) {
    if (got.size() != want.size()) {
        throw ParseError(fmt::format("{}: expected {} {}, found {}", file.string(), want.size(), what, got.size()));
    }
    for (std::size_t k = 0; k < want.size(); ++k) {
        if (got[k] != want[k]) {
            throw ParseError(fmt::format("{}: {} {} is '{}', expected '{}'", file.string(), what, k + 1, got[k], want[k]));
        }
    }
    (void)t;
}

Vector read_vector(const fs::path& file, const std::vector<std::string>& countries) {
    Table t = read_table(file);
    if (t.columns.size() != 1) throw ParseError(fmt::format("{}: expected exactly one value column", file.string()));
    expect_labels(t, countries, t.rows, file, "row labels");
    return t.values.col(0);
}

Matrix read_matrix(const fs::path& file, const std::vector<std::string>& rows, const std::vector<std::string>& cols) {
    Table t = read_table(file);
    expect_labels(t, rows, t.rows, file, "row labels");
    expect_labels(t, cols, t.columns, file, "column labels");
    return t.values;
}

fs::path sector_file(const fs::path& base, Eigen::Index s) {
    return fs::path(base.string() + ".s" + std::to_string(s + 1));
}

}  // namespace

RunConfig load_config(const fs::path& path) {
    RunConfig cfg;
    cfg.path = path;
    pt::ptree tree;
    try {
        std::ifstream in(path);
        if (!in) throw ParseError(fmt::format("{}: cannot open file", path.string()));
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(fmt::format("{}:{}: {}", path.string(), e.line(), e.message()));
    }
    std::map<std::string, Section> sections;
    for (const auto& [name, node] : tree) {
        auto known = kKnownKeys.find(name);
        if (known == kKnownKeys.end() || !node.data().empty()) {
            throw ParseError(fmt::format("{}: unknown section or top-level key '{}'", path.string(), name));
        }
        for (const auto& [key, value] : node) {
            if (!known->second.count(key)) {
                throw ParseError(fmt::format("{}: [{}] unknown key '{}'", path.string(), name, key));
            }
            sections[name][key] = value.data();
        }
    }
    const Section& model = sections["model"];
    const Section& solve = sections["solve"];
    const Section& cert = sections["certify"];

    require_key(cfg, model, "model", "type");
    const std::string& type = model.at("type");
    if (type == "one-sector") cfg.model = trade::ModelKind::one_sector;
    else if (type == "multi-sector") cfg.model = trade::ModelKind::multi_sector;
    else if (type == "general") cfg.model = trade::ModelKind::general;
    else throw InvalidInputError(fmt::format("{}: unknown model type '{}'", where(cfg, "model", "type"), type));

    const fs::path dir = path.parent_path();
    std::vector<std::string> needed;
    if (cfg.model == trade::ModelKind::one_sector) {
        needed = {"A", "tau", "gamma", "L"};
        require_key(cfg, model, "model", "theta");
        require_key(cfg, model, "model", "sigma");
        cfg.theta = {as_double(cfg, model, "model", "theta")};
        cfg.sigma = {as_double(cfg, model, "model", "sigma")};
    } else {
        needed = {"A", "tau", "alpha", "L"};
        if (cfg.model == trade::ModelKind::general) {
            needed.push_back("gamma_labor");
            needed.push_back("gamma_io");
        }
        require_key(cfg, model, "model", "theta.s");
        require_key(cfg, model, "model", "sigma.s");
        cfg.theta = as_list(cfg, model, "model", "theta.s");
        cfg.sigma = as_list(cfg, model, "model", "sigma.s");
    }
    for (const auto& key : needed) {
        require_key(cfg, model, "model", key);
        cfg.files[key] = dir / model.at(key);
    }

    if (solve.count("tol")) cfg.solve.tol = as_double(cfg, solve, "solve", "tol");
    if (solve.count("max_iter")) cfg.solve.max_iter = as_int<int>(cfg, solve, "solve", "max_iter");
    if (solve.count("damping")) cfg.solve.damping = as_double(cfg, solve, "solve", "damping");
    if (solve.count("numeraire")) {
        try {
            cfg.solve.numeraire = NumeraireRule::parse(solve.at("numeraire"));
        } catch (const Error& e) {
            throw InvalidInputError(fmt::format("{}: {}", where(cfg, "solve", "numeraire"), e.what()));
        }
    }
    if (solve.count("digits")) {
        cfg.print_digits = as_int<int>(cfg, solve, "solve", "digits");
        if (cfg.print_digits < 1 || cfg.print_digits > 17) {
            throw InvalidInputError(fmt::format("{}: must lie in [1, 17]", where(cfg, "solve", "digits")));
        }
    }
    try {
        cfg.solve.validate();
    } catch (const InvalidInputError& e) {
        throw InvalidInputError(fmt::format("{}: {}", path.string(), e.what()));
    }
    if (cert.count("samples")) {
        const long n = as_int<long>(cfg, cert, "certify", "samples");
        if (n < 1) throw InvalidInputError(fmt::format("{}: must be at least 1", where(cfg, "certify", "samples")));
        cfg.certify.samples = static_cast<std::size_t>(n);
    }
    if (cert.count("seed")) cfg.certify.seed = as_int<std::uint64_t>(cfg, cert, "certify", "seed");
    cfg.out_dir = dir / "out";
    return cfg;
}

trade::TradeModel load_parameters(const RunConfig& cfg, bool require_connected) {
    const auto file = [&](const char* key) { return cfg.files.at(key); };
    trade::TradeModel model;
    // Country names come from the labor endowment table, sector names from A.
    Table l_table = read_table(file("L"));
    const std::vector<std::string> countries = l_table.rows;
    if (cfg.model == trade::ModelKind::one_sector) {
        trade::OneSectorParams p;
        p.countries = countries;
        p.L = read_vector(file("L"), countries);
        p.A = read_vector(file("A"), countries);
        p.gamma = read_vector(file("gamma"), countries);
        p.tau = read_matrix(file("tau"), countries, countries);
        p.theta = cfg.theta.at(0);
        p.sigma = cfg.sigma.at(0);
        model = std::move(p);
    } else {
        trade::MultiSectorParams p;
        p.countries = countries;
        Table a_table = read_table(file("A"));
        p.sectors = a_table.columns;
        expect_labels(a_table, countries, a_table.rows, file("A"), "row labels");
        p.A = a_table.values;
        const auto S = static_cast<Eigen::Index>(p.sectors.size());
        p.L = read_vector(file("L"), countries);
        p.alpha = read_matrix(file("alpha"), countries, p.sectors);
        for (Eigen::Index s = 0; s < S; ++s) p.tau.push_back(read_matrix(sector_file(file("tau"), s), countries, countries));
        if (static_cast<Eigen::Index>(cfg.theta.size()) != S || static_cast<Eigen::Index>(cfg.sigma.size()) != S) {
            throw InvalidInputError(fmt::format("{}: [model] theta.s and sigma.s need {} values, one per sector of {}",
                                                cfg.path.string(), S, file("A").string()));
        }
        p.theta = Eigen::Map<const Vector>(cfg.theta.data(), S);
        p.sigma = Eigen::Map<const Vector>(cfg.sigma.data(), S);
        if (cfg.model == trade::ModelKind::general) {
            trade::GeneralParams g;
            g.gamma_labor = read_matrix(file("gamma_labor"), countries, p.sectors);
            for (Eigen::Index s = 0; s < S; ++s) {
                g.gamma_io.push_back(read_matrix(sector_file(file("gamma_io"), s), countries, p.sectors));
            }
            g.base = std::move(p);
            model = std::move(g);
        } else {
            model = std::move(p);
        }
    }
    try {
        trade::validate(model, require_connected);
    } catch (const ParameterError& e) {
        rethrow_with_file(cfg, e);
    }
    return model;
}

namespace {

void write_file(const fs::path& path, const Table& t) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError(fmt::format("{}: cannot write file", path.string()));
    write_table(out, t);
}

Table column_table(const std::vector<std::string>& rows, const char* name, const Vector& v) {
    return {"country", {name}, rows, v};
}

std::string join(const Vector& v) {
    std::string s;
    for (Eigen::Index k = 0; k < v.size(); ++k) s += (k ? ", " : "") + format_number(v(k));
    return s;
}

}  // namespace

fs::path write_parameters(const trade::TradeModel& m, const fs::path& dir, const SolveOptions& solve,
                          const CertifyOptions& certify) {
    fs::create_directories(dir);
    std::string model_section;
    if (const auto* p = std::get_if<trade::OneSectorParams>(&m)) {
        write_file(dir / "A.csv", column_table(p->countries, "A", p->A));
        write_file(dir / "gamma.csv", column_table(p->countries, "gamma", p->gamma));
        write_file(dir / "L.csv", column_table(p->countries, "L", p->L));
        write_file(dir / "tau.csv", {"exporter", p->countries, p->countries, p->tau});
        model_section = fmt::format("type = one-sector\ntheta = {}\nsigma = {}\nA = A.csv\ntau = tau.csv\ngamma = gamma.csv\nL = L.csv\n",
                                    format_number(p->theta), format_number(p->sigma));
    } else {
        const auto* g = std::get_if<trade::GeneralParams>(&m);
        const trade::MultiSectorParams& b = g ? g->base : std::get<trade::MultiSectorParams>(m);
        write_file(dir / "A.csv", {"country", b.sectors, b.countries, b.A});
        write_file(dir / "alpha.csv", {"country", b.sectors, b.countries, b.alpha});
        write_file(dir / "L.csv", column_table(b.countries, "L", b.L));
        for (std::size_t s = 0; s < b.tau.size(); ++s) {
            write_file(sector_file(dir / "tau.csv", static_cast<Eigen::Index>(s)), {"exporter", b.countries, b.countries, b.tau[s]});
        }
        model_section = fmt::format("type = {}\ntheta.s = {}\nsigma.s = {}\nA = A.csv\ntau = tau.csv\nalpha = alpha.csv\nL = L.csv\n",
                                    g ? "general" : "multi-sector", join(b.theta), join(b.sigma));
        if (g) {
            write_file(dir / "gamma_labor.csv", {"country", b.sectors, b.countries, g->gamma_labor});
            for (std::size_t s = 0; s < g->gamma_io.size(); ++s) {
                write_file(sector_file(dir / "gamma_io.csv", static_cast<Eigen::Index>(s)),
                           {"country", b.sectors, b.countries, g->gamma_io[s]});
            }
            model_section += "gamma_labor = gamma_labor.csv\ngamma_io = gamma_io.csv\n";
        }
    }
    const fs::path cfg_path = dir / "config.ini";
    std::ofstream out(cfg_path);
    if (!out) throw InvalidInputError(fmt::format("{}: cannot write file", cfg_path.string()));
    out << "[model]\n" << model_section << "\n[solve]\n"
        << "tol = " << format_number(solve.tol) << "\n"
        << "max_iter = " << solve.max_iter << "\n"
        << "numeraire = " << solve.numeraire.to_string() << "\n"
        << "damping = " << format_number(solve.damping) << "\n"
        << "\n[certify]\n"
        << "samples = " << certify.samples << "\n"
        << "seed = " << certify.seed << "\n";
    return cfg_path;
}

}  // namespace posfix::cli
