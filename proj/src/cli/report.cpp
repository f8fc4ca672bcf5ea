#include "posfix/cli.hpp"
#include "posfix/error.hpp"

#include <fmt/format.h>

#include <istream>
#include <sstream>

namespace posfix::cli {

namespace {

std::string join(const std::vector<std::string>& xs) {
    std::string s;
    for (std::size_t k = 0; k < xs.size(); ++k) s += (k ? " " : "") + xs[k];
    return s;
}

std::string flatten_detail(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

void add_check(ReportEntries& e, const std::string& name, const CheckOutcome& c) {
    e.emplace_back(name + ".verdict", to_string(c.verdict));
    if (!c.detail.empty()) e.emplace_back(name + ".detail", flatten_detail(c.detail));
    if (c.failing_sample) e.emplace_back(name + ".failing_sample", std::to_string(*c.failing_sample + 1));
    for (std::size_t k = 0; k < c.components.size(); ++k) {
        e.emplace_back(fmt::format("{}.component.{}", name, k + 1), join(c.components[k]));
    }
}

}  // namespace

ReportEntries report_entries(const CertificationReport& r, int digits) {
    const auto num = [digits](double v) { return format_number(v, digits); };
    ReportEntries e;
    e.emplace_back("system", r.system_name);
    e.emplace_back("mode", to_string(r.mode));
    e.emplace_back("banner", r.mode == CertificationMode::exact
                                 ? "proof: verdicts follow from exponent signs and hold for every state"
                                 : "evidence-only: conditions were checked at sampled states, not proven");
    e.emplace_back("diff_method", to_string(r.diff_method));
    e.emplace_back("samples.count", std::to_string(r.samples.size()));
    e.emplace_back("samples.seed", std::to_string(r.seed));
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
        const auto& x = r.samples[k];
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            e.emplace_back(fmt::format("samples.{}.{}", k + 1, r.labels[static_cast<std::size_t>(j)]), num(x.values()(j)));
        }
    }

    add_check(e, "connectedness", r.connectedness);
    add_check(e, "self_interaction", r.self_interaction);
    add_check(e, "scaling", r.scaling);
    if (r.scaling_certificate) {
        const auto& c = *r.scaling_certificate;
        for (Eigen::Index j = 0; j < c.u.size(); ++j) {
            e.emplace_back("scaling.u." + r.labels[static_cast<std::size_t>(j)], num(c.u(j)));
        }
        e.emplace_back("scaling.residual_fixed_eq", num(c.residual_fixed_eq));
        e.emplace_back("scaling.residual_direct", num(c.residual_direct));
    }
    add_check(e, "monotonicity", r.monotonicity);
    if (r.partition) {
        e.emplace_back("monotonicity.zeta_plus", join(r.partition->zeta_plus));
        e.emplace_back("monotonicity.zeta_minus", join(r.partition->zeta_minus));
    }
    if (r.monotonicity_witness) {
        const auto& w = *r.monotonicity_witness;
        e.emplace_back("monotonicity.witness.row", w.row);
        e.emplace_back("monotonicity.witness.column", w.column);
        e.emplace_back("monotonicity.witness.sample", std::to_string(w.sample + 1));
        e.emplace_back("monotonicity.witness.elasticity", num(w.elasticity));
    }
    if (r.spectral) {
        const auto& s = *r.spectral;
        e.emplace_back("spectral.rho.max_deviation", num(s.rho_max_deviation));
        e.emplace_back("spectral.eigvec_residual.max", num(s.eigvec_residual_max));
        if (s.similarity_residual_max) e.emplace_back("spectral.similarity_residual.max", num(*s.similarity_residual_max));
        if (s.unit_gap_min) e.emplace_back("spectral.unit_gap.min", num(*s.unit_gap_min));
        for (std::size_t k = 0; k < s.per_sample.size(); ++k) {
            const auto& p = s.per_sample[k];
            const std::string pre = fmt::format("spectral.sample.{}.", k + 1);
            e.emplace_back(pre + "rho_abs", num(p.rho_abs));
            e.emplace_back(pre + "eigvec_residual", num(p.eigvec_residual));
            if (p.similarity_residual) e.emplace_back(pre + "similarity_residual", num(*p.similarity_residual));
            if (p.unit_gap) e.emplace_back(pre + "unit_gap", num(*p.unit_gap));
            if (p.second_unit_distance) e.emplace_back(pre + "second_unit_distance", num(*p.second_unit_distance));
        }
    }
    e.emplace_back("spectral.abs_rho_one_without_scaling", r.abs_spectral_radius_one_without_scaling ? "true" : "false");
    e.emplace_back("theorem.uniqueness", r.uniqueness_applies() ? "applicable" : "inapplicable");
    e.emplace_back("theorem.convergence", r.convergence_applies() ? "applicable" : "inapplicable");
    return e;
}

std::string serialize_report(const CertificationReport& r, int digits) {
    std::string out;
    for (const auto& [k, v] : report_entries(r, digits)) out += k + ": " + v + "\n";
    return out;
}

ReportEntries parse_report(std::istream& is, const std::string& source) {
    ReportEntries e;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto colon = line.find(": ");
        if (colon == std::string::npos || colon == 0) {
            // "key:" with an empty value is also legal
            if (line.size() > 1 && line.back() == ':') {
                e.emplace_back(line.substr(0, line.size() - 1), "");
                continue;
            }
            throw ParseError(fmt::format("{}:{}: expected 'key: value'", source, line_no));
        }
        e.emplace_back(line.substr(0, colon), line.substr(colon + 2));
    }
    return e;
}

std::string pretty_report(const ReportEntries& entries) {
    std::ostringstream os;
    std::string current;
    for (const auto& [key, value] : entries) {
        const auto dot = key.find('.');
        const std::string head = key.substr(0, dot);
        if (dot == std::string::npos) {
            current.clear();
            os << fmt::format("{:<14} {}\n", key, value);
            continue;
        }
        if (head != current) {
            os << '\n' << head << '\n';
            current = head;
        }
        os << "  " << fmt::format("{:<34} {}\n", key.substr(dot + 1), value);
    }
    return os.str();
}

int certify_exit_code(const CertificationReport& r) noexcept {
    const bool ok = r.connectedness.ok() && r.self_interaction.ok() && r.scaling.ok() && r.monotonicity.ok();
    return ok ? kExitOk : kExitCertify;
}

}  // namespace posfix::cli
