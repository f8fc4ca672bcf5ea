#include "posfix/error.hpp"
#include "posfix/trade.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <memory>

namespace posfix::trade {

std::string omega_label(Eigen::Index i, Eigen::Index s) { return fmt::format("OMEGA[{}][{}]", i + 1, s + 1); }
std::string p_label(Eigen::Index i, Eigen::Index s) { return fmt::format("P[{}][{}]", i + 1, s + 1); }
std::string w_label(Eigen::Index i) { return fmt::format("W[{}]", i + 1); }

namespace {

std::vector<std::string> sectoral_labels(Eigen::Index J, Eigen::Index S, bool with_wages) {
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < J; ++i)
        for (Eigen::Index s = 0; s < S; ++s) labels.push_back(omega_label(i, s));
    for (Eigen::Index i = 0; i < J; ++i)
        for (Eigen::Index s = 0; s < S; ++s) labels.push_back(p_label(i, s));
    if (with_wages)
        for (Eigen::Index i = 0; i < J; ++i) labels.push_back(w_label(i));
    return labels;
}

// log((gamma/L)^(-theta gamma / (1 + theta gamma))), with the 0^0 = 1 limit.
double log_labor_factor(double gamma, double L, double theta) {
    if (gamma == 0.0) return 0.0;
    return -(theta * gamma / (1.0 + theta * gamma)) * std::log(gamma / L);
}

double log_sum_exp(const std::vector<double>& v) {
    double top = -std::numeric_limits<double>::infinity();
    for (double x : v) top = std::max(top, x);
    if (!std::isfinite(top)) return top;
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - top);
    return top + std::log(sum);
}

}  // namespace

PositiveSystem build_one_sector(const OneSectorParams& p) {
    p.validate(false);
    const Eigen::Index J = p.J();
    const double theta = p.theta;
    const double log_kappa = std::log(gamma_constant(p.theta, p.sigma));

    MonomialStructure st;
    st.rows.resize(static_cast<std::size_t>(2 * J));
    for (Eigen::Index i = 0; i < J; ++i) {
        for (Eigen::Index j = 0; j < J; ++j) {
            const double gj = p.gamma(j);
            const double denom = 1.0 + theta * gj;
            const double labor = log_labor_factor(gj, p.L(j), theta);
            const Eigen::Index om_j = j, p_j = J + j;

            // Omega_i: sum_j kappa A_i tau_ij^-theta (.) Omega_j^(1/den) P_j^((1-g)/den - 1)
            if (std::isfinite(p.tau(i, j))) {
                MonomialTerm t;
                t.log_coef = log_kappa + std::log(p.A(i)) - theta * std::log(p.tau(i, j)) + labor;
                t.exponents = {{om_j, 1.0 / denom}, {p_j, (1.0 - gj) / denom - 1.0}};
                st.rows[static_cast<std::size_t>(i)].push_back(std::move(t));
            }
            // P_i: sum_j kappa A_j tau_ji^-theta (.) Omega_j^(1/den - 1) P_j^((1-g)/den)
            if (std::isfinite(p.tau(j, i))) {
                MonomialTerm t;
                t.log_coef = log_kappa + std::log(p.A(j)) - theta * std::log(p.tau(j, i)) + labor;
                t.exponents = {{om_j, 1.0 / denom - 1.0}, {p_j, (1.0 - gj) / denom}};
                st.rows[static_cast<std::size_t>(J + i)].push_back(std::move(t));
            }
        }
    }
    // gamma_j = 0 produces zero exponents; keep the support exact.
    for (auto& row : st.rows) {
        for (auto& t : row) std::erase_if(t.exponents, [](const auto& e) { return e.second == 0.0; });
    }
    return PositiveSystem::from_monomials("one-sector", sectoral_labels(J, 1, false), std::move(st));
}

PositiveSystem build_multi_sector(const MultiSectorParams& p) {
    p.validate(false);
    const Eigen::Index J = p.J(), S = p.S();
    const double Theta = p.Theta();
    auto om = [S](Eigen::Index i, Eigen::Index s) { return i * S + s; };
    auto pm = [J, S](Eigen::Index i, Eigen::Index s) { return J * S + i * S + s; };
    auto wi = [J, S](Eigen::Index i) { return 2 * J * S + i; };

    MonomialStructure st;
    st.rows.resize(static_cast<std::size_t>(2 * J * S + J));
    for (Eigen::Index s = 0; s < S; ++s) {
        const double th = p.theta(s);
        const double log_kappa = std::log(gamma_constant(th, p.sigma(s)));
        const Matrix& tau = p.tau[static_cast<std::size_t>(s)];
        for (Eigen::Index i = 0; i < J; ++i) {
            for (Eigen::Index j = 0; j < J; ++j) {
                // Omega_is: sum_j kappa_s A_is tau_ijs^-theta_s alpha_js L_j P_js^-1 W_j^(1/(1+Theta))
                if (std::isfinite(tau(i, j)) && p.alpha(j, s) > 0.0) {
                    MonomialTerm t;
                    t.log_coef = log_kappa + std::log(p.A(i, s)) - th * std::log(tau(i, j)) + std::log(p.alpha(j, s)) +
                                 std::log(p.L(j));
                    t.exponents = {{pm(j, s), -1.0}, {wi(j), 1.0 / (1.0 + Theta)}};
                    st.rows[static_cast<std::size_t>(om(i, s))].push_back(std::move(t));
                }
                // P_is: sum_j kappa_s A_js tau_jis^-theta_s W_j^(-theta_s/(1+Theta))
                if (std::isfinite(tau(j, i))) {
                    MonomialTerm t;
                    t.log_coef = log_kappa + std::log(p.A(j, s)) - th * std::log(tau(j, i));
                    t.exponents = {{wi(j), -th / (1.0 + Theta)}};
                    st.rows[static_cast<std::size_t>(pm(i, s))].push_back(std::move(t));
                }
            }
        }
    }
    // W_i: sum_r L_i^-1 Omega_ir W_i^((Theta - theta_r)/(1+Theta))
    for (Eigen::Index i = 0; i < J; ++i) {
        for (Eigen::Index r = 0; r < S; ++r) {
            MonomialTerm t;
            t.log_coef = -std::log(p.L(i));
            t.exponents = {{om(i, r), 1.0}};
            const double e = (Theta - p.theta(r)) / (1.0 + Theta);
            if (e != 0.0) t.exponents.emplace_back(wi(i), e);
            st.rows[static_cast<std::size_t>(wi(i))].push_back(std::move(t));
        }
    }
    return PositiveSystem::from_monomials("multi-sector", sectoral_labels(J, S, true), std::move(st));
}

namespace {

// Log-space evaluation of the general framework with intermediates. The wage
// coordinate is W_i = w_i^(1+Theta), matching the multi-sector system.
struct GeneralEvaluator {
    GeneralParams p;
    Vector log_kappa;

    Vector operator()(const Vector& z) const {
        const auto& b = p.base;
        const Eigen::Index J = b.J(), S = b.S();
        const double Theta = b.Theta();
        auto om = [S](Eigen::Index i, Eigen::Index s) { return i * S + s; };
        auto pm = [J, S](Eigen::Index i, Eigen::Index s) { return J * S + i * S + s; };
        auto wi = [J, S](Eigen::Index i) { return 2 * J * S + i; };

        Vector lw(J);
        Matrix lc(J, S), lk(J, S), lr(J, S), le(J, S);
        for (Eigen::Index i = 0; i < J; ++i) lw(i) = z(wi(i)) / (1.0 + Theta);
        for (Eigen::Index i = 0; i < J; ++i) {
            for (Eigen::Index s = 0; s < S; ++s) {
                double v = p.gamma_labor(i, s) * lw(i);
                for (Eigen::Index r = 0; r < S; ++r) {
                    const double g = p.gamma_io[static_cast<std::size_t>(s)](i, r);
                    if (g != 0.0) v += g * (-z(pm(i, r)) / b.theta(r));  // ln P_ir = -ln PP_ir / theta_r
                }
                lc(i, s) = v;
                lk(i, s) = -b.theta(s) * v;  // ln(R_is / Omega_is)
                lr(i, s) = z(om(i, s)) + lk(i, s);
            }
        }
        std::vector<double> terms;
        for (Eigen::Index i = 0; i < J; ++i) {
            for (Eigen::Index s = 0; s < S; ++s) {
                terms.clear();
                if (b.alpha(i, s) > 0.0) terms.push_back(std::log(b.alpha(i, s)) + lw(i) + std::log(b.L(i)));
                for (Eigen::Index r = 0; r < S; ++r) {
                    // sector s goods used as inputs by sector r: gamma_isr R_ir
                    const double g = p.gamma_io[static_cast<std::size_t>(r)](i, s);
                    if (g > 0.0) terms.push_back(std::log(g) + lr(i, r));
                }
                le(i, s) = log_sum_exp(terms);
            }
        }

        Vector out(z.size());
        for (Eigen::Index s = 0; s < S; ++s) {
            const Matrix& tau = b.tau[static_cast<std::size_t>(s)];
            const double th = b.theta(s);
            for (Eigen::Index i = 0; i < J; ++i) {
                terms.clear();
                for (Eigen::Index j = 0; j < J; ++j) {
                    if (!std::isfinite(tau(i, j))) continue;
                    terms.push_back(log_kappa(s) + std::log(b.A(i, s)) - th * std::log(tau(i, j)) - z(pm(j, s)) + le(j, s));
                }
                out(om(i, s)) = log_sum_exp(terms);
                terms.clear();
                for (Eigen::Index j = 0; j < J; ++j) {
                    if (!std::isfinite(tau(j, i))) continue;
                    // Omega cancels against R exactly; keep it out so P carries no rounding dependence on Omega.
                    terms.push_back(log_kappa(s) + std::log(b.A(j, s)) - th * std::log(tau(j, i)) + lk(j, s));
                }
                out(pm(i, s)) = log_sum_exp(terms);
            }
        }
        for (Eigen::Index i = 0; i < J; ++i) {
            terms.clear();
            for (Eigen::Index s = 0; s < S; ++s) {
                if (p.gamma_labor(i, s) > 0.0) terms.push_back(std::log(p.gamma_labor(i, s)) + lr(i, s));
            }
            out(wi(i)) = Theta * lw(i) + log_sum_exp(terms) - std::log(b.L(i));
        }
        return out;
    }
};

}  // namespace

PositiveSystem build_general(const GeneralParams& p) {
    p.validate(false);
    const Eigen::Index S = p.S();
    Vector log_kappa(S);
    for (Eigen::Index s = 0; s < S; ++s) log_kappa(s) = std::log(gamma_constant(p.base.theta(s), p.base.sigma(s)));
    auto eval = std::make_shared<const GeneralEvaluator>(GeneralEvaluator{p, log_kappa});

    auto g = [eval](const Vector& z) { return (*eval)(z); };
    auto f = [eval](const Vector& x) { return Vector((*eval)(Vector(x.array().log())).array().exp()); };
    return PositiveSystem("general", sectoral_labels(p.J(), S, true), f).with_log_map(g);
}

PositiveSystem build_system(const TradeModel& m) {
    return std::visit(
        [](const auto& p) -> PositiveSystem {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, OneSectorParams>) return build_one_sector(p);
            else if constexpr (std::is_same_v<T, MultiSectorParams>) return build_multi_sector(p);
            else return build_general(p);
        },
        m);
}

Vector one_sector_scaling_exponent(const OneSectorParams& p) {
    // Scaling every nominal price by c multiplies Omega_i by c^(1+theta) and
    // the price resistance P_i = P_i^-theta by c^-theta.
    const Eigen::Index J = p.J();
    Vector u(2 * J);
    u.head(J).setConstant(1.0);
    u.tail(J).setConstant(-p.theta / (1.0 + p.theta));
    return u;
}

Vector multi_sector_scaling_exponent(const MultiSectorParams& p) {
    const Eigen::Index J = p.J(), S = p.S();
    const double Theta = p.Theta();
    Vector u(2 * J * S + J);
    for (Eigen::Index i = 0; i < J; ++i) {
        for (Eigen::Index s = 0; s < S; ++s) {
            u(i * S + s) = (1.0 + p.theta(s)) / (1.0 + Theta);
            u(J * S + i * S + s) = -p.theta(s) / (1.0 + Theta);
        }
        u(2 * J * S + i) = 1.0;
    }
    return u / u.cwiseAbs().maxCoeff();
}

Vector scaling_exponent(const TradeModel& m) {
    switch (kind_of(m)) {
        case ModelKind::one_sector: return one_sector_scaling_exponent(std::get<OneSectorParams>(m));
        case ModelKind::multi_sector: return multi_sector_scaling_exponent(std::get<MultiSectorParams>(m));
        case ModelKind::general: return multi_sector_scaling_exponent(std::get<GeneralParams>(m).base);
    }
    throw Error("unknown model kind");
}

}  // namespace posfix::trade
