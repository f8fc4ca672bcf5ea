#pragma once

// Built-in quantitative trade models (Eaton-Kortum type with Frechet
// productivities) written as positive fixed-point systems in multilateral
// resistance terms.
//
// State layout, fixed for every model:
//   OMEGA[i][s]  all market-access terms, country-major, sector-minor
//   P[i][s]      all price multilateral resistances P_is^(-theta_s)
//   W[i]         wage coordinates, W_i = w_i^(1 + Theta)   (multi-sector, general)
// Indices in labels are 1-based.

#include "posfix/certify.hpp"
#include "posfix/solve.hpp"
#include "posfix/system.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace posfix::trade {

/// Gamma((theta + 1 - sigma) / theta)^(-theta / (1 - sigma)).
double gamma_constant(double theta, double sigma);

struct OneSectorParams {
    std::vector<std::string> countries;
    Vector A;      // productivities
    Matrix tau;    // tau(i, j): cost of shipping from i to j; +inf allowed off-diagonal
    Vector gamma;  // labor cost shares in [0, 1]
    Vector L;      // labor endowments
    double theta = 4.0;
    double sigma = 2.0;

    Eigen::Index J() const noexcept { return A.size(); }
    /// Throws ParameterError naming the offending field.
    void validate(bool require_connected = true) const;
};

struct MultiSectorParams {
    std::vector<std::string> countries;
    std::vector<std::string> sectors;
    Matrix A;                  // J x S
    std::vector<Matrix> tau;   // per sector, J x J
    Matrix alpha;              // J x S expenditure shares, rows sum to 1
    Vector L;                  // J
    Vector theta;              // S
    Vector sigma;              // S

    Eigen::Index J() const noexcept { return A.rows(); }
    Eigen::Index S() const noexcept { return A.cols(); }
    double Theta() const { return theta.sum(); }
    void validate(bool require_connected = true) const;
};

struct GeneralParams {
    MultiSectorParams base;
    Matrix gamma_labor;            // J x S, gamma_is
    std::vector<Matrix> gamma_io;  // per producing sector s: (i, r) = gamma_irs, share of sector r inputs

    Eigen::Index J() const noexcept { return base.J(); }
    Eigen::Index S() const noexcept { return base.S(); }
    void validate(bool require_connected = true) const;
};

using TradeModel = std::variant<OneSectorParams, MultiSectorParams, GeneralParams>;

enum class ModelKind { one_sector, multi_sector, general };
ModelKind kind_of(const TradeModel& m) noexcept;
const char* to_string(ModelKind k) noexcept;
void validate(const TradeModel& m, bool require_connected = true);

std::string omega_label(Eigen::Index i, Eigen::Index s);
std::string p_label(Eigen::Index i, Eigen::Index s);
std::string w_label(Eigen::Index i);

/// Countries grouped into strongly connected blocs of the finite-cost trade
/// graph (union over sectors).
std::vector<std::vector<std::string>> trade_blocs(const std::vector<std::string>& countries,
                                                  const std::vector<Matrix>& tau);

// Builders validate everything except trade-graph connectivity, which is left
// to certification so that disconnected economies can still be diagnosed.
PositiveSystem build_one_sector(const OneSectorParams& p);
PositiveSystem build_multi_sector(const MultiSectorParams& p);
/// Sampled certification only: no monomial structure or analytic elasticity.
PositiveSystem build_general(const GeneralParams& p);
PositiveSystem build_system(const TradeModel& m);

/// Closed-form scaling exponents, normalized to max |u_j| = 1 with the
/// market-access block positive.
Vector one_sector_scaling_exponent(const OneSectorParams& p);
Vector multi_sector_scaling_exponent(const MultiSectorParams& p);
Vector scaling_exponent(const TradeModel& m);

struct Outcomes {
    Vector w;               // wages
    Matrix c;               // unit input bundle costs, J x S
    Matrix R;               // revenues
    Matrix E;               // expenditures
    Matrix P;               // price indices
    std::vector<Matrix> pi; // per sector: (i, j) share of j's spending sourced from i
    Vector U;               // welfare

    Eigen::Index J() const noexcept { return w.size(); }
    Eigen::Index S() const noexcept { return R.cols(); }

    /// Flattened (key, value) pairs: w[i], c[i][s], R[i][s], E[i][s], P[i][s], pi[i][j][s], U[i].
    std::vector<std::pair<std::string, double>> flatten() const;
};

/// Throws StaleStateError if the fixed-point residual at x_star exceeds tol.
Outcomes recover_outcomes(const TradeModel& m, const StateVector& x_star, double tol = 1e-8);

/// Labor cost shares gamma_is as a J x S matrix.
Matrix labor_shares(const TradeModel& m);

struct ModelSolution {
    SolveResult solve;
    std::optional<Outcomes> outcomes;  // present when converged
};

/// Iterates from x0 (all ones when absent) using the closed-form scaling
/// exponent as gauge and scale direction.
ModelSolution solve_model(const TradeModel& m, const SolveOptions& opts = {},
                          const std::optional<StateVector>& x0 = std::nullopt);

struct ParamEdit {
    enum class Op { set, scale };
    std::string field;
    std::vector<std::optional<Eigen::Index>> index;  // 0-based; nullopt is a wildcard
    Op op = Op::set;
    double value = 0.0;
};

struct Shock {
    std::vector<ParamEdit> edits;
};

/// Applies the edits and re-validates (including trade-graph connectivity).
TradeModel apply_shock(const TradeModel& base, const Shock& shock);

struct OutcomeChange {
    std::string key;
    double base = 0.0;
    double shocked = 0.0;
    double relative_change = 0.0;
};

struct CounterfactualResult {
    ModelSolution base;
    ModelSolution shocked;
    std::vector<OutcomeChange> changes;  // empty unless both solves converged
};

CounterfactualResult counterfactual(const TradeModel& base, const Shock& shock, const SolveOptions& opts = {});

/// (b - a) / a, with 0 when both vanish.
double relative_change(double a, double b) noexcept;

}  // namespace posfix::trade
