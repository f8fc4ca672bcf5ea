#pragma once

// Fixed-point iteration in log coordinates with stopping on the quotient norm
// modulo the scaling direction, plus numeraire normalization.

#include "posfix/system.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace posfix {

enum class NumeraireKind { first_coordinate, geometric_mean, named_coordinate };

struct NumeraireRule {
    NumeraireKind kind = NumeraireKind::first_coordinate;
    /// Label for named_coordinate; label prefix of the block for
    /// geometric_mean (empty selects every coordinate).
    std::string target;

    /// Accepts "first", "geomean", "geomean:<prefix>", "label:<LABEL>".
    static NumeraireRule parse(const std::string& text);
    std::string to_string() const;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 10'000;
    NumeraireRule numeraire{};
    double damping = 1.0;

    void validate() const;
};

enum class SolveStatus { converged, budget_exhausted, evaluation_failed };

const char* to_string(SolveStatus s) noexcept;

struct TraceRow {
    int iteration = 0;
    double step_gauge = 0.0;
    double step_quotient = 0.0;
};

struct SolveResult {
    StateVector x_star;
    SolveStatus status = SolveStatus::budget_exhausted;
    int iterations = 0;
    std::vector<TraceRow> trace;
    double normalization_scalar = 1.0;
    double residual = 0.0;                // max_j |F_j - x_j| / x_j at x_star
    std::optional<double> decay_rate;     // empirical geometric rate of the quotient steps
    std::string message;
};

/// Iterates z <- (1 - damping) z + damping G(z) from log x0. With u given the
/// gauge is |u| and convergence is judged modulo span(u); the converged state
/// is rescaled by c^u to satisfy the numeraire rule.
SolveResult iterate(const PositiveSystem& sys, const StateVector& x0, const std::optional<Vector>& u,
                    const SolveOptions& opts = {});

/// max_j |F(x)_j - x_j| / x_j
double fixed_point_residual(const PositiveSystem& sys, const StateVector& x);

/// quotient_norm(log x - log y, u, |u|); zero iff y = c^u x for some c > 0.
double up_to_scale_distance(const StateVector& x, const StateVector& y, const Vector& u);

struct Normalized {
    StateVector x;
    double c = 1.0;
};

/// Returns x' = c^u x satisfying the rule exactly.
Normalized normalize(const StateVector& x, const Vector& u, const NumeraireRule& rule);

/// "iteration,step_gauge,step_quotient" table.
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

}  // namespace posfix
