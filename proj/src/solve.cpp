#include "posfix/solve.hpp"

#include "posfix/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace posfix {

NumeraireRule NumeraireRule::parse(const std::string& text) {
    if (text == "first") return {NumeraireKind::first_coordinate, ""};
    if (text == "geomean") return {NumeraireKind::geometric_mean, ""};
    if (text.rfind("geomean:", 0) == 0) return {NumeraireKind::geometric_mean, text.substr(8)};
    if (text.rfind("label:", 0) == 0 && text.size() > 6) return {NumeraireKind::named_coordinate, text.substr(6)};
    throw InvalidInputError("unknown numeraire rule '" + text + "' (expected first, geomean[:prefix] or label:<LABEL>)");
}

std::string NumeraireRule::to_string() const {
    switch (kind) {
        case NumeraireKind::first_coordinate: return "first";
        case NumeraireKind::geometric_mean: return target.empty() ? "geomean" : "geomean:" + target;
        case NumeraireKind::named_coordinate: return "label:" + target;
    }
    return "first";
}

void SolveOptions::validate() const {
    if (!(tol > 0.0)) throw InvalidInputError("solve: tol must be positive");
    if (max_iter < 1) throw InvalidInputError("solve: max_iter must be at least 1");
    if (!(damping > 0.0 && damping <= 1.0)) throw InvalidInputError("solve: damping must lie in (0, 1]");
}

const char* to_string(SolveStatus s) noexcept {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::budget_exhausted: return "budget-exhausted";
        case SolveStatus::evaluation_failed: return "evaluation-failed";
    }
    return "?";
}

double fixed_point_residual(const PositiveSystem& sys, const StateVector& x) {
    const Vector f = sys.evaluate(x.values());
    return ((f - x.values()).array() / x.values().array()).abs().maxCoeff();
}

double up_to_scale_distance(const StateVector& x, const StateVector& y, const Vector& u) {
    if (x.size() != y.size() || u.size() != x.size()) throw InvalidInputError("up_to_scale_distance: dimension mismatch");
    if (u.isZero(0.0)) throw InvalidInputError("up_to_scale_distance: u must be nonzero");
    return quotient_norm(x.log() - y.log(), u, GaugeVector(u.cwiseAbs()));
}

Normalized normalize(const StateVector& x, const Vector& u, const NumeraireRule& rule) {
    if (u.size() != x.size()) throw InvalidInputError("normalize: dimension mismatch");
    const Vector z = x.log();
    double log_c = 0.0;
    switch (rule.kind) {
        case NumeraireKind::first_coordinate:
        case NumeraireKind::named_coordinate: {
            Eigen::Index j = 0;
            if (rule.kind == NumeraireKind::named_coordinate) {
                const auto& labels = x.labels();
                const auto it = std::find(labels.begin(), labels.end(), rule.target);
                if (it == labels.end()) throw InvalidInputError("normalize: unknown coordinate '" + rule.target + "'");
                j = it - labels.begin();
            }
            if (std::abs(u(j)) <= 1e-12) {
                throw ImpossibleNormalizationError("normalize: scaling exponent of " + x.labels()[static_cast<std::size_t>(j)] +
                                                   " is zero; the rule cannot pin the scale");
            }
            log_c = -z(j) / u(j);
            break;
        }
        case NumeraireKind::geometric_mean: {
            double sum_z = 0.0, sum_u = 0.0;
            std::size_t count = 0;
            for (Eigen::Index j = 0; j < x.size(); ++j) {
                if (x.labels()[static_cast<std::size_t>(j)].rfind(rule.target, 0) != 0) continue;
                sum_z += z(j);
                sum_u += u(j);
                ++count;
            }
            if (count == 0) throw InvalidInputError("normalize: block '" + rule.target + "' selects no coordinate");
            if (std::abs(sum_u) <= 1e-12) {
                throw ImpossibleNormalizationError("normalize: scaling exponents of block '" + rule.target +
                                                   "' sum to zero");
            }
            log_c = -sum_z / sum_u;
            break;
        }
    }
    return {StateVector::from_log(z + log_c * u, x.shared_labels()), std::exp(log_c)};
}

SolveResult iterate(const PositiveSystem& sys, const StateVector& x0, const std::optional<Vector>& u,
                    const SolveOptions& opts) {
    opts.validate();
    if (x0.size() != sys.dimension()) throw InvalidInputError("iterate: x0 has the wrong dimension");
    if (u && (u->size() != sys.dimension() || u->isZero(0.0))) {
        throw InvalidInputError("iterate: u must be a nonzero vector of the system's dimension");
    }
    const GaugeVector v = u ? GaugeVector(u->cwiseAbs()) : GaugeVector::ones(sys.dimension());

    SolveResult r{x0, SolveStatus::budget_exhausted, 0, {}, 1.0, 0.0, std::nullopt, ""};
    Vector z = x0.log();
    Vector g;
    bool have_g = false;

    for (int n = 1; n <= opts.max_iter; ++n) {
        try {
            if (!have_g) g = log_transform(z, sys);
        } catch (const ModelEvaluationError& e) {
            r.status = SolveStatus::evaluation_failed;
            r.x_star = StateVector::from_log(z, sys.shared_labels());
            r.message = e.what();
            return r;
        }
        const Vector next = opts.damping == 1.0 ? g : Vector((1.0 - opts.damping) * z + opts.damping * g);
        const Vector step = next - z;
        TraceRow row{n, gauge_norm(step, v), 0.0};
        row.step_quotient = u ? quotient_norm(step, *u, v) : row.step_gauge;
        r.trace.push_back(row);
        r.iterations = n;
        z = next;
        have_g = false;

        if (row.step_quotient <= opts.tol) {
            // Re-verify in the original coordinates before accepting.
            try {
                g = log_transform(z, sys);
            } catch (const ModelEvaluationError& e) {
                r.status = SolveStatus::evaluation_failed;
                r.x_star = StateVector::from_log(z, sys.shared_labels());
                r.message = e.what();
                return r;
            }
            have_g = true;
            const double residual = (g - z).array().expm1().abs().maxCoeff();
            if (residual <= opts.tol) {
                r.status = SolveStatus::converged;
                r.residual = residual;
                break;
            }
        }
    }

    const auto& t = r.trace;
    const std::size_t window = std::min<std::size_t>(10, t.size());
    if (window >= 2) {
        const double first = t[t.size() - window].step_quotient;
        const double last = t.back().step_quotient;
        if (first > 0.0 && last > 0.0) r.decay_rate = std::pow(last / first, 1.0 / static_cast<double>(window - 1));
    }

    const StateVector raw = StateVector::from_log(z, sys.shared_labels());
    if (r.status != SolveStatus::converged) {
        r.x_star = raw;
        try {
            const Vector gz = have_g ? g : log_transform(z, sys);
            r.residual = (gz - z).array().expm1().abs().maxCoeff();
        } catch (const ModelEvaluationError&) {
            r.residual = std::numeric_limits<double>::infinity();
        }
        r.message = fmt::format("no convergence after {} iterations; last quotient step {:.3e}, residual {:.3e}",
                                r.iterations, t.empty() ? 0.0 : t.back().step_quotient, r.residual);
        return r;
    }
    if (u) {
        auto normalized = normalize(raw, *u, opts.numeraire);
        r.x_star = std::move(normalized.x);
        r.normalization_scalar = normalized.c;
    } else {
        r.x_star = raw;
    }
    r.message = fmt::format("converged after {} iterations", r.iterations);
    return r;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
    os << "iteration,step_gauge,step_quotient\n";
    for (const auto& row : trace) {
        os << fmt::format("{},{:.17g},{:.17g}\n", row.iteration, row.step_gauge, row.step_quotient);
    }
}

}  // namespace posfix
