#include "posfix/error.hpp"
#include "posfix/trade.hpp"

#include <fmt/format.h>

#include <functional>

namespace posfix::trade {

ModelSolution solve_model(const TradeModel& m, const SolveOptions& opts, const std::optional<StateVector>& x0) {
    const PositiveSystem sys = build_system(m);
    const Vector u = scaling_exponent(m);
    const StateVector start = x0 ? *x0 : StateVector(Vector::Ones(sys.dimension()), sys.shared_labels());
    ModelSolution out{iterate(sys, start, u, opts), std::nullopt};
    if (out.solve.status == SolveStatus::converged) {
        out.outcomes = recover_outcomes(m, out.solve.x_star, std::max(opts.tol, 1e-8));
    }
    return out;
}

namespace {

// A parameter array addressed by up to three indices.
struct FieldRef {
    std::vector<Eigen::Index> dims;
    std::function<double&(const std::vector<Eigen::Index>&)> at;
};

FieldRef scalar_ref(double& x) {
    return {{}, [&x](const std::vector<Eigen::Index>&) -> double& { return x; }};
}
FieldRef vector_ref(Vector& v) {
    return {{v.size()}, [&v](const std::vector<Eigen::Index>& k) -> double& { return v(k[0]); }};
}
FieldRef matrix_ref(Matrix& m) {
    return {{m.rows(), m.cols()}, [&m](const std::vector<Eigen::Index>& k) -> double& { return m(k[0], k[1]); }};
}
// tau[i][j][s] or gamma_io[i][r][s] stored as one matrix per sector s.
FieldRef stacked_ref(std::vector<Matrix>& ms) {
    const Eigen::Index rows = ms.empty() ? 0 : ms.front().rows();
    const Eigen::Index cols = ms.empty() ? 0 : ms.front().cols();
    return {{rows, cols, static_cast<Eigen::Index>(ms.size())},
            [&ms](const std::vector<Eigen::Index>& k) -> double& { return ms[static_cast<std::size_t>(k[2])](k[0], k[1]); }};
}

FieldRef resolve(TradeModel& m, const std::string& field) {
    if (auto* p = std::get_if<OneSectorParams>(&m)) {
        if (field == "A") return vector_ref(p->A);
        if (field == "tau") return matrix_ref(p->tau);
        if (field == "gamma") return vector_ref(p->gamma);
        if (field == "L") return vector_ref(p->L);
        if (field == "theta") return scalar_ref(p->theta);
        if (field == "sigma") return scalar_ref(p->sigma);
    } else {
        auto* g = std::get_if<GeneralParams>(&m);
        MultiSectorParams& b = g ? g->base : std::get<MultiSectorParams>(m);
        if (field == "A") return matrix_ref(b.A);
        if (field == "tau") return stacked_ref(b.tau);
        if (field == "alpha") return matrix_ref(b.alpha);
        if (field == "L") return vector_ref(b.L);
        if (field == "theta") return vector_ref(b.theta);
        if (field == "sigma") return vector_ref(b.sigma);
        if (g && field == "gamma_labor") return matrix_ref(g->gamma_labor);
        if (g && field == "gamma_io") return stacked_ref(g->gamma_io);
    }
    throw ParameterError(fmt::format("shock: unknown field '{}' for a {} model", field, to_string(kind_of(m))));
}

void apply_edit(TradeModel& m, const ParamEdit& e) {
    FieldRef ref = resolve(m, e.field);
    if (e.index.size() != ref.dims.size()) {
        throw ParameterError(fmt::format("shock: field '{}' takes {} indices, got {}", e.field, ref.dims.size(), e.index.size()));
    }
    for (std::size_t d = 0; d < e.index.size(); ++d) {
        if (e.index[d] && (*e.index[d] < 0 || *e.index[d] >= ref.dims[d])) {
            throw ParameterError(fmt::format("shock: index {} of '{}' is out of range", *e.index[d] + 1, e.field));
        }
    }
    std::vector<Eigen::Index> k(ref.dims.size(), 0);
    std::function<void(std::size_t)> walk = [&](std::size_t d) {
        if (d == k.size()) {
            double& x = ref.at(k);
            x = e.op == ParamEdit::Op::set ? e.value : x * e.value;
            return;
        }
        if (e.index[d]) {
            k[d] = *e.index[d];
            walk(d + 1);
        } else {
            for (k[d] = 0; k[d] < ref.dims[d]; ++k[d]) walk(d + 1);
        }
    };
    walk(0);
}

}  // namespace

TradeModel apply_shock(const TradeModel& base, const Shock& shock) {
    TradeModel out = base;
    for (const auto& e : shock.edits) apply_edit(out, e);
    validate(out);
    return out;
}

CounterfactualResult counterfactual(const TradeModel& base, const Shock& shock, const SolveOptions& opts) {
    const TradeModel shocked = apply_shock(base, shock);
    CounterfactualResult r{solve_model(base, opts), solve_model(shocked, opts), {}};
    if (!r.base.outcomes || !r.shocked.outcomes) return r;
    const auto a = r.base.outcomes->flatten();
    const auto b = r.shocked.outcomes->flatten();
    for (std::size_t k = 0; k < a.size(); ++k) {
        r.changes.push_back({a[k].first, a[k].second, b[k].second, relative_change(a[k].second, b[k].second)});
    }
    return r;
}

}  // namespace posfix::trade
