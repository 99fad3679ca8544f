#include "nnreach/embedding.hpp"

#include "nnreach/errors.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace nnreach {

std::string_view to_string(Strategy s)
{
    switch (s) {
    case Strategy::global: return "global";
    case Strategy::hybrid: return "hybrid";
    case Strategy::local: return "local";
    case Strategy::frozen_hybrid: return "frozen-hybrid";
    case Strategy::linear: return "linear";
    case Strategy::linear_hybrid: return "linear-hybrid";
    }
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name)
{
    if (name == "global" || name == "G") return Strategy::global;
    if (name == "hybrid" || name == "H") return Strategy::hybrid;
    if (name == "local" || name == "L") return Strategy::local;
    if (name == "frozen-hybrid" || name == "Bs") return Strategy::frozen_hybrid;
    if (name == "linear" || name == "Lin") return Strategy::linear;
    if (name == "linear-hybrid" || name == "LinH") return Strategy::linear_hybrid;
    return std::nullopt;
}

std::size_t crown_calls_per_evaluation(Strategy s, Eigen::Index state_dim)
{
    switch (s) {
    case Strategy::local: return static_cast<std::size_t>(2 * state_dim);
    case Strategy::frozen_hybrid: return 0;
    default: return 1;
    }
}

VectorXd ClosedLoop::field(const VectorXd& x, const VectorXd& w) const
{
    return system->field(x, forward(*network, x), w);
}

EmbeddingState<double> ordered_state(const EmbeddingState<double>& s)
{
    detail::require_same_size(s.x.size(), s.xhat.size(), "embedding state");
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x(i)) || !std::isfinite(s.xhat(i))) {
            std::ostringstream os;
            os << "non-finite embedding state in coordinate " << i;
            throw NumericalError(os.str());
        }
        if (s.x(i) - s.xhat(i) > ordering_tolerance) {
            std::ostringstream os;
            os << "ordering violation in coordinate " << i << ": lower " << s.x(i) << " > upper "
               << s.xhat(i);
            throw OrderingViolation(os.str());
        }
    }
    return {s.x.cwiseMin(s.xhat), s.x.cwiseMax(s.xhat)};
}

namespace {

VectorXd stack(const VectorXd& lower, const VectorXd& upper)
{
    VectorXd out(lower.size() + upper.size());
    out << lower, upper;
    return out;
}

// Network bounds can come out a few ulps inverted where the output is flat.
OutputBounds<double> ordered_input(OutputBounds<double> b)
{
    for (Eigen::Index k = 0; k < b.lower.size(); ++k) {
        const double gap = b.lower(k) - b.upper(k);
        if (gap > ordering_tolerance * (1.0 + std::abs(b.upper(k)))) {
            std::ostringstream os;
            os << "network bound inversion in output " << k << ": lower " << b.lower(k)
               << " > upper " << b.upper(k);
            throw OrderingViolation(os.str());
        }
        if (gap > 0.0) std::swap(b.lower(k), b.upper(k));
    }
    return b;
}

// Rows of the pinched evaluation shared by E^H and E^Bs.
VectorXd pinched_rhs(const ClosedLoop& loop, const EmbeddingState<double>& s, const BoxXd& w,
                     const LinearBounds<double>& lb)
{
    const Eigen::Index n = s.x.size();
    VectorXd lower(n), upper(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto lo_in = ordered_input(inclusion_G(lb, s.x, replace_coord(s.xhat, i, s.x)));
        lower(i) = loop.system->decomposition(s.x, s.xhat, lo_in.lower, lo_in.upper, w.lower(),
                                              w.upper())(i);
        const auto up_in = ordered_input(inclusion_G(lb, replace_coord(s.x, i, s.xhat), s.xhat));
        upper(i) = loop.system->decomposition(s.xhat, s.x, up_in.upper, up_in.lower, w.upper(),
                                              w.lower())(i);
    }
    return stack(lower, upper);
}

void require_inside(const LinearBounds<double>& lb, const EmbeddingState<double>& s)
{
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
        if (s.x(i) < lb.valid_on.lower()(i) || s.xhat(i) > lb.valid_on.upper()(i)) {
            std::ostringstream os;
            os << "state [" << s.x(i) << ", " << s.xhat(i) << "] in coordinate " << i
               << " escaped the frozen bound box [" << lb.valid_on.lower()(i) << ", "
               << lb.valid_on.upper()(i) << "]";
            throw BoundsEscape(os.str(), static_cast<int>(i));
        }
    }
}

} // namespace

VectorXd rhs_G(const ClosedLoop& loop, const EmbeddingState<double>& state, const BoxXd& w)
{
    const auto s = ordered_state(state);
    const auto u = ordered_input(inclusion_H(*loop.network, s.x, s.xhat, loop.crown));
    return stack(loop.system->decomposition(s.x, s.xhat, u.lower, u.upper, w.lower(), w.upper()),
                 loop.system->decomposition(s.xhat, s.x, u.upper, u.lower, w.upper(), w.lower()));
}

VectorXd rhs_H(const ClosedLoop& loop, const EmbeddingState<double>& state, const BoxXd& w)
{
    const auto s = ordered_state(state);
    const auto lb = crown_bounds(*loop.network, BoxXd(s.x, s.xhat), loop.crown);
    return pinched_rhs(loop, s, w, lb);
}

VectorXd rhs_L(const ClosedLoop& loop, const EmbeddingState<double>& state, const BoxXd& w)
{
    const auto s = ordered_state(state);
    const Eigen::Index n = s.x.size();
    VectorXd lower(n), upper(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const VectorXd pinched_hi = replace_coord(s.xhat, i, s.x);
        const auto lo_in = ordered_input(inclusion_H(*loop.network, s.x, pinched_hi, loop.crown));
        lower(i) = loop.system->decomposition(s.x, s.xhat, lo_in.lower, lo_in.upper, w.lower(),
                                              w.upper())(i);
        const VectorXd pinched_lo = replace_coord(s.x, i, s.xhat);
        const auto up_in = ordered_input(inclusion_H(*loop.network, pinched_lo, s.xhat, loop.crown));
        upper(i) = loop.system->decomposition(s.xhat, s.x, up_in.upper, up_in.lower, w.upper(),
                                              w.lower())(i);
    }
    return stack(lower, upper);
}

VectorXd rhs_Bs(const ClosedLoop& loop, const EmbeddingState<double>& state, const BoxXd& w,
                const LinearBounds<double>& ctx)
{
    const auto s = ordered_state(state);
    require_inside(ctx, s);
    return pinched_rhs(loop, s, w, ctx);
}

namespace {

struct LinearParts
{
    MatrixXd r; // B^+ A_lower + B^- A_upper
    MatrixXd s; // B^+ A_upper + B^- A_lower
    VectorXd bias_lower;
    VectorXd bias_upper;
};

LinearParts linear_parts(const LinearSystemModel& m, const LinearBounds<double>& lb)
{
    if (lb.output_dim() != m.input_dim() || lb.input_dim() != m.state_dim())
        throw std::invalid_argument("linear embedding: network bounds do not match the plant");
    const auto& bp = m.B_split().plus;
    const auto& bm = m.B_split().minus;
    LinearParts p;
    p.r = bp * lb.A_lower + bm * lb.A_upper;
    p.s = bp * lb.A_upper + bm * lb.A_lower;
    p.bias_lower = bp * lb.b_lower + bm * lb.b_upper;
    p.bias_upper = bp * lb.b_upper + bm * lb.b_lower;
    return p;
}

VectorXd disturbance_term(const LinearSystemModel& m, const VectorXd& first, const VectorXd& second)
{
    if (m.disturbance_dim() == 0) return VectorXd::Zero(m.state_dim());
    return m.C_split().plus * first + m.C_split().minus * second;
}

} // namespace

VectorXd rhs_Lin(const EmbeddingState<double>& state, const BoxXd& w, const LinearSystemModel& m,
                 const LinearBounds<double>& lb)
{
    const auto s = ordered_state(state);
    require_inside(lb, s);
    const auto p = linear_parts(m, lb);
    const auto low = metzler_split(m.A() + p.r);
    const auto up = metzler_split(m.A() + p.s);
    VectorXd lower = low.mzl * s.x + low.nonmzl * s.xhat + disturbance_term(m, w.lower(), w.upper()) +
                     p.bias_lower + m.offset();
    VectorXd upper = up.nonmzl * s.x + up.mzl * s.xhat + disturbance_term(m, w.upper(), w.lower()) +
                     p.bias_upper + m.offset();
    return stack(lower, upper);
}

VectorXd rhs_LinH(const EmbeddingState<double>& state, const BoxXd& w, const LinearSystemModel& m,
                  const LinearBounds<double>& lb)
{
    const auto s = ordered_state(state);
    require_inside(lb, s);
    const auto p = linear_parts(m, lb);
    const auto& a = m.A_split();
    const auto r = metzler_split(p.r);
    const auto sp = metzler_split(p.s);
    VectorXd lower = (a.mzl + r.mzl) * s.x + (a.nonmzl + r.nonmzl) * s.xhat +
                     disturbance_term(m, w.lower(), w.upper()) + p.bias_lower + m.offset();
    VectorXd upper = (a.nonmzl + sp.nonmzl) * s.x + (a.mzl + sp.mzl) * s.xhat +
                     disturbance_term(m, w.upper(), w.lower()) + p.bias_upper + m.offset();
    return stack(lower, upper);
}

// ---------------------------------------------------------------------------

EmbeddingRHS::EmbeddingRHS(ClosedLoop loop, BoxXd disturbance, Strategy strategy)
    : loop_(std::move(loop)), disturbance_(std::move(disturbance)), strategy_(strategy)
{
    if (!loop_.system || !loop_.network)
        throw std::invalid_argument("EmbeddingRHS: closed loop needs a system and a network");
    if (loop_.network->input_dim() != loop_.system->state_dim() ||
        loop_.network->output_dim() != loop_.system->input_dim())
        throw ConfigError("network dimensions (" + std::to_string(loop_.network->input_dim()) +
                          " -> " + std::to_string(loop_.network->output_dim()) +
                          ") do not match the plant (state " +
                          std::to_string(loop_.system->state_dim()) + ", input " +
                          std::to_string(loop_.system->input_dim()) + ")");
    if (disturbance_.size() != loop_.system->disturbance_dim())
        throw ConfigError("disturbance box has dimension " + std::to_string(disturbance_.size()) +
                          ", plant expects " + std::to_string(loop_.system->disturbance_dim()));
    if (strategy_ == Strategy::linear || strategy_ == Strategy::linear_hybrid) {
        linear_ = dynamic_cast<const LinearSystemModel*>(loop_.system.get());
        if (!linear_)
            throw ConfigError(std::string("strategy ") + std::string(to_string(strategy_)) +
                              " requires a linear plant");
    }
}

void EmbeddingRHS::freeze(LinearBounds<double> bounds) { frozen_ = std::move(bounds); }

VectorXd EmbeddingRHS::operator()(const VectorXd& stacked) const
{
    ++evaluations_;
    const auto state = EmbeddingState<double>::from_stacked(stacked);
    switch (strategy_) {
    case Strategy::global: return rhs_G(loop_, state, disturbance_);
    case Strategy::hybrid: return rhs_H(loop_, state, disturbance_);
    case Strategy::local: return rhs_L(loop_, state, disturbance_);
    case Strategy::frozen_hybrid:
        if (!frozen_) throw std::logic_error("frozen-hybrid right-hand side used before freeze()");
        return rhs_Bs(loop_, state, disturbance_, *frozen_);
    case Strategy::linear:
    case Strategy::linear_hybrid: {
        const auto s = ordered_state(state);
        const auto lb = crown_bounds(*loop_.network, BoxXd(s.x, s.xhat), loop_.crown);
        return strategy_ == Strategy::linear ? rhs_Lin(s, disturbance_, *linear_, lb)
                                             : rhs_LinH(s, disturbance_, *linear_, lb);
    }
    }
    throw std::logic_error("unknown strategy");
}

} // namespace nnreach
