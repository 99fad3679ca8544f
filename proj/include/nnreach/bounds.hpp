#ifndef NNREACH_BOUNDS_HPP
#define NNREACH_BOUNDS_HPP

#include "nnreach/errors.hpp"
#include "nnreach/interval.hpp"
#include "nnreach/network.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace nnreach {

/// Where the per-layer pre-activation bounds used by CROWN come from.
enum class IntermediateBounds { ibp, crown };

/// `linear` uses the CROWN relaxation tables. `interval` replaces every
/// neuron relaxation by the constants phi(L) <= phi(z) <= phi(U), which turns
/// the backward pass into plain interval bound propagation.
enum class RelaxationMode { linear, interval };

/// Lower slope for unstable ReLU neurons. `adaptive` picks 1 when U >= |L|
/// (ties go to 1) and 0 otherwise; `zero` always picks 0.
enum class ReluLowerSlope { adaptive, zero };

struct CrownOptions
{
    IntermediateBounds intermediate = IntermediateBounds::ibp;
    RelaxationMode relaxation = RelaxationMode::linear;
    ReluLowerSlope relu_lower = ReluLowerSlope::adaptive;
};

/// alpha_L (z + beta_L) <= phi(z) <= alpha_U (z + beta_U) on [L, U].
template <typename Scalar>
struct NeuronRelaxation
{
    Scalar alpha_upper = 0;
    Scalar beta_upper = 0;
    Scalar alpha_lower = 0;
    Scalar beta_lower = 0;
};

/// Per-layer relaxation stored as slope/intercept pairs:
/// lower_slope z + lower_intercept <= phi(z) <= upper_slope z + upper_intercept.
template <typename Scalar>
struct LayerRelaxation
{
    Vector<Scalar> upper_slope;
    Vector<Scalar> upper_intercept;
    Vector<Scalar> lower_slope;
    Vector<Scalar> lower_intercept;
};

/// lower[i], upper[i] bound the pre-activation of hidden layer i; the last
/// entry bounds the network output.
template <typename Scalar>
struct PreActivationBounds
{
    std::vector<Vector<Scalar>> lower;
    std::vector<Vector<Scalar>> upper;

    Box<Scalar> output_box() const { return Box<Scalar>(lower.back(), upper.back()); }
};

/// A_lower x + b_lower <= N(x) <= A_upper x + b_upper for x in valid_on.
template <typename Scalar>
struct LinearBounds
{
    Matrix<Scalar> A_lower;
    Vector<Scalar> b_lower;
    Matrix<Scalar> A_upper;
    Vector<Scalar> b_upper;
    Box<Scalar> valid_on;
    SignedMatrixSplit<Scalar> lower_split;
    SignedMatrixSplit<Scalar> upper_split;

    LinearBounds() = default;

    LinearBounds(Matrix<Scalar> a_lower, Vector<Scalar> b_lo, Matrix<Scalar> a_upper,
                 Vector<Scalar> b_up, Box<Scalar> box)
        : A_lower(std::move(a_lower)), b_lower(std::move(b_lo)), A_upper(std::move(a_upper)),
          b_upper(std::move(b_up)), valid_on(std::move(box)), lower_split(signed_split(A_lower)),
          upper_split(signed_split(A_upper))
    {
    }

    Eigen::Index output_dim() const { return A_lower.rows(); }
    Eigen::Index input_dim() const { return A_lower.cols(); }
};

template <typename Scalar>
struct OutputBounds
{
    Vector<Scalar> lower;
    Vector<Scalar> upper;
};

namespace detail {

/// plus * a + minus * b. Shared by IBP and the backward pass so both produce
/// identical rounding.
template <typename Scalar>
Vector<Scalar> split_apply(const Matrix<Scalar>& plus, const Matrix<Scalar>& minus,
                           const Vector<Scalar>& a, const Vector<Scalar>& b)
{
    Vector<Scalar> r = plus * a;
    r.noalias() += minus * b;
    return r;
}

template <typename Scalar>
struct Line
{
    Scalar slope;
    Scalar intercept;
};

template <typename Scalar>
Line<Scalar> chord(Activation a, Scalar lo, Scalar hi)
{
    const Scalar flo = activate(a, lo);
    const Scalar k = (activate(a, hi) - flo) / (hi - lo);
    return {k, flo - k * lo};
}

template <typename Scalar>
Line<Scalar> tangent(Activation a, Scalar d)
{
    const Scalar k = activation_slope(a, d);
    return {k, activate(a, d) - k * d};
}

// S-shaped activations (sigmoid, tanh): convex on z <= 0, concave on z >= 0.
template <typename Scalar>
std::pair<Line<Scalar>, Line<Scalar>> s_shaped_relaxation(Activation a, Scalar lo, Scalar hi)
{
    if (lo == hi) {
        const auto t = tangent(a, lo);
        return {t, t};
    }
    if (hi <= Scalar(0)) // convex: chord above, midpoint tangent below
        return {chord(a, lo, hi), tangent(a, (lo + hi) / Scalar(2))};
    if (lo >= Scalar(0)) // concave: midpoint tangent above, chord below
        return {tangent(a, (lo + hi) / Scalar(2)), chord(a, lo, hi)};

    // Mixed sign. Upper: tangent at d in [0, hi] passing above (lo, phi(lo)),
    // or the chord when no such d exists inside the interval.
    const Scalar flo = activate(a, lo);
    const Scalar fhi = activate(a, hi);
    auto gap_upper = [&](Scalar d) {
        return activate(a, d) + activation_slope(a, d) * (lo - d) - flo;
    };
    Line<Scalar> upper;
    if (gap_upper(hi) <= Scalar(0)) {
        upper = chord(a, lo, hi);
    } else {
        Scalar left = 0, right = hi; // gap(left) <= 0 < gap(right)
        for (int it = 0; it < 100; ++it) {
            const Scalar mid = (left + right) / Scalar(2);
            if (mid <= left || mid >= right) break;
            if (gap_upper(mid) > Scalar(0))
                right = mid;
            else
                left = mid;
        }
        upper = tangent(a, right);
    }
    // Lower: tangent at d in [lo, 0] passing below (hi, phi(hi)).
    auto gap_lower = [&](Scalar d) {
        return activate(a, d) + activation_slope(a, d) * (hi - d) - fhi;
    };
    Line<Scalar> lower;
    if (gap_lower(lo) >= Scalar(0)) {
        lower = chord(a, lo, hi);
    } else {
        Scalar left = lo, right = 0; // gap(left) < 0 <= gap(right)
        for (int it = 0; it < 100; ++it) {
            const Scalar mid = (left + right) / Scalar(2);
            if (mid <= left || mid >= right) break;
            if (gap_lower(mid) < Scalar(0))
                left = mid;
            else
                right = mid;
        }
        lower = tangent(a, left);
    }
    return {upper, lower};
}

} // namespace detail

/// CROWN's ReLU relaxation for one neuron with pre-activation in [L, U].
template <typename Scalar>
NeuronRelaxation<Scalar> relu_relaxation(Scalar lo, Scalar hi,
                                         ReluLowerSlope rule = ReluLowerSlope::adaptive)
{
    if (!(lo <= hi)) {
        std::ostringstream os;
        os << "relu_relaxation: L > U (" << lo << " > " << hi << ")";
        throw std::invalid_argument(os.str());
    }
    NeuronRelaxation<Scalar> r;
    if (hi <= Scalar(0)) return r;
    if (lo >= Scalar(0)) {
        r.alpha_upper = r.alpha_lower = Scalar(1);
        return r;
    }
    r.alpha_upper = hi / (hi - lo);
    r.beta_upper = -lo;
    r.alpha_lower = (rule == ReluLowerSlope::adaptive && hi >= -lo) ? Scalar(1) : Scalar(0);
    r.beta_lower = 0;
    return r;
}

template <typename Scalar>
LayerRelaxation<Scalar> relax_layer(Activation act, const Vector<Scalar>& lo,
                                    const Vector<Scalar>& hi, const CrownOptions& opt)
{
    const Eigen::Index m = lo.size();
    LayerRelaxation<Scalar> r{Vector<Scalar>::Zero(m), Vector<Scalar>::Zero(m),
                              Vector<Scalar>::Zero(m), Vector<Scalar>::Zero(m)};
    for (Eigen::Index j = 0; j < m; ++j) {
        if (!(lo(j) <= hi(j))) {
            std::ostringstream os;
            os << "relax_layer: L > U at neuron " << j;
            throw std::invalid_argument(os.str());
        }
        if (opt.relaxation == RelaxationMode::interval) {
            r.upper_intercept(j) = activate(act, hi(j));
            r.lower_intercept(j) = activate(act, lo(j));
            continue;
        }
        switch (act) {
        case Activation::identity:
            r.upper_slope(j) = r.lower_slope(j) = Scalar(1);
            break;
        case Activation::relu: {
            const auto n = relu_relaxation(lo(j), hi(j), opt.relu_lower);
            r.upper_slope(j) = n.alpha_upper;
            r.upper_intercept(j) = n.alpha_upper * n.beta_upper;
            r.lower_slope(j) = n.alpha_lower;
            r.lower_intercept(j) = n.alpha_lower * n.beta_lower;
            break;
        }
        case Activation::sigmoid:
        case Activation::tanh: {
            const auto [up, down] = detail::s_shaped_relaxation(act, lo(j), hi(j));
            r.upper_slope(j) = up.slope;
            r.upper_intercept(j) = up.intercept;
            r.lower_slope(j) = down.slope;
            r.lower_intercept(j) = down.intercept;
            break;
        }
        }
    }
    return r;
}

/// Interval bound propagation through every layer.
template <typename Scalar>
PreActivationBounds<Scalar> ibp_bounds(const FeedForwardNetwork<Scalar>& net, const Box<Scalar>& input)
{
    detail::require_same_size(input.size(), net.input_dim(), "ibp_bounds");
    PreActivationBounds<Scalar> out;
    Vector<Scalar> h_lo = input.lower();
    Vector<Scalar> h_hi = input.upper();
    auto propagate = [&](const Matrix<Scalar>& w, const Vector<Scalar>& b) {
        const auto s = signed_split(w);
        Vector<Scalar> z_lo = detail::split_apply(s.plus, s.minus, h_lo, h_hi) + b;
        Vector<Scalar> z_hi = detail::split_apply(s.plus, s.minus, h_hi, h_lo) + b;
        out.lower.push_back(z_lo);
        out.upper.push_back(z_hi);
    };
    for (const auto& layer : net.hidden()) {
        propagate(layer.weight, layer.bias);
        // Activations are monotone nondecreasing.
        h_lo = activate(layer.activation, out.lower.back());
        h_hi = activate(layer.activation, out.upper.back());
    }
    propagate(net.out_weight(), net.out_bias());
    return out;
}

namespace detail {

/// Back-substitutes Lambda * h_{depth} + bias through hidden layers
/// depth-1 .. 0, where h_{i+1} = phi_i(z_i), z_i = W_i h_i + b_i.
/// Returns the coefficient and bias of the resulting bound in the input.
template <typename Scalar>
std::pair<Matrix<Scalar>, Vector<Scalar>>
back_substitute(const FeedForwardNetwork<Scalar>& net, std::size_t depth, Matrix<Scalar> lambda,
                Vector<Scalar> bias, const std::vector<LayerRelaxation<Scalar>>& relax, bool upper)
{
    for (std::size_t step = depth; step-- > 0;) {
        const auto& layer = net.hidden()[step];
        const auto& r = relax[step];
        const auto s = signed_split(lambda);
        const Vector<Scalar>& slope_pos = upper ? r.upper_slope : r.lower_slope;
        const Vector<Scalar>& slope_neg = upper ? r.lower_slope : r.upper_slope;
        const Vector<Scalar>& icpt_pos = upper ? r.upper_intercept : r.lower_intercept;
        const Vector<Scalar>& icpt_neg = upper ? r.lower_intercept : r.upper_intercept;
        Matrix<Scalar> d = s.plus * slope_pos.asDiagonal();
        d.noalias() += s.minus * slope_neg.asDiagonal();
        bias = bias + split_apply(s.plus, s.minus, icpt_pos, icpt_neg);
        bias.noalias() += d * layer.bias;
        lambda.noalias() = d * layer.weight;
    }
    return {std::move(lambda), std::move(bias)};
}

template <typename Scalar>
std::vector<LayerRelaxation<Scalar>>
relaxations_for(const FeedForwardNetwork<Scalar>& net, const PreActivationBounds<Scalar>& pre,
                const CrownOptions& opt)
{
    std::vector<LayerRelaxation<Scalar>> relax;
    relax.reserve(net.hidden_count());
    for (std::size_t i = 0; i < net.hidden_count(); ++i)
        relax.push_back(relax_layer(net.hidden()[i].activation, pre.lower[i], pre.upper[i], opt));
    return relax;
}

} // namespace detail

/// Pre-activation bounds where every layer is bounded by CROWN on the
/// truncated network, reusing the bounds of earlier layers.
template <typename Scalar>
PreActivationBounds<Scalar> crown_intermediate_bounds(const FeedForwardNetwork<Scalar>& net,
                                                      const Box<Scalar>& input,
                                                      const CrownOptions& opt)
{
    detail::require_same_size(input.size(), net.input_dim(), "crown_bounds");
    PreActivationBounds<Scalar> pre;
    std::vector<LayerRelaxation<Scalar>> relax;
    const auto in_lo = input.lower();
    const auto in_hi = input.upper();
    auto bound_layer = [&](const Matrix<Scalar>& w, const Vector<Scalar>& b, std::size_t depth) {
        auto [a_up, b_up] = detail::back_substitute(net, depth, w, b, relax, true);
        auto [a_lo, b_lo] = detail::back_substitute(net, depth, w, b, relax, false);
        const auto su = signed_split(a_up);
        const auto sl = signed_split(a_lo);
        pre.upper.push_back(detail::split_apply(su.plus, su.minus, in_hi, in_lo) + b_up);
        pre.lower.push_back(detail::split_apply(sl.plus, sl.minus, in_lo, in_hi) + b_lo);
    };
    for (std::size_t i = 0; i < net.hidden_count(); ++i) {
        const auto& layer = net.hidden()[i];
        bound_layer(layer.weight, layer.bias, i);
        relax.push_back(relax_layer(layer.activation, pre.lower[i], pre.upper[i], opt));
    }
    bound_layer(net.out_weight(), net.out_bias(), net.hidden_count());
    return pre;
}

/// CROWN linear bounds of the network output over `input`.
template <typename Scalar>
LinearBounds<Scalar> crown_bounds(const FeedForwardNetwork<Scalar>& net, const Box<Scalar>& input,
                                  const CrownOptions& opt = {})
{
    detail::require_same_size(input.size(), net.input_dim(), "crown_bounds");
    const PreActivationBounds<Scalar> pre = opt.intermediate == IntermediateBounds::ibp
                                                ? ibp_bounds(net, input)
                                                : crown_intermediate_bounds(net, input, opt);
    const auto relax = detail::relaxations_for(net, pre, opt);
    auto [a_up, b_up] = detail::back_substitute(net, net.hidden_count(), net.out_weight(),
                                                net.out_bias(), relax, true);
    auto [a_lo, b_lo] = detail::back_substitute(net, net.hidden_count(), net.out_weight(),
                                                net.out_bias(), relax, false);
    return LinearBounds<Scalar>(std::move(a_lo), std::move(b_lo), std::move(a_up), std::move(b_up),
                                input);
}

/// Evaluates the linear bounds on [eta, etahat], which must lie inside
/// lb.valid_on:
///   lower = [A_l]^+ eta + [A_l]^- etahat + b_l
///   upper = [A_u]^+ etahat + [A_u]^- eta + b_u
template <typename Scalar>
OutputBounds<Scalar> inclusion_G(const LinearBounds<Scalar>& lb, const Vector<Scalar>& eta,
                                 const Vector<Scalar>& etahat)
{
    detail::require_same_size(eta.size(), lb.input_dim(), "inclusion_G");
    detail::require_same_size(etahat.size(), lb.input_dim(), "inclusion_G");
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        if (!(eta(i) <= etahat(i))) {
            std::ostringstream os;
            os << "inclusion_G: eta > etahat in coordinate " << i;
            throw std::invalid_argument(os.str());
        }
        if (eta(i) < lb.valid_on.lower()(i) || etahat(i) > lb.valid_on.upper()(i)) {
            std::ostringstream os;
            os << "inclusion_G: query [" << eta(i) << ", " << etahat(i) << "] in coordinate " << i
               << " leaves the bound box [" << lb.valid_on.lower()(i) << ", "
               << lb.valid_on.upper()(i) << "]";
            throw BoundsEscape(os.str(), static_cast<int>(i));
        }
    }
    return {detail::split_apply(lb.lower_split.plus, lb.lower_split.minus, eta, etahat) + lb.b_lower,
            detail::split_apply(lb.upper_split.plus, lb.upper_split.minus, etahat, eta) + lb.b_upper};
}

/// CROWN recomputed on [x, xhat] and evaluated on the same box.
template <typename Scalar>
OutputBounds<Scalar> inclusion_H(const FeedForwardNetwork<Scalar>& net, const Vector<Scalar>& x,
                                 const Vector<Scalar>& xhat, const CrownOptions& opt = {})
{
    detail::require_same_size(x.size(), xhat.size(), "inclusion_H");
    const Box<Scalar> box(x, xhat); // rejects x > xhat
    return inclusion_G(crown_bounds(net, box, opt), x, xhat);
}

} // namespace nnreach

#endif
