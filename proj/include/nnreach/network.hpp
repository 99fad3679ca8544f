#ifndef NNREACH_NETWORK_HPP
#define NNREACH_NETWORK_HPP

#include "nnreach/interval.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace nnreach {

/// Slope-restricted activations (0 <= slope <= 1) with relaxation tables.
enum class Activation { relu, sigmoid, tanh, identity };

inline std::string_view to_string(Activation a)
{
    switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
    }
    return "?";
}

inline std::optional<Activation> parse_activation(std::string_view name)
{
    if (name == "relu") return Activation::relu;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "tanh") return Activation::tanh;
    if (name == "identity" || name == "linear") return Activation::identity;
    return std::nullopt;
}

template <typename T>
concept ScalarLike = !std::is_base_of_v<Eigen::EigenBase<T>, T>;

template <ScalarLike Scalar>
Scalar activate(Activation a, Scalar z)
{
    using std::exp;
    using std::tanh;
    switch (a) {
    case Activation::relu: return z > Scalar(0) ? z : Scalar(0);
    case Activation::sigmoid: return Scalar(1) / (Scalar(1) + exp(-z));
    case Activation::tanh: return tanh(z);
    case Activation::identity: return z;
    }
    return z;
}

template <ScalarLike Scalar>
Scalar activation_slope(Activation a, Scalar z)
{
    switch (a) {
    case Activation::relu: return z > Scalar(0) ? Scalar(1) : Scalar(0);
    case Activation::sigmoid: {
        const Scalar s = activate(a, z);
        return s * (Scalar(1) - s);
    }
    case Activation::tanh: {
        const Scalar t = activate(a, z);
        return Scalar(1) - t * t;
    }
    case Activation::identity: return Scalar(1);
    }
    return Scalar(1);
}

template <typename Derived>
Vector<typename Derived::Scalar> activate(Activation a, const Eigen::MatrixBase<Derived>& z)
{
    using Scalar = typename Derived::Scalar;
    return z.unaryExpr([a](Scalar v) { return activate(a, v); });
}

template <typename Scalar>
struct DenseLayer
{
    Matrix<Scalar> weight;
    Vector<Scalar> bias;
    Activation activation = Activation::relu;
};

/// k hidden layers xi_i = phi_i(W_{i-1} xi_{i-1} + b_{i-1}) followed by the
/// affine output u = W_k xi_k + b_k.
template <typename Scalar>
class FeedForwardNetwork
{
public:
    FeedForwardNetwork() = default;

    FeedForwardNetwork(std::vector<DenseLayer<Scalar>> hidden, Matrix<Scalar> out_weight,
                       Vector<Scalar> out_bias)
        : hidden_(std::move(hidden)), out_weight_(std::move(out_weight)),
          out_bias_(std::move(out_bias))
    {
        validate();
    }

    Eigen::Index input_dim() const
    {
        return hidden_.empty() ? out_weight_.cols() : hidden_.front().weight.cols();
    }
    Eigen::Index output_dim() const { return out_weight_.rows(); }

    const std::vector<DenseLayer<Scalar>>& hidden() const { return hidden_; }
    std::size_t hidden_count() const { return hidden_.size(); }
    const Matrix<Scalar>& out_weight() const { return out_weight_; }
    const Vector<Scalar>& out_bias() const { return out_bias_; }

    bool all_relu() const
    {
        for (const auto& l : hidden_)
            if (l.activation != Activation::relu) return false;
        return true;
    }

private:
    void validate() const
    {
        Eigen::Index expected = -1;
        auto check = [&](const Matrix<Scalar>& w, const Vector<Scalar>& b, std::size_t index) {
            if (w.rows() != b.size()) {
                std::ostringstream os;
                os << "layer " << index << " has " << w.rows() << " rows but bias of length "
                   << b.size();
                throw std::invalid_argument(os.str());
            }
            if (w.rows() == 0 || w.cols() == 0) {
                std::ostringstream os;
                os << "layer " << index << " is empty";
                throw std::invalid_argument(os.str());
            }
            if (expected >= 0 && w.cols() != expected) {
                std::ostringstream os;
                os << "layer " << index << " expects " << w.cols() << " inputs, got " << expected;
                throw std::invalid_argument(os.str());
            }
            expected = w.rows();
        };
        for (std::size_t i = 0; i < hidden_.size(); ++i)
            check(hidden_[i].weight, hidden_[i].bias, i + 1);
        check(out_weight_, out_bias_, hidden_.size() + 1);
    }

    std::vector<DenseLayer<Scalar>> hidden_;
    Matrix<Scalar> out_weight_;
    Vector<Scalar> out_bias_;
};

using Network = FeedForwardNetwork<double>;

template <typename Scalar, typename Derived>
Vector<Scalar> forward(const FeedForwardNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& x)
{
    detail::require_same_size(x.size(), net.input_dim(), "forward");
    Vector<Scalar> h = x;
    for (const auto& layer : net.hidden()) {
        Vector<Scalar> z = layer.weight * h + layer.bias;
        h = activate(layer.activation, z);
    }
    return net.out_weight() * h + net.out_bias();
}

/// Column-wise forward pass over a batch of inputs (one sample per column).
template <typename Scalar>
Matrix<Scalar> forward_batch(const FeedForwardNetwork<Scalar>& net, const Matrix<Scalar>& xs)
{
    detail::require_same_size(xs.rows(), net.input_dim(), "forward_batch");
    Matrix<Scalar> h = xs;
    for (const auto& layer : net.hidden()) {
        Matrix<Scalar> z = layer.weight * h;
        z.colwise() += layer.bias;
        const Activation a = layer.activation;
        h = z.unaryExpr([a](Scalar v) { return activate(a, v); });
    }
    Matrix<Scalar> out = net.out_weight() * h;
    out.colwise() += net.out_bias();
    return out;
}

} // namespace nnreach

#endif
