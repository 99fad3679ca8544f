#ifndef NNREACH_TESTS_SUPPORT_HPP
#define NNREACH_TESTS_SUPPORT_HPP

#include "nnreach/interval.hpp"
#include "nnreach/network.hpp"
#include "nnreach/systems.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

using nnreach::BoxXd;
using nnreach::MatrixXd;
using nnreach::Network;
using nnreach::VectorXd;

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline VectorXd random_vector(Rng& rng, Eigen::Index n, double lo, double hi)
{
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
    return v;
}

inline MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double scale)
{
    MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = uniform(rng, -scale, scale);
    return m;
}

inline BoxXd random_box(Rng& rng, Eigen::Index n, double center_range, double max_width)
{
    VectorXd c = random_vector(rng, n, -center_range, center_range);
    VectorXd w = random_vector(rng, n, 0.0, max_width);
    return BoxXd(c - 0.5 * w, c + 0.5 * w);
}

inline VectorXd sample_in(Rng& rng, const BoxXd& b)
{
    VectorXd z(b.size());
    for (Eigen::Index i = 0; i < b.size(); ++i)
        z(i) = b.width(i) > 0.0 ? uniform(rng, b.lower()(i), b.upper()(i)) : b.lower()(i);
    return z;
}

/// Sub-box of b with random corners.
inline BoxXd random_subbox(Rng& rng, const BoxXd& b)
{
    VectorXd p = sample_in(rng, b), q = sample_in(rng, b);
    return BoxXd(p.cwiseMin(q), p.cwiseMax(q));
}

inline Network random_network(Rng& rng, Eigen::Index in, Eigen::Index out,
                              const std::vector<Eigen::Index>& widths,
                              nnreach::Activation act = nnreach::Activation::relu)
{
    std::vector<nnreach::DenseLayer<double>> layers;
    Eigen::Index prev = in;
    for (auto w : widths) {
        const double scale = 1.5 / std::sqrt(static_cast<double>(prev));
        layers.push_back({random_matrix(rng, w, prev, scale), random_vector(rng, w, -0.5, 0.5), act});
        prev = w;
    }
    const double scale = 1.5 / std::sqrt(static_cast<double>(prev));
    return Network(std::move(layers), random_matrix(rng, out, prev, scale),
                   random_vector(rng, out, -0.5, 0.5));
}

/// Random ReLU network with 1..3 hidden layers of 1..max_width neurons.
inline Network random_relu_network(Rng& rng, Eigen::Index in, Eigen::Index out, int max_width = 32)
{
    std::vector<Eigen::Index> widths(static_cast<std::size_t>(uniform_int(rng, 1, 3)));
    for (auto& w : widths) w = uniform_int(rng, 1, max_width);
    return random_network(rng, in, out, widths);
}

// Oracles written with scalar loops, independent of the Eigen expressions in
// the library.

inline double scalar_activation(nnreach::Activation a, double z)
{
    switch (a) {
    case nnreach::Activation::relu: return z > 0.0 ? z : 0.0;
    case nnreach::Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case nnreach::Activation::tanh: return std::tanh(z);
    case nnreach::Activation::identity: return z;
    }
    return z;
}

inline std::vector<double> loop_affine(const MatrixXd& w, const VectorXd& b,
                                       const std::vector<double>& h)
{
    std::vector<double> z(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        double s = b(i);
        for (Eigen::Index j = 0; j < w.cols(); ++j) s += w(i, j) * h[static_cast<std::size_t>(j)];
        z[static_cast<std::size_t>(i)] = s;
    }
    return z;
}

inline VectorXd loop_forward(const Network& net, const VectorXd& x)
{
    std::vector<double> h(x.data(), x.data() + x.size());
    for (const auto& l : net.hidden()) {
        h = loop_affine(l.weight, l.bias, h);
        for (auto& v : h) v = scalar_activation(l.activation, v);
    }
    const auto z = loop_affine(net.out_weight(), net.out_bias(), h);
    return Eigen::Map<const VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
}

/// Interval arithmetic through the network, one scalar product at a time.
inline std::pair<VectorXd, VectorXd> loop_ibp(const Network& net, const BoxXd& box)
{
    std::vector<double> lo(box.lower().data(), box.lower().data() + box.size());
    std::vector<double> hi(box.upper().data(), box.upper().data() + box.size());
    auto affine = [&](const MatrixXd& w, const VectorXd& b) {
        std::vector<double> zl(static_cast<std::size_t>(w.rows())), zh(zl.size());
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            double sl = b(i), sh = b(i);
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                const auto k = static_cast<std::size_t>(j);
                const double a = w(i, j) * lo[k], c = w(i, j) * hi[k];
                sl += std::min(a, c);
                sh += std::max(a, c);
            }
            zl[static_cast<std::size_t>(i)] = sl;
            zh[static_cast<std::size_t>(i)] = sh;
        }
        lo = zl;
        hi = zh;
    };
    for (const auto& l : net.hidden()) {
        affine(l.weight, l.bias);
        for (std::size_t k = 0; k < lo.size(); ++k) {
            lo[k] = scalar_activation(l.activation, lo[k]);
            hi[k] = scalar_activation(l.activation, hi[k]);
        }
    }
    affine(net.out_weight(), net.out_bias());
    return {Eigen::Map<const VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size())),
            Eigen::Map<const VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()))};
}

/// Random ordered tuple x <= xhat (and likewise for u, w) for a plant.
struct OrderedTuple
{
    VectorXd x, xhat, u, uhat, w, what;
};

inline OrderedTuple random_ordered_tuple(Rng& rng, const BoxXd& xs, const BoxXd& us, const BoxXd& ws)
{
    auto pair = [&](const BoxXd& b) {
        if (b.size() == 0) return std::pair<VectorXd, VectorXd>{VectorXd(0), VectorXd(0)};
        const auto s = random_subbox(rng, b);
        return std::pair<VectorXd, VectorXd>{s.lower(), s.upper()};
    };
    auto [x, xh] = pair(xs);
    auto [u, uh] = pair(us);
    auto [w, wh] = pair(ws);
    return {x, xh, u, uh, w, wh};
}

inline std::filesystem::path source_dir() { return NNREACH_SOURCE_DIR; }

} // namespace testsupport

#endif
