#include "support.hpp"

#include "nnreach/bounds.hpp"
#include "nnreach/errors.hpp"

#include <doctest.h>

using namespace nnreach;
using testsupport::Rng;

TEST_CASE("relu relaxation cases")
{
    auto active = relu_relaxation(1.0, 2.0);
    CHECK(active.alpha_upper == 1.0);
    CHECK(active.alpha_lower == 1.0);
    CHECK(active.beta_upper == 0.0);

    auto inactive = relu_relaxation(-2.0, -1.0);
    CHECK(inactive.alpha_upper == 0.0);
    CHECK(inactive.alpha_lower == 0.0);

    auto mixed = relu_relaxation(-1.0, 3.0);
    CHECK(mixed.alpha_upper == 0.75);
    CHECK(mixed.beta_upper == 1.0);
    CHECK(mixed.alpha_lower == 1.0);

    CHECK(relu_relaxation(-3.0, 1.0).alpha_lower == 0.0);
    CHECK(relu_relaxation(-1.0, 1.0).alpha_lower == 1.0);
    CHECK(relu_relaxation(-1.0, 3.0, ReluLowerSlope::zero).alpha_lower == 0.0);
    CHECK_THROWS_AS(relu_relaxation(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("activation relaxations enclose the activation")
{
    Rng rng(21);
    const CrownOptions opt;
    for (auto act : {Activation::relu, Activation::sigmoid, Activation::tanh, Activation::identity}) {
        for (int trial = 0; trial < 300; ++trial) {
            // Mix of pure negative, pure positive and sign-crossing intervals.
            double lo = testsupport::uniform(rng, -6.0, 6.0);
            double hi = lo + testsupport::uniform(rng, 0.0, 8.0) * (trial % 5 == 0 ? 1e-6 : 1.0);
            const auto r = relax_layer<double>(act, VectorXd::Constant(1, lo),
                                                VectorXd::Constant(1, hi), opt);
            for (int k = 0; k <= 50; ++k) {
                const double z = lo + (hi - lo) * k / 50.0;
                const double f = activate(act, z);
                CHECK(r.lower_slope(0) * z + r.lower_intercept(0) <= f + 1e-12);
                CHECK(r.upper_slope(0) * z + r.upper_intercept(0) >= f - 1e-12);
            }
        }
    }
}

TEST_CASE("IBP agrees with scalar interval arithmetic")
{
    Rng rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const auto net = testsupport::random_relu_network(rng, 3, 2, 16);
        const auto box = testsupport::random_box(rng, 3, 1.0, 1.0);
        const auto out = ibp_bounds(net, box).output_box();
        const auto [lo, hi] = testsupport::loop_ibp(net, box);
        CHECK((out.lower() - lo).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((out.upper() - hi).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("CROWN on a single ReLU")
{
    // N(x) = relu(x) on [-1, 3]: upper 0.75 (x + 1); lower x (adaptive) or 0.
    const Network net({{MatrixXd::Ones(1, 1), VectorXd::Zero(1), Activation::relu}},
                      MatrixXd::Ones(1, 1), VectorXd::Zero(1));
    const BoxXd box(VectorXd::Constant(1, -1.0), VectorXd::Constant(1, 3.0));
    const auto lb = crown_bounds(net, box);
    CHECK(lb.A_upper(0, 0) == 0.75);
    CHECK(lb.b_upper(0) == 0.75);
    CHECK(lb.A_lower(0, 0) == 1.0);
    CHECK(lb.b_lower(0) == 0.0);
    const auto g = inclusion_G(lb, box.lower(), box.upper());
    CHECK(g.lower(0) == -1.0);
    CHECK(g.upper(0) == 3.0);

    CrownOptions zero;
    zero.relu_lower = ReluLowerSlope::zero;
    const auto gz = inclusion_H(net, box.lower(), box.upper(), zero);
    CHECK(gz.lower(0) == 0.0);
    CHECK(gz.upper(0) == 3.0);
}

TEST_CASE("CROWN linear bounds hold pointwise and the inclusions contain sampled outputs")
{
    Rng rng(23);
    for (auto act : {Activation::relu, Activation::sigmoid, Activation::tanh}) {
        for (auto inter : {IntermediateBounds::ibp, IntermediateBounds::crown}) {
            CrownOptions opt;
            opt.intermediate = inter;
            for (int trial = 0; trial < 10; ++trial) {
                const auto net = testsupport::random_network(rng, 3, 2, {12, 9}, act);
                const auto box = testsupport::random_box(rng, 3, 1.0, 1.5);
                const auto lb = crown_bounds(net, box, opt);
                const auto sub = testsupport::random_subbox(rng, box);
                const auto g = inclusion_G(lb, sub.lower(), sub.upper());
                const auto h = inclusion_H(net, box.lower(), box.upper(), opt);
                // Tight bounds can miss by a few ulps since nothing rounds outward.
                const double eps = 1e-12;
                for (int k = 0; k < 300; ++k) {
                    const VectorXd z = testsupport::sample_in(rng, box);
                    const VectorXd y = forward(net, z);
                    CHECK(((lb.A_lower * z + lb.b_lower).array() <= y.array() + 1e-9).all());
                    CHECK(((lb.A_upper * z + lb.b_upper).array() >= y.array() - 1e-9).all());
                    CHECK((h.lower.array() <= y.array() + eps).all());
                    CHECK((y.array() <= h.upper.array() + eps).all());
                    const VectorXd zs = testsupport::sample_in(rng, sub);
                    const VectorXd ys = forward(net, zs);
                    CHECK((g.lower.array() <= ys.array() + eps).all());
                    CHECK((ys.array() <= g.upper.array() + eps).all());
                }
            }
        }
    }
}

TEST_CASE("CROWN intermediate bounds contain sampled pre-activations")
{
    Rng rng(24);
    CrownOptions opt;
    opt.intermediate = IntermediateBounds::crown;
    for (int trial = 0; trial < 10; ++trial) {
        const auto net = testsupport::random_network(rng, 2, 1, {10, 10, 6});
        const auto box = testsupport::random_box(rng, 2, 1.0, 2.0);
        const auto pre = crown_intermediate_bounds(net, box, opt);
        REQUIRE(pre.lower.size() == net.hidden_count() + 1);
        for (int k = 0; k < 200; ++k) {
            VectorXd h = testsupport::sample_in(rng, box);
            for (std::size_t i = 0; i < net.hidden_count(); ++i) {
                const VectorXd z = net.hidden()[i].weight * h + net.hidden()[i].bias;
                CHECK((pre.lower[i].array() <= z.array() + 1e-9).all());
                CHECK((z.array() <= pre.upper[i].array() + 1e-9).all());
                h = activate(net.hidden()[i].activation, z);
            }
        }
    }
}

TEST_CASE("inclusion G is monotone in its query box")
{
    Rng rng(25);
    for (int trial = 0; trial < 50; ++trial) {
        const auto net = testsupport::random_relu_network(rng, 3, 2, 12);
        const auto box = testsupport::random_box(rng, 3, 1.0, 1.0);
        const auto lb = crown_bounds(net, box);
        const auto outer = testsupport::random_subbox(rng, box);
        const auto inner = testsupport::random_subbox(rng, outer);
        const auto go = inclusion_G(lb, outer.lower(), outer.upper());
        const auto gi = inclusion_G(lb, inner.lower(), inner.upper());
        CHECK((go.lower.array() <= gi.lower.array()).all());
        CHECK((gi.upper.array() <= go.upper.array()).all());
        const auto whole = inclusion_G(lb, box.lower(), box.upper());
        const auto h = inclusion_H(net, box.lower(), box.upper());
        CHECK(whole.lower == h.lower);
        CHECK(whole.upper == h.upper);
    }
}

TEST_CASE("inclusion G rejects queries outside its bound box")
{
    Rng rng(26);
    const auto net = testsupport::random_relu_network(rng, 2, 1, 4);
    const BoxXd box(VectorXd(Eigen::Vector2d(0, 0)), VectorXd(Eigen::Vector2d(1, 1)));
    const auto lb = crown_bounds(net, box);
    try {
        inclusion_G(lb, VectorXd(Eigen::Vector2d(0, 0)), VectorXd(Eigen::Vector2d(1, 1.5)));
        FAIL("expected BoundsEscape");
    } catch (const BoundsEscape& e) {
        CHECK(e.coordinate() == 1);
    }
    CHECK_THROWS_AS(inclusion_G(lb, VectorXd(Eigen::Vector2d(0.5, 0)), VectorXd(Eigen::Vector2d(0.4, 1))),
                    std::invalid_argument);
    CHECK_THROWS_AS(inclusion_H(net, VectorXd(Eigen::Vector2d(1, 0)), VectorXd(Eigen::Vector2d(0, 0))),
                    std::invalid_argument);
}

TEST_CASE("point boxes collapse to the forward pass")
{
    Rng rng(27);
    for (int trial = 0; trial < 20; ++trial) {
        const auto net = testsupport::random_relu_network(rng, 4, 3, 20);
        for (int k = 0; k < 50; ++k) {
            const VectorXd z = testsupport::random_vector(rng, 4, -2.0, 2.0);
            const auto h = inclusion_H(net, z, z);
            const VectorXd y = forward(net, z);
            CHECK((h.lower - y).cwiseAbs().maxCoeff() <= 1e-9);
            CHECK((h.upper - y).cwiseAbs().maxCoeff() <= 1e-9);
        }
    }
}

TEST_CASE("interval relaxation reproduces IBP bit for bit")
{
    Rng rng(28);
    CrownOptions opt;
    opt.relaxation = RelaxationMode::interval;
    for (int trial = 0; trial < 20; ++trial) {
        const auto act = trial % 2 ? Activation::relu : Activation::tanh;
        const auto net = testsupport::random_network(rng, 3, 2, {9, 7}, act);
        const auto box = testsupport::random_box(rng, 3, 1.0, 1.0);
        const auto ibp = ibp_bounds(net, box).output_box();
        const auto h = inclusion_H(net, box.lower(), box.upper(), opt);
        CHECK(h.lower == ibp.lower());
        CHECK(h.upper == ibp.upper());
    }
}
