#include "nnreach/systems.hpp"

#include "nnreach/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nnreach {

std::vector<std::string> SystemModel::state_labels() const
{
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < state_dim(); ++i) labels.push_back("x" + std::to_string(i));
    return labels;
}

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// True when phase + 2*pi*m lies in [lo, hi] for some integer m.
bool hits_phase(double lo, double hi, double phase)
{
    const double m = std::ceil((lo - phase) / two_pi);
    return phase + two_pi * m <= hi;
}

template <typename Fn>
double periodic_decomposition(double a, double ahat, Fn fn, double max_phase, double min_phase)
{
    if (a == ahat) return fn(a);
    if (a < ahat) {
        if (hits_phase(a, ahat, min_phase)) return -1.0;
        return std::min(fn(a), fn(ahat));
    }
    if (hits_phase(ahat, a, max_phase)) return 1.0;
    return std::max(fn(a), fn(ahat));
}

void require_dim(const VectorXd& v, Eigen::Index n, const char* what)
{
    if (v.size() != n) {
        std::ostringstream os;
        os << what << ": expected dimension " << n << ", got " << v.size();
        throw std::invalid_argument(os.str());
    }
}

} // namespace

double d_cos(double a, double ahat)
{
    return periodic_decomposition(
        a, ahat, [](double z) { return std::cos(z); }, 0.0, std::numbers::pi);
}

double d_sin(double a, double ahat)
{
    return periodic_decomposition(
        a, ahat, [](double z) { return std::sin(z); }, std::numbers::pi / 2, -std::numbers::pi / 2);
}

double d_bilinear(double v, double c, double vhat, double chat)
{
    const double corners[4] = {v * c, v * chat, vhat * c, vhat * chat};
    if (v <= vhat && c <= chat) return *std::min_element(corners, corners + 4);
    if (v >= vhat && c >= chat) return *std::max_element(corners, corners + 4);
    std::ostringstream os;
    os << "d_bilinear: inconsistent ordering of (" << v << ", " << vhat << ") and (" << c << ", "
       << chat << ")";
    throw std::invalid_argument(os.str());
}

// ---------------------------------------------------------------------------

VehicleModel::VehicleModel(VehicleParams params) : params_(params)
{
    if (!(params_.lf > 0.0) || !(params_.lr > 0.0))
        throw std::invalid_argument("VehicleModel: lf and lr must be positive");
}

double VehicleModel::slip_angle(double steer) const
{
    if (!(std::abs(steer) < std::numbers::pi / 2)) {
        std::ostringstream os;
        os << "vehicle: steering input " << steer << " outside (-pi/2, pi/2)";
        throw NumericalError(os.str());
    }
    return std::atan(params_.lf / (params_.lf + params_.lr) * std::tan(steer));
}

VectorXd VehicleModel::field(const VectorXd& x, const VectorXd& u, const VectorXd& w) const
{
    require_dim(x, 4, "vehicle state");
    require_dim(u, 2, "vehicle input");
    require_dim(w, 1, "vehicle disturbance");
    const double beta = slip_angle(u(1));
    const double phi = x(2);
    const double v = x(3);
    VectorXd dx(4);
    dx << v * std::cos(phi + beta), v * std::sin(phi + beta), v / params_.lr * std::sin(beta),
        u(0) + w(0);
    return dx;
}

VectorXd VehicleModel::decomposition(const VectorXd& x, const VectorXd& xhat, const VectorXd& u,
                                     const VectorXd& uhat, const VectorXd& w,
                                     const VectorXd& what) const
{
    require_dim(x, 4, "vehicle state");
    require_dim(xhat, 4, "vehicle state");
    require_dim(u, 2, "vehicle input");
    require_dim(uhat, 2, "vehicle input");
    require_dim(w, 1, "vehicle disturbance");
    require_dim(what, 1, "vehicle disturbance");

    const double beta = slip_angle(u(1));
    const double beta_hat = slip_angle(uhat(1));
    const double head = x(2) + beta;
    const double head_hat = xhat(2) + beta_hat;
    const double v = x(3);
    const double v_hat = xhat(3);
    const double lr = params_.lr;

    VectorXd out(4);
    out(0) = d_bilinear(v, d_cos(head, head_hat), v_hat, d_cos(head_hat, head));
    out(1) = d_bilinear(v, d_sin(head, head_hat), v_hat, d_sin(head_hat, head));
    out(2) = d_bilinear(v / lr, d_sin(beta, beta_hat), v_hat / lr, d_sin(beta_hat, beta));
    out(3) = u(0) + w(0);
    return out;
}

// ---------------------------------------------------------------------------

LinearSystemModel::LinearSystemModel(MatrixXd a, MatrixXd b, MatrixXd c, VectorXd offset,
                                     std::string name)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), offset_(std::move(offset)),
      name_(std::move(name))
{
    const Eigen::Index n = a_.rows();
    if (a_.cols() != n) throw std::invalid_argument("LinearSystemModel: A must be square");
    if (b_.rows() != n) throw std::invalid_argument("LinearSystemModel: B must have n rows");
    if (c_.rows() != n) throw std::invalid_argument("LinearSystemModel: C must have n rows");
    if (offset_.size() != n)
        throw std::invalid_argument("LinearSystemModel: offset must have length n");
    a_split_ = metzler_split(a_);
    b_split_ = signed_split(b_);
    c_split_ = signed_split(c_);
}

VectorXd LinearSystemModel::field(const VectorXd& x, const VectorXd& u, const VectorXd& w) const
{
    require_dim(x, state_dim(), "linear state");
    require_dim(u, input_dim(), "linear input");
    require_dim(w, disturbance_dim(), "linear disturbance");
    VectorXd dx = a_ * x + offset_;
    if (b_.cols() > 0) dx.noalias() += b_ * u;
    if (c_.cols() > 0) dx.noalias() += c_ * w;
    return dx;
}

VectorXd LinearSystemModel::decomposition(const VectorXd& x, const VectorXd& xhat,
                                          const VectorXd& u, const VectorXd& uhat,
                                          const VectorXd& w, const VectorXd& what) const
{
    require_dim(x, state_dim(), "linear state");
    require_dim(xhat, state_dim(), "linear state");
    require_dim(u, input_dim(), "linear input");
    require_dim(uhat, input_dim(), "linear input");
    require_dim(w, disturbance_dim(), "linear disturbance");
    require_dim(what, disturbance_dim(), "linear disturbance");
    VectorXd out = a_split_.mzl * x;
    out.noalias() += a_split_.nonmzl * xhat;
    if (b_.cols() > 0) {
        out.noalias() += b_split_.plus * u;
        out.noalias() += b_split_.minus * uhat;
    }
    if (c_.cols() > 0) {
        out.noalias() += c_split_.plus * w;
        out.noalias() += c_split_.minus * what;
    }
    return out + offset_;
}

// ---------------------------------------------------------------------------

double tight_decomposition_oracle(const VectorField& f, const VectorXd& x, const VectorXd& xhat,
                                  const VectorXd& u, const VectorXd& uhat, const VectorXd& w,
                                  const VectorXd& what, Eigen::Index i, OracleOptions opt)
{
    detail::require_same_size(x.size(), xhat.size(), "tight_decomposition_oracle");
    detail::require_same_size(u.size(), uhat.size(), "tight_decomposition_oracle");
    detail::require_same_size(w.size(), what.size(), "tight_decomposition_oracle");
    if (i < 0 || i >= x.size()) throw std::out_of_range("tight_decomposition_oracle: bad index");
    if (opt.grid < 2) throw std::invalid_argument("tight_decomposition_oracle: grid must be >= 2");

    const bool ordered = (x.array() <= xhat.array()).all() && (u.array() <= uhat.array()).all() &&
                         (w.array() <= what.array()).all();
    const bool reversed = (x.array() >= xhat.array()).all() && (u.array() >= uhat.array()).all() &&
                          (w.array() >= what.array()).all();
    if (!ordered && !reversed)
        throw std::invalid_argument("tight_decomposition_oracle: inconsistent argument ordering");

    // Stack (z, eta, xi) into one vector; record which entries are gridded.
    const Eigen::Index n = x.size(), p = u.size(), q = w.size();
    VectorXd lo(n + p + q), hi(n + p + q);
    lo << x.cwiseMin(xhat), u.cwiseMin(uhat), w.cwiseMin(what);
    hi << x.cwiseMax(xhat), u.cwiseMax(uhat), w.cwiseMax(what);
    lo(i) = hi(i) = x(i);

    std::vector<Eigen::Index> free;
    for (Eigen::Index k = 0; k < lo.size(); ++k)
        if (lo(k) < hi(k)) free.push_back(k);

    double budget = 1.0;
    for (std::size_t k = 0; k < free.size(); ++k) budget *= opt.grid;
    if (budget > static_cast<double>(opt.max_evaluations)) {
        std::ostringstream os;
        os << "tight_decomposition_oracle: grid of " << budget << " points exceeds the cap of "
           << opt.max_evaluations;
        throw std::invalid_argument(os.str());
    }

    auto grid_value = [&](Eigen::Index k, int step) {
        if (step == opt.grid - 1) return hi(k);
        return lo(k) + (hi(k) - lo(k)) * static_cast<double>(step) / (opt.grid - 1);
    };

    std::vector<int> counter(free.size(), 0);
    VectorXd point = lo;
    double best = ordered ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
    while (true) {
        for (std::size_t k = 0; k < free.size(); ++k) point(free[k]) = grid_value(free[k], counter[k]);
        const double value = f(point.head(n), point.segment(n, p), point.tail(q))(i);
        best = ordered ? std::min(best, value) : std::max(best, value);

        std::size_t k = 0;
        while (k < counter.size() && ++counter[k] == opt.grid) counter[k++] = 0;
        if (k == counter.size()) break;
    }
    return best;
}

} // namespace nnreach
