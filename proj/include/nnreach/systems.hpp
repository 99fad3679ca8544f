#ifndef NNREACH_SYSTEMS_HPP
#define NNREACH_SYSTEMS_HPP

#include "nnreach/interval.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace nnreach {

/// Open-loop plant xdot = f(x, u, w) together with a decomposition function
/// F(x, xhat, u, uhat, w, what). Called with x <= xhat (and likewise for u, w)
/// F returns a lower bound of f over the box with coordinate i pinned to x_i;
/// with the arguments reversed it returns the matching upper bound.
class SystemModel
{
public:
    virtual ~SystemModel() = default;

    virtual Eigen::Index state_dim() const = 0;
    virtual Eigen::Index input_dim() const = 0;
    virtual Eigen::Index disturbance_dim() const = 0;

    virtual VectorXd field(const VectorXd& x, const VectorXd& u, const VectorXd& w) const = 0;
    virtual VectorXd decomposition(const VectorXd& x, const VectorXd& xhat, const VectorXd& u,
                                   const VectorXd& uhat, const VectorXd& w,
                                   const VectorXd& what) const = 0;

    virtual std::string name() const = 0;
    virtual std::vector<std::string> state_labels() const;
};

// Tight decompositions of elementary functions. With a <= ahat they return
// the minimum over [a, ahat]; with a >= ahat the maximum over [ahat, a].
double d_cos(double a, double ahat);
double d_sin(double a, double ahat);

/// Tight decomposition of the product v*c over the box spanned by (v, vhat)
/// and (c, chat). Both pairs must be ordered the same way.
double d_bilinear(double v, double c, double vhat, double chat);

struct VehicleParams
{
    double lf = 1.0;
    double lr = 1.0;
};

/// Kinematic vehicle, x = (px, py, phi, v), u = (acceleration, steering), w scalar.
class VehicleModel final : public SystemModel
{
public:
    explicit VehicleModel(VehicleParams params = {});

    Eigen::Index state_dim() const override { return 4; }
    Eigen::Index input_dim() const override { return 2; }
    Eigen::Index disturbance_dim() const override { return 1; }

    VectorXd field(const VectorXd& x, const VectorXd& u, const VectorXd& w) const override;
    VectorXd decomposition(const VectorXd& x, const VectorXd& xhat, const VectorXd& u,
                           const VectorXd& uhat, const VectorXd& w,
                           const VectorXd& what) const override;

    std::string name() const override { return "vehicle"; }
    std::vector<std::string> state_labels() const override { return {"px", "py", "phi", "v"}; }

    const VehicleParams& params() const { return params_; }

    /// Slip angle atan(lf / (lf + lr) * tan(steer)); increasing in steer.
    double slip_angle(double steer) const;

private:
    VehicleParams params_;
};

/// xdot = A x + B u + C w + c.
class LinearSystemModel final : public SystemModel
{
public:
    LinearSystemModel(MatrixXd a, MatrixXd b, MatrixXd c, VectorXd offset,
                      std::string name = "linear");

    Eigen::Index state_dim() const override { return a_.rows(); }
    Eigen::Index input_dim() const override { return b_.cols(); }
    Eigen::Index disturbance_dim() const override { return c_.cols(); }

    VectorXd field(const VectorXd& x, const VectorXd& u, const VectorXd& w) const override;

    /// Mzl(A) x + nonMzl(A) xhat + B^+ u + B^- uhat + C^+ w + C^- what + c.
    VectorXd decomposition(const VectorXd& x, const VectorXd& xhat, const VectorXd& u,
                           const VectorXd& uhat, const VectorXd& w,
                           const VectorXd& what) const override;

    std::string name() const override { return name_; }

    const MatrixXd& A() const { return a_; }
    const MatrixXd& B() const { return b_; }
    const MatrixXd& C() const { return c_; }
    const VectorXd& offset() const { return offset_; }
    const MetzlerSplit<double>& A_split() const { return a_split_; }
    const SignedMatrixSplit<double>& B_split() const { return b_split_; }
    const SignedMatrixSplit<double>& C_split() const { return c_split_; }

private:
    MatrixXd a_, b_, c_;
    VectorXd offset_;
    std::string name_;
    MetzlerSplit<double> a_split_;
    SignedMatrixSplit<double> b_split_;
    SignedMatrixSplit<double> c_split_;
};

using VectorField = std::function<VectorXd(const VectorXd&, const VectorXd&, const VectorXd&)>;

struct OracleOptions
{
    int grid = 21;                       // points per free dimension
    std::size_t max_evaluations = 10'000'000;
};

/// Brute-force tight decomposition of f_i: the minimum (ordered arguments)
/// or maximum (reversed arguments) of f_i over a grid of the box with
/// coordinate i pinned to x_i. Only dimensions of nonzero width are gridded.
/// Intended for tests on small systems.
double tight_decomposition_oracle(const VectorField& f, const VectorXd& x, const VectorXd& xhat,
                                  const VectorXd& u, const VectorXd& uhat, const VectorXd& w,
                                  const VectorXd& what, Eigen::Index i, OracleOptions opt = {});

} // namespace nnreach

#endif
