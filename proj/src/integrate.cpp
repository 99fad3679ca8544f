#include "nnreach/integrate.hpp"

#include "nnreach/errors.hpp"

#include <cmath>
#include <sstream>

namespace nnreach {

std::string_view to_string(IntegratorMethod m)
{
    return m == IntegratorMethod::euler ? "euler" : "rk4";
}

std::optional<IntegratorMethod> parse_integrator(std::string_view name)
{
    if (name == "euler") return IntegratorMethod::euler;
    if (name == "rk4") return IntegratorMethod::rk4;
    return std::nullopt;
}

IntegratorConfig IntegratorConfig::defaults(double actuation_step)
{
    return {IntegratorMethod::rk4, actuation_step / 25.0, actuation_step};
}

void IntegratorConfig::validate() const
{
    if (!(step > 0.0) || !std::isfinite(step))
        throw ConfigError("integrator step must be positive");
    if (!(actuation_step > 0.0) || !std::isfinite(actuation_step))
        throw ConfigError("actuation step dt must be positive");
    if (step > actuation_step * (1.0 + 1e-12))
        throw ConfigError("integrator step must not exceed the actuation step dt");
    step_count(actuation_step, step);
}

std::size_t IntegratorConfig::steps_per_actuation() const
{
    return step_count(actuation_step, step);
}

std::size_t step_count(double duration, double step)
{
    if (!(step > 0.0)) throw ConfigError("integration step must be positive");
    if (duration < 0.0) throw ConfigError("integration duration must be non-negative");
    const double ratio = duration / step;
    const double k = std::round(ratio);
    if (std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio)) {
        std::ostringstream os;
        os << "duration " << duration << " is not an integer multiple of the step " << step;
        throw ConfigError(os.str());
    }
    return static_cast<std::size_t>(k);
}

VectorXd integrator_step(const OdeRhs& f, const VectorXd& y, double h, IntegratorMethod method)
{
    if (method == IntegratorMethod::euler) return y + h * f(y);
    const VectorXd k1 = f(y);
    const VectorXd k2 = f(y + 0.5 * h * k1);
    const VectorXd k3 = f(y + 0.5 * h * k2);
    const VectorXd k4 = f(y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

void require_finite(const VectorXd& y, std::size_t step)
{
    if (!y.allFinite()) {
        std::ostringstream os;
        os << "non-finite state after integration step " << step;
        throw NumericalError(os.str());
    }
}

} // namespace

VectorXd integrate_fixed(const OdeRhs& f, VectorXd y, double duration, double step,
                         IntegratorMethod method)
{
    const std::size_t k = step_count(duration, step);
    for (std::size_t s = 0; s < k; ++s) {
        y = integrator_step(f, y, step, method);
        require_finite(y, s + 1);
    }
    return y;
}

EmbeddingState<double> integrate_embedding(const OdeRhs& rhs, const EmbeddingState<double>& init,
                                           double duration, const IntegratorConfig& cfg)
{
    detail::require_same_size(init.x.size(), init.xhat.size(), "integrate_embedding");
    if (!((init.x.array() <= init.xhat.array()).all()))
        throw std::invalid_argument("integrate_embedding: initial state must satisfy x <= xhat");
    const std::size_t k = step_count(duration, cfg.step);
    const Eigen::Index n = init.x.size();
    VectorXd y = init.stacked();
    for (std::size_t s = 0; s < k; ++s) {
        y = integrator_step(rhs, y, cfg.step, cfg.method);
        require_finite(y, s + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (y(i) - y(n + i) > ordering_tolerance) {
                std::ostringstream os;
                os << "ordering violation at t = " << static_cast<double>(s + 1) * cfg.step
                   << " in coordinate " << i << ": lower " << y(i) << " > upper " << y(n + i);
                throw OrderingViolation(os.str());
            }
        }
    }
    return EmbeddingState<double>::from_stacked(y);
}

} // namespace nnreach
