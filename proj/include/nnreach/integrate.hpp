#ifndef NNREACH_INTEGRATE_HPP
#define NNREACH_INTEGRATE_HPP

#include "nnreach/embedding.hpp"
#include "nnreach/interval.hpp"

#include <functional>
#include <optional>
#include <string_view>

namespace nnreach {

enum class IntegratorMethod { euler, rk4 };

std::string_view to_string(IntegratorMethod m);
std::optional<IntegratorMethod> parse_integrator(std::string_view name);

struct IntegratorConfig
{
    IntegratorMethod method = IntegratorMethod::rk4;
    double step = 0.01;
    double actuation_step = 0.25;

    /// rk4 with step = actuation_step / 25.
    static IntegratorConfig defaults(double actuation_step);

    /// Throws ConfigError unless 0 < step <= actuation_step and the ratio is integral.
    void validate() const;
    std::size_t steps_per_actuation() const;
};

/// Number of fixed steps covering duration; throws ConfigError if the
/// duration is not an integer multiple of step (relative tolerance 1e-9).
std::size_t step_count(double duration, double step);

using OdeRhs = std::function<VectorXd(const VectorXd&)>;

VectorXd integrator_step(const OdeRhs& f, const VectorXd& y, double h, IntegratorMethod method);

/// Plain fixed-step integration; throws NumericalError on non-finite state.
VectorXd integrate_fixed(const OdeRhs& f, VectorXd y, double duration, double step,
                         IntegratorMethod method);

/// Integrates the 2n embedding system, checking x <= xhat + ordering_tolerance
/// after every step.
EmbeddingState<double> integrate_embedding(const OdeRhs& rhs, const EmbeddingState<double>& init,
                                           double duration, const IntegratorConfig& cfg);

inline EmbeddingState<double> integrate_embedding(const EmbeddingRHS& rhs,
                                                  const EmbeddingState<double>& init,
                                                  double duration, const IntegratorConfig& cfg)
{
    return integrate_embedding(OdeRhs(std::cref(rhs)), init, duration, cfg);
}

} // namespace nnreach

#endif
