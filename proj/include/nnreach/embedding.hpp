#ifndef NNREACH_EMBEDDING_HPP
#define NNREACH_EMBEDDING_HPP

#include "nnreach/bounds.hpp"
#include "nnreach/interval.hpp"
#include "nnreach/network.hpp"
#include "nnreach/systems.hpp"

#include <memory>
#include <optional>
#include <string_view>

namespace nnreach {

/// Closed-loop embedding right-hand sides.
///   global         E^G: CROWN on [x, xhat], evaluated on the whole box
///   hybrid         E^H: CROWN on [x, xhat], evaluated on coordinate-pinched boxes
///   local          E^L: CROWN recomputed on every pinched box (2n calls)
///   frozen_hybrid  E^Bs: E^H with bounds computed once per actuation step
///   linear         E^Lin: linear plants, Metzler split of A + R, A + S
///   linear_hybrid  E^Lin with A and R (resp. S) split separately
enum class Strategy { global, hybrid, local, frozen_hybrid, linear, linear_hybrid };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

/// Number of CROWN evaluations a single right-hand-side call performs.
std::size_t crown_calls_per_evaluation(Strategy s, Eigen::Index state_dim);

struct ClosedLoop
{
    std::shared_ptr<const SystemModel> system;
    std::shared_ptr<const Network> network;
    CrownOptions crown;

    /// f(x, N(x), w).
    VectorXd field(const VectorXd& x, const VectorXd& w) const;
};

/// States whose lower part exceeds the upper part by more than this abort.
inline constexpr double ordering_tolerance = 1e-9;

/// Sorts each coordinate pair, or throws OrderingViolation when a pair is
/// inverted by more than ordering_tolerance.
EmbeddingState<double> ordered_state(const EmbeddingState<double>& s);

// Each rhs_* returns the stacked 2n derivative (lower block, upper block).
// The upper block row i is F_i(xhat, x, upper input bound, lower input bound,
// what, w).

VectorXd rhs_G(const ClosedLoop& loop, const EmbeddingState<double>& state, const BoxXd& w);
VectorXd rhs_H(const ClosedLoop& loop, const EmbeddingState<double>& state, const BoxXd& w);
VectorXd rhs_L(const ClosedLoop& loop, const EmbeddingState<double>& state, const BoxXd& w);

/// E^H with frozen bounds; throws BoundsEscape if [x, xhat] leaves ctx.valid_on.
VectorXd rhs_Bs(const ClosedLoop& loop, const EmbeddingState<double>& state, const BoxXd& w,
                const LinearBounds<double>& ctx);

VectorXd rhs_Lin(const EmbeddingState<double>& state, const BoxXd& w, const LinearSystemModel& m,
                 const LinearBounds<double>& lb);
VectorXd rhs_LinH(const EmbeddingState<double>& state, const BoxXd& w, const LinearSystemModel& m,
                  const LinearBounds<double>& lb);

/// Strategy-dispatching right-hand side used by the integrator. Copies are
/// cheap; each branch of a run owns one.
class EmbeddingRHS
{
public:
    EmbeddingRHS(ClosedLoop loop, BoxXd disturbance, Strategy strategy);

    /// Bounds used by frozen_hybrid until the next call.
    void freeze(LinearBounds<double> bounds);

    VectorXd operator()(const VectorXd& stacked) const;

    Strategy strategy() const { return strategy_; }
    const ClosedLoop& loop() const { return loop_; }
    const BoxXd& disturbance() const { return disturbance_; }
    std::size_t evaluations() const { return evaluations_; }
    std::size_t crown_calls() const
    {
        return evaluations_ * crown_calls_per_evaluation(strategy_, loop_.system->state_dim());
    }

private:
    ClosedLoop loop_;
    BoxXd disturbance_;
    Strategy strategy_;
    const LinearSystemModel* linear_ = nullptr;
    std::optional<LinearBounds<double>> frozen_;
    mutable std::size_t evaluations_ = 0;
};

} // namespace nnreach

#endif
