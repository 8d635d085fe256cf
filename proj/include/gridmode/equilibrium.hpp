#pragma once

#include "gridmode/modes.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gridmode {

/// Closed-loop fixed point, expressed in per-unit in the grid-synchronous
/// frame. Angle fields inside `unified` hold delta = controller angle minus
/// grid angle; the AlphaBetaPair slots of x_phy carry (d, q) components.
struct Equilibrium {
    Mode mode = Mode::Gfl;
    UnifiedState unified;
    double residual_norm = 0.0; // inf-norm of the synchronous-frame derivative
    bool converged = false;
    bool stable = false;
    int iterations = 0;
    std::vector<std::complex<double>> eigenvalues; // sorted by descending real part
};

struct SettleResult {
    UnifiedState state;
    bool settled = false;
    double t_end = 0.0;
    double derivative_norm = 0.0;
};

enum class BasinClass { Converged, Diverged, Undecided };

const char* basin_class_name(BasinClass c);

struct BasinPoint {
    std::vector<double> offset; // full state-space offset, packed order
    BasinClass cls = BasinClass::Undecided;
    double settle_time = 0.0; // s, valid when converged
};

struct BasinMap {
    Mode mode = Mode::Gfl;
    std::vector<BasinPoint> points;
};

std::size_t state_dimension(Mode mode);
std::vector<std::string> state_labels(Mode mode);

/// Flat packing used by the solver: physical dq pairs first, then delta and
/// the controller integrators. See state_labels for the exact order.
std::vector<double> pack_state(const UnifiedState& u);
UnifiedState unpack_state(Mode mode, const std::vector<double>& x);

/// Full closed-loop state derivative in the synchronous frame; exactly zero
/// at an equilibrium.
std::vector<double> closed_loop_residual(const UnifiedState& u, const ModeRefs& refs,
                                         const SystemParams& params);

/// One RK4 step of the synchronous-frame closed loop.
UnifiedState sync_frame_rk4_step(const UnifiedState& u, const ModeRefs& refs,
                                 const SystemParams& params, double dt);

/// Reasonable phasor-informed starting point for the Newton iteration.
UnifiedState default_equilibrium_guess(Mode mode, const ModeRefs& refs,
                                       const SystemParams& params);

/// Damped Newton iteration on closed_loop_residual with a central-difference
/// Jacobian. A non-converged result carries the last iterate and residual.
Equilibrium solve_equilibrium(Mode mode, const ModeRefs& refs, const SystemParams& params,
                              const std::optional<UnifiedState>& guess = std::nullopt);

/// Independent oracle: forward-simulate the synchronous-frame closed loop
/// until the derivative norm drops below tol or t_max is reached.
SettleResult settle_by_simulation(Mode mode, const ModeRefs& refs, const SystemParams& params,
                                  double t_max, double tol,
                                  const std::optional<UnifiedState>& start = std::nullopt);

/// Eigenvalues of the finite-difference Jacobian at eq, sorted by real part
/// (most positive first). Throws on an ill-conditioned Jacobian.
std::vector<std::complex<double>> linearize(const Equilibrium& eq, const ModeRefs& refs,
                                            const SystemParams& params);

/// Classify convergence back to eq from eq + offset for each offset.
/// A trajectory that slips by more than pi in delta counts as diverged
/// (loss of synchronism) even if it relocks on a shifted angle.
BasinMap probe_basin(const Equilibrium& eq, const ModeRefs& refs, const SystemParams& params,
                     const std::vector<std::vector<double>>& offsets,
                     double t_max, double tol = 1e-6);

std::string basin_csv(const BasinMap& map);

} // namespace gridmode
