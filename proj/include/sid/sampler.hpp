#pragma once

#include "sid/projection.hpp"
#include "sid/score_model.hpp"
#include "sid/trajectory.hpp"

#include <cstdint>
#include <utility>

namespace sid {

struct SamplerConfig {
    // Base SGLD step size; the per-step size is epsilon * (1 - abar_t)
    // (annealed Langevin convention).
    double epsilon = 2.0;
    ProjectionConfig projection;
    std::uint64_t seed = 0;
    // Project after every project_stride-th SGLD update (1 = every step
    // per the projected-sampling rule; 0 disables projection entirely).
    int project_stride = 1;
    // Test mode: 0 disables noise injection.
    double noise_scale = 1.0;
    // The returned trajectory gets one last projection with this multiple
    // of the outer-round budget.
    int final_outer_multiplier = 4;
};

// Reverse-chain SGLD from x_T ~ N(0, I):
//   x_t = x_{t+1} + eps/2 * s(x_{t+1}, t+1) + sqrt(eps) z.
// Deterministic per config.seed. Throws NonFiniteIterate on divergence.
Trajectory sample_unconstrained(const ScoreModel& model, const Conditioning& cond,
                                const SamplerConfig& config);

// Projected variant: every SGLD iterate is projected onto the stack's
// feasible set; returns the final trajectory and whether the final
// projection converged. Infeasibility is the returned flag, never a throw.
std::pair<Trajectory, bool> sample_constrained(const ScoreModel& model, const Conditioning& cond,
                                               const ConstraintStack& stack,
                                               const SamplerConfig& config);

}  // namespace sid
