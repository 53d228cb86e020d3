#include "sid/sampler.hpp"

#include "sid/errors.hpp"
#include "sid/rng.hpp"

#include <cmath>

namespace sid {

namespace {

Eigen::VectorXd run_chain(const ScoreModel& model, const Conditioning& cond,
                          const ConstraintStack* stack, const SamplerConfig& config) {
    const NoiseSchedule& sched = model.schedule();
    const int n = model.dim();
    std::mt19937_64 rng = make_rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = normal(rng);

    Eigen::VectorXd z(n);
    for (int t = sched.T - 1; t >= 0; --t) {
        const double eps = config.epsilon * (1.0 - sched.alpha_bar_at(t + 1));
        for (int i = 0; i < n; ++i) z[i] = normal(rng);
        x += 0.5 * eps * model.score(x, t + 1, cond) +
             std::sqrt(eps) * config.noise_scale * z;
        if (!x.allFinite()) {
            throw NonFiniteIterate("sampler: non-finite iterate at t=" + std::to_string(t));
        }
        if (stack != nullptr && config.project_stride > 0 && t % config.project_stride == 0) {
            x = project(*stack, x, config.projection).y;
        }
    }
    return x;
}

}  // namespace

Trajectory sample_unconstrained(const ScoreModel& model, const Conditioning& cond,
                                const SamplerConfig& config) {
    return unflatten(run_chain(model, cond, nullptr, config));
}

std::pair<Trajectory, bool> sample_constrained(const ScoreModel& model, const Conditioning& cond,
                                               const ConstraintStack& stack,
                                               const SamplerConfig& config) {
    if (stack.dim() != model.dim()) {
        throw DimensionMismatch("sample_constrained: stack/model dimension mismatch");
    }
    Eigen::VectorXd x = run_chain(model, cond, &stack, config);
    if (config.project_stride <= 0) {
        // Projection disabled (test mode): identical to the plain chain.
        return {unflatten(x), stack.max_violation(x) <= config.projection.tol};
    }
    ProjectionConfig final_cfg = config.projection;
    final_cfg.outer_rounds *= std::max(1, config.final_outer_multiplier);
    const ProjectionResult res = project(stack, x, final_cfg);
    return {unflatten(res.y), res.converged};
}

}  // namespace sid
