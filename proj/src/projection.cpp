#include "sid/projection.hpp"

#include "sid/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sid {

namespace {

struct Objective {
    const ConstraintStack& stack;
    const FlatTraj& x;
    double rho;
    const Eigen::VectorXd& nu;

    double value(const FlatTraj& y, const Eigen::VectorXd& h) const {
        const double prox = (y - x).squaredNorm();
        const double lin = nu.dot(h);
        const double pen = 0.5 * rho * h.cwiseMax(0.0).squaredNorm();
        return prox + lin + pen;
    }

    // grad = 2(y - x) + sum_r (nu_r + rho*max(0,h_r)) grad h_r
    void gradient(const FlatTraj& y, const Eigen::VectorXd& h, Eigen::VectorXd& grad) const {
        grad = 2.0 * (y - x);
        const Eigen::VectorXd w = nu + rho * h.cwiseMax(0.0);
        stack.accumulate_weighted_gradient(y, w, grad);
    }
};

}  // namespace

ProjectionResult project(const ConstraintStack& stack, const FlatTraj& x,
                         const ProjectionConfig& config) {
    if (x.size() != stack.dim()) throw DimensionMismatch("project: x dimension mismatch");

    FlatTraj xp = x;
    stack.apply_pins(xp);

    FlatTraj y = xp;
    Eigen::VectorXd h = stack.residuals(y);
    double viol = stack.free_violation_of(h);

    ProjectionResult best;
    best.y = y;
    best.max_violation = viol;
    best.rounds_used = 0;
    best.converged = viol <= config.tol;
    if (best.converged) return best;

    const int n = stack.dim();
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(stack.num_residuals());
    Eigen::VectorXd grad(n);
    FlatTraj y_try(n);
    double rho = config.rho_init;
    double step = config.primal_step;

    for (int round = 0; round < config.outer_rounds; ++round) {
        Objective obj{stack, xp, rho, nu};
        double f = obj.value(y, h);
        for (int it = 0; it < config.inner_steps; ++it) {
            obj.gradient(y, h, grad);
            // Descend only along free coordinates (pins eliminated).
            for (int c = 0; c < n; ++c) {
                if (stack.is_pinned(c)) grad[c] = 0.0;
            }
            const double gnorm2 = grad.squaredNorm();
            if (gnorm2 < 1e-20) break;

            bool moved = false;
            while (step > 1e-12) {
                y_try = y - step * grad;
                const Eigen::VectorXd h_try = stack.residuals(y_try);
                const double f_try = obj.value(y_try, h_try);
                if (f_try < f) {
                    y = y_try;
                    h = h_try;
                    f = f_try;
                    moved = true;
                    step *= 1.5;  // recover after cautious phases
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;

            const double v = stack.free_violation_of(h);
            if (v < best.max_violation) {
                best.y = y;
                best.max_violation = v;
                best.rounds_used = round + 1;
            }
            if (v <= config.tol) break;
        }

        viol = stack.free_violation_of(h);
        if (viol <= config.tol) {
            best.y = y;
            best.max_violation = viol;
            best.rounds_used = round + 1;
            best.converged = true;
            return best;
        }
        nu = (nu + rho * h).cwiseMax(0.0);
        rho *= config.rho_growth;
        step = std::max(step, config.primal_step * 0.01);
    }

    best.rounds_used = config.outer_rounds;
    best.converged = best.max_violation <= config.tol;
    return best;
}

bool is_feasible(const ConstraintStack& stack, const FlatTraj& x, double tol) {
    return stack.max_violation(x) <= tol;
}

}  // namespace sid
