#pragma once

#include "sid/constraints.hpp"

namespace sid {

struct ProjectionConfig {
    double rho_init = 1.0;
    double rho_growth = 2.0;
    int outer_rounds = 10;
    int inner_steps = 50;
    double primal_step = 1e-2;  // backtracking halves it on objective increase
    double tol = 1e-4;          // max-violation tolerance, world units
};

struct ProjectionResult {
    FlatTraj y;
    double max_violation = 0.0;
    int rounds_used = 0;
    bool converged = false;
};

// Euclidean projection of x onto the stack's feasible set via the
// augmented Lagrangian
//   L_rho(y, nu) = ||y - x||^2 + nu^T h(y) + rho/2 ||max(0, h(y))||^2
// with primal gradient descent, dual ascent nu <- max(0, nu + rho h(y)),
// and rho growth each outer round. Pinned coordinates are substituted up
// front and never optimized. Non-convergence is reported, not thrown;
// the best iterate by max violation is returned.
ProjectionResult project(const ConstraintStack& stack, const FlatTraj& x,
                         const ProjectionConfig& config);

bool is_feasible(const ConstraintStack& stack, const FlatTraj& x, double tol);

}  // namespace sid
