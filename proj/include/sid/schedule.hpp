#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace sid {

// Variance schedule for the forward chain. Cosine-shaped alpha_bar with
// per-step alpha clipped to [1e-3, 0.9999]; terminal alpha_bar must stay
// below 0.05 so x_T is near standard normal.
struct NoiseSchedule {
    int T = 25;
    Eigen::VectorXd alpha;      // alpha[t-1] = alpha_t, t = 1..T
    Eigen::VectorXd alpha_bar;  // alpha_bar[t-1] = cumulative product

    static NoiseSchedule cosine(int T = 25);

    double alpha_at(int t) const;      // t in 1..T
    double alpha_bar_at(int t) const;  // t in 0..T, alpha_bar_0 = 1
    void validate() const;
};

// Forward noising: x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) z. Returns
// (x_t, z). Throws StepOutOfRange for t outside 1..T.
std::pair<Eigen::VectorXd, Eigen::VectorXd> forward_noise(const NoiseSchedule& schedule,
                                                          const Eigen::VectorXd& x0, int t,
                                                          std::mt19937_64& rng);

// Conditional score of q(x_t | x0): -(x_t - sqrt(abar_t) x0) / (1 - abar_t).
Eigen::VectorXd conditional_score(const NoiseSchedule& schedule, const Eigen::VectorXd& xt,
                                  const Eigen::VectorXd& x0, int t);

}  // namespace sid
