#include "sid/schedule.hpp"

#include "sid/errors.hpp"

#include <cmath>

namespace sid {

NoiseSchedule NoiseSchedule::cosine(int T) {
    NoiseSchedule s;
    s.T = T;
    s.alpha.resize(T);
    s.alpha_bar.resize(T);
    const double offset = 0.008;
    auto f = [&](int t) {
        const double u = (static_cast<double>(t) / T + offset) / (1.0 + offset);
        const double c = std::cos(u * M_PI / 2.0);
        return c * c;
    };
    double abar = 1.0;
    for (int t = 1; t <= T; ++t) {
        double a = f(t) / f(t - 1);
        a = std::min(std::max(a, 1e-3), 0.9999);
        abar *= a;
        s.alpha[t - 1] = a;
        s.alpha_bar[t - 1] = abar;
    }
    s.validate();
    return s;
}

double NoiseSchedule::alpha_at(int t) const {
    if (t < 1 || t > T) throw StepOutOfRange("alpha_at: t outside 1..T");
    return alpha[t - 1];
}

double NoiseSchedule::alpha_bar_at(int t) const {
    if (t == 0) return 1.0;
    if (t < 0 || t > T) throw StepOutOfRange("alpha_bar_at: t outside 0..T");
    return alpha_bar[t - 1];
}

void NoiseSchedule::validate() const {
    if (T < 1 || alpha.size() != T || alpha_bar.size() != T) {
        throw SidError("NoiseSchedule: inconsistent sizes");
    }
    double prev = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double a = alpha[t - 1];
        if (!(a > 0.0 && a < 1.0)) throw SidError("NoiseSchedule: alpha outside (0,1)");
        if (!(alpha_bar[t - 1] < prev)) {
            throw SidError("NoiseSchedule: alpha_bar not strictly decreasing");
        }
        prev = alpha_bar[t - 1];
    }
    if (!(alpha_bar[T - 1] < 0.05)) {
        throw SidError("NoiseSchedule: terminal alpha_bar must be < 0.05");
    }
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> forward_noise(const NoiseSchedule& schedule,
                                                          const Eigen::VectorXd& x0, int t,
                                                          std::mt19937_64& rng) {
    if (t < 1 || t > schedule.T) throw StepOutOfRange("forward_noise: t outside 1..T");
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(x0.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    const double abar = schedule.alpha_bar_at(t);
    Eigen::VectorXd xt = std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * z;
    return {std::move(xt), std::move(z)};
}

Eigen::VectorXd conditional_score(const NoiseSchedule& schedule, const Eigen::VectorXd& xt,
                                  const Eigen::VectorXd& x0, int t) {
    const double abar = schedule.alpha_bar_at(t);
    return -(xt - std::sqrt(abar) * x0) / (1.0 - abar);
}

}  // namespace sid
