#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pcrb {

inline constexpr double kPi = std::numbers::pi;

/// Closed interval on the angle axis.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

/// Nodes and weights for the physicists' Gauss-Hermite rule:
/// integral f(x) exp(-x^2) dx ~= sum_i w_i f(x_i).
struct GaussHermiteRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

/// Golub-Welsch on the symmetric tridiagonal Jacobi matrix of the Hermite
/// recurrence: eigenvalues are the nodes, weights are sqrt(pi) times the
/// squared first eigenvector components.
inline GaussHermiteRule gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: need n >= 1");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double off = std::sqrt(0.5 * static_cast<double>(i));
        jacobi(i, i - 1) = off;
        jacobi(i - 1, i) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("gauss_hermite: eigensolver failed");
    GaussHermiteRule rule;
    rule.nodes = es.eigenvalues();
    rule.weights.resize(n);
    const double sqrt_pi = std::sqrt(kPi);
    for (int i = 0; i < n; ++i) {
        const double v0 = es.eigenvectors()(0, i);
        rule.weights(i) = sqrt_pi * v0 * v0;
    }
    return rule;
}

/// E_{N(mean, sigma^2)}[f] via a Gauss-Hermite rule. The substitution
/// x = mean + sqrt(2) sigma t absorbs the Gaussian weight.
template <class F>
auto gauss_hermite_expect(const GaussHermiteRule& rule, double mean, double sigma, F&& f)
    -> decltype(f(0.0)) {
    const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
    const double scale = std::sqrt(2.0) * sigma;
    auto acc = decltype(f(0.0))(rule.weights(0) * inv_sqrt_pi * f(mean + scale * rule.nodes(0)));
    for (int i = 1; i < rule.nodes.size(); ++i)
        acc += rule.weights(i) * inv_sqrt_pi * f(mean + scale * rule.nodes(i));
    return acc;
}

/// Composite Simpson with n (even) subintervals.
template <class F>
double simpson(double lo, double hi, int n, F&& f) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("simpson: n must be even and >= 2");
    const double h = (hi - lo) / n;
    double odd = 0.0, even = 0.0;
    for (int i = 1; i < n; i += 2) odd += f(lo + i * h);
    for (int i = 2; i < n; i += 2) even += f(lo + i * h);
    return h / 3.0 * (f(lo) + f(hi) + 4.0 * odd + 2.0 * even);
}

/// Composite Simpson over a union of disjoint intervals with step <= max_step.
template <class F>
double simpson_over(const std::vector<Interval>& intervals, double max_step, F&& f) {
    double total = 0.0;
    for (const Interval& iv : intervals) {
        int n = static_cast<int>(std::ceil(iv.length() / max_step));
        n += n % 2;
        if (n < 2) n = 2;
        total += simpson(iv.lo, iv.hi, n, f);
    }
    return total;
}

}  // namespace pcrb
