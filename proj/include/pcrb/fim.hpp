#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pcrb/array.hpp"
#include "pcrb/prior.hpp"
#include "pcrb/quadrature.hpp"

namespace pcrb {

/// Experiment controls shared by bound evaluation and simulation.
struct RunConfig {
    int num_samples = 1;   ///< probing samples L
    double power_w = 1.0;  ///< total transmit power budget P, watts

    void validate() const {
        if (num_samples < 1) throw std::invalid_argument("RunConfig: num_samples must be >= 1");
        if (!(power_w > 0.0) || !std::isfinite(power_w))
            throw std::invalid_argument("RunConfig: power_w must be positive");
    }
};

/// Gauss-Hermite node counts for the steering moment integrals. The rule at
/// `nodes` is checked against the one at `check_nodes`; the relative
/// Frobenius difference becomes the error estimate and the finer result is
/// returned.
struct GaussHermiteSpec {
    int nodes = 60;
    int check_nodes = 90;
    double rel_tolerance = 1e-6;
};

/// Prior-weighted steering moment matrices, all N_t x N_t:
///   a1 = E[ ||db/dtheta||^2 a a^H ],  a2 = E[ da/dtheta da/dtheta^H ],
///   a3 = E[ da/dtheta a^H ],          a4 = E[ a a^H ].
/// n_rx is recorded so downstream Fisher assembly knows the receive count.
struct SpectralMoments {
    ComplexMatrix a1, a2, a3, a4;
    int n_rx = 1;
    double quad_error_estimate = 0.0;
};

/// tr(A * B) without forming the product.
inline Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a.transpose().cwiseProduct(b)).sum();
}

namespace detail {

inline SpectralMoments moments_with_rule(const GaussianMixturePrior& prior,
                                         const ArrayConfig& cfg, const GaussHermiteRule& rule) {
    const int n = cfg.n_tx;
    SpectralMoments m;
    m.a1 = ComplexMatrix::Zero(n, n);
    m.a2 = ComplexMatrix::Zero(n, n);
    m.a3 = ComplexMatrix::Zero(n, n);
    m.a4 = ComplexMatrix::Zero(n, n);
    m.n_rx = cfg.n_rx;
    const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
    for (const auto& c : prior.components()) {
        const double scale = std::sqrt(2.0 * c.variance);
        for (int i = 0; i < rule.nodes.size(); ++i) {
            const double theta = c.mean + scale * rule.nodes(i);
            const double w = c.weight * rule.weights(i) * inv_sqrt_pi;
            const ComplexVector a = steering(theta, n, cfg.spacing_ratio);
            const ComplexVector ad = steering_deriv(theta, n, cfg.spacing_ratio);
            const ComplexMatrix aaH = a * a.adjoint();
            m.a1.noalias() += (w * rx_deriv_norm_sq(theta, cfg)) * aaH;
            m.a2.noalias() += w * (ad * ad.adjoint());
            m.a3.noalias() += w * (ad * a.adjoint());
            m.a4.noalias() += w * aaH;
        }
    }
    return m;
}

inline double rel_frobenius_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-30);
}

inline void check_feasible_covariance(const ComplexMatrix& r_x, double power_w) {
    if (r_x.rows() != r_x.cols())
        throw std::invalid_argument("covariance must be square");
    const double scale = std::max(r_x.cwiseAbs().maxCoeff(), 1.0);
    if ((ComplexMatrix(r_x - r_x.adjoint())).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument("covariance must be Hermitian");
    const double trace = r_x.trace().real();
    if (trace > power_w * (1.0 + 1e-9))
        throw std::invalid_argument("covariance exceeds the power budget");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(r_x, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9 * std::max(trace, 1e-30) - 1e-14)
        throw std::invalid_argument("covariance must be positive semidefinite");
}

}  // namespace detail

/// Moment matrices by per-component Gauss-Hermite quadrature (the integrands
/// are smooth trigonometric polynomials against Gaussian weights, so the
/// rule converges spectrally however narrow the components are).
inline SpectralMoments compute_moments(const GaussianMixturePrior& prior, const ArrayConfig& cfg,
                                       const GaussHermiteSpec& spec = {}) {
    cfg.validate();
    const SpectralMoments coarse =
        detail::moments_with_rule(prior, cfg, gauss_hermite(spec.nodes));
    SpectralMoments fine = detail::moments_with_rule(prior, cfg, gauss_hermite(spec.check_nodes));
    fine.quad_error_estimate =
        std::max({detail::rel_frobenius_diff(coarse.a1, fine.a1),
                  detail::rel_frobenius_diff(coarse.a2, fine.a2),
                  detail::rel_frobenius_diff(coarse.a3, fine.a3),
                  detail::rel_frobenius_diff(coarse.a4, fine.a4)});
    if (fine.quad_error_estimate > spec.rel_tolerance)
        throw std::runtime_error("compute_moments: quadrature failed to converge");
    return fine;
}

/// Blocks of the 3x3 Fisher information matrix for (theta, Re alpha, Im alpha).
/// j_ta is the real 1x2 cross row; j_aa_scalar multiplies I_2 in the alpha
/// block; fp11 is the prior Fisher term.
struct FimBlocks {
    double j_tt = 0.0;
    Eigen::RowVector2d j_ta = Eigen::RowVector2d::Zero();
    double j_aa_scalar = 0.0;
    double fp11 = 0.0;

    Eigen::Matrix3d assemble() const {
        Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
        f(0, 0) = j_tt + fp11;
        f.block<1, 2>(0, 1) = j_ta;
        f.block<2, 1>(1, 0) = j_ta.transpose();
        f(1, 1) = j_aa_scalar;
        f(2, 2) = j_aa_scalar;
        return f;
    }
};

/// Observation Fisher blocks for a transmit sample covariance r_x:
///   j_tt = (2 |alpha|^2 L / sigma^2) [tr(A1 R) + N_r tr(A2 R)]
///   j_ta = (2 L N_r / sigma^2) [Re(conj(alpha) t3), -Im(conj(alpha) t3)],  t3 = tr(A3 R)
///   j_aa = (2 L N_r / sigma^2) tr(A4 R) * I_2
/// The cross row is the exact real-parameter Fisher row: it reduces to
/// (2 L N_r / sigma^2) t3 [alpha_R, alpha_I] for real t3, and its squared norm
/// carries |t3|^2 into the Schur complement.
inline FimBlocks fim_observation(const SpectralMoments& m, const ComplexMatrix& r_x,
                                 const SceneConfig& scene, const RunConfig& run, double fp11) {
    scene.validate();
    run.validate();
    if (!(scene.noise_power_w > 0.0))
        throw std::invalid_argument("fim_observation: noise power must be positive");
    detail::check_feasible_covariance(r_x, run.power_w);

    const double l = static_cast<double>(run.num_samples);
    const double n_r = static_cast<double>(m.n_rx);
    const double sigma2 = scene.noise_power_w;
    const Complex alpha = scene.reflection_gain;

    const double tr1 = trace_product(m.a1, r_x).real();
    const double tr2 = trace_product(m.a2, r_x).real();
    const Complex tr3 = trace_product(m.a3, r_x);
    const double tr4 = trace_product(m.a4, r_x).real();

    FimBlocks b;
    b.fp11 = fp11;
    b.j_tt = 2.0 * std::norm(alpha) * l / sigma2 * (tr1 + n_r * tr2);
    const double c = 2.0 * l * n_r / sigma2;
    const Complex cross = std::conj(alpha) * tr3;
    b.j_ta << c * cross.real(), -c * cross.imag();
    b.j_aa_scalar = c * tr4;
    return b;
}

/// Exact posterior bound for the angle: the inverse Schur complement
/// 1 / (j_tt + fp11 - ||j_ta||^2 / j_aa_scalar).
inline double pcrb_exact(const FimBlocks& blocks) {
    const double cross_sq = blocks.j_ta.squaredNorm();
    double schur_term = 0.0;
    if (blocks.j_aa_scalar > 0.0) {
        schur_term = cross_sq / blocks.j_aa_scalar;
    } else if (cross_sq > 0.0) {
        throw std::invalid_argument("pcrb_exact: zero alpha block with nonzero cross term");
    }
    const double s = blocks.j_tt + blocks.fp11 - schur_term;
    if (!(s > 0.0)) throw std::runtime_error("pcrb_exact: singular Fisher information");
    return 1.0 / s;
}

/// Tractable upper bound on the exact posterior bound:
/// k / (k fp11 + tr(A1 R)) with k = sigma^2 / (2 |alpha|^2 L).
inline double pcrb_upper(const SpectralMoments& m, const ComplexMatrix& r_x,
                         const SceneConfig& scene, const RunConfig& run, double fp11) {
    scene.validate();
    run.validate();
    if (!(scene.noise_power_w > 0.0))
        throw std::invalid_argument("pcrb_upper: noise power must be positive");
    detail::check_feasible_covariance(r_x, run.power_w);
    const double k = scene.noise_power_w /
                     (2.0 * std::norm(scene.reflection_gain) * run.num_samples);
    const double tr1 = trace_product(m.a1, r_x).real();
    const double denom = k * fp11 + tr1;
    if (!(denom > 0.0)) throw std::runtime_error("pcrb_upper: singular Fisher information");
    return k / denom;
}

/// Deterministic-angle bound at a fixed theta:
/// k / (||db/dtheta||^2 tr(a a^H R)). Returns +infinity where the array
/// pattern or the derivative vanishes; infinity is a value, not an error.
inline double crb_at(double theta, const ComplexMatrix& r_x, const SceneConfig& scene,
                     const RunConfig& run, const ArrayConfig& cfg) {
    scene.validate();
    run.validate();
    cfg.validate();
    const double k = scene.noise_power_w /
                     (2.0 * std::norm(scene.reflection_gain) * run.num_samples);
    const ComplexVector a = steering_tx(theta, cfg);
    const double beam = (a.adjoint() * r_x * a)(0).real();
    const double deriv = rx_deriv_norm_sq(theta, cfg);
    // numerical zeros count as zeros: cos(pi/2) and exact pattern nulls land
    // within 1e-30 of their mathematical zero relative to the natural scales
    const double deriv_scale =
        kPi * kPi * cfg.spacing_ratio * cfg.spacing_ratio *
        detail::index_factor_sq_sum(cfg.n_rx);
    const double beam_scale = cfg.n_tx * std::max(r_x.trace().real(), 0.0);
    if (deriv <= 1e-30 * deriv_scale || beam <= 1e-30 * beam_scale || beam <= 0.0)
        return std::numeric_limits<double>::infinity();
    return k / (deriv * beam);
}

/// Prior-weighted average of crb_at over the effective support, by the same
/// composite-Simpson scheme as the prior Fisher integrals. May be +infinity
/// if the grid meets a vanishing denominator at nonzero density. The default
/// tolerance is looser than the Fisher integrals' because beampattern nulls
/// inside low-density tails make the integrand near-singular.
inline double crb_average(const GaussianMixturePrior& prior, const ComplexMatrix& r_x,
                          const SceneConfig& scene, const RunConfig& run, const ArrayConfig& cfg,
                          const QuadratureSpec& quad = QuadratureSpec{20.0, 8.0, 0.02}) {
    detail::check_feasible_covariance(r_x, run.power_w);
    const auto support = prior.support(quad.support_sigmas);
    const double beam_scale =
        std::max(cfg.n_tx * r_x.trace().real(), std::numeric_limits<double>::min());
    double min_beam_rel = std::numeric_limits<double>::infinity();
    auto integrand = [&](double theta) {
        const double p = prior.pdf(theta);
        if (p < kDensityFloor) return 0.0;
        const ComplexVector a = steering_tx(theta, cfg);
        const double beam = (a.adjoint() * r_x * a)(0).real();
        min_beam_rel = std::min(min_beam_rel, beam / beam_scale);
        return crb_at(theta, r_x, scene, run, cfg) * p;
    };
    const double step = prior.min_sigma() / quad.step_divisor;
    const double coarse = simpson_over(support, step, integrand);
    const double fine = simpson_over(support, 0.5 * step, integrand);
    if (std::isinf(coarse) || std::isinf(fine))
        return std::numeric_limits<double>::infinity();
    if (std::abs(fine - coarse) <= quad.rel_tolerance * std::max(std::abs(fine), 1e-30))
        return fine;
    // non-convergence driven by a beampattern null inside the support: the
    // underlying integral diverges at that angle, so infinity is the answer
    if (min_beam_rel <= 1e-6) return std::numeric_limits<double>::infinity();
    throw std::runtime_error("crb_average: quadrature failed to converge");
}

/// tr(A2 R) tr(A4 R) - |tr(A3 R)|^2, nonnegative up to roundoff for any
/// Hermitian PSD R (a Cauchy-Schwarz-type bound on the moment integrals).
inline double moment_inequality_gap(const SpectralMoments& m, const ComplexMatrix& r_x) {
    detail::check_feasible_covariance(r_x, std::numeric_limits<double>::infinity());
    const double tr2 = trace_product(m.a2, r_x).real();
    const Complex tr3 = trace_product(m.a3, r_x);
    const double tr4 = trace_product(m.a4, r_x).real();
    return tr2 * tr4 - std::norm(tr3);
}

}  // namespace pcrb
