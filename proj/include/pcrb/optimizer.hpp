#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pcrb/fim.hpp"

namespace pcrb {

/// A transmit design: sample covariance R_X together with a waveform X whose
/// columns realize it, (1/L) X X^H = R_X.
struct TransmitDesign {
    ComplexMatrix covariance;  ///< N_t x N_t
    ComplexMatrix waveform;    ///< N_t x L
    std::string label;
};

/// Hermitian eigendecomposition, eigenvalues sorted descending, with a
/// deterministic phase: the first entry of each eigenvector with modulus
/// above 1e-8 is made real and nonnegative.
struct EvdResult {
    Eigen::VectorXd eigenvalues;
    ComplexMatrix eigenvectors;
};

inline EvdResult hermitian_evd(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("hermitian_evd: matrix must be square");
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
    if ((ComplexMatrix(a - a.adjoint())).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw std::invalid_argument("hermitian_evd: matrix is not Hermitian");

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a);
    if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_evd: solver failed");

    const int n = static_cast<int>(a.rows());
    EvdResult r;
    r.eigenvalues.resize(n);
    r.eigenvectors.resize(n, n);
    const double clamp_floor = -1e-9 * std::abs(a.trace().real());
    for (int i = 0; i < n; ++i) {
        double lambda = es.eigenvalues()(n - 1 - i);  // descending
        if (lambda < 0.0 && lambda >= clamp_floor) lambda = 0.0;
        r.eigenvalues(i) = lambda;
        ComplexVector q = es.eigenvectors().col(n - 1 - i);
        for (int k = 0; k < n; ++k) {
            if (std::abs(q(k)) > 1e-8) {
                q *= std::conj(q(k)) / std::abs(q(k));
                break;
            }
        }
        r.eigenvectors.col(i) = q;
    }
    return r;
}

/// Covariance-minimizing design for the upper bound: all power on the top
/// eigenvector of A1, realized by a constant probing signal sqrt(P) q1.
/// When the top eigenvalue is degenerate the smallest-index eigenvector under
/// the deterministic-phase convention is used; the objective is unaffected.
inline TransmitDesign optimal_design(const SpectralMoments& m, const RunConfig& run) {
    run.validate();
    const EvdResult evd = hermitian_evd(m.a1);
    const ComplexVector q1 = evd.eigenvectors.col(0);
    TransmitDesign d;
    d.covariance = run.power_w * (q1 * q1.adjoint());
    d.waveform = std::sqrt(run.power_w) * q1 *
                 Eigen::RowVectorXcd::Ones(run.num_samples);
    d.label = "proposed";
    return d;
}

/// All power on the first transmit antenna: R_X = diag(P, 0, ..., 0).
inline TransmitDesign benchmark_heuristic(const ArrayConfig& cfg, const RunConfig& run) {
    cfg.validate();
    run.validate();
    TransmitDesign d;
    d.covariance = ComplexMatrix::Zero(cfg.n_tx, cfg.n_tx);
    d.covariance(0, 0) = run.power_w;
    d.waveform = ComplexMatrix::Zero(cfg.n_tx, run.num_samples);
    d.waveform.row(0).setConstant(std::sqrt(run.power_w));
    d.label = "heuristic";
    return d;
}

/// Grid argmax of the prior density over its effective support (step
/// min_sigma/50), refined by golden section on the best cell. Ties go to the
/// smallest angle.
inline double prior_mode(const GaussianMixturePrior& prior) {
    const double step = prior.min_sigma() / 50.0;
    double best_theta = 0.0;
    double best_p = -1.0;
    double lo = 0.0, hi = 0.0;
    for (const Interval& iv : prior.support()) {
        const int n = std::max(2, static_cast<int>(std::ceil(iv.length() / step)));
        for (int i = 0; i <= n; ++i) {
            const double theta = iv.lo + iv.length() * i / n;
            const double p = prior.pdf(theta);
            if (p > best_p) {
                best_p = p;
                best_theta = theta;
                lo = iv.lo + iv.length() * std::max(0, i - 1) / n;
                hi = iv.lo + iv.length() * std::min(n, i + 1) / n;
            }
        }
    }
    // golden-section ascent on the bracketing cell
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = prior.pdf(x1), f2 = prior.pdf(x2);
    while (hi - lo > 1e-10) {
        if (f1 > f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = prior.pdf(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = prior.pdf(x2);
        }
    }
    return 0.5 * (lo + hi);
}

/// Beam at the highest-density angle: R_X = (P/N_t) a(theta_max) a(theta_max)^H.
inline TransmitDesign benchmark_peak_angle(const GaussianMixturePrior& prior,
                                           const ArrayConfig& cfg, const RunConfig& run) {
    cfg.validate();
    run.validate();
    const double theta_max = prior_mode(prior);
    const ComplexVector a = steering_tx(theta_max, cfg);
    TransmitDesign d;
    d.covariance = (run.power_w / cfg.n_tx) * (a * a.adjoint());
    d.waveform = std::sqrt(run.power_w / cfg.n_tx) * a *
                 Eigen::RowVectorXcd::Ones(run.num_samples);
    d.label = "peak-angle";
    return d;
}

/// Minimum achievable upper bound, evaluated directly from the top eigenpair:
/// 1 / (fp11 + (2 P |alpha|^2 L / sigma^2) q1^H A1 q1).
inline double optimal_pcrb_upper_value(const SpectralMoments& m, const SceneConfig& scene,
                                       const RunConfig& run, double fp11) {
    scene.validate();
    run.validate();
    if (!(scene.noise_power_w > 0.0))
        throw std::invalid_argument("optimal_pcrb_upper_value: noise power must be positive");
    const EvdResult evd = hermitian_evd(m.a1);
    const ComplexVector q1 = evd.eigenvectors.col(0);
    const double rayleigh = (q1.adjoint() * m.a1 * q1)(0).real();
    const double gain = 2.0 * run.power_w * std::norm(scene.reflection_gain) *
                        run.num_samples / scene.noise_power_w;
    return 1.0 / (fp11 + gain * rayleigh);
}

}  // namespace pcrb
