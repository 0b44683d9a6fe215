#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "pcrb/quadrature.hpp"

namespace pcrb {

using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Uniform linear array geometry. Only the spacing-to-wavelength ratio
/// d/lambda enters any expression, so absolute spacing is never stored.
struct ArrayConfig {
    int n_tx = 1;            ///< transmit antennas
    int n_rx = 1;            ///< receive antennas
    double spacing_ratio = 0.5;  ///< d / lambda

    void validate() const {
        if (n_tx < 1 || n_rx < 1)
            throw std::invalid_argument("ArrayConfig: antenna counts must be >= 1");
        if (!(spacing_ratio > 0.0) || !std::isfinite(spacing_ratio))
            throw std::invalid_argument("ArrayConfig: spacing_ratio must be positive");
    }
};

/// Physical scalars of a single-target scene. The overall reflection gain
/// alpha folds the two-way path gain ref_power/range^2 with the complex
/// radar cross-section: alpha = (ref_power / range_m^2) * rcs.
struct SceneConfig {
    Complex reflection_gain{1.0, 0.0};  ///< alpha
    double range_m = 1.0;
    double ref_power = 1.0;             ///< channel power at 1 m
    Complex rcs{1.0, 0.0};
    double noise_power_w = 1.0;         ///< per-entry noise power (may be 0 for noiseless simulation)

    /// Scene with alpha given directly; the path/RCS split is then the
    /// canonical one with unit range and unit-modulus RCS.
    static SceneConfig from_gain(Complex alpha, double noise_power_w) {
        SceneConfig s;
        s.reflection_gain = alpha;
        s.range_m = 1.0;
        s.ref_power = std::abs(alpha);
        s.rcs = (s.ref_power > 0.0) ? alpha / s.ref_power : Complex{1.0, 0.0};
        s.noise_power_w = noise_power_w;
        s.validate();
        return s;
    }

    static SceneConfig from_path(double ref_power, double range_m, Complex rcs,
                                 double noise_power_w) {
        SceneConfig s;
        s.ref_power = ref_power;
        s.range_m = range_m;
        s.rcs = rcs;
        s.reflection_gain = (ref_power / (range_m * range_m)) * rcs;
        s.noise_power_w = noise_power_w;
        s.validate();
        return s;
    }

    /// Two-way path gain ref_power / range^2 (pattern scaling).
    double path_gain() const { return ref_power / (range_m * range_m); }

    /// Keeps the reflection gain consistent while rescaling |alpha| (used by
    /// SNR sweeps, which vary |alpha|^2 with everything else fixed).
    SceneConfig with_gain_magnitude(double abs_alpha) const {
        Complex phase = reflection_gain / std::abs(reflection_gain);
        return from_gain(abs_alpha * phase, noise_power_w);
    }

    void validate() const {
        if (!(range_m > 0.0) || !(ref_power > 0.0))
            throw std::invalid_argument("SceneConfig: range_m and ref_power must be positive");
        if (!(noise_power_w >= 0.0) || !std::isfinite(noise_power_w))
            throw std::invalid_argument("SceneConfig: noise_power_w must be finite and >= 0");
        if (!(std::abs(reflection_gain) > 0.0))
            throw std::invalid_argument("SceneConfig: reflection gain must be nonzero");
        const Complex derived = path_gain() * rcs;
        if (std::abs(derived - reflection_gain) > 1e-9 * std::abs(reflection_gain))
            throw std::invalid_argument(
                "SceneConfig: reflection_gain inconsistent with ref_power/range_m^2 * rcs");
    }
};

namespace detail {

// Steering entries use the 1-based exponent factor (N - 2i + 1), i = 1..N.
// With 0-based storage index k = i - 1 the factor is (N - 2k - 1).
inline ComplexVector steering(double theta, int n, double spacing_ratio) {
    ComplexVector v(n);
    const double c = -kPi * spacing_ratio * std::sin(theta);
    for (int k = 0; k < n; ++k)
        v(k) = std::polar(1.0, c * static_cast<double>(n - 2 * k - 1));
    return v;
}

inline ComplexVector steering_deriv(double theta, int n, double spacing_ratio) {
    ComplexVector v = steering(theta, n, spacing_ratio);
    const double c = -kPi * spacing_ratio * std::cos(theta);
    for (int k = 0; k < n; ++k)
        v(k) *= Complex{0.0, c * static_cast<double>(n - 2 * k - 1)};
    return v;
}

inline double index_factor_sq_sum(int n) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        const double f = static_cast<double>(n - 2 * k - 1);
        s += f * f;
    }
    return s;
}

}  // namespace detail

inline ComplexVector steering_tx(double theta, const ArrayConfig& cfg) {
    cfg.validate();
    return detail::steering(theta, cfg.n_tx, cfg.spacing_ratio);
}

inline ComplexVector steering_rx(double theta, const ArrayConfig& cfg) {
    cfg.validate();
    return detail::steering(theta, cfg.n_rx, cfg.spacing_ratio);
}

/// d/dtheta of steering_tx. Orthogonal to steering_tx(theta) for every theta.
inline ComplexVector steering_tx_deriv(double theta, const ArrayConfig& cfg) {
    cfg.validate();
    return detail::steering_deriv(theta, cfg.n_tx, cfg.spacing_ratio);
}

inline ComplexVector steering_rx_deriv(double theta, const ArrayConfig& cfg) {
    cfg.validate();
    return detail::steering_deriv(theta, cfg.n_rx, cfg.spacing_ratio);
}

/// ||d/dtheta b(theta)||^2 in closed form:
/// (pi d/lambda)^2 cos^2(theta) * sum_m (N_r - 2m + 1)^2.
inline double rx_deriv_norm_sq(double theta, const ArrayConfig& cfg) {
    cfg.validate();
    const double c = kPi * cfg.spacing_ratio * std::cos(theta);
    return c * c * detail::index_factor_sq_sum(cfg.n_rx);
}

/// Rank-one target channel G(theta) = alpha * b(theta) a(theta)^H.
inline ComplexMatrix channel(double theta, const SceneConfig& scene, const ArrayConfig& cfg) {
    scene.validate();
    const ComplexVector a = steering_tx(theta, cfg);
    const ComplexVector b = steering_rx(theta, cfg);
    return scene.reflection_gain * (b * a.adjoint());
}

}  // namespace pcrb
