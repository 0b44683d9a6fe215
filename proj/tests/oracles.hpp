// Independent reference computations for the test suites. Everything here
// deliberately avoids the library's own integration and Schur-complement
// paths so the two routes can disagree.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "pcrb/array.hpp"
#include "pcrb/fim.hpp"
#include "pcrb/prior.hpp"

namespace oracle {

using pcrb::Complex;
using pcrb::ComplexMatrix;
using pcrb::ComplexVector;

// plain composite Simpson on one interval
template <class F>
double simpson(F&& f, double lo, double hi, int n_even) {
    const double h = (hi - lo) / n_even;
    double acc = f(lo) + f(hi);
    for (int i = 1; i < n_even; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Simpson over the merged prior support with step = min_sigma / divisor
template <class F>
double simpson_support(const pcrb::GaussianMixturePrior& prior, double divisor, F&& f) {
    double total = 0.0;
    for (const auto& iv : prior.support()) {
        int n = static_cast<int>(std::ceil(iv.length() / (prior.min_sigma() / divisor)));
        n += n % 2;
        total += simpson(f, iv.lo, iv.hi, std::max(n, 2));
    }
    return total;
}

template <class F>
double central_difference(F&& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Direct density evaluation, term by term.
inline double mixture_pdf(const std::vector<pcrb::GaussianComponent>& comps, double theta) {
    double p = 0.0;
    for (const auto& c : comps) {
        const double d = theta - c.mean;
        p += c.weight / std::sqrt(2.0 * pcrb::kPi * c.variance) *
             std::exp(-d * d / (2.0 * c.variance));
    }
    return p;
}

// Full real-parameter Fisher matrix for (theta, Re alpha, Im alpha) assembled
// from the moment matrices with explicit matrix products, inverted
// numerically. Returns the (0,0) entry of the inverse.
inline double pcrb_by_inversion(const pcrb::SpectralMoments& m, const ComplexMatrix& r_x,
                                const pcrb::SceneConfig& scene, const pcrb::RunConfig& run,
                                double fp11) {
    const double l = run.num_samples;
    const double n_r = m.n_rx;
    const double s2 = scene.noise_power_w;
    const Complex alpha = scene.reflection_gain;

    const double t1 = (m.a1 * r_x).trace().real();
    const double t2 = (m.a2 * r_x).trace().real();
    const Complex t3 = (m.a3 * r_x).trace();
    const double t4 = (m.a4 * r_x).trace().real();

    Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
    f(0, 0) = 2.0 * std::norm(alpha) * l / s2 * (t1 + n_r * t2) + fp11;
    const Complex cross = std::conj(alpha) * t3;
    f(0, 1) = 2.0 * l * n_r / s2 * cross.real();
    f(0, 2) = -2.0 * l * n_r / s2 * cross.imag();
    f(1, 0) = f(0, 1);
    f(2, 0) = f(0, 2);
    f(1, 1) = 2.0 * l * n_r / s2 * t4;
    f(2, 2) = f(1, 1);
    return f.fullPivLu().inverse()(0, 0);
}

}  // namespace oracle
