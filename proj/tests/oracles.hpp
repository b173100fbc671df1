#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the library routine it is meant to check.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include <Eigen/Dense>

namespace oracle {

using C = std::complex<double>;
using CM = Eigen::MatrixXcd;

/// Classical fixed-step RK4 for X' = f(X).
inline CM rk4(const std::function<CM(const CM&)>& f, CM x, double t_end, int steps) {
    const double h = t_end / steps;
    for (int i = 0; i < steps; ++i) {
        const CM k1 = f(x);
        const CM k2 = f(x + 0.5 * h * k1);
        const CM k3 = f(x + 0.5 * h * k2);
        const CM k4 = f(x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

/// int_0^T e^{tA} Q e^{tA^*} dt by integrating X' = A X + X A^* + Q from 0.
inline CM lyapunov_integral(const CM& a, const CM& q, double t_end, int steps) {
    const CM ah = a.adjoint();
    return rk4([&](const CM& x) { CM d = a * x + x * ah + q; return d; }, CM::Zero(q.rows(), q.cols()), t_end, steps);
}

/// Truncated Taylor series of e^M with scaling (reference for small inputs).
inline CM taylor_expm(const CM& m) {
    int s = 0;
    double nrm = m.cwiseAbs().colwise().sum().maxCoeff();
    while (nrm > 0.25) {
        nrm /= 2.0;
        ++s;
    }
    const CM x = m / std::pow(2.0, s);
    CM term = CM::Identity(m.rows(), m.cols());
    CM sum = term;
    for (int k = 1; k < 30; ++k) {
        term = term * x / static_cast<double>(k);
        sum += term;
    }
    for (int k = 0; k < s; ++k) sum = sum * sum;
    return sum;
}

/// Left Riemann sum of f over [0, 2pi) with m points, divided by 2pi.
inline double circle_mean(const std::function<double(double)>& f, long m) {
    double acc = 0.0;
    for (long i = 0; i < m; ++i) acc += f(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m));
    return acc / static_cast<double>(m);
}

}  // namespace oracle
