/** \file interp.hpp
    \brief Shape-preserving cubic Hermite interpolation (PCHIP).
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rotstar::math {

/** Piecewise cubic Hermite interpolant with Fritsch--Carlson monotone slopes.

    Monotone data yields a monotone interpolant; linear data is reproduced
    exactly. Evaluation outside [x_front, x_back] extrapolates linearly with
    the endpoint slope.
*/
class Pchip {
public:
    Pchip() = default;

    Pchip(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y))
    {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw std::invalid_argument("Pchip: need >= 2 nodes and matching sizes");
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(x_[i + 1] > x_[i]))
                throw std::invalid_argument("Pchip: abscissae must be strictly increasing");
        d_.assign(n, 0.0);
        if (n == 2) {
            d_[0] = d_[1] = (y_[1] - y_[0]) / (x_[1] - x_[0]);
        } else {
            std::vector<double> h(n - 1), delta(n - 1);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                h[i] = x_[i + 1] - x_[i];
                delta[i] = (y_[i + 1] - y_[i]) / h[i];
            }
            for (std::size_t i = 1; i + 1 < n; ++i) {
                if (delta[i - 1] * delta[i] <= 0.0) {
                    d_[i] = 0.0;
                } else {
                    // weighted harmonic mean keeps interpolant monotone
                    const double w1 = 2.0 * h[i] + h[i - 1];
                    const double w2 = h[i] + 2.0 * h[i - 1];
                    d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            d_[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
            d_[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        build_prefix_integrals();
    }

    double front() const { return x_.front(); }
    double back() const { return x_.back(); }

    double operator()(double xq) const { return eval(xq); }

    double eval(double xq) const
    {
        if (xq <= x_.front()) return y_.front() + d_.front() * (xq - x_.front());
        if (xq >= x_.back()) return y_.back() + d_.back() * (xq - x_.back());
        const std::size_t i = segment(xq);
        const double h = x_[i + 1] - x_[i];
        const double t = (xq - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * d_[i]
             + (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * d_[i + 1];
    }

    double derivative(double xq) const
    {
        if (xq <= x_.front()) return d_.front();
        if (xq >= x_.back()) return d_.back();
        const std::size_t i = segment(xq);
        const double h = x_[i + 1] - x_[i];
        const double t = (xq - x_[i]) / h;
        const double t2 = t * t;
        return ((6 * t2 - 6 * t) * y_[i] + (3 * t2 - 4 * t + 1) * h * d_[i]
              + (-6 * t2 + 6 * t) * y_[i + 1] + (3 * t2 - 2 * t) * h * d_[i + 1]) / h;
    }

    /// Integral over [a,b]; segments integrated exactly, ends extended linearly.
    double integrate(double a, double b) const
    {
        if (a > b) return -integrate(b, a);
        return antiderivative(b) - antiderivative(a);
    }

private:
    static double edge_slope(double h0, double h1, double d0, double d1)
    {
        // one-sided three-point estimate with the usual monotonicity clamps
        double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d * d0 <= 0.0) return 0.0;
        if (d0 * d1 < 0.0 && std::abs(d) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return d;
    }

    std::size_t segment(double xq) const
    {
        const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
        std::size_t i = static_cast<std::size_t>(it - x_.begin());
        if (i == 0) return 0;
        if (i >= x_.size()) return x_.size() - 2;
        return i - 1;
    }

    void build_prefix_integrals()
    {
        prefix_.assign(x_.size(), 0.0);
        for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
            const double h = x_[i + 1] - x_[i];
            prefix_[i + 1] = prefix_[i]
                + h * (0.5 * (y_[i] + y_[i + 1]) + h * (d_[i] - d_[i + 1]) / 12.0);
        }
    }

    /// Antiderivative with value 0 at the first node.
    double antiderivative(double xq) const
    {
        if (xq <= x_.front()) {
            const double dx = xq - x_.front();
            return dx * (y_.front() + 0.5 * d_.front() * dx);
        }
        if (xq >= x_.back()) {
            const double dx = xq - x_.back();
            return prefix_.back() + dx * (y_.back() + 0.5 * d_.back() * dx);
        }
        const std::size_t i = segment(xq);
        const double h = x_[i + 1] - x_[i];
        const double t = (xq - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t, t4 = t2 * t2;
        const double part =
            (0.5 * t4 - t3 + t) * y_[i] + (0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2) * h * d_[i]
          + (-0.5 * t4 + t3) * y_[i + 1] + (0.25 * t4 - t3 / 3.0) * h * d_[i + 1];
        return prefix_[i] + h * part;
    }

    std::vector<double> x_, y_, d_, prefix_;
};

} // namespace rotstar::math
