#include "plfem/robin_series.hpp"

#include <cmath>

#include "plfem/errors.hpp"

namespace plfem {

namespace {

// Characteristic function whose positive roots are the eigenvalue square
// roots; simple roots, one near each multiple of pi for large k.
double characteristic(double lambda, double r) {
    return (lambda * lambda - r * r) * std::sin(lambda) - 2.0 * r * lambda * std::cos(lambda);
}

double bisect(double lo, double hi, double r) {
    double flo = characteristic(lo, r);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = characteristic(mid, r);
        if ((flo < 0.0) == (fmid < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-13) break;
    }
    return 0.5 * (lo + hi);
}

// Composite 8-point Gauss-Legendre on [0,1].
double integrate(const std::function<double(double)>& f, int subintervals) {
    static const double nodes[8] = {
        -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
        0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
    static const double weights[8] = {
        0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
        0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    const double h = 1.0 / subintervals;
    double sum = 0.0;
    for (int k = 0; k < subintervals; ++k) {
        const double mid = (k + 0.5) * h;
        for (int q = 0; q < 8; ++q) {
            sum += weights[q] * f(mid + 0.5 * h * nodes[q]);
        }
    }
    return sum * 0.5 * h;
}

} // namespace

RobinSeries1D::RobinSeries1D(double robin_coeff, const std::function<double(double)>& initial,
                             int modes)
    : robin_(robin_coeff) {
    if (!(robin_coeff > 0.0)) {
        throw InvalidParameter("RobinSeries1D: the Robin coefficient must be positive");
    }
    if (modes < 1) throw InvalidParameter("RobinSeries1D: need at least one mode");

    // Scan for sign changes, then bisect. All eigenvalues are positive and
    // the k-th root sits within (k-1)pi..(k+1)pi, so a fine scan suffices.
    const double scan_limit = (modes + 2) * 3.14159265358979323846;
    const double step = 1e-3;
    double prev_x = 1e-6;
    double prev_f = characteristic(prev_x, robin_);
    for (double x = prev_x + step; x < scan_limit && static_cast<int>(lambda_.size()) < modes;
         x += step) {
        const double fx = characteristic(x, robin_);
        if ((prev_f < 0.0) != (fx < 0.0)) {
            lambda_.push_back(bisect(prev_x, x, robin_));
        }
        prev_x = x;
        prev_f = fx;
    }
    if (static_cast<int>(lambda_.size()) < modes) {
        throw NonConvergence("RobinSeries1D: eigenvalue scan found too few roots",
                             static_cast<double>(lambda_.size()), modes);
    }

    const int subintervals = std::max(128, 8 * modes);
    coeff_.reserve(lambda_.size());
    for (double lam : lambda_) {
        auto mode = [lam, this](double x) {
            return lam * std::cos(lam * x) + robin_ * std::sin(lam * x);
        };
        const double num = integrate([&](double x) { return initial(x) * mode(x); }, subintervals);
        const double den = integrate([&](double x) { return mode(x) * mode(x); }, subintervals);
        coeff_.push_back(num / den);
    }
}

double RobinSeries1D::eval(double x, double t) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < lambda_.size(); ++k) {
        const double lam = lambda_[k];
        sum += coeff_[k] * (lam * std::cos(lam * x) + robin_ * std::sin(lam * x)) *
               std::exp(-lam * lam * t);
    }
    return sum;
}

} // namespace plfem
