#include "support/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracles {

std::vector<double> dense_spd_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = a.size();
    // Cholesky: a = L L^T, stored in the lower triangle.
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j][j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
        if (d <= 0.0) throw std::runtime_error("dense_spd_solve: matrix not positive definite");
        a[j][j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
            a[i][j] = s / a[j][j];
        }
    }
    // Forward then backward substitution.
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i][k] * b[k];
        b[i] = s / a[i][i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a[k][ii] * b[k];
        b[ii] = s / a[ii][ii];
    }
    return b;
}

double derivative(const std::function<double(double)>& f, double x, double h) {
    const double d1 = (f(x + h) - f(x - h)) / (2 * h);
    const double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
    return (4.0 * d2 - d1) / 3.0;   // Richardson extrapolation
}

double integrate(const std::function<double(double)>& f, double a, double b, int subintervals) {
    static const double nodes[8] = {
        -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
        0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
    static const double weights[8] = {
        0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
        0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    const double h = (b - a) / subintervals;
    double sum = 0.0;
    for (int k = 0; k < subintervals; ++k) {
        const double mid = a + (k + 0.5) * h;
        for (int q = 0; q < 8; ++q) sum += weights[q] * f(mid + 0.5 * h * nodes[q]);
    }
    return sum * 0.5 * h;
}

std::uint64_t Rng::next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
    const double unit = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return lo + unit * (hi - lo);
}

} // namespace oracles
