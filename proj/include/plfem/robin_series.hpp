// Separated-series reference solution of the 1D Robin heat problem
//
//   w_t = w_xx on (0,1),  w_x(0) = r w(0),  w_x(1) = -r w(1),  r > 0,
//
// with eigenfunctions X_k = lambda_k cos(lambda_k x) + r sin(lambda_k x)
// and eigenvalues from (lambda^2 - r^2) sin(lambda) = 2 r lambda cos(lambda).
// Products of two such series solve the 2D Robin heat equation on the unit
// square with separable data, which is what the solver benchmark uses.
#ifndef PLFEM_ROBIN_SERIES_HPP
#define PLFEM_ROBIN_SERIES_HPP

#include <functional>
#include <vector>

namespace plfem {

class RobinSeries1D {
public:
    // Eigenvalues are bisected to 1e-13; coefficients use composite
    // Gauss-Legendre quadrature of the projection integrals.
    RobinSeries1D(double robin_coeff, const std::function<double(double)>& initial, int modes);

    double eval(double x, double t) const;

    const std::vector<double>& eigenvalues() const { return lambda_; }

private:
    double robin_;
    std::vector<double> lambda_;
    std::vector<double> coeff_;
};

} // namespace plfem

#endif
