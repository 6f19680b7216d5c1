// Independent reference computations used by the tests: dense factorization,
// numeric differentiation, and quadrature helpers. These never call into the
// code paths they check.
#ifndef PLFEM_TESTS_ORACLES_HPP
#define PLFEM_TESTS_ORACLES_HPP

#include <cstdint>
#include <functional>
#include <vector>

namespace oracles {

// Dense symmetric positive definite solve via Cholesky factorization.
std::vector<double> dense_spd_solve(std::vector<std::vector<double>> matrix,
                                    std::vector<double> rhs);

// Central difference derivative with Richardson step halving.
double derivative(const std::function<double(double)>& f, double x, double h = 1e-5);

// Composite 8-point Gauss-Legendre on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 int subintervals = 64);

// Deterministic uniform samples in [lo, hi); splitmix64 stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    double uniform(double lo, double hi);
    std::uint64_t next();

private:
    std::uint64_t state_;
};

} // namespace oracles

#endif
