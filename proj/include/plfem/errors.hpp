// Exception hierarchy shared by all modules.
#ifndef PLFEM_ERRORS_HPP
#define PLFEM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace plfem {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside its documented range (n = 0 subdivisions, p <= 1, q < 1, ...).
class InvalidParameter : public Error {
public:
    using Error::Error;
};

// A selection (boundary tag, level list, ...) matched nothing.
class EmptySelection : public Error {
public:
    using Error::Error;
};

// Mesh invariant violated (orientation, conformity, reflection symmetry, ...).
class MeshError : public Error {
public:
    using Error::Error;
};

// A coefficient or map produced a non-finite value; carries the sample location.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& msg, double x, double y)
        : Error(msg + " at (" + std::to_string(x) + ", " + std::to_string(y) + ")"),
          where_x(x), where_y(y) {}
    double where_x;
    double where_y;
};

// Iterative solver exhausted its budget; carries the last residual norm.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& msg, double last_residual, int iterations)
        : Error(msg + " (residual " + std::to_string(last_residual) + " after " +
                std::to_string(iterations) + " iterations)"),
          residual(last_residual), iters(iterations) {}
    double residual;
    int iters;
};

// contraction_ratio with identical right-hand sides.
class UndefinedRatio : public Error {
public:
    using Error::Error;
};

// Requested configuration falls outside the implemented case split.
class UnsupportedCase : public Error {
public:
    using Error::Error;
};

} // namespace plfem

#endif
