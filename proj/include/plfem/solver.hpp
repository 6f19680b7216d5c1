// Nonlinear resolvent solves  M u + alpha R(u) = M rhs  and the inner
// symmetric positive definite linear systems.
//
// Strategy: damped Newton with Armijo backtracking on the inverse-mass
// weighted residual norm, falling back to a damped lagged-coefficient
// (Kacanov/Picard) iteration when the tangent is nonsymmetric or Newton
// stalls.
#ifndef PLFEM_SOLVER_HPP
#define PLFEM_SOLVER_HPP

#include <memory>
#include <string>
#include <vector>

#include "plfem/fem.hpp"

namespace plfem {

enum class MassMode { consistent, lumped };

struct ResolventProblem {
    std::shared_ptr<const Mesh> mesh;
    CoefficientSet coeffs;
    double alpha = 1.0;            // >= 0; alpha = 0 is the pure projection case
    DiscreteField rhs;             // right-hand side f of <f, v>_L2
    MassMode mass_mode = MassMode::consistent;
    bool wentzell = false;         // add the beta-weighted boundary mass to M
};

struct SolveReport {
    int iterations = 0;
    double final_residual = 0.0;
    std::vector<double> damping_history;
    std::vector<double> residual_history;   // weighted norm after each accepted step
    bool converged = false;
    std::string strategy;          // "projection", "newton", "newton+lagged", "lagged"
    int linear_iterations = 0;     // total inner CG iterations
};

struct SolverOptions {
    double tol = 1e-10;            // absolute, inverse-mass weighted residual norm
    int max_newton = 50;
    double armijo_slope = 1e-4;
    int max_halvings = 30;
    double theta0 = 0.5;           // initial damping of the lagged iteration
    int max_lagged = 200;
    double linear_tol = 1e-12;     // relative tolerance of inner CG solves
    int max_linear = 0;            // 0: choose 10 n + 200
    // Optional initial guess; the default is rhs for resolvent solves
    // (exact at alpha = 0) and zero for plain elliptic solves.
    const DiscreteField* initial_guess = nullptr;
};

// Preconditioned conjugate gradients with diagonal scaling.
// Terminates when the residual 2-norm drops below tol * |rhs|_2; throws
// NonConvergence past max_iter.
std::vector<double> solve_linear_spd(const SparseMatrix& matrix, const std::vector<double>& rhs,
                                     double tol, int max_iter, int* iterations_out = nullptr);

// Unique discrete solution of  M u + alpha R(u) = M rhs, with M the selected
// mass matrix (plus the beta boundary mass in Wentzell mode).
std::pair<DiscreteField, SolveReport> solve_resolvent(const ResolventProblem& problem,
                                                      const SolverOptions& opts = {});

// Steady problem R(u) = 0 (loads and omega live inside coeffs); same
// iteration without the mass term.
std::pair<DiscreteField, SolveReport> solve_elliptic(std::shared_ptr<const Mesh> mesh,
                                                     const CoefficientSet& coeffs,
                                                     MassMode mass_mode = MassMode::consistent,
                                                     const SolverOptions& opts = {});

// |u1 - u2|_q / |f1 - f2|_q for two problems sharing mesh, coefficients and
// alpha. q = 2 uses the M-norm of the selected mass, q = infinity the
// max-abs norm, other q a lumped-mass weighted l^q norm. Throws
// UndefinedRatio when f1 = f2.
double contraction_ratio(const ResolventProblem& problem1, const ResolventProblem& problem2,
                         double q, const SolverOptions& opts = {});

// Selected mass matrix of a problem (with the Wentzell boundary part).
SparseMatrix problem_mass(const ResolventProblem& problem);

// Norm helpers.
double m_norm(const SparseMatrix& mass, const std::vector<double>& v);
double max_abs_norm(const std::vector<double>& v);
double weighted_lq_norm(const std::vector<double>& weights, const std::vector<double>& v,
                        double q);

} // namespace plfem

#endif
