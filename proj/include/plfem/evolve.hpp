// Time evolution by the implicit Euler realization of the resolvent product
// formula  u(t) ~ (I + (t/n) A)^{-n} u0, for Robin and dynamic (Wentzell)
// boundary conditions, with optional inhomogeneous forcing.
#ifndef PLFEM_EVOLVE_HPP
#define PLFEM_EVOLVE_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plfem/solver.hpp"

namespace plfem {

using TimeField = std::function<double(double, Vec2)>;

struct EvolutionConfig {
    double t_final = 1.0;          // > 0
    int n_steps = 1;               // >= 1, uniform steps
    TimeField forcing;             // optional f(t, x), evaluated at step ends
    bool wentzell = false;         // boundary mass weighted by coeffs.beta
    MassMode mass_mode = MassMode::consistent;
    int store_stride = 1;          // keep every k-th step (first and last always)
    SolverOptions solver;
};

struct Trajectory {
    std::vector<double> times;            // increasing, times[0] = 0
    std::vector<DiscreteField> fields;    // fields[0] = initial datum
    std::vector<SolveReport> reports;     // one per stored step after the first

    const DiscreteField& final_field() const { return fields.back(); }
};

// An inner resolvent solve failed; carries the partial trajectory.
class EvolutionError : public Error {
public:
    EvolutionError(const std::string& msg, Trajectory partial, int step)
        : Error(msg + " at step " + std::to_string(step)),
          partial_trajectory(std::move(partial)), failed_step(step) {}
    Trajectory partial_trajectory;
    int failed_step;
};

// For k = 1..n solves  M u^k + dt R(u^k) = M u^{k-1} + dt M f(t_k).
// Rejects gradient-dependent lower-order terms (the semigroup framework
// requires b = b(x, u)).
Trajectory evolve(const DiscreteField& u0, const CoefficientSet& coeffs,
                  const EvolutionConfig& config);

// Self-convergence table of the product formula: |u_n(t) - u_2n(t)| for
// consecutive entries of n_list, in M-norm and max-norm.
struct ConvergenceTable {
    struct Row {
        int n_coarse = 0;
        int n_fine = 0;
        double diff_mnorm = 0.0;
        double diff_maxnorm = 0.0;
    };
    std::vector<Row> rows;
    // log2 ratios of consecutive max-norm differences; empty with < 2 rows.
    std::vector<double> observed_orders;
};

ConvergenceTable crandall_liggett_probe(const DiscreteField& u0, const CoefficientSet& coeffs,
                                        double t, const std::vector<int>& n_list,
                                        const EvolutionConfig& base_config = {});

// Max-norm defect between the direct n-step run over [0, t+s] and the
// composition of two n-step runs over [0,s] and [0,t]. The two legs use
// different step sizes, so the defect measures the first-order splitting
// error and vanishes as n grows.
struct SemigroupDefect {
    double defect = 0.0;
    Trajectory direct;
    Trajectory composite;
};

SemigroupDefect semigroup_property_check(const DiscreteField& u0, const CoefficientSet& coeffs,
                                         double t, double s, int n,
                                         const EvolutionConfig& base_config = {});

// Monitors |u^k|_inf along a trajectory; meaningful for b(x,0) = 0,
// h(x,0) = 0, zero forcing, lumped mass on a Delaunay mesh.
struct DecayReport {
    bool ok = true;
    double max_violation = 0.0;
    int at_step = -1;
};

DecayReport linf_decay_check(const Trajectory& trajectory, double slack = 1e-6);

// Trajectory export: wide CSV (one row per stored time) and one legacy
// ASCII VTK file per stored time with the point scalar "u".
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);
void write_trajectory_vtk(const Trajectory& trajectory, const std::string& directory,
                          const std::string& basename);

} // namespace plfem

#endif
