// Norms, Hoelder seminorm estimation, exponent ladders, and refinement
// studies.
#ifndef PLFEM_DIAG_HPP
#define PLFEM_DIAG_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plfem/solver.hpp"

namespace plfem {

enum class NormDomain { domain, boundary };

// Discrete L^q norm: element (or boundary edge) quadrature of |u_h|^q;
// q = infinity is the max over the relevant vertices. Throws
// InvalidParameter for q < 1.
double lq_norm(const DiscreteField& field, double q, NormDomain where);

struct HoelderEstimate {
    double alpha = 0.0;
    double seminorm = 0.0;
    int pair_i = -1;
    int pair_j = -1;
    long pairs_evaluated = 0;
    bool exhaustive = false;
};

// sup over vertex pairs of |u(x)-u(y)| / |x-y|^alpha. All pairs are scanned
// when their count fits the budget; otherwise a deterministic subsample is
// used: all boundary-boundary pairs, boundary pairs against interior
// vertices near boundary corners, and a distance-stratified seeded fill.
// Ties in the argmax break towards the lowest pair index.
HoelderEstimate hoelder_seminorm(const DiscreteField& field, double alpha, long pair_budget,
                                 int threads = 1);

struct MoserLadder {
    double p = 0.0;
    int dimension = 0;
    std::vector<double> exponents;   // q_0 = p, q_{n+1} = q_n N/(N-p)
};

// Exponent ladder q_n = (N/(N-p))^n p; requires p < N (the remaining cases
// follow different arguments and have no ladder).
MoserLadder moser_ladder(double p, int dimension, int levels);

struct LadderMonitor {
    struct Row {
        double q = 0.0;
        double domain_norm = 0.0;
        double boundary_norm = 0.0;
        bool flagged = false;
    };
    std::vector<Row> rows;
    bool any_flagged = false;
};

// Reports |u|_{L^q} (domain and boundary) per ladder rung; flags a rung when
// its total grows by more than growth_threshold over the previous one.
LadderMonitor ladder_norm_monitor(const DiscreteField& field, const MoserLadder& ladder,
                                  double growth_threshold = 10.0);

enum class StudyQuantity { hoelder, error, contraction };

struct StudyParams {
    CoefficientSet coeffs;
    MassMode mass_mode = MassMode::consistent;
    SolverOptions solver;
    // error: exact solution sampled at vertices.
    ScalarField exact;
    // hoelder: seminorm exponent and pair budget.
    double hoelder_alpha = 0.25;
    long pair_budget = 20'000'000;
    // contraction: resolvent parameter and the two right-hand sides.
    double alpha = 1.0;
    ScalarField rhs1;
    ScalarField rhs2;
};

struct RefinementStudy {
    struct Row {
        int level = 0;
        double h = 0.0;
        double value = 0.0;
        double observed_order = 0.0;   // NaN where not applicable
    };
    std::vector<Row> rows;
    std::string quantity;
};

// Re-solves the configured problem on mesh_for_level(0..levels-1) and
// reports the quantity per level with observed orders where applicable.
RefinementStudy refinement_study(const std::function<Mesh(int)>& mesh_for_level, int levels,
                                 StudyQuantity quantity, const StudyParams& params);

// CSV with a header row naming level, h, quantity, observed order.
void write_study_csv(const RefinementStudy& study, std::ostream& out);

} // namespace plfem

#endif
