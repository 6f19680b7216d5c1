#include "plfem/evolve.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "plfem/errors.hpp"
#include "plfem/vtk.hpp"

namespace plfem {

Trajectory evolve(const DiscreteField& u0, const CoefficientSet& coeffs,
                  const EvolutionConfig& config) {
    if (!(config.t_final > 0.0)) throw InvalidParameter("evolve: t_final must be positive");
    if (config.n_steps < 1) throw InvalidParameter("evolve: n_steps must be >= 1");
    if (config.store_stride < 1) throw InvalidParameter("evolve: store_stride must be >= 1");
    if (coeffs.has_gradient_lower_order()) {
        throw InvalidParameter(
            "evolve: gradient-dependent lower-order terms are not admissible in time stepping");
    }
    if (config.wentzell && !coeffs.beta) {
        throw InvalidParameter("evolve: Wentzell mode requires a beta field");
    }

    const double dt = config.t_final / config.n_steps;
    const auto mesh = u0.mesh;

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.fields.push_back(u0);

    ResolventProblem problem;
    problem.mesh = mesh;
    problem.coeffs = coeffs;
    problem.alpha = dt;
    problem.mass_mode = config.mass_mode;
    problem.wentzell = config.wentzell;

    DiscreteField u = u0;
    for (int k = 1; k <= config.n_steps; ++k) {
        const double t_k = k * dt;
        DiscreteField rhs = u;
        if (config.forcing) {
            for (int i = 0; i < rhs.size(); ++i) {
                rhs.values[i] += dt * config.forcing(t_k, mesh->vertex(i));
            }
        }
        problem.rhs = std::move(rhs);
        try {
            auto [u_next, report] = solve_resolvent(problem, config.solver);
            u = std::move(u_next);
            if (k % config.store_stride == 0 || k == config.n_steps) {
                traj.times.push_back(t_k);
                traj.fields.push_back(u);
                traj.reports.push_back(report);
            }
        } catch (const Error& e) {
            throw EvolutionError(std::string("evolve: inner solve failed (") + e.what() + ")",
                                 std::move(traj), k);
        }
    }
    return traj;
}

ConvergenceTable crandall_liggett_probe(const DiscreteField& u0, const CoefficientSet& coeffs,
                                        double t, const std::vector<int>& n_list,
                                        const EvolutionConfig& base_config) {
    for (std::size_t i = 0; i + 1 < n_list.size(); ++i) {
        if (n_list[i + 1] <= n_list[i]) {
            throw InvalidParameter("crandall_liggett_probe: n_list must be strictly increasing");
        }
    }
    ConvergenceTable table;
    if (n_list.size() < 2) return table;   // no consecutive pairs, empty table

    const SparseMatrix mass = assemble_mass(*u0.mesh, base_config.mass_mode == MassMode::lumped);
    std::vector<DiscreteField> finals;
    finals.reserve(n_list.size());
    for (int n : n_list) {
        EvolutionConfig cfg = base_config;
        cfg.t_final = t;
        cfg.n_steps = n;
        cfg.store_stride = n;   // only the final state matters here
        finals.push_back(evolve(u0, coeffs, cfg).final_field());
    }

    for (std::size_t i = 0; i + 1 < n_list.size(); ++i) {
        std::vector<double> d(finals[i].values);
        for (int j = 0; j < finals[i].size(); ++j) d[j] -= finals[i + 1].values[j];
        ConvergenceTable::Row row;
        row.n_coarse = n_list[i];
        row.n_fine = n_list[i + 1];
        row.diff_mnorm = m_norm(mass, d);
        row.diff_maxnorm = max_abs_norm(d);
        table.rows.push_back(row);
    }
    for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
        table.observed_orders.push_back(
            std::log2(table.rows[i].diff_maxnorm / table.rows[i + 1].diff_maxnorm));
    }
    return table;
}

SemigroupDefect semigroup_property_check(const DiscreteField& u0, const CoefficientSet& coeffs,
                                         double t, double s, int n,
                                         const EvolutionConfig& base_config) {
    if (!(t > 0.0) || !(s > 0.0)) {
        throw InvalidParameter("semigroup_property_check: t and s must be positive");
    }
    SemigroupDefect out;

    EvolutionConfig direct_cfg = base_config;
    direct_cfg.t_final = t + s;
    direct_cfg.n_steps = n;
    out.direct = evolve(u0, coeffs, direct_cfg);

    EvolutionConfig first_cfg = base_config;
    first_cfg.t_final = s;
    first_cfg.n_steps = n;
    Trajectory leg1 = evolve(u0, coeffs, first_cfg);

    EvolutionConfig second_cfg = base_config;
    second_cfg.t_final = t;
    second_cfg.n_steps = n;
    out.composite = evolve(leg1.final_field(), coeffs, second_cfg);

    std::vector<double> d(out.direct.final_field().values);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= out.composite.final_field().values[i];
    out.defect = max_abs_norm(d);
    return out;
}

DecayReport linf_decay_check(const Trajectory& trajectory, double slack) {
    DecayReport rep;
    double prev = trajectory.fields.front().max_abs();
    for (std::size_t k = 1; k < trajectory.fields.size(); ++k) {
        const double cur = trajectory.fields[k].max_abs();
        const double violation = cur - prev;
        if (violation > rep.max_violation) {
            rep.max_violation = violation;
            rep.at_step = static_cast<int>(k);
        }
        prev = cur;
    }
    rep.ok = rep.max_violation <= slack;
    return rep;
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
    char buf[48];
    out << "time";
    const int n = trajectory.fields.front().size();
    for (int i = 0; i < n; ++i) out << ",v" << i;
    out << "\n";
    for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", trajectory.times[k]);
        out << buf;
        for (int i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof buf, ",%.17g", trajectory.fields[k].values[i]);
            out << buf;
        }
        out << "\n";
    }
}

void write_trajectory_vtk(const Trajectory& trajectory, const std::string& directory,
                          const std::string& basename) {
    char name[64];
    for (std::size_t k = 0; k < trajectory.fields.size(); ++k) {
        std::snprintf(name, sizeof name, "/%s_%04zu.vtk", basename.c_str(), k);
        write_vtk(*trajectory.fields[k].mesh, trajectory.fields[k].values, "u",
                  directory + name);
    }
}

} // namespace plfem
