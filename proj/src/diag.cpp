#include "plfem/diag.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include "plfem/errors.hpp"
#include "plfem/quadrature.hpp"

namespace plfem {

namespace {

double splitmix64_to_unit(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace

double lq_norm(const DiscreteField& field, double q, NormDomain where) {
    if (!(q >= 1.0)) throw InvalidParameter("lq_norm: q must be >= 1 or infinity");
    const Mesh& mesh = *field.mesh;

    if (std::isinf(q)) {
        double m = 0.0;
        if (where == NormDomain::domain) {
            for (double v : field.values) m = std::fmax(m, std::fabs(v));
        } else {
            for (int i : mesh.boundary_vertices()) m = std::fmax(m, std::fabs(field.values[i]));
        }
        return m;
    }

    double sum = 0.0;
    if (where == NormDomain::domain) {
        const TriangleRule rule = TriangleRule::make(2);
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            const double area = mesh.triangle_area(t);
            for (const auto& qp : rule.points) {
                const double u = field.value_at(t, qp.l0, qp.l1, qp.l2);
                sum += area * qp.weight * std::pow(std::fabs(u), q);
            }
        }
    } else {
        const EdgeRule rule = EdgeRule::make(3);
        for (const auto& be : mesh.boundary_edges()) {
            const double len = mesh.edge_length(be);
            for (const auto& qp : rule.points) {
                const double u = (1.0 - qp.t) * field.values[be.a] + qp.t * field.values[be.b];
                sum += len * qp.weight * std::pow(std::fabs(u), q);
            }
        }
    }
    return std::pow(sum, 1.0 / q);
}

namespace {

struct PairScanResult {
    double best = -1.0;
    long best_index = -1;
    int best_i = -1;
    int best_j = -1;
    long evaluated = 0;

    void consider(double ratio, long index, int i, int j) {
        ++evaluated;
        if (ratio > best || (ratio == best && index < best_index)) {
            best = ratio;
            best_index = index;
            best_i = i;
            best_j = j;
        }
    }

    void merge(const PairScanResult& other) {
        evaluated += other.evaluated;
        if (other.best_i < 0) return;
        if (other.best > best || (other.best == best && other.best_index < best_index)) {
            best = other.best;
            best_index = other.best_index;
            best_i = other.best_i;
            best_j = other.best_j;
        }
    }
};

double pair_ratio(const DiscreteField& field, int i, int j, double alpha) {
    const Vec2 d = field.mesh->vertex(i) - field.mesh->vertex(j);
    const double dist = norm(d);
    if (dist <= 1e-15) return -1.0;   // coincident vertices excluded
    return std::fabs(field.values[i] - field.values[j]) / std::pow(dist, alpha);
}

} // namespace

HoelderEstimate hoelder_seminorm(const DiscreteField& field, double alpha, long pair_budget,
                                 int threads) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw InvalidParameter("hoelder_seminorm: alpha must be in (0, 1]");
    }
    if (pair_budget < 1) throw InvalidParameter("hoelder_seminorm: pair_budget must be >= 1");
    const Mesh& mesh = *field.mesh;
    const long nv = mesh.num_vertices();
    if (nv < 2) throw InvalidParameter("hoelder_seminorm: mesh has fewer than two vertices");

    HoelderEstimate est;
    est.alpha = alpha;

    const long total_pairs = nv * (nv - 1) / 2;
    PairScanResult result;

    if (total_pairs <= pair_budget) {
        est.exhaustive = true;
        const int nthreads = std::max(1, std::min<int>(threads, 64));
        if (nthreads == 1) {
            for (int i = 0; i < nv; ++i) {
                for (int j = i + 1; j < nv; ++j) {
                    result.consider(pair_ratio(field, i, j, alpha),
                                    static_cast<long>(i) * nv + j, i, j);
                }
            }
        } else {
            // Deterministic: chunk by leading index, merge in chunk order.
            std::vector<PairScanResult> partial(nthreads);
            std::vector<std::thread> workers;
            for (int w = 0; w < nthreads; ++w) {
                workers.emplace_back([&, w]() {
                    for (int i = w; i < nv; i += nthreads) {
                        for (int j = i + 1; j < nv; ++j) {
                            partial[w].consider(pair_ratio(field, i, j, alpha),
                                                static_cast<long>(i) * nv + j, i, j);
                        }
                    }
                });
            }
            for (auto& t : workers) t.join();
            for (const auto& pr : partial) result.merge(pr);
        }
    } else {
        // Deterministic subsample: boundary-boundary pairs first, then
        // boundary vs near-corner interior pairs, then a distance-stratified
        // seeded fill.
        const auto& bverts = mesh.boundary_vertices();
        const long nb = static_cast<long>(bverts.size());
        long used = 0;

        auto consider = [&](int i, int j) {
            if (i == j) return;
            if (i > j) std::swap(i, j);
            result.consider(pair_ratio(field, i, j, alpha), static_cast<long>(i) * nv + j, i, j);
            ++used;
        };

        if (nb * (nb - 1) / 2 <= pair_budget / 2) {
            for (long a = 0; a < nb; ++a) {
                for (long b = a + 1; b < nb; ++b) consider(bverts[a], bverts[b]);
            }
        } else {
            const long stride = 1 + nb * nb / pair_budget;
            for (long a = 0; a < nb; a += 1) {
                for (long b = a + 1; b < nb; b += stride) consider(bverts[a], bverts[b]);
            }
        }

        // Corners: boundary vertices where adjacent boundary edges turn.
        std::vector<int> corner_ids;
        {
            std::vector<Vec2> first_dir(nv, Vec2{0, 0});
            std::vector<int> seen(nv, 0);
            for (const auto& be : mesh.boundary_edges()) {
                const Vec2 t = mesh.edge_tangent(be);
                for (int v : {be.a, be.b}) {
                    if (!seen[v]) {
                        first_dir[v] = t;
                        seen[v] = 1;
                    } else if (std::fabs(cross(first_dir[v], t)) > 1e-12) {
                        seen[v] = 2;
                    }
                }
            }
            for (int v = 0; v < nv; ++v) {
                if (seen[v] == 2) corner_ids.push_back(v);
            }
        }
        double diam = 0.0;
        for (int i = 0; i < nv; ++i) {
            diam = std::fmax(diam, norm(mesh.vertex(i) - mesh.vertex(0)));
        }
        diam = std::fmax(diam, 1e-30);
        const double corner_radius = 0.15 * diam;
        std::vector<int> near_corner;
        for (int i = 0; i < nv; ++i) {
            if (mesh.is_boundary_vertex(i)) continue;
            for (int c : corner_ids) {
                if (norm(mesh.vertex(i) - mesh.vertex(c)) <= corner_radius) {
                    near_corner.push_back(i);
                    break;
                }
            }
        }
        for (int i : near_corner) {
            if (used >= 3 * pair_budget / 4) break;
            for (long a = 0; a < nb && used < 3 * pair_budget / 4; ++a) consider(i, bverts[a]);
        }

        // Stratified fill by distance decade.
        std::uint64_t state = 0x5DEECE66Dull ^ static_cast<std::uint64_t>(nv);
        constexpr int kDecades = 7;
        std::array<long, kDecades> filled{};
        const long per_decade = std::max<long>(1, (pair_budget - used) / kDecades);
        long attempts = 0;
        const long max_attempts = 20 * pair_budget;
        while (used < pair_budget && attempts < max_attempts) {
            ++attempts;
            const int i = static_cast<int>(splitmix64_next(state) % nv);
            const int j = static_cast<int>(splitmix64_next(state) % nv);
            if (i == j) continue;
            const double dist = norm(mesh.vertex(i) - mesh.vertex(j));
            if (dist <= 1e-15) continue;
            int decade = static_cast<int>(std::floor(std::log10(diam / dist)));
            decade = std::clamp(decade, 0, kDecades - 1);
            if (filled[decade] >= per_decade) continue;
            ++filled[decade];
            consider(i, j);
        }
        (void)splitmix64_to_unit;
    }

    est.seminorm = std::fmax(0.0, result.best);
    est.pair_i = result.best_i;
    est.pair_j = result.best_j;
    est.pairs_evaluated = result.evaluated;
    return est;
}

MoserLadder moser_ladder(double p, int dimension, int levels) {
    if (levels < 0) throw InvalidParameter("moser_ladder: levels must be >= 0");
    if (!(p > 1.0)) throw InvalidParameter("moser_ladder: p must be in (1, inf)");
    if (!(p < dimension)) {
        throw UnsupportedCase(
            "moser_ladder: requires p < N; the cases p = N and p > N follow different "
            "embedding arguments and have no exponent ladder");
    }
    MoserLadder ladder;
    ladder.p = p;
    ladder.dimension = dimension;
    const double ratio = dimension / (dimension - p);
    double q = p;
    ladder.exponents.push_back(q);
    for (int k = 0; k < levels; ++k) {
        q *= ratio;
        ladder.exponents.push_back(q);
    }
    return ladder;
}

LadderMonitor ladder_norm_monitor(const DiscreteField& field, const MoserLadder& ladder,
                                  double growth_threshold) {
    LadderMonitor mon;
    double prev_total = -1.0;
    for (double q : ladder.exponents) {
        LadderMonitor::Row row;
        row.q = q;
        row.domain_norm = lq_norm(field, q, NormDomain::domain);
        row.boundary_norm = lq_norm(field, q, NormDomain::boundary);
        const double total = row.domain_norm + row.boundary_norm;
        if (prev_total > 0.0 && total > growth_threshold * prev_total) {
            row.flagged = true;
            mon.any_flagged = true;
        }
        prev_total = total;
        mon.rows.push_back(row);
    }
    return mon;
}

RefinementStudy refinement_study(const std::function<Mesh(int)>& mesh_for_level, int levels,
                                 StudyQuantity quantity, const StudyParams& params) {
    if (levels < 2) throw InvalidParameter("refinement_study: need at least two levels");
    RefinementStudy study;
    study.quantity = quantity == StudyQuantity::hoelder ? "hoelder"
                     : quantity == StudyQuantity::error ? "error"
                                                        : "contraction";

    std::vector<double> values;
    std::vector<double> hs;
    for (int level = 0; level < levels; ++level) {
        auto mesh = std::make_shared<Mesh>(mesh_for_level(level));
        hs.push_back(mesh->mesh_size());
        double value = 0.0;
        switch (quantity) {
            case StudyQuantity::error: {
                if (!params.exact) throw InvalidParameter("refinement_study: exact field missing");
                auto [u, rep] = solve_elliptic(mesh, params.coeffs, params.mass_mode,
                                               params.solver);
                DiscreteField diff = u;
                for (int i = 0; i < diff.size(); ++i) {
                    diff.values[i] -= params.exact(mesh->vertex(i));
                }
                value = lq_norm(diff, 2.0, NormDomain::domain);
                break;
            }
            case StudyQuantity::hoelder: {
                auto [u, rep] = solve_elliptic(mesh, params.coeffs, params.mass_mode,
                                               params.solver);
                value = hoelder_seminorm(u, params.hoelder_alpha, params.pair_budget).seminorm;
                break;
            }
            case StudyQuantity::contraction: {
                if (!params.rhs1 || !params.rhs2) {
                    throw InvalidParameter("refinement_study: contraction needs two rhs fields");
                }
                ResolventProblem p1;
                p1.mesh = mesh;
                p1.coeffs = params.coeffs;
                p1.alpha = params.alpha;
                p1.mass_mode = params.mass_mode;
                p1.rhs = DiscreteField::from_function(mesh, params.rhs1);
                ResolventProblem p2 = p1;
                p2.rhs = DiscreteField::from_function(mesh, params.rhs2);
                value = contraction_ratio(p1, p2, 2.0, params.solver);
                break;
            }
        }
        values.push_back(value);
    }

    for (int level = 0; level < levels; ++level) {
        RefinementStudy::Row row;
        row.level = level;
        row.h = hs[level];
        row.value = values[level];
        row.observed_order = std::numeric_limits<double>::quiet_NaN();
        if (quantity == StudyQuantity::error && level > 0 && values[level] > 0.0) {
            row.observed_order = std::log2(values[level - 1] / values[level]);
        }
        study.rows.push_back(row);
    }
    return study;
}

void write_study_csv(const RefinementStudy& study, std::ostream& out) {
    char buf[96];
    out << "level,h," << study.quantity << ",observed_order\n";
    for (const auto& row : study.rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", row.level, row.h, row.value,
                      row.observed_order);
        out << buf;
    }
}

} // namespace plfem
