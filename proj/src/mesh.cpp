#include "plfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "plfem/errors.hpp"

namespace plfem {

namespace {

std::pair<int, int> sorted_edge(int a, int b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

double signed_area(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    return 0.5 * cross(p1 - p0, p2 - p0);
}

} // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
           std::vector<BoundaryEdge> boundary_edges)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)) {
    build_adjacency();
    validate();
}

void Mesh::build_adjacency() {
    // Count triangle adjacencies per undirected edge and resolve the
    // triangle owning each boundary edge.
    std::map<std::pair<int, int>, std::vector<int>> edge_tris;
    for (int t = 0; t < num_triangles(); ++t) {
        const auto& tri = triangles_[t];
        for (int k = 0; k < 3; ++k) {
            edge_tris[sorted_edge(tri.v[k], tri.v[(k + 1) % 3])].push_back(t);
        }
    }
    num_edges_ = static_cast<int>(edge_tris.size());

    for (auto& be : boundary_edges_) {
        auto it = edge_tris.find(sorted_edge(be.a, be.b));
        if (it == edge_tris.end() || it->second.size() != 1) {
            throw MeshError("boundary edge (" + std::to_string(be.a) + "," +
                            std::to_string(be.b) + ") is not a one-triangle edge");
        }
        be.tri = it->second.front();
    }

    // Every one-triangle edge must be declared as a boundary edge.
    std::size_t lone = 0;
    for (const auto& [edge, tris] : edge_tris) {
        if (tris.size() == 1) ++lone;
        if (tris.size() > 2) {
            throw MeshError("edge (" + std::to_string(edge.first) + "," +
                            std::to_string(edge.second) + ") shared by " +
                            std::to_string(tris.size()) + " triangles");
        }
    }
    if (lone != boundary_edges_.size()) {
        throw MeshError("boundary edge list does not match one-triangle edges (" +
                        std::to_string(lone) + " expected, " +
                        std::to_string(boundary_edges_.size()) + " declared)");
    }

    boundary_flag_.assign(vertices_.size(), 0);
    for (const auto& be : boundary_edges_) {
        boundary_flag_[be.a] = 1;
        boundary_flag_[be.b] = 1;
    }
    boundary_vertices_.clear();
    for (int i = 0; i < num_vertices(); ++i) {
        if (boundary_flag_[i]) boundary_vertices_.push_back(i);
    }
}

void Mesh::validate() const {
    for (const auto& v : vertices_) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
            throw MeshError("non-finite vertex coordinate");
        }
    }
    for (int t = 0; t < num_triangles(); ++t) {
        const auto& tri = triangles_[t];
        for (int k = 0; k < 3; ++k) {
            if (tri.v[k] < 0 || tri.v[k] >= num_vertices()) {
                throw MeshError("triangle " + std::to_string(t) + " has invalid vertex index");
            }
        }
        if (triangle_area(t) <= 0.0) {
            throw MeshError("triangle " + std::to_string(t) +
                            " has non-positive signed area (vertices must be counterclockwise)");
        }
    }
    for (const auto& be : boundary_edges_) {
        if (be.a < 0 || be.a >= num_vertices() || be.b < 0 || be.b >= num_vertices()) {
            throw MeshError("boundary edge has invalid vertex index");
        }
        // Orientation: the adjacent triangle must lie to the left of a -> b,
        // so the outward normal points away from it.
        const auto& tri = triangles_[be.tri];
        int opp = -1;
        for (int k = 0; k < 3; ++k) {
            if (tri.v[k] != be.a && tri.v[k] != be.b) opp = tri.v[k];
        }
        if (opp < 0) throw MeshError("boundary edge adjacency is inconsistent");
        const Vec2 mid = (vertices_[be.a] + vertices_[be.b]) * 0.5;
        if (dot(edge_normal(be), vertices_[opp] - mid) >= 0.0) {
            throw MeshError("boundary edge (" + std::to_string(be.a) + "," +
                            std::to_string(be.b) + ") is oriented inward");
        }
    }
}

double Mesh::triangle_area(int t) const {
    const auto& tri = triangles_[t];
    return signed_area(vertices_[tri.v[0]], vertices_[tri.v[1]], vertices_[tri.v[2]]);
}

Vec2 Mesh::triangle_centroid(int t) const {
    const auto& tri = triangles_[t];
    return (vertices_[tri.v[0]] + vertices_[tri.v[1]] + vertices_[tri.v[2]]) / 3.0;
}

double Mesh::edge_length(const BoundaryEdge& e) const {
    return norm(vertices_[e.b] - vertices_[e.a]);
}

Vec2 Mesh::edge_tangent(const BoundaryEdge& e) const {
    const Vec2 d = vertices_[e.b] - vertices_[e.a];
    return d / norm(d);
}

Vec2 Mesh::edge_normal(const BoundaryEdge& e) const {
    const Vec2 t = edge_tangent(e);
    return {t.y, -t.x};
}

double Mesh::total_area() const {
    double area = 0.0;
    for (int t = 0; t < num_triangles(); ++t) area += triangle_area(t);
    return area;
}

double Mesh::mesh_size() const {
    double h = 0.0;
    for (const auto& tri : triangles_) {
        for (int k = 0; k < 3; ++k) {
            h = std::fmax(h, norm(vertices_[tri.v[(k + 1) % 3]] - vertices_[tri.v[k]]));
        }
    }
    return h;
}

std::array<Vec2, 3> Mesh::hat_gradients(int t) const {
    const auto& tri = triangles_[t];
    const Vec2& p0 = vertices_[tri.v[0]];
    const Vec2& p1 = vertices_[tri.v[1]];
    const Vec2& p2 = vertices_[tri.v[2]];
    const double twice_area = 2.0 * triangle_area(t);
    // grad of hat_i is the rotated opposite edge over twice the area.
    return {Vec2{(p1.y - p2.y) / twice_area, (p2.x - p1.x) / twice_area},
            Vec2{(p2.y - p0.y) / twice_area, (p0.x - p2.x) / twice_area},
            Vec2{(p0.y - p1.y) / twice_area, (p1.x - p0.x) / twice_area}};
}

int Mesh::euler_characteristic() const {
    return num_vertices() - num_edges_ + num_triangles();
}

bool Mesh::is_delaunay(double tol) const {
    // Collect the two opposite vertices of every interior edge.
    std::map<std::pair<int, int>, std::vector<int>> opposite;
    for (const auto& tri : triangles_) {
        for (int k = 0; k < 3; ++k) {
            const int a = tri.v[k], b = tri.v[(k + 1) % 3], c = tri.v[(k + 2) % 3];
            opposite[sorted_edge(a, b)].push_back(c);
        }
    }
    auto angle_at = [&](int apex, int a, int b) {
        const Vec2 u = vertices_[a] - vertices_[apex];
        const Vec2 v = vertices_[b] - vertices_[apex];
        return std::atan2(std::fabs(cross(u, v)), dot(u, v));
    };
    const double pi = 3.14159265358979323846;
    for (const auto& [edge, opps] : opposite) {
        if (opps.size() != 2) continue;
        if (angle_at(opps[0], edge.first, edge.second) +
                angle_at(opps[1], edge.first, edge.second) > pi + tol) {
            return false;
        }
    }
    return true;
}

Mesh generate_unit_square(int n) {
    if (n < 1) throw InvalidParameter("generate_unit_square: subdivision count must be >= 1");
    std::vector<Vec2> verts;
    verts.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            verts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
        }
    }
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };

    std::vector<Triangle> tris;
    tris.reserve(static_cast<std::size_t>(2) * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
            tris.push_back({{v00, v10, v11}});
            tris.push_back({{v00, v11, v01}});
        }
    }

    std::vector<BoundaryEdge> bedges;
    for (int i = 0; i < n; ++i) bedges.push_back({vid(i, 0), vid(i + 1, 0), 1, -1});
    for (int j = 0; j < n; ++j) bedges.push_back({vid(n, j), vid(n, j + 1), 2, -1});
    for (int i = n; i > 0; --i) bedges.push_back({vid(i, n), vid(i - 1, n), 3, -1});
    for (int j = n; j > 0; --j) bedges.push_back({vid(0, j), vid(0, j - 1), 4, -1});

    return Mesh(std::move(verts), std::move(tris), std::move(bedges));
}

Mesh generate_l_shape(int n) {
    if (n < 1) throw InvalidParameter("generate_l_shape: subdivision count must be >= 1");
    const int m = 2 * n;   // cells per unit length
    auto keep_cell = [n, m](int i, int j) { return i < n || j < n; (void)m; };

    // Grid vertex ids, allocated only where used.
    std::vector<int> vid(static_cast<std::size_t>(m + 1) * (m + 1), -1);
    auto gidx = [m](int i, int j) { return j * (m + 1) + i; };
    std::vector<Vec2> verts;
    auto get_vid = [&](int i, int j) {
        int& id = vid[gidx(i, j)];
        if (id < 0) {
            id = static_cast<int>(verts.size());
            verts.push_back({static_cast<double>(i) / m, static_cast<double>(j) / m});
        }
        return id;
    };

    std::vector<Triangle> tris;
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            if (!keep_cell(i, j)) continue;
            const int v00 = get_vid(i, j), v10 = get_vid(i + 1, j);
            const int v11 = get_vid(i + 1, j + 1), v01 = get_vid(i, j + 1);
            tris.push_back({{v00, v10, v11}});
            tris.push_back({{v00, v11, v01}});
        }
    }

    // Six sides, counterclockwise: bottom, outer right, step top, step right
    // (the re-entrant side), top, left.
    std::vector<BoundaryEdge> bedges;
    for (int i = 0; i < m; ++i) bedges.push_back({get_vid(i, 0), get_vid(i + 1, 0), 1, -1});
    for (int j = 0; j < n; ++j) bedges.push_back({get_vid(m, j), get_vid(m, j + 1), 2, -1});
    for (int i = m; i > n; --i) bedges.push_back({get_vid(i, n), get_vid(i - 1, n), 3, -1});
    for (int j = n; j < m; ++j) bedges.push_back({get_vid(n, j), get_vid(n, j + 1), 4, -1});
    for (int i = n; i > 0; --i) bedges.push_back({get_vid(i, m), get_vid(i - 1, m), 5, -1});
    for (int j = m; j > 0; --j) bedges.push_back({get_vid(0, j), get_vid(0, j - 1), 6, -1});

    return Mesh(std::move(verts), std::move(tris), std::move(bedges));
}

Mesh refine_uniform(const Mesh& mesh) {
    std::vector<Vec2> verts = mesh.vertices();
    std::map<std::pair<int, int>, int> midpoint;
    auto mid_vid = [&](int a, int b) {
        const auto key = sorted_edge(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const int id = static_cast<int>(verts.size());
        verts.push_back((mesh.vertex(a) + mesh.vertex(b)) * 0.5);
        midpoint.emplace(key, id);
        return id;
    };

    std::vector<Triangle> tris;
    tris.reserve(static_cast<std::size_t>(4) * mesh.num_triangles());
    for (const auto& tri : mesh.triangles()) {
        const int a = tri.v[0], b = tri.v[1], c = tri.v[2];
        const int ab = mid_vid(a, b), bc = mid_vid(b, c), ca = mid_vid(c, a);
        tris.push_back({{a, ab, ca}});
        tris.push_back({{ab, b, bc}});
        tris.push_back({{ca, bc, c}});
        tris.push_back({{ab, bc, ca}});
    }

    std::vector<BoundaryEdge> bedges;
    bedges.reserve(static_cast<std::size_t>(2) * mesh.num_boundary_edges());
    for (const auto& be : mesh.boundary_edges()) {
        const int mid = mid_vid(be.a, be.b);
        bedges.push_back({be.a, mid, be.tag, -1});
        bedges.push_back({mid, be.b, be.tag, -1});
    }

    return Mesh(std::move(verts), std::move(tris), std::move(bedges));
}

double boundary_length(const Mesh& mesh, std::optional<int> tag) {
    double len = 0.0;
    bool any = false;
    for (const auto& be : mesh.boundary_edges()) {
        if (tag && be.tag != *tag) continue;
        len += mesh.edge_length(be);
        any = true;
    }
    if (!any) {
        throw EmptySelection("boundary_length: no boundary edges with tag " +
                             (tag ? std::to_string(*tag) : std::string("<all>")));
    }
    return len;
}

void save_mesh(const Mesh& mesh, std::ostream& out) {
    char buf[96];
    out << "vertices " << mesh.num_vertices() << " triangles " << mesh.num_triangles()
        << " bedges " << mesh.num_boundary_edges() << "\n";
    for (const auto& v : mesh.vertices()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x, v.y);
        out << buf;
    }
    for (const auto& t : mesh.triangles()) {
        out << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
    }
    for (const auto& e : mesh.boundary_edges()) {
        out << e.a << " " << e.b << " " << e.tag << "\n";
    }
}

void save_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("save_mesh: cannot open " + path);
    save_mesh(mesh, out);
}

Mesh load_mesh(std::istream& in) {
    std::string kw_v, kw_t, kw_b;
    int nv = 0, nt = 0, nb = 0;
    in >> kw_v >> nv >> kw_t >> nt >> kw_b >> nb;
    if (!in || kw_v != "vertices" || kw_t != "triangles" || kw_b != "bedges") {
        throw Error("load_mesh: malformed header");
    }
    std::vector<Vec2> verts(nv);
    for (auto& v : verts) in >> v.x >> v.y;
    std::vector<Triangle> tris(nt);
    for (auto& t : tris) in >> t.v[0] >> t.v[1] >> t.v[2];
    std::vector<BoundaryEdge> bedges(nb);
    for (auto& e : bedges) in >> e.a >> e.b >> e.tag;
    if (!in) throw Error("load_mesh: truncated file");
    return Mesh(std::move(verts), std::move(tris), std::move(bedges));
}

Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_mesh: cannot open " + path);
    return load_mesh(in);
}

} // namespace plfem
