// Conforming triangulations of 2D polygonal domains with tagged boundary edges.
//
// A Mesh is immutable after construction and safe to share across threads.
// Generators, refinement and I/O are free functions returning new meshes.
#ifndef PLFEM_MESH_HPP
#define PLFEM_MESH_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "plfem/geometry.hpp"

namespace plfem {

struct Triangle {
    std::array<int, 3> v;    // vertex indices, counterclockwise
};

struct BoundaryEdge {
    int a = -1;              // first vertex, oriented so the domain lies on the left
    int b = -1;              // second vertex
    int tag = 0;             // user tag identifying the boundary piece
    int tri = -1;            // index of the unique adjacent triangle
};

class Mesh {
public:
    Mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
         std::vector<BoundaryEdge> boundary_edges);

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }
    int num_boundary_edges() const { return static_cast<int>(boundary_edges_.size()); }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

    const Vec2& vertex(int i) const { return vertices_[i]; }
    const Triangle& triangle(int t) const { return triangles_[t]; }

    double triangle_area(int t) const;
    Vec2 triangle_centroid(int t) const;

    double edge_length(const BoundaryEdge& e) const;
    // Unit tangent a -> b of a boundary edge.
    Vec2 edge_tangent(const BoundaryEdge& e) const;
    // Outward unit normal (tangent rotated clockwise).
    Vec2 edge_normal(const BoundaryEdge& e) const;

    double total_area() const;

    // Longest triangle edge over the mesh; the usual mesh size parameter.
    double mesh_size() const;

    // Gradients of the three P1 hat functions on triangle t (constant per element).
    std::array<Vec2, 3> hat_gradients(int t) const;

    // Indices of vertices lying on at least one boundary edge.
    const std::vector<int>& boundary_vertices() const { return boundary_vertices_; }
    bool is_boundary_vertex(int i) const { return boundary_flag_[i] != 0; }

    // V - E + F with F counting triangles only; 1 for a simply connected mesh,
    // 1 - holes in general.
    int euler_characteristic() const;

    // Every interior edge satisfies the opposite-angle criterion
    // (angle sums <= pi + tol); boundary edges are unconstrained.
    bool is_delaunay(double tol = 1e-12) const;

    // Number of distinct edges (interior + boundary).
    int num_edges() const { return num_edges_; }

private:
    void validate() const;
    void build_adjacency();

    std::vector<Vec2> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<BoundaryEdge> boundary_edges_;
    std::vector<int> boundary_vertices_;
    std::vector<std::uint8_t> boundary_flag_;
    int num_edges_ = 0;
};

// Structured right-triangle mesh of the unit square [0,1]^2 with 2 n^2
// triangles. Boundary tags: bottom=1, right=2, top=3, left=4. Diagonals run
// from (i,j) to (i+1,j+1), which keeps the triangulation Delaunay.
Mesh generate_unit_square(int n);

// Mesh of the L-shaped domain [0,1]^2 minus [0.5,1)x[0.5,1); grid step
// 1/(2n), re-entrant corner at (0.5, 0.5). The six sides are tagged 1..6
// counterclockwise starting from the bottom.
Mesh generate_l_shape(int n);

// Split every triangle into four via edge midpoints; boundary tags inherited.
Mesh refine_uniform(const Mesh& mesh);

// Sum of boundary edge lengths; restricted to one tag if given.
// Throws EmptySelection for a tag with no edges.
double boundary_length(const Mesh& mesh, std::optional<int> tag = std::nullopt);

// Plain-text mesh format:
//   vertices <V> triangles <T> bedges <B>
// followed by V lines "x y", T lines "i j k", B lines "i j tag".
void save_mesh(const Mesh& mesh, std::ostream& out);
void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(std::istream& in);
Mesh load_mesh(const std::string& path);

} // namespace plfem

#endif
