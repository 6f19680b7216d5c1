#include "plfem/vtk.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "plfem/errors.hpp"

namespace plfem {

void write_vtk(const Mesh& mesh, const std::vector<double>& point_scalar,
               const std::string& scalar_name, std::ostream& out) {
    if (static_cast<int>(point_scalar.size()) != mesh.num_vertices()) {
        throw InvalidParameter("write_vtk: scalar size does not match vertex count");
    }
    char buf[96];
    out << "# vtk DataFile Version 3.0\n";
    out << "plfem output\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.num_vertices() << " double\n";
    for (const auto& v : mesh.vertices()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", v.x, v.y);
        out << buf;
    }
    out << "CELLS " << mesh.num_triangles() << " " << 4 * mesh.num_triangles() << "\n";
    for (const auto& t : mesh.triangles()) {
        out << "3 " << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
    }
    out << "CELL_TYPES " << mesh.num_triangles() << "\n";
    for (int t = 0; t < mesh.num_triangles(); ++t) out << "5\n";
    out << "POINT_DATA " << mesh.num_vertices() << "\n";
    out << "SCALARS " << scalar_name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (double v : point_scalar) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
}

void write_vtk(const Mesh& mesh, const std::vector<double>& point_scalar,
               const std::string& scalar_name, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_vtk: cannot open " + path);
    write_vtk(mesh, point_scalar, scalar_name, out);
}

} // namespace plfem
