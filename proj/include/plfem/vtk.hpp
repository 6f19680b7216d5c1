// Legacy ASCII VTK unstructured-grid writer.
#ifndef PLFEM_VTK_HPP
#define PLFEM_VTK_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "plfem/mesh.hpp"

namespace plfem {

void write_vtk(const Mesh& mesh, const std::vector<double>& point_scalar,
               const std::string& scalar_name, std::ostream& out);
void write_vtk(const Mesh& mesh, const std::vector<double>& point_scalar,
               const std::string& scalar_name, const std::string& path);

} // namespace plfem

#endif
