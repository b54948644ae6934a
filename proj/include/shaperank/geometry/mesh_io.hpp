#pragma once

#include <filesystem>

#include "shaperank/geometry/mesh.hpp"

namespace shaperank::geom {

// Loads OBJ (v/vn/f records) or OFF, chosen by file extension. Polygon faces
// are fan-triangulated. Degenerate faces are dropped and counted on the mesh.
// Throws InputError naming the line for parse failures, and for unsupported
// extensions or empty meshes.
Mesh load_mesh(const std::filesystem::path& path);

// OBJ text (v/vn/f records) with full double precision so a save/load round
// trip is exact. save_obj writes the same text to a file.
std::string format_obj(const Mesh& mesh);
void save_obj(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace shaperank::geom
