#include "shaperank/geometry/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "shaperank/core/error.hpp"

namespace shaperank::geom {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, int line, const std::string& what) {
  throw InputError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

double parse_double(const std::string& tok, const std::filesystem::path& path, int line) {
  size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(tok, &used);
  } catch (const std::exception&) {
    fail(path, line, "expected a number, got '" + tok + "'");
  }
  if (used != tok.size()) fail(path, line, "trailing characters in number '" + tok + "'");
  return value;
}

long parse_long(const std::string& tok, const std::filesystem::path& path, int line) {
  size_t used = 0;
  long value = 0;
  try {
    value = std::stol(tok, &used);
  } catch (const std::exception&) {
    fail(path, line, "expected an integer, got '" + tok + "'");
  }
  if (used != tok.size()) fail(path, line, "trailing characters in integer '" + tok + "'");
  return value;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

// Adds the polygon to the mesh as a triangle fan, remembering source lines
// for index validation after the whole file is read.
void push_polygon(Mesh& mesh, std::vector<int>& face_lines, const std::vector<int>& poly,
                  int line, const std::filesystem::path& path) {
  if (poly.size() < 3) fail(path, line, "face with fewer than 3 vertices");
  for (size_t k = 1; k + 1 < poly.size(); ++k) {
    mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
    face_lines.push_back(line);
  }
}

Mesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  Mesh mesh;
  std::vector<int> face_lines;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    const auto toks = tokenize(raw);
    if (toks.empty()) continue;
    if (toks[0] == "v") {
      if (toks.size() < 4) fail(path, line, "vertex needs 3 coordinates");
      mesh.vertices.emplace_back(parse_double(toks[1], path, line),
                                 parse_double(toks[2], path, line),
                                 parse_double(toks[3], path, line));
    } else if (toks[0] == "f") {
      std::vector<int> poly;
      for (size_t t = 1; t < toks.size(); ++t) {
        // Accept v, v/vt, v//vn, v/vt/vn; only the vertex index matters here.
        const std::string head = toks[t].substr(0, toks[t].find('/'));
        long idx = parse_long(head, path, line);
        if (idx < 0) idx += static_cast<long>(mesh.vertices.size()) + 1;
        if (idx == 0) fail(path, line, "face vertex index 0 (OBJ indices start at 1)");
        poly.push_back(static_cast<int>(idx - 1));
      }
      push_polygon(mesh, face_lines, poly, line, path);
    }
    // vn/vt/o/g/s/usemtl/mtllib records carry nothing the pipeline needs.
  }
  for (size_t f = 0; f < mesh.faces.size(); ++f)
    for (int v : mesh.faces[f])
      if (v < 0 || v >= static_cast<int>(mesh.vertices.size()))
        fail(path, face_lines[f],
             "face vertex index " + std::to_string(v + 1) + " out of range (file has " +
                 std::to_string(mesh.vertices.size()) + " vertices)");
  return mesh;
}

Mesh load_off(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  Mesh mesh;
  std::vector<int> face_lines;
  std::string raw;
  int line = 0;
  std::vector<std::string> pending;  // tokens not yet consumed, with their line

  auto next_tokens = [&]() -> std::vector<std::string> {
    while (std::getline(in, raw)) {
      ++line;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.resize(hash);
      auto toks = tokenize(raw);
      if (!toks.empty()) return toks;
    }
    return {};
  };

  auto toks = next_tokens();
  if (toks.empty()) fail(path, line, "empty OFF file");
  if (toks[0] == "OFF") {
    toks.erase(toks.begin());
    if (toks.empty()) toks = next_tokens();
  }
  if (toks.size() < 3) fail(path, line, "expected vertex/face/edge counts");
  const long nv = parse_long(toks[0], path, line);
  const long nf = parse_long(toks[1], path, line);
  if (nv < 0 || nf < 0) fail(path, line, "negative counts");

  for (long i = 0; i < nv; ++i) {
    toks = next_tokens();
    if (toks.size() < 3) fail(path, line, "vertex needs 3 coordinates");
    mesh.vertices.emplace_back(parse_double(toks[0], path, line),
                               parse_double(toks[1], path, line),
                               parse_double(toks[2], path, line));
  }
  for (long i = 0; i < nf; ++i) {
    toks = next_tokens();
    if (toks.empty()) fail(path, line, "missing face record");
    const long k = parse_long(toks[0], path, line);
    if (k < 3) fail(path, line, "face with fewer than 3 vertices");
    if (static_cast<long>(toks.size()) < k + 1) fail(path, line, "face lists fewer indices than announced");
    std::vector<int> poly;
    for (long t = 1; t <= k; ++t)
      poly.push_back(static_cast<int>(parse_long(toks[static_cast<size_t>(t)], path, line)));
    push_polygon(mesh, face_lines, poly, line, path);
  }
  for (size_t f = 0; f < mesh.faces.size(); ++f)
    for (int v : mesh.faces[f])
      if (v < 0 || v >= static_cast<int>(mesh.vertices.size()))
        fail(path, face_lines[f],
             "face vertex index " + std::to_string(v) + " out of range (file has " +
                 std::to_string(mesh.vertices.size()) + " vertices)");
  return mesh;
}

}  // namespace

Mesh load_mesh(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("no such file: " + path.string());
  const std::string ext = lower_extension(path);
  Mesh mesh;
  if (ext == ".obj") {
    mesh = load_obj(path);
  } else if (ext == ".off") {
    mesh = load_off(path);
  } else {
    throw InputError("unsupported mesh format '" + ext + "' for " + path.string() +
                     " (expected .obj or .off)");
  }
  clean_mesh(mesh);
  if (mesh.vertices.empty() || mesh.faces.empty())
    throw InputError("empty mesh: " + path.string());
  recompute_vertex_normals(mesh);
  return mesh;
}

std::string format_obj(const Mesh& mesh) {
  std::string text;
  text.reserve(mesh.vertices.size() * 60 + mesh.faces.size() * 16);
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    text += buf;
  }
  for (const auto& n : mesh.normals) {
    std::snprintf(buf, sizeof(buf), "vn %.17g %.17g %.17g\n", n.x(), n.y(), n.z());
    text += buf;
  }
  for (const auto& [a, b, c] : mesh.faces) {
    std::snprintf(buf, sizeof(buf), "f %d %d %d\n", a + 1, b + 1, c + 1);
    text += buf;
  }
  return text;
}

void save_obj(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  const std::string text = format_obj(mesh);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InputError("write failed for " + path.string());
}

}  // namespace shaperank::geom
