#include "tpflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tpf {

namespace {

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                (c.x() - a.x()) * (b.y() - a.y()));
}

void finalize(Mesh& mesh) {
  std::map<std::pair<int, int>, int> edge_of;
  for (int ci = 0; ci < mesh.n_cells(); ++ci) {
    auto& cell = mesh.cells[ci];
    const Vec2 a = mesh.vertices[cell.v[0]];
    const Vec2 b = mesh.vertices[cell.v[1]];
    const Vec2 c = mesh.vertices[cell.v[2]];
    cell.area = triangle_area(a, b, c);
    if (!(cell.area > 0.0)) {
      std::ostringstream os;
      os << "degenerate or clockwise cell " << ci << " (area " << cell.area
         << ")";
      throw std::runtime_error(os.str());
    }
    cell.centroid = (a + b + c) / 3.0;
    cell.diam = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    for (int i = 0; i < 3; ++i) {
      const int p = cell.v[(i + 1) % 3];
      const int q = cell.v[(i + 2) % 3];
      auto key = std::minmax(p, q);
      auto it = edge_of.find(key);
      if (it == edge_of.end()) {
        Mesh::Edge e;
        e.v = {p, q};
        e.cell_in = ci;
        const Vec2 t = mesh.vertices[q] - mesh.vertices[p];
        e.length = t.norm();
        // outward normal of a CCW cell on the directed edge p->q
        e.normal = Vec2(t.y(), -t.x()) / e.length;
        e.midpoint = 0.5 * (mesh.vertices[p] + mesh.vertices[q]);
        it = edge_of.emplace(key, mesh.n_edges()).first;
        mesh.edges.push_back(e);
      } else {
        Mesh::Edge& e = mesh.edges[it->second];
        if (e.cell_out >= 0)
          throw std::runtime_error("non-manifold edge (three adjacent cells)");
        e.cell_out = ci;
      }
      cell.edge[i] = it->second;
    }
  }
  // global orientation: lower cell index -> higher; boundary outward
  for (auto& e : mesh.edges) {
    if (e.cell_out >= 0 && e.cell_in > e.cell_out) {
      std::swap(e.cell_in, e.cell_out);
      e.normal = -e.normal;
    }
  }
  for (int ci = 0; ci < mesh.n_cells(); ++ci) {
    auto& cell = mesh.cells[ci];
    for (int i = 0; i < 3; ++i)
      cell.sign[i] = (mesh.edges[cell.edge[i]].cell_in == ci) ? 1.0 : -1.0;
  }
}

} // namespace

double Mesh::min_diam() const {
  double h = std::numeric_limits<double>::max();
  for (const auto& c : cells) h = std::min(h, c.diam);
  return h;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (const auto& c : cells) a += c.area;
  return a;
}

void Mesh::check() const {
  for (int ci = 0; ci < n_cells(); ++ci) {
    const auto& cell = cells[ci];
    if (!(cell.area > 0.0)) throw std::runtime_error("nonpositive cell area");
    Vec2 closure = Vec2::Zero();
    for (int i = 0; i < 3; ++i) {
      const Edge& e = edges[cell.edge[i]];
      if (!(e.length > 0.0)) throw std::runtime_error("zero-length edge");
      closure += cell.sign[i] * e.length * e.normal;
      const int in = e.cell_in, out = e.cell_out;
      if (in != ci && out != ci)
        throw std::runtime_error("broken cell/edge incidence");
      // sign[i]*normal must be the outward normal of the cell on edge i
      const Vec2 outward = cell.sign[i] * e.normal;
      if ((e.midpoint - cell.centroid).dot(outward) <= 0.0)
        throw std::runtime_error("inconsistent edge orientation sign");
    }
    if (closure.norm() > 1e-13 * cell.diam)
      throw std::runtime_error("polygon closure violated");
  }
  for (int ei = 0; ei < n_edges(); ++ei) {
    const Edge& e = edges[ei];
    if (e.cell_in < 0) throw std::runtime_error("edge without interior cell");
    if (e.cell_out >= 0 && e.cell_in >= e.cell_out)
      throw std::runtime_error("interior edge orientation not low-to-high");
  }
}

Mesh build_structured(int nx, int ny, double Lx, double Ly) {
  if (nx < 1 || ny < 1) throw std::runtime_error("cell counts must be >= 1");
  if (!(Lx > 0.0) || !(Ly > 0.0))
    throw std::runtime_error("domain dimensions must be positive");
  Mesh mesh;
  const double dx = Lx / nx, dy = Ly / ny;
  mesh.vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.emplace_back(i * dx, j * dy);
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  mesh.cells.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j);
      const int c = vid(i + 1, j + 1), d = vid(i, j + 1);
      Mesh::Cell lower, upper;
      lower.v = {a, b, c}; // diagonal a-c
      upper.v = {a, c, d};
      mesh.cells.push_back(lower);
      mesh.cells.push_back(upper);
    }
  finalize(mesh);
  mesh.check();
  return mesh;
}

void tag_boundary(Mesh& mesh, const BoundarySpec& spec) {
  for (int ei = 0; ei < mesh.n_edges(); ++ei) {
    auto& e = mesh.edges[ei];
    if (!mesh.is_boundary(ei)) continue;
    int hit = -1;
    for (int s = 0; s < static_cast<int>(spec.size()); ++s) {
      if (!spec[s].first(e.midpoint)) continue;
      if (hit >= 0) {
        std::ostringstream os;
        os << "boundary edge at (" << e.midpoint.x() << ", " << e.midpoint.y()
           << ") covered by more than one boundary spec";
        throw std::runtime_error(os.str());
      }
      hit = s;
    }
    if (hit < 0) {
      std::ostringstream os;
      os << "boundary edge at (" << e.midpoint.x() << ", " << e.midpoint.y()
         << ") not covered by any boundary spec";
      throw std::runtime_error(os.str());
    }
    e.bc = static_cast<int>(mesh.bcs.size());
    mesh.bcs.push_back(spec[hit].second);
  }
}

Mesh read_mesh(std::istream& in, std::vector<MeshTag>* tags) {
  Mesh mesh;
  std::string line;
  auto next_tokens = [&](std::vector<std::string>& toks) -> bool {
    toks.clear();
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string t;
      while (ls >> t) toks.push_back(t);
      if (!toks.empty()) return true;
    }
    return false;
  };
  std::vector<std::string> toks;
  while (next_tokens(toks)) {
    if (toks[0] == "V") {
      const int n = std::stoi(toks[1]);
      for (int i = 0; i < n; ++i) {
        if (!next_tokens(toks) || toks.size() < 2)
          throw std::runtime_error("mesh file: truncated vertex list");
        mesh.vertices.emplace_back(std::stod(toks[0]), std::stod(toks[1]));
      }
    } else if (toks[0] == "C") {
      const int m = std::stoi(toks[1]);
      for (int i = 0; i < m; ++i) {
        if (!next_tokens(toks) || toks.size() < 3)
          throw std::runtime_error("mesh file: truncated cell list");
        Mesh::Cell c;
        c.v = {std::stoi(toks[0]), std::stoi(toks[1]), std::stoi(toks[2])};
        mesh.cells.push_back(c);
      }
    } else if (toks[0] == "T") {
      if (toks.size() < 4) throw std::runtime_error("mesh file: bad T record");
      if (tags)
        tags->push_back(
            {toks[1], Vec2(std::stod(toks[2]), std::stod(toks[3]))});
    } else {
      throw std::runtime_error("mesh file: unknown record '" + toks[0] + "'");
    }
  }
  if (mesh.vertices.empty() || mesh.cells.empty())
    throw std::runtime_error("mesh file: missing V or C section");
  finalize(mesh);
  mesh.check();
  return mesh;
}

void write_mesh(std::ostream& out, const Mesh& mesh,
                const std::vector<MeshTag>& tags) {
  out.precision(17);
  out << "V " << mesh.vertices.size() << "\n";
  for (const auto& v : mesh.vertices) out << v.x() << " " << v.y() << "\n";
  out << "C " << mesh.n_cells() << "\n";
  for (const auto& c : mesh.cells)
    out << c.v[0] << " " << c.v[1] << " " << c.v[2] << "\n";
  for (const auto& t : tags)
    out << "T " << t.name << " " << t.point.x() << " " << t.point.y() << "\n";
}

} // namespace tpf
