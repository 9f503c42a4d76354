#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tpf {

using Vec2 = Eigen::Vector2d;

enum class BcKind { Dirichlet, Neumann };

/// Boundary data attached to a boundary edge. For Dirichlet edges pw/pn are
/// prescribed pressures (Pa); for Neumann edges flux_t is the prescribed total
/// normal flux density (m/s, positive outward). sw is the inflow wetting
/// saturation, required whenever the edge acts as an inflow boundary.
struct BoundaryData {
  BcKind kind = BcKind::Neumann;
  double pw = 0.0;
  double pn = 0.0;
  double flux_t = 0.0;
  bool has_sw = false;
  double sw = 0.0;
};

/// Conforming 2D triangular mesh with one globally oriented normal per edge.
///
/// Edge DOF convention: the unit normal of an interior edge points from the
/// lower-index adjacent cell (cell_in) to the higher-index one (cell_out);
/// boundary normals point outward. A cell sees the edge with sign +1 iff the
/// edge normal is its outward normal on that edge.
struct Mesh {
  struct Cell {
    std::array<int, 3> v;       // CCW vertex indices
    std::array<int, 3> edge;    // edge[i] is opposite vertex v[i]
    std::array<double, 3> sign; // +1 iff edge normal points out of the cell
    double area = 0.0;
    Vec2 centroid = Vec2::Zero();
    double diam = 0.0; // longest edge
  };
  struct Edge {
    std::array<int, 2> v;
    int cell_in = -1;  // K_i: normal exterior to this cell
    int cell_out = -1; // K_j, or -1 on the boundary
    Vec2 normal = Vec2::Zero();
    Vec2 midpoint = Vec2::Zero();
    double length = 0.0;
    int bc = -1; // index into bcs for boundary edges
  };

  std::vector<Vec2> vertices;
  std::vector<Cell> cells;
  std::vector<Edge> edges;
  std::vector<BoundaryData> bcs;

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  bool is_boundary(int e) const { return edges[e].cell_out < 0; }
  const BoundaryData* boundary_data(int e) const {
    return edges[e].bc >= 0 ? &bcs[edges[e].bc] : nullptr;
  }

  /// min over cells of the cell diameter (longest edge)
  double min_diam() const;
  double total_area() const;

  /// Validates all structural invariants; throws std::runtime_error.
  void check() const;
};

/// Rectangle [0,Lx]x[0,Ly] split into nx*ny rectangles, each cut along the
/// bottom-left to top-right diagonal. 2*nx*ny cells.
Mesh build_structured(int nx, int ny, double Lx, double Ly);

/// Predicate on the edge midpoint, paired with the tag to assign.
using BoundarySpec =
    std::vector<std::pair<std::function<bool(const Vec2&)>, BoundaryData>>;

/// Assigns exactly one tag per boundary edge. Uncovered or doubly covered
/// boundary edges are configuration errors naming the edge midpoint.
void tag_boundary(Mesh& mesh, const BoundarySpec& spec);

struct MeshTag {
  std::string name;
  Vec2 point;
};

/// Text mesh format: `V n` then vertex lines, `C m` then cell lines,
/// optional `T tag x y` records. `#` starts a comment.
Mesh read_mesh(std::istream& in, std::vector<MeshTag>* tags = nullptr);
void write_mesh(std::ostream& out, const Mesh& mesh,
                const std::vector<MeshTag>& tags = {});

} // namespace tpf
