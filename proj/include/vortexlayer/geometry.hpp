#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace vortexlayer {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

enum class Side { Bottom, Right, Top, Left };

const char* side_name(Side side);

/// One cell face lying on the rectangle boundary.
struct BoundaryFace {
  std::size_t owner = 0;  ///< flat index of the cell the face belongs to
  Side side = Side::Bottom;
  Vec2 normal;            ///< outward unit normal
  Vec2 midpoint;
  double area = 0.0;      ///< face length
  double arc = 0.0;       ///< counterclockwise arc length of the midpoint, measured from (0,0)
};

/// Uniform cell-centered grid on [0,lx] x [0,ly]. Cell (i,j) has flat index
/// j*nx + i and center ((i+1/2)dx, (j+1/2)dy). Boundary faces are listed
/// counterclockwise starting at the bottom-left corner.
class Grid {
 public:
  Grid(int nx, int ny, double lx, double ly);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double cell_area() const { return dx_ * dy_; }
  double perimeter() const { return 2.0 * (lx_ + ly_); }
  std::size_t cell_count() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  int column(std::size_t cell) const { return static_cast<int>(cell % nx_); }
  int row(std::size_t cell) const { return static_cast<int>(cell / nx_); }
  Vec2 center(std::size_t cell) const;

  std::span<const BoundaryFace> boundary_faces() const { return faces_; }

  /// Flat index of the cell `depth` cells inward from a face's owner (depth 0 is the owner).
  std::size_t inward_cell(const BoundaryFace& face, int depth) const;
  /// Cell width measured along a face's normal.
  double normal_spacing(const BoundaryFace& face) const;
  /// Number of cells along a face's inward normal.
  int cells_along_normal(const BoundaryFace& face) const;

  /// Position in `boundary_faces()` of the face on `side` at offset `k` along
  /// that side (k counts cells along +x for bottom/top, +y for left/right).
  std::size_t face_index(Side side, int k) const;

  /// True for the four cells touching two sides at once.
  bool is_corner_cell(std::size_t cell) const;

 private:
  int nx_;
  int ny_;
  double lx_;
  double ly_;
  double dx_;
  double dy_;
  std::vector<BoundaryFace> faces_;
};

Grid build_grid(int nx, int ny, double lx, double ly);

/// Euclidean distance from a cell center to the nearest side.
double distance_to_boundary(const Grid& grid, std::size_t cell);

/// Sum of outward normal times face area over all boundary faces.
Vec2 boundary_normal_sum(const Grid& grid);

}  // namespace vortexlayer
