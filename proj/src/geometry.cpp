#include "vortexlayer/geometry.hpp"

#include <algorithm>
#include <string>

#include "vortexlayer/error.hpp"

namespace vortexlayer {

const char* side_name(Side side) {
  switch (side) {
    case Side::Bottom: return "bottom";
    case Side::Right: return "right";
    case Side::Top: return "top";
    case Side::Left: return "left";
  }
  return "?";
}

Grid::Grid(int nx, int ny, double lx, double ly) : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
  if (nx < 2 || ny < 2) {
    fail(ErrorKind::InvalidArgument,
         "grid needs at least 2 cells per axis, got nx=" + std::to_string(nx) + " ny=" + std::to_string(ny));
  }
  if (!(lx > 0.0) || !(ly > 0.0)) {
    fail(ErrorKind::InvalidArgument, "grid side lengths must be positive");
  }
  dx_ = lx / nx;
  dy_ = ly / ny;

  faces_.reserve(2 * static_cast<std::size_t>(nx) + 2 * static_cast<std::size_t>(ny));
  double arc = 0.0;
  for (int i = 0; i < nx; ++i) {
    faces_.push_back({index(i, 0), Side::Bottom, {0.0, -1.0}, {(i + 0.5) * dx_, 0.0}, dx_, arc + 0.5 * dx_});
    arc += dx_;
  }
  for (int j = 0; j < ny; ++j) {
    faces_.push_back({index(nx - 1, j), Side::Right, {1.0, 0.0}, {lx, (j + 0.5) * dy_}, dy_, arc + 0.5 * dy_});
    arc += dy_;
  }
  for (int i = nx - 1; i >= 0; --i) {
    faces_.push_back({index(i, ny - 1), Side::Top, {0.0, 1.0}, {(i + 0.5) * dx_, ly}, dx_, arc + 0.5 * dx_});
    arc += dx_;
  }
  for (int j = ny - 1; j >= 0; --j) {
    faces_.push_back({index(0, j), Side::Left, {-1.0, 0.0}, {0.0, (j + 0.5) * dy_}, dy_, arc + 0.5 * dy_});
    arc += dy_;
  }
}

Vec2 Grid::center(std::size_t cell) const {
  return {(column(cell) + 0.5) * dx_, (row(cell) + 0.5) * dy_};
}

std::size_t Grid::inward_cell(const BoundaryFace& face, int depth) const {
  const int i = column(face.owner);
  const int j = row(face.owner);
  switch (face.side) {
    case Side::Bottom: return index(i, j + depth);
    case Side::Top: return index(i, j - depth);
    case Side::Left: return index(i + depth, j);
    case Side::Right: return index(i - depth, j);
  }
  return face.owner;
}

double Grid::normal_spacing(const BoundaryFace& face) const {
  return (face.side == Side::Left || face.side == Side::Right) ? dx_ : dy_;
}

int Grid::cells_along_normal(const BoundaryFace& face) const {
  return (face.side == Side::Left || face.side == Side::Right) ? nx_ : ny_;
}

std::size_t Grid::face_index(Side side, int k) const {
  const std::size_t nx = static_cast<std::size_t>(nx_);
  const std::size_t ny = static_cast<std::size_t>(ny_);
  switch (side) {
    case Side::Bottom: return static_cast<std::size_t>(k);
    case Side::Right: return nx + k;
    case Side::Top: return nx + ny + (nx - 1 - k);
    case Side::Left: return 2 * nx + ny + (ny - 1 - k);
  }
  return 0;
}

bool Grid::is_corner_cell(std::size_t cell) const {
  const int i = column(cell);
  const int j = row(cell);
  return (i == 0 || i == nx_ - 1) && (j == 0 || j == ny_ - 1);
}

Grid build_grid(int nx, int ny, double lx, double ly) { return Grid(nx, ny, lx, ly); }

double distance_to_boundary(const Grid& grid, std::size_t cell) {
  if (cell >= grid.cell_count()) {
    fail(ErrorKind::InvalidArgument, "cell index " + std::to_string(cell) + " out of range");
  }
  const Vec2 c = grid.center(cell);
  return std::min({c.x, grid.lx() - c.x, c.y, grid.ly() - c.y});
}

Vec2 boundary_normal_sum(const Grid& grid) {
  Vec2 sum;
  for (const BoundaryFace& f : grid.boundary_faces()) {
    sum.x += f.normal.x * f.area;
    sum.y += f.normal.y * f.area;
  }
  return sum;
}

}  // namespace vortexlayer
