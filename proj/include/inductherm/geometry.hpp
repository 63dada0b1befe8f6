#pragma once

// Structured 2D grid over the hold-all rectangle D with workpiece, inductor
// and air masks, face lists and the discrete differential operators.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace inductherm {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Region : std::uint8_t { Air = 0, Workpiece = 1, Inductor = 2 };

/// Axis-aligned rectangle [x0, x1] x [y0, y1] in metres.
struct Rect {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

struct InductorRect {
  Rect rect;
  int polarity = 1;  // sign of the source current in this coil section
};

/// Per-cell values, indexed j * nx + i with j = 0 the bottom row.
using ScalarField = std::vector<double>;
/// Per-face values aligned with a face list.
using FaceField = std::vector<double>;

/// A face between cells a and b (b = -1 on the Dirichlet boundary of D).
/// `len` is the face length and `dist` the centre-to-centre distance
/// (half a cell for boundary faces).
struct Face {
  int a = 0;
  int b = -1;
  double len = 0.0;
  double dist = 0.0;
  bool vertical = false;  // true for faces normal to x

  double transmissibility() const { return len / dist; }
  double area() const { return len * dist; }  // quadrature weight of face values
};

class RegionGrid {
 public:
  RegionGrid() = default;

  /// Builds the masks from rectangles; a cell belongs to a rectangle when its
  /// centre does. Throws GeometryError on invalid layouts.
  static RegionGrid from_rects(double lx, double ly, int nx, int ny, const Rect& workpiece,
                               const std::vector<InductorRect>& inductors);

  /// Mask text: one line per row, top row first, characters
  /// '.' air, 'W' workpiece, '+' / '-' inductor with polarity.
  static RegionGrid from_mask_text(const std::string& text, double lx, double ly);
  static RegionGrid from_mask_file(const std::string& path, double lx, double ly);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double lx() const { return hx_ * nx_; }
  double ly() const { return hy_ * ny_; }
  int size() const { return nx_ * ny_; }
  double cell_volume() const { return hx_ * hy_; }

  int index(int i, int j) const { return j * nx_ + i; }
  int col(int c) const { return c % nx_; }
  int row(int c) const { return c / nx_; }
  double x(int c) const { return (col(c) + 0.5) * hx_; }
  double y(int c) const { return (row(c) + 0.5) * hy_; }

  Region region(int c) const { return region_[static_cast<std::size_t>(c)]; }
  int polarity(int c) const { return polarity_[static_cast<std::size_t>(c)]; }
  bool in_workpiece(int c) const { return region(c) == Region::Workpiece; }
  bool on_domain_boundary(int c) const;
  /// Workpiece cell with a non-workpiece neighbour.
  bool on_workpiece_boundary(int c) const;

  const std::vector<int>& workpiece_cells() const { return work_cells_; }
  /// Faces with both cells in the workpiece (homogeneous Neumann on its boundary).
  const std::vector<Face>& workpiece_faces() const { return work_faces_; }
  /// All interior faces of D plus Dirichlet boundary faces on its edge.
  const std::vector<Face>& domain_faces() const { return domain_faces_; }

  /// Throws GeometryError unless the workpiece is non-empty and keeps off the
  /// outer boundary of D.
  void validate() const;

  /// Row-major mask text as accepted by from_mask_text.
  std::string mask_text() const;

 private:
  void finalize();

  int nx_ = 0, ny_ = 0;
  double hx_ = 0.0, hy_ = 0.0;
  std::vector<Region> region_;
  std::vector<int> polarity_;
  std::vector<int> work_cells_;
  std::vector<Face> work_faces_;
  std::vector<Face> domain_faces_;
};

/// Face gradient (f_b - f_a) / dist; boundary faces use the ghost value 0,
/// so there it is the outward normal derivative.
FaceField grad(const RegionGrid& g, const std::vector<Face>& faces, const ScalarField& f);

/// Cell divergence of a face flux: sum of outward flux times length over the
/// cell volume. Cells untouched by the face list get 0.
ScalarField div(const RegionGrid& g, const std::vector<Face>& faces, const FaceField& flux);

/// div(grad f), the 5-point stencil on the face list.
ScalarField laplacian(const RegionGrid& g, const std::vector<Face>& faces, const ScalarField& f);

/// Cell-centred gradient of f restricted to cells where `active` is set:
/// central differences where both neighbours are active, one-sided where only
/// one is, zero where neither is.
struct CellVector {
  ScalarField x, y;
};
CellVector cell_gradient(const RegionGrid& g, const ScalarField& f, const std::vector<char>& active);

/// curl of the out-of-plane potential, (dA/dy, -dA/dx), over all of D.
CellVector curl2d(const RegionGrid& g, const ScalarField& a);

/// Midpoint quadrature over a region, or over D.
double integrate(const RegionGrid& g, const ScalarField& f, Region region);
double integrate(const RegionGrid& g, const ScalarField& f);

/// Sum of face values times the face quadrature weight.
double integrate_faces(const std::vector<Face>& faces, const FaceField& f);

std::vector<char> region_mask(const RegionGrid& g, Region region);

}  // namespace inductherm
