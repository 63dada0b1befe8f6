#include "inductherm/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace inductherm {

namespace {

// Neumaier compensated sum; keeps ledger differences clean at 1e-12.
struct Accumulator {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace

RegionGrid RegionGrid::from_rects(double lx, double ly, int nx, int ny, const Rect& workpiece,
                                  const std::vector<InductorRect>& inductors) {
  if (nx < 3 || ny < 3) throw GeometryError("grid needs at least 3x3 cells");
  if (!(lx > 0.0) || !(ly > 0.0)) throw GeometryError("domain extent must be positive");
  RegionGrid g;
  g.nx_ = nx;
  g.ny_ = ny;
  g.hx_ = lx / nx;
  g.hy_ = ly / ny;
  g.region_.assign(static_cast<std::size_t>(nx * ny), Region::Air);
  g.polarity_.assign(static_cast<std::size_t>(nx * ny), 0);
  for (int c = 0; c < g.size(); ++c) {
    const double x = g.x(c), y = g.y(c);
    const bool in_w = workpiece.contains(x, y);
    for (const auto& ind : inductors) {
      if (!ind.rect.contains(x, y)) continue;
      if (in_w)
        throw GeometryError("workpiece and inductor overlap at cell (" + std::to_string(g.col(c)) +
                            ", " + std::to_string(g.row(c)) + ")");
      g.region_[static_cast<std::size_t>(c)] = Region::Inductor;
      g.polarity_[static_cast<std::size_t>(c)] = ind.polarity >= 0 ? 1 : -1;
    }
    if (in_w) g.region_[static_cast<std::size_t>(c)] = Region::Workpiece;
  }
  g.finalize();
  g.validate();
  return g;
}

RegionGrid RegionGrid::from_mask_text(const std::string& text, double lx, double ly) {
  std::vector<std::string> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw GeometryError("mask is empty");
  const int ny = static_cast<int>(rows.size());
  const int nx = static_cast<int>(rows.front().size());
  RegionGrid g;
  g.nx_ = nx;
  g.ny_ = ny;
  g.hx_ = lx / nx;
  g.hy_ = ly / ny;
  g.region_.assign(static_cast<std::size_t>(nx * ny), Region::Air);
  g.polarity_.assign(static_cast<std::size_t>(nx * ny), 0);
  for (int r = 0; r < ny; ++r) {
    const auto& s = rows[static_cast<std::size_t>(r)];
    if (static_cast<int>(s.size()) != nx)
      throw GeometryError("mask row " + std::to_string(r) + " has length " +
                          std::to_string(s.size()) + ", expected " + std::to_string(nx));
    const int j = ny - 1 - r;
    for (int i = 0; i < nx; ++i) {
      const auto c = static_cast<std::size_t>(g.index(i, j));
      switch (s[static_cast<std::size_t>(i)]) {
        case '.': break;
        case 'W': g.region_[c] = Region::Workpiece; break;
        case '+': g.region_[c] = Region::Inductor; g.polarity_[c] = 1; break;
        case '-': g.region_[c] = Region::Inductor; g.polarity_[c] = -1; break;
        default:
          throw GeometryError(std::string("mask: unknown cell tag '") + s[static_cast<std::size_t>(i)] +
                              "'");
      }
    }
  }
  if (nx < 3 || ny < 3) throw GeometryError("grid needs at least 3x3 cells");
  g.finalize();
  g.validate();
  return g;
}

RegionGrid RegionGrid::from_mask_file(const std::string& path, double lx, double ly) {
  std::ifstream in(path);
  if (!in) throw GeometryError("cannot open mask file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_mask_text(ss.str(), lx, ly);
}

bool RegionGrid::on_domain_boundary(int c) const {
  const int i = col(c), j = row(c);
  return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1;
}

bool RegionGrid::on_workpiece_boundary(int c) const {
  if (!in_workpiece(c)) return false;
  const int i = col(c), j = row(c);
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  for (int k = 0; k < 4; ++k) {
    const int ii = i + di[k], jj = j + dj[k];
    if (ii < 0 || jj < 0 || ii >= nx_ || jj >= ny_) return true;
    if (!in_workpiece(index(ii, jj))) return true;
  }
  return false;
}

void RegionGrid::finalize() {
  work_cells_.clear();
  work_faces_.clear();
  domain_faces_.clear();
  for (int c = 0; c < size(); ++c)
    if (in_workpiece(c)) work_cells_.push_back(c);

  auto add = [&](int a, int b, bool vertical) {
    const double len = vertical ? hy_ : hx_;
    const double h = vertical ? hx_ : hy_;
    if (b < 0) {
      domain_faces_.push_back({a, -1, len, 0.5 * h, vertical});
      return;
    }
    Face f{a, b, len, h, vertical};
    domain_faces_.push_back(f);
    if (in_workpiece(a) && in_workpiece(b)) work_faces_.push_back(f);
  };
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const int c = index(i, j);
      if (i == 0) add(c, -1, true);
      if (j == 0) add(c, -1, false);
      add(c, i + 1 < nx_ ? index(i + 1, j) : -1, true);
      add(c, j + 1 < ny_ ? index(i, j + 1) : -1, false);
    }
  }
}

void RegionGrid::validate() const {
  if (work_cells_.empty()) throw GeometryError("workpiece region is empty");
  for (int c : work_cells_)
    if (on_domain_boundary(c))
      throw GeometryError("workpiece touches the outer boundary at cell (" + std::to_string(col(c)) +
                          ", " + std::to_string(row(c)) + ")");
}

std::string RegionGrid::mask_text() const {
  std::string out;
  for (int j = ny_ - 1; j >= 0; --j) {
    for (int i = 0; i < nx_; ++i) {
      const int c = index(i, j);
      switch (region(c)) {
        case Region::Air: out += '.'; break;
        case Region::Workpiece: out += 'W'; break;
        case Region::Inductor: out += polarity(c) >= 0 ? '+' : '-'; break;
      }
    }
    out += '\n';
  }
  return out;
}

FaceField grad(const RegionGrid&, const std::vector<Face>& faces, const ScalarField& f) {
  FaceField g(faces.size());
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const Face& fc = faces[k];
    const double fb = fc.b >= 0 ? f[static_cast<std::size_t>(fc.b)] : 0.0;
    g[k] = (fb - f[static_cast<std::size_t>(fc.a)]) / fc.dist;
  }
  return g;
}

ScalarField div(const RegionGrid& g, const std::vector<Face>& faces, const FaceField& flux) {
  ScalarField d(static_cast<std::size_t>(g.size()), 0.0);
  const double inv_v = 1.0 / g.cell_volume();
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const Face& fc = faces[k];
    // Face values point from a to b (outward from a on the boundary).
    const double q = flux[k] * fc.len * inv_v;
    d[static_cast<std::size_t>(fc.a)] += q;
    if (fc.b >= 0) d[static_cast<std::size_t>(fc.b)] -= q;
  }
  return d;
}

ScalarField laplacian(const RegionGrid& g, const std::vector<Face>& faces, const ScalarField& f) {
  return div(g, faces, grad(g, faces, f));
}

CellVector cell_gradient(const RegionGrid& g, const ScalarField& f, const std::vector<char>& active) {
  const auto n = static_cast<std::size_t>(g.size());
  CellVector out{ScalarField(n, 0.0), ScalarField(n, 0.0)};
  auto is_active = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < g.nx() && j < g.ny() &&
           active[static_cast<std::size_t>(g.index(i, j))];
  };
  auto value = [&](int i, int j) { return f[static_cast<std::size_t>(g.index(i, j))]; };
  for (int c = 0; c < g.size(); ++c) {
    if (!active[static_cast<std::size_t>(c)]) continue;
    const int i = g.col(c), j = g.row(c);
    auto partial = [&](int di, int dj, double h) {
      const bool p = is_active(i + di, j + dj), m = is_active(i - di, j - dj);
      if (p && m) return (value(i + di, j + dj) - value(i - di, j - dj)) / (2.0 * h);
      if (p) return (value(i + di, j + dj) - value(i, j)) / h;
      if (m) return (value(i, j) - value(i - di, j - dj)) / h;
      return 0.0;
    };
    out.x[static_cast<std::size_t>(c)] = partial(1, 0, g.hx());
    out.y[static_cast<std::size_t>(c)] = partial(0, 1, g.hy());
  }
  return out;
}

CellVector curl2d(const RegionGrid& g, const ScalarField& a) {
  const std::vector<char> all(static_cast<std::size_t>(g.size()), 1);
  CellVector gr = cell_gradient(g, a, all);
  CellVector out{std::move(gr.y), std::move(gr.x)};
  for (auto& v : out.y) v = -v;
  return out;
}

double integrate(const RegionGrid& g, const ScalarField& f, Region region) {
  Accumulator acc;
  for (int c = 0; c < g.size(); ++c)
    if (g.region(c) == region) acc.add(f[static_cast<std::size_t>(c)]);
  return acc.value() * g.cell_volume();
}

double integrate(const RegionGrid& g, const ScalarField& f) {
  Accumulator acc;
  for (int c = 0; c < g.size(); ++c) acc.add(f[static_cast<std::size_t>(c)]);
  return acc.value() * g.cell_volume();
}

double integrate_faces(const std::vector<Face>& faces, const FaceField& f) {
  Accumulator acc;
  for (std::size_t k = 0; k < faces.size(); ++k) acc.add(f[k] * faces[k].area());
  return acc.value();
}

std::vector<char> region_mask(const RegionGrid& g, Region region) {
  std::vector<char> m(static_cast<std::size_t>(g.size()), 0);
  for (int c = 0; c < g.size(); ++c) m[static_cast<std::size_t>(c)] = g.region(c) == region;
  return m;
}

}  // namespace inductherm
