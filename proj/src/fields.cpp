#include "gliocontrol/fields.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "gliocontrol/errors.hpp"

namespace gliocontrol {

Grid Grid::build(int dim, std::span<const double> extents, std::span<const int> cells_per_axis) {
  if (dim < 1 || dim > kMaxDim) {
    throw ConfigError("grid: dim must be 1 or 2, got " + std::to_string(dim));
  }
  if (static_cast<int>(extents.size()) != dim || static_cast<int>(cells_per_axis.size()) != dim) {
    throw ConfigError("grid: extents and cells_per_axis must have dim entries");
  }
  Grid g;
  g.dim_ = dim;
  g.size_ = 1;
  g.cell_volume_ = 1.0;
  for (int a = 0; a < dim; ++a) {
    if (!(extents[a] > 0.0) || !std::isfinite(extents[a])) {
      throw ConfigError("grid: extent on axis " + std::to_string(a) + " must be positive");
    }
    if (cells_per_axis[a] < kMinCellsPerAxis) {
      throw ConfigError("grid: cells on axis " + std::to_string(a) + " must be >= " +
                        std::to_string(kMinCellsPerAxis));
    }
    g.extents_[a] = extents[a];
    g.cells_[a] = cells_per_axis[a];
    g.spacing_[a] = extents[a] / cells_per_axis[a];
    g.size_ *= static_cast<std::size_t>(cells_per_axis[a]);
    g.cell_volume_ *= g.spacing_[a];
  }
  return g;
}

double Grid::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= extents_[a];
  return v;
}

std::array<double, Grid::kMaxDim> Grid::center(std::size_t index) const {
  std::array<double, kMaxDim> x{};
  if (dim_ == 1) {
    x[0] = (static_cast<double>(index) + 0.5) * spacing_[0];
  } else {
    const auto n1 = static_cast<std::size_t>(cells_[1]);
    x[0] = (static_cast<double>(index / n1) + 0.5) * spacing_[0];
    x[1] = (static_cast<double>(index % n1) + 0.5) * spacing_[1];
  }
  return x;
}

bool Grid::operator==(const Grid& other) const {
  if (dim_ != other.dim_) return false;
  for (int a = 0; a < dim_; ++a) {
    if (cells_[a] != other.cells_[a] || extents_[a] != other.extents_[a]) return false;
  }
  return true;
}

TimeGrid::TimeGrid(double t_final, int steps) : t_final_(t_final), steps_(steps) {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigError("time: t_final must be positive");
  if (steps < 1) throw ConfigError("time: steps must be >= 1");
}

Field::Field(const Grid& grid, double value) : grid_(grid), values_(grid.size(), value) {}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ConfigError("field: expected " + std::to_string(grid_.size()) + " values, got " +
                      std::to_string(values_.size()));
  }
}

Field Field::from_function(const Grid& grid,
                           const std::function<double(const std::array<double, 2>&)>& fn) {
  Field f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f.values_[i] = fn(grid.center(i));
  return f;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double Field::min() const { return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }

std::size_t Field::argmax() const {
  return static_cast<std::size_t>(std::max_element(values_.begin(), values_.end()) - values_.begin());
}

std::size_t Field::argmin() const {
  return static_cast<std::size_t>(std::min_element(values_.begin(), values_.end()) - values_.begin());
}

double Field::mean() const {
  double s = 0.0;
  for (double x : values_) s += x;
  return values_.empty() ? 0.0 : s / static_cast<double>(values_.size());
}

Field& Field::operator+=(const Field& other) { return axpy(1.0, other); }

Field& Field::operator-=(const Field& other) { return axpy(-1.0, other); }

Field& Field::operator*=(double s) {
  for (double& x : values_) x *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& other) {
  require_same_grid(grid_, other.grid_, "field arithmetic");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

Field hadamard(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "hadamard");
  Field out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw ConfigError(std::string(what) + ": grid mismatch");
}

Field laplacian(const Field& f) {
  const Grid& g = f.grid();
  Field out(g);
  auto in = f.values();
  auto res = out.values();
  if (g.dim() == 1) {
    const int n = g.cells(0);
    const double ih2 = 1.0 / (g.spacing(0) * g.spacing(0));
    for (int i = 0; i < n; ++i) {
      const double left = i > 0 ? in[i - 1] : in[i];
      const double right = i + 1 < n ? in[i + 1] : in[i];
      res[i] = ((left - in[i]) + (right - in[i])) * ih2;
    }
    return out;
  }
  const int n0 = g.cells(0);
  const int n1 = g.cells(1);
  const double ih0 = 1.0 / (g.spacing(0) * g.spacing(0));
  const double ih1 = 1.0 / (g.spacing(1) * g.spacing(1));
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * n1 + j;
      const double c = in[k];
      const double w = i > 0 ? in[k - n1] : c;
      const double e = i + 1 < n0 ? in[k + n1] : c;
      const double s = j > 0 ? in[k - 1] : c;
      const double nn = j + 1 < n1 ? in[k + 1] : c;
      res[k] = ((w - c) + (e - c)) * ih0 + ((s - c) + (nn - c)) * ih1;
    }
  }
  return out;
}

double integrate(const Field& f) {
  double s = 0.0;
  for (double x : f.values()) s += x;
  return s * f.grid().cell_volume();
}

double inner(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid(), "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s * f.grid().cell_volume();
}

double norm_l2(const Field& f) { return std::sqrt(inner(f, f)); }

double norm_linf(const Field& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

double seminorm_h1(const Field& f) {
  const Grid& g = f.grid();
  double s = 0.0;
  if (g.dim() == 1) {
    const double h = g.spacing(0);
    for (int i = 0; i + 1 < g.cells(0); ++i) {
      const double d = (f[i + 1] - f[i]) / h;
      s += d * d;
    }
  } else {
    const int n0 = g.cells(0);
    const int n1 = g.cells(1);
    for (int i = 0; i < n0; ++i) {
      for (int j = 0; j < n1; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * n1 + j;
        if (i + 1 < n0) {
          const double d = (f[k + n1] - f[k]) / g.spacing(0);
          s += d * d;
        }
        if (j + 1 < n1) {
          const double d = (f[k + 1] - f[k]) / g.spacing(1);
          s += d * d;
        }
      }
    }
  }
  return std::sqrt(s * g.cell_volume());
}

double norm_l2_spacetime(const FieldSeries& series, double dt) {
  double s = 0.0;
  for (const Field& f : series) s += dt * inner(f, f);
  return std::sqrt(s);
}

double sup_norm_l2(const FieldSeries& series) {
  double m = 0.0;
  for (const Field& f : series) m = std::max(m, norm_l2(f));
  return m;
}

namespace {

void write_le_doubles(std::ostream& os, std::span<const double> values) {
  for (double x : values) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    os.write(bytes, 8);
  }
}

std::vector<double> read_le_doubles(std::istream& is, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned char bytes[8];
    if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw ConfigError("snapshot: truncated data file");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

void write_header(const std::string& stem, const Grid& g, std::size_t slices) {
  std::ofstream hdr(stem + ".hdr");
  if (!hdr) throw ConfigError("snapshot: cannot write " + stem + ".hdr");
  hdr << std::setprecision(17);
  hdr << "format float64-le row-major\n";
  hdr << "dim " << g.dim() << "\n";
  hdr << "cells_per_axis";
  for (int a = 0; a < g.dim(); ++a) hdr << ' ' << g.cells(a);
  hdr << "\nextents";
  for (int a = 0; a < g.dim(); ++a) hdr << ' ' << g.extent(a);
  hdr << "\nslices " << slices << "\n";
}

}  // namespace

void write_snapshot(const std::string& stem, const Field& f) { write_snapshot_series(stem, FieldSeries{f}); }

void write_snapshot_series(const std::string& stem, const FieldSeries& series) {
  if (series.empty()) throw ConfigError("snapshot: empty series");
  write_header(stem, series.front().grid(), series.size());
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw ConfigError("snapshot: cannot write " + stem + ".bin");
  for (const Field& f : series) {
    require_same_grid(series.front().grid(), f.grid(), "snapshot");
    write_le_doubles(bin, f.values());
  }
}

SnapshotHeader read_snapshot_header(const std::string& stem) {
  std::ifstream hdr(stem + ".hdr");
  if (!hdr) throw ConfigError("snapshot: cannot read " + stem + ".hdr");
  int dim = 0;
  std::vector<int> cells;
  std::vector<double> extents;
  std::size_t slices = 1;
  std::string line;
  while (std::getline(hdr, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dim") {
      ls >> dim;
    } else if (key == "cells_per_axis") {
      int c;
      while (ls >> c) cells.push_back(c);
    } else if (key == "extents") {
      double e;
      while (ls >> e) extents.push_back(e);
    } else if (key == "slices") {
      ls >> slices;
    }
  }
  return SnapshotHeader{Grid::build(dim, extents, cells), slices};
}

Field read_snapshot(const std::string& stem) {
  FieldSeries s = read_snapshot_series(stem);
  if (s.size() != 1) throw ConfigError("snapshot: expected a single slice in " + stem);
  return s.front();
}

FieldSeries read_snapshot_series(const std::string& stem) {
  const SnapshotHeader h = read_snapshot_header(stem);
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw ConfigError("snapshot: cannot read " + stem + ".bin");
  FieldSeries out;
  out.reserve(h.slices);
  for (std::size_t s = 0; s < h.slices; ++s) out.emplace_back(h.grid, read_le_doubles(bin, h.grid.size()));
  return out;
}

void write_csv(std::ostream& os, const Field& f) {
  const Grid& g = f.grid();
  os << std::setprecision(17);
  os << (g.dim() == 1 ? "x,value\n" : "x,y,value\n");
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto x = g.center(i);
    os << x[0];
    if (g.dim() == 2) os << ',' << x[1];
    os << ',' << f[i] << '\n';
  }
}

}  // namespace gliocontrol
