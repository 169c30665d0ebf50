#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace gliocontrol {

/// Uniform cell-centered mesh on the rectangle [0, L0] x [0, L1] (or the
/// interval [0, L0] when dim == 1). Cells are stored row-major: axis 0 is
/// the slow index, the last axis the fast one.
class Grid {
 public:
  static constexpr int kMaxDim = 2;
  static constexpr int kMinCellsPerAxis = 4;

  Grid() = default;

  /// Throws ConfigError on dim outside {1, 2}, non-positive extents, or
  /// fewer than kMinCellsPerAxis cells on any axis.
  static Grid build(int dim, std::span<const double> extents, std::span<const int> cells_per_axis);

  int dim() const { return dim_; }
  double extent(int axis) const { return extents_[axis]; }
  int cells(int axis) const { return cells_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }

  std::size_t size() const { return size_; }
  double cell_volume() const { return cell_volume_; }
  double volume() const;

  /// Cell center coordinates; unused axes are 0.
  std::array<double, kMaxDim> center(std::size_t index) const;

  bool operator==(const Grid& other) const;

 private:
  int dim_ = 0;
  std::array<double, kMaxDim> extents_{};
  std::array<int, kMaxDim> cells_{};
  std::array<double, kMaxDim> spacing_{};
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
};

/// Uniform partition of [0, T] into `steps` intervals.
class TimeGrid {
 public:
  TimeGrid() = default;
  /// Throws ConfigError unless t_final > 0 and steps >= 1.
  TimeGrid(double t_final, int steps);

  double t_final() const { return t_final_; }
  int steps() const { return steps_; }
  double dt() const { return t_final_ / steps_; }
  double time(int n) const { return t_final_ * n / steps_; }

  bool operator==(const TimeGrid& other) const = default;

 private:
  double t_final_ = 1.0;
  int steps_ = 1;
};

/// Scalar grid function, one value per cell.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid, double value = 0.0);
  Field(const Grid& grid, std::vector<double> values);

  static Field from_function(const Grid& grid,
                             const std::function<double(const std::array<double, 2>&)>& fn);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool all_finite() const;
  double min() const;
  double max() const;
  std::size_t argmax() const;
  std::size_t argmin() const;
  double mean() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
  /// this += s * other
  Field& axpy(double s, const Field& other);

  bool operator==(const Field& other) const = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);
/// Pointwise product.
Field hadamard(const Field& a, const Field& b);

/// Time-indexed sequence of fields on one grid.
using FieldSeries = std::vector<Field>;

/// Throws ConfigError if the two grids differ.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

/// Discrete Neumann Laplacian: second-order central differences with mirror
/// ghost cells, so the volume-weighted sum of the result is zero.
Field laplacian(const Field& f);

/// Midpoint quadrature over the domain.
double integrate(const Field& f);
/// Volume-weighted inner product.
double inner(const Field& f, const Field& g);
double norm_l2(const Field& f);
double norm_linf(const Field& f);
/// Discrete H1 seminorm from face differences (zero flux at the boundary).
double seminorm_h1(const Field& f);

/// Space-time L2 norm with left-endpoint weights: sqrt(sum_n dt ||f_n||^2).
double norm_l2_spacetime(const FieldSeries& series, double dt);
/// sup_n ||f_n||_{L2}.
double sup_norm_l2(const FieldSeries& series);

// Snapshot I/O: `<stem>.bin` holds little-endian float64 values in
// row-major order, `<stem>.hdr` is a text header. Multiple slices
// (time-indexed data) are concatenated in the same .bin.
struct SnapshotHeader {
  Grid grid;
  std::size_t slices = 1;
};

void write_snapshot(const std::string& stem, const Field& f);
void write_snapshot_series(const std::string& stem, const FieldSeries& series);
SnapshotHeader read_snapshot_header(const std::string& stem);
Field read_snapshot(const std::string& stem);
FieldSeries read_snapshot_series(const std::string& stem);

/// One row per cell: coordinates then value.
void write_csv(std::ostream& os, const Field& f);

}  // namespace gliocontrol
