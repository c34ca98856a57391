#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace optdiff {

enum class GridKind { Uniform, Custom };

// Strictly increasing abscissae, at least three of them.
class Grid {
 public:
  static Grid uniform(double lo, double hi, std::size_t n);
  // n cell centres of a uniform partition of [lo, hi]: lo + (i + 1/2) h.
  static Grid cell_centered(double lo, double hi, std::size_t n);
  static Grid custom(std::vector<double> points);

  GridKind kind() const { return kind_; }
  std::size_t size() const { return points_.size(); }
  std::span<const double> points() const { return points_; }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }

  // Spacing of a uniform grid; throws InvalidArgument for custom grids.
  double spacing() const;

  // Index i with points[i] <= x < points[i+1], clamped to [0, size-2].
  std::size_t segment(double x) const;

 private:
  Grid(std::vector<double> points, GridKind kind);

  std::vector<double> points_;
  GridKind kind_;
};

class GridFunction {
 public:
  GridFunction(Grid grid, std::vector<double> values);

  static GridFunction tabulate(const Grid& grid, const std::function<double(double)>& f);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  // Piecewise-linear interpolation; constant extrapolation outside the grid.
  double interpolate(double x) const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

}  // namespace optdiff
