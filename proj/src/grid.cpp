#include "optdiff/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "optdiff/errors.hpp"
#include "optdiff/kernels.hpp"

namespace optdiff {

Grid::Grid(std::vector<double> points, GridKind kind) : points_(std::move(points)), kind_(kind) {
  if (points_.size() < 3) fail(ErrorCode::InvalidArgument, "grid needs at least 3 points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) fail(ErrorCode::InvalidArgument, "grid point is not finite");
    if (i > 0 && !(points_[i] > points_[i - 1]))
      fail(ErrorCode::InvalidArgument, "grid points must be strictly increasing");
  }
  if (kind_ == GridKind::Uniform) {
    // 1 part in 1e12, plus the rounding of the abscissae themselves.
    const double h = (points_.back() - points_.front()) / static_cast<double>(points_.size() - 1);
    const double scale = std::max(std::abs(points_.front()), std::abs(points_.back()));
    const double tol = 1e-12 * h + 4.0 * std::numeric_limits<double>::epsilon() * scale;
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (std::abs((points_[i] - points_[i - 1]) - h) > tol)
        fail(ErrorCode::InvalidArgument, "uniform grid spacing is not constant");
    }
  }
}

Grid Grid::uniform(double lo, double hi, std::size_t n) {
  if (!(lo < hi)) fail(ErrorCode::InvalidInterval, "uniform grid needs lo < hi");
  if (n < 3) fail(ErrorCode::InvalidArgument, "grid needs at least 3 points");
  std::vector<double> pts(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) pts[i] = lo + h * static_cast<double>(i);
  pts.back() = hi;
  return Grid(std::move(pts), GridKind::Uniform);
}

Grid Grid::cell_centered(double lo, double hi, std::size_t n) {
  if (!(lo < hi)) fail(ErrorCode::InvalidInterval, "cell-centred grid needs lo < hi");
  if (n < 3) fail(ErrorCode::InvalidArgument, "grid needs at least 3 points");
  std::vector<double> pts(n);
  const double h = (hi - lo) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = lo + h * (static_cast<double>(i) + 0.5);
  return Grid(std::move(pts), GridKind::Uniform);
}

Grid Grid::custom(std::vector<double> points) { return Grid(std::move(points), GridKind::Custom); }

double Grid::spacing() const {
  if (kind_ != GridKind::Uniform) fail(ErrorCode::InvalidArgument, "spacing() needs a uniform grid");
  return (points_.back() - points_.front()) / static_cast<double>(points_.size() - 1);
}

std::size_t Grid::segment(double x) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), x);
  std::size_t idx = it == points_.begin() ? 0 : static_cast<std::size_t>(it - points_.begin()) - 1;
  return std::min(idx, points_.size() - 2);
}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    fail(ErrorCode::InvalidArgument, "grid function length does not match its grid");
  for (double v : values_)
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "grid function value is not finite");
}

GridFunction GridFunction::tabulate(const Grid& grid, const std::function<double(double)>& f) {
  return GridFunction(grid, kernels::parallel::tabulate(f, grid.points()));
}

double GridFunction::interpolate(double x) const {
  if (x <= grid_.front()) return values_.front();
  if (x >= grid_.back()) return values_.back();
  const std::size_t i = grid_.segment(x);
  const double t = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
  return values_[i] + t * (values_[i + 1] - values_[i]);
}

}  // namespace optdiff
