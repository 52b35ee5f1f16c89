#include <cmath>
#include <limits>
#include <vector>

#include "viscon/kernels.hpp"
#include "viscon/plan_grid.hpp"

namespace viscon {
namespace {

// Lower envelope of parabolas (x - q)^2 + f[q]; writes the squared distance into d.
void envelope_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                 std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  const double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < n; ++q) {
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dx = double(q) - v[k];
    d[q] = dx * dx + f[v[k]];
  }
}

}  // namespace

AnalysisField signed_distance_field(const OccupancyGrid& grid) {
  const auto& k = kernels::active();
  // Padded raster with a blocked one-cell ring.
  const int pw = grid.width() + 2;
  const int ph = grid.height() + 2;
  const auto pwz = static_cast<std::size_t>(pw);
  std::vector<std::uint8_t> blocked(pwz * ph, 1);
  for (int y = 0; y < grid.height(); ++y)
    for (int x = 0; x < grid.width(); ++x)
      blocked[(y + 1) * pwz + (x + 1)] = grid.is_free(Cell{x, y}) ? 0 : 1;

  // Column pass: vertical distance to the nearest blocked cell, row-vectorised.
  std::vector<std::int32_t> col(pwz * ph, 0);
  for (int y = 1; y < ph; ++y)
    k.sweep_down(&col[(y - 1) * pwz], &blocked[y * pwz], &col[y * pwz], pwz);
  for (int y = ph - 2; y >= 0; --y) k.sweep_up_min(&col[(y + 1) * pwz], &col[y * pwz], pwz);

  AnalysisField field(grid, FieldKind::Sdf);
  std::vector<double> f(pwz), d(pwz), z(pwz + 1);
  std::vector<int> v(pwz);
  for (int y = 1; y < ph - 1; ++y) {
    for (int x = 0; x < pw; ++x) {
      const double g = col[y * pwz + x];
      f[x] = g * g;
    }
    envelope_1d(f, d, v, z);
    for (int x = 1; x < pw - 1; ++x) {
      const CellIndex i = grid.index(Cell{x - 1, y - 1});
      field.values[i] = field.defined[i] ? std::sqrt(d[x]) * grid.cell_size() : 0.0;
    }
  }
  return field;
}

}  // namespace viscon
