#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "levelset/error.hpp"

namespace lsk {

enum class Boundary { ZeroGradient, Periodic };

// Axis-aligned box; only the first dim entries matter.
struct Box {
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{1.0, 1.0, 1.0};
};

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Uniform cell-centred grid with ghost layers on the active axes.
// Storage is x-fastest; inactive axes have one cell and no ghosts.
class Grid {
 public:
  Grid() = default;

  Grid(int dim, std::array<int, 3> cells, const Box& box,
       std::array<Boundary, 3> bc = {}, int ghost_width = 2)
      : dim_(dim), bc_(bc) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid: dim must be 1, 2 or 3");
    if (ghost_width < 2) throw std::invalid_argument("grid: ghost_width must be >= 2");
    std::size_t stride = 1;
    for (int a = 0; a < 3; ++a) {
      const bool active = a < dim;
      if (active) {
        if (cells[a] < 8)
          throw std::invalid_argument("grid: need at least 8 cells on axis " + std::to_string(a));
        if (!(box.hi[a] > box.lo[a]))
          throw std::invalid_argument("grid: non-positive extent on axis " + std::to_string(a));
        if (bc[a] == Boundary::Periodic && cells[a] < ghost_width)
          throw std::invalid_argument("grid: periodic axis shorter than ghost width");
      }
      n_[a] = active ? cells[a] : 1;
      g_[a] = active ? ghost_width : 0;
      lo_[a] = active ? box.lo[a] : 0.0;
      dx_[a] = active ? (box.hi[a] - box.lo[a]) / n_[a] : 1.0;
      stride_[a] = stride;
      stride *= static_cast<std::size_t>(n_[a] + 2 * g_[a]);
    }
    size_ = stride;
    offset_ = g_[0] * stride_[0] + g_[1] * stride_[1] + g_[2] * stride_[2];
  }

  int dim() const { return dim_; }
  int cells(int axis) const { return n_[axis]; }
  int ghost(int axis) const { return g_[axis]; }
  double spacing(int axis) const { return dx_[axis]; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return lo_[axis] + n_[axis] * dx_[axis]; }
  Boundary boundary(int axis) const { return bc_[axis]; }
  std::ptrdiff_t stride(int axis) const { return static_cast<std::ptrdiff_t>(stride_[axis]); }

  std::size_t storage_size() const { return size_; }
  std::size_t interior_count() const {
    return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];
  }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= dx_[a];
    return v;
  }

  // Interior coordinates; negative or >= cells reach into the ghosts.
  std::size_t index(int i, int j = 0, int k = 0) const {
    return offset_ + static_cast<std::ptrdiff_t>(i) * stride_[0] +
           static_cast<std::ptrdiff_t>(j) * stride_[1] +
           static_cast<std::ptrdiff_t>(k) * stride_[2];
  }

  double center(int axis, int i) const { return lo_[axis] + (i + 0.5) * dx_[axis]; }
  std::array<double, 3> center(int i, int j, int k) const {
    return {center(0, i), dim_ > 1 ? center(1, j) : 0.0, dim_ > 2 ? center(2, k) : 0.0};
  }

  // f(i, j, k, idx) over interior cells, x fastest.
  template <class F>
  void for_each_cell(F&& f) const {
    for (int k = 0; k < n_[2]; ++k)
      for (int j = 0; j < n_[1]; ++j) {
        std::size_t idx = index(0, j, k);
        for (int i = 0; i < n_[0]; ++i, ++idx) f(i, j, k, idx);
      }
  }

  bool operator==(const Grid&) const = default;

 private:
  int dim_ = 1;
  std::array<Boundary, 3> bc_{};
  std::array<int, 3> n_{1, 1, 1};
  std::array<int, 3> g_{0, 0, 0};
  std::array<double, 3> lo_{0.0, 0.0, 0.0};
  std::array<double, 3> dx_{1.0, 1.0, 1.0};
  std::array<std::size_t, 3> stride_{1, 1, 1};
  std::size_t size_ = 1;
  std::size_t offset_ = 0;
};

inline Grid build_grid(int dim, int cells_per_axis, const Box& box = {}, int ghost_width = 2,
                       std::array<Boundary, 3> bc = {}) {
  return Grid(dim, {cells_per_axis, cells_per_axis, cells_per_axis}, box, bc, ghost_width);
}

// Grid level m_i: 2^(4+i) cells per unit length.
inline int cells_for_level(double level) {
  return static_cast<int>(std::lround(std::pow(2.0, 4.0 + level)));
}

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& grid, double value = 0.0)
      : grid_(grid), v_(grid.storage_size(), value) {}

  const Grid& grid() const { return grid_; }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  double& operator[](std::size_t idx) { return v_[idx]; }
  double operator[](std::size_t idx) const { return v_[idx]; }
  double& operator()(int i, int j = 0, int k = 0) { return v_[grid_.index(i, j, k)]; }
  double operator()(int i, int j = 0, int k = 0) const { return v_[grid_.index(i, j, k)]; }

  // Sets interior cells from f(x, y, z).
  template <class F>
  void assign(F&& f) {
    grid_.for_each_cell([&](int i, int j, int k, std::size_t idx) {
      const auto x = grid_.center(i, j, k);
      v_[idx] = f(x[0], x[1], x[2]);
    });
  }

 private:
  Grid grid_;
  std::vector<double> v_;
};

class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const Grid& grid, double value = 0.0) : grid_(grid) {
    comp_.reserve(grid.dim());
    for (int a = 0; a < grid.dim(); ++a) comp_.emplace_back(grid, value);
  }

  const Grid& grid() const { return grid_; }
  int size() const { return static_cast<int>(comp_.size()); }
  ScalarField& operator[](int axis) { return comp_[axis]; }
  const ScalarField& operator[](int axis) const { return comp_[axis]; }

 private:
  Grid grid_;
  std::vector<ScalarField> comp_;
};

namespace detail {

inline void fill_axis(std::vector<double>& v, const Grid& g, int axis, bool periodic) {
  const int n = g.cells(axis);
  const int ng = g.ghost(axis);
  if (ng == 0) return;
  const std::ptrdiff_t s = g.stride(axis);
  const int b1 = (axis + 1) % 3, b2 = (axis + 2) % 3;
  for (int q = -g.ghost(b2); q < g.cells(b2) + g.ghost(b2); ++q)
    for (int p = -g.ghost(b1); p < g.cells(b1) + g.ghost(b1); ++p) {
      std::array<int, 3> c{};
      c[b1] = p;
      c[b2] = q;
      const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(g.index(c[0], c[1], c[2]));
      for (int l = 1; l <= ng; ++l) {
        if (periodic) {
          v[base - l * s] = v[base + (n - l) * s];
          v[base + (n - 1 + l) * s] = v[base + (l - 1) * s];
        } else {
          v[base - l * s] = v[base];
          v[base + (n - 1 + l) * s] = v[base + (n - 1) * s];
        }
      }
    }
}

}  // namespace detail

// Fills ghosts per the grid's boundary kinds, axis by axis so corners are covered.
inline void fill_ghosts(ScalarField& f) {
  const Grid& g = f.grid();
  for (int a = 0; a < g.dim(); ++a)
    detail::fill_axis(f.values(), g, a, g.boundary(a) == Boundary::Periodic);
}

inline void fill_ghosts(VectorField& f) {
  for (int a = 0; a < f.size(); ++a) fill_ghosts(f[a]);
}

// Zero-gradient fill on every axis, whatever the grid says.
inline ScalarField fill_neumann_ghosts(ScalarField f) {
  const Grid& g = f.grid();
  for (int a = 0; a < g.dim(); ++a) detail::fill_axis(f.values(), g, a, false);
  return f;
}

inline double integrate_field(const ScalarField& f) {
  CompensatedSum s;
  f.grid().for_each_cell([&](int, int, int, std::size_t idx) { s.add(f[idx]); });
  return s.value() * f.grid().cell_volume();
}

inline bool all_finite(const ScalarField& f) {
  bool ok = true;
  f.grid().for_each_cell([&](int, int, int, std::size_t idx) { ok = ok && std::isfinite(f[idx]); });
  return ok;
}

inline void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace lsk
