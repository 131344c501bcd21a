#pragma once

// Scalar or vector samples on a uniform cell-centred grid over [0, L]^dim.
// Cell (i, j) has centre ((i + 1/2) h, (j + 1/2) h) with h = L / n and flat
// index i + n * j.

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace orlicz {

class SampledField {
 public:
  SampledField() = default;
  SampledField(int dim, std::size_t n, double extent, std::size_t components = 1);

  static SampledField from_function(
      int dim, std::size_t n, double extent,
      const std::function<double(std::span<const double>)>& f);

  int dim() const noexcept { return dim_; }
  std::size_t n() const noexcept { return n_; }
  double extent() const noexcept { return extent_; }
  std::size_t components() const noexcept { return components_; }
  std::size_t cells() const noexcept { return cells_; }
  double h() const noexcept { return extent_ / static_cast<double>(n_); }
  double cell_measure() const noexcept;
  double measure() const noexcept;

  /// Scalar access (component 0).
  double& operator[](std::size_t c) { return values_[c * components_]; }
  double operator[](std::size_t c) const { return values_[c * components_]; }
  double& at(std::size_t c, std::size_t k) { return values_[c * components_ + k]; }
  double at(std::size_t c, std::size_t k) const { return values_[c * components_ + k]; }

  std::vector<double>& raw() noexcept { return values_; }
  const std::vector<double>& raw() const noexcept { return values_; }

  std::array<double, 2> centre(std::size_t c) const;
  std::array<std::size_t, 2> index2(std::size_t c) const;
  bool is_boundary_cell(std::size_t c) const;

  /// |value| for scalars, Euclidean norm per cell for vectors.
  std::vector<double> magnitudes() const;
  double max_abs() const;
  /// Sum of |value| * cell_measure.
  double l1_norm() const;

  bool same_grid(const SampledField& other) const;
  /// Throws GridMismatch unless the grids agree.
  void require_same_grid(const SampledField& other) const;

 private:
  int dim_ = 1;
  std::size_t n_ = 0;
  double extent_ = 1.0;
  std::size_t components_ = 1;
  std::size_t cells_ = 0;
  std::vector<double> values_;
};

/// Central differences with odd reflection across the boundary, matching a
/// zero Dirichlet condition on the box faces. Returns a dim-component field.
SampledField discrete_gradient(const SampledField& u);

/// CSV: a `dim,n,extent` header row and its values, a column header, then
/// `index,x[,y],value[,value_y]` per cell.
void write_field_csv(std::ostream& out, const SampledField& f);
SampledField read_field_csv(std::istream& in);

}  // namespace orlicz
