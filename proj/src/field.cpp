#include "orlicz/field.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "orlicz/error.hpp"
#include "orlicz/numerics.hpp"

namespace orlicz {

SampledField::SampledField(int dim, std::size_t n, double extent, std::size_t components)
    : dim_(dim), n_(n), extent_(extent), components_(components) {
  if (dim != 1 && dim != 2) {
    throw Error(ErrorKind::InvalidArgument, "field dimension must be 1 or 2");
  }
  if (n < 1 || !(extent > 0.0) || components < 1) {
    throw Error(ErrorKind::InvalidArgument, "field needs n >= 1, extent > 0");
  }
  cells_ = dim == 1 ? n : n * n;
  values_.assign(cells_ * components_, 0.0);
}

SampledField SampledField::from_function(
    int dim, std::size_t n, double extent,
    const std::function<double(std::span<const double>)>& f) {
  SampledField out(dim, n, extent);
  for (std::size_t c = 0; c < out.cells(); ++c) {
    const auto x = out.centre(c);
    out[c] = f(std::span<const double>(x.data(), static_cast<std::size_t>(dim)));
  }
  return out;
}

double SampledField::cell_measure() const noexcept {
  const double hh = h();
  return dim_ == 1 ? hh : hh * hh;
}

double SampledField::measure() const noexcept {
  return dim_ == 1 ? extent_ : extent_ * extent_;
}

std::array<double, 2> SampledField::centre(std::size_t c) const {
  const auto [i, j] = index2(c);
  const double hh = h();
  return {(static_cast<double>(i) + 0.5) * hh,
          dim_ == 2 ? (static_cast<double>(j) + 0.5) * hh : 0.0};
}

std::array<std::size_t, 2> SampledField::index2(std::size_t c) const {
  return dim_ == 1 ? std::array<std::size_t, 2>{c, 0}
                   : std::array<std::size_t, 2>{c % n_, c / n_};
}

bool SampledField::is_boundary_cell(std::size_t c) const {
  const auto [i, j] = index2(c);
  if (i == 0 || i + 1 == n_) return true;
  return dim_ == 2 && (j == 0 || j + 1 == n_);
}

std::vector<double> SampledField::magnitudes() const {
  std::vector<double> out(cells_);
  for (std::size_t c = 0; c < cells_; ++c) {
    if (components_ == 1) {
      out[c] = std::abs(values_[c]);
    } else {
      double s = 0.0;
      for (std::size_t k = 0; k < components_; ++k) s += at(c, k) * at(c, k);
      out[c] = std::sqrt(s);
    }
  }
  return out;
}

double SampledField::max_abs() const {
  double m = 0.0;
  for (double v : magnitudes()) m = std::max(m, v);
  return m;
}

double SampledField::l1_norm() const {
  numerics::CompensatedSum acc;
  for (double v : magnitudes()) acc.add(v);
  return acc.value() * cell_measure();
}

bool SampledField::same_grid(const SampledField& other) const {
  return dim_ == other.dim_ && n_ == other.n_ && extent_ == other.extent_;
}

void SampledField::require_same_grid(const SampledField& other) const {
  if (!same_grid(other)) {
    throw Error(ErrorKind::GridMismatch, "fields live on different grids");
  }
}

SampledField discrete_gradient(const SampledField& u) {
  if (u.components() != 1) {
    throw Error(ErrorKind::InvalidArgument, "gradient of a vector field");
  }
  const std::size_t n = u.n();
  const int dim = u.dim();
  SampledField g(dim, n, u.extent(), static_cast<std::size_t>(dim));
  const double inv2h = 0.5 / u.h();
  auto value = [&](long i, long j) {
    // Odd reflection: the ghost value mirrors the boundary cell with flipped sign.
    const long nn = static_cast<long>(n);
    double sign = 1.0;
    if (i < 0) { i = 0; sign = -sign; }
    if (i >= nn) { i = nn - 1; sign = -sign; }
    if (j < 0) { j = 0; sign = -sign; }
    if (j >= nn) { j = nn - 1; sign = -sign; }
    return sign * u[static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * n];
  };
  for (std::size_t c = 0; c < u.cells(); ++c) {
    const auto [ii, jj] = u.index2(c);
    const long i = static_cast<long>(ii);
    const long j = static_cast<long>(jj);
    if (dim == 1) {
      g.at(c, 0) = (value(i + 1, 0) - value(i - 1, 0)) * inv2h;
    } else {
      g.at(c, 0) = (value(i + 1, j) - value(i - 1, j)) * inv2h;
      g.at(c, 1) = (value(i, j + 1) - value(i, j - 1)) * inv2h;
    }
  }
  return g;
}

void write_field_csv(std::ostream& out, const SampledField& f) {
  out.precision(17);
  out << "dim,n,extent\n" << f.dim() << ',' << f.n() << ',' << f.extent() << '\n';
  out << "index,x";
  if (f.dim() == 2) out << ",y";
  out << ",value";
  if (f.components() == 2) out << ",value_y";
  out << '\n';
  for (std::size_t c = 0; c < f.cells(); ++c) {
    const auto x = f.centre(c);
    out << c << ',' << x[0];
    if (f.dim() == 2) out << ',' << x[1];
    for (std::size_t k = 0; k < f.components(); ++k) out << ',' << f.at(c, k);
    out << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) cells.push_back(item);
  return cells;
}

double parse_number(const std::string& s, std::size_t line, std::size_t column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() && s.find_first_not_of(" \t\r", used) != std::string::npos) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " +
                                           std::to_string(column) + ": bad number '" +
                                           s + "'");
  }
}

}  // namespace

SampledField read_field_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next() || line.rfind("dim", 0) != 0) {
    throw Error(ErrorKind::ParseError, "line 1: expected header 'dim,n,extent'");
  }
  if (!next()) throw Error(ErrorKind::ParseError, "missing grid row");
  const auto head = split_csv(line);
  if (head.size() != 3) {
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(lineno) + ": expected 3 grid values");
  }
  const int dim = static_cast<int>(parse_number(head[0], lineno, 1));
  const auto n = static_cast<std::size_t>(parse_number(head[1], lineno, 2));
  const double extent = parse_number(head[2], lineno, 3);
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  while (next()) {
    if (line.rfind("index", 0) == 0) continue;
    const auto cells = split_csv(line);
    const std::size_t expected_min = static_cast<std::size_t>(dim) + 2;
    if (cells.size() < expected_min || cells.size() > expected_min + 1 ||
        (width != 0 && cells.size() != width)) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) +
                                             ": unexpected column count " +
                                             std::to_string(cells.size()));
    }
    width = cells.size();
    std::vector<double> row;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      row.push_back(parse_number(cells[k], lineno, k + 1));
    }
    rows.push_back(std::move(row));
  }
  const std::size_t components = width == static_cast<std::size_t>(dim) + 3 ? 2 : 1;
  SampledField f(dim, n, extent, components);
  if (rows.size() != f.cells()) {
    throw Error(ErrorKind::GridMismatch, "expected " + std::to_string(f.cells()) +
                                             " rows, found " + std::to_string(rows.size()));
  }
  for (const auto& row : rows) {
    const auto c = static_cast<std::size_t>(row[0]);
    if (c >= f.cells()) throw Error(ErrorKind::ParseError, "cell index out of range");
    for (std::size_t k = 0; k < components; ++k) {
      f.at(c, k) = row[static_cast<std::size_t>(dim) + 1 + k];
    }
  }
  return f;
}

}  // namespace orlicz
