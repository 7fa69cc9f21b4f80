#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "nakano/grid.hpp"

namespace nakano::testing {

/// Deterministic uniform doubles independent of the standard library's
/// distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  int integer(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

private:
  std::mt19937_64 engine_;
};

inline GridSpec box(std::vector<double> mins, std::vector<double> maxs,
                    std::vector<std::size_t> points, std::size_t rank = 1) {
  return GridSpec(std::move(mins), std::move(maxs), std::move(points), rank);
}

inline GridSpec square(double lo, double hi, std::size_t pts, std::size_t rank = 1) {
  return box({lo, lo}, {hi, hi}, {pts, pts}, rank);
}

using ScalarFn = std::function<double(std::span<const double>)>;
using VectorFn = std::function<Eigen::VectorXd(std::span<const double>)>;
using MatrixFn = std::function<Eigen::MatrixXd(std::span<const double>)>;

inline ScalarField scalar_from(const GridSpec& grid, const ScalarFn& fn) {
  std::vector<double> v(grid.node_count());
  for (std::size_t flat = 0; flat < v.size(); ++flat) v[flat] = fn(grid.node_coords(flat));
  return ScalarField(grid, std::move(v));
}

inline SectionField section_from(const GridSpec& grid, const VectorFn& fn) {
  const std::size_t r = grid.rank();
  std::vector<double> v(grid.node_count() * r);
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    Eigen::VectorXd val = fn(grid.node_coords(flat));
    for (std::size_t c = 0; c < r; ++c) v[flat * r + c] = val(static_cast<Eigen::Index>(c));
  }
  return SectionField(grid, std::move(v));
}

inline MatrixField matrix_from(const GridSpec& grid, const MatrixFn& fn) {
  const std::size_t r = grid.rank();
  std::vector<double> v(grid.node_count() * r * r);
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    Eigen::MatrixXd val = fn(grid.node_coords(flat));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        v[(flat * r + i) * r + j] =
            val(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return MatrixField(grid, std::move(v));
}

inline OneForm oneform_from(const GridSpec& grid, const std::vector<VectorFn>& comps) {
  std::vector<SectionField> sections;
  sections.reserve(comps.size());
  for (const auto& fn : comps) sections.push_back(section_from(grid, fn));
  return OneForm(grid, std::move(sections));
}

/// Max-abs difference against a reference function, restricted to nodes at
/// least `collar` away from every boundary.
inline double interior_max_error(const ScalarField& f, const ScalarFn& ref,
                                 std::size_t collar) {
  double err = 0.0;
  for (std::size_t flat = 0; flat < f.grid().node_count(); ++flat) {
    if (f.grid().in_collar(flat, collar)) continue;
    err = std::max(err, std::abs(f[flat] - ref(f.grid().node_coords(flat))));
  }
  return err;
}

}  // namespace nakano::testing
